#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "astro/degrade.hpp"
#include "astro/image.hpp"
#include "astro/patch_pair.hpp"
#include "astro/psf.hpp"

namespace astro {

struct DatasetSpec {
  int n_train = 100000;
  int n_val = 50000;
  uint64_t seed = 0;
  std::optional<int> excluded_image;  // leave-one-out target, by corpus index
};

struct Dataset {
  std::vector<PatchPair> train;
  std::vector<PatchPair> val;
};

// Degrades each corpus image once (per-image derived noise seed), then draws
// patch positions uniformly with replacement, round-robin across the images;
// train and validation use disjoint RNG streams over the same images.
Dataset build_dataset(const std::vector<Image>& corpus, const Psf& psf, const NoiseSpec& noise,
                      const DatasetSpec& spec);

// Flat cache: one file holding both splits, IMF1 blocks behind an index.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace astro
