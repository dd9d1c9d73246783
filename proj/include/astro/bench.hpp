#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "astro/cnn.hpp"
#include "astro/image.hpp"
#include "astro/psf.hpp"

namespace astro {

struct BenchRow {
  int image_id = 0;
  std::string method;
  double psnr_db = 0.0;
  double wall_time_s = 0.0;
  std::string params;
};

struct MethodAggregate {
  std::string method;
  double mean_psnr_db = 0.0;
  double mean_time_s = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

// Recomputed from rows, in first-appearance method order.
std::vector<MethodAggregate> aggregate(const BenchReport& report);

struct BenchConfig {
  std::vector<std::string> methods{"none", "wiener", "rl", "tv", "cnn1", "cnn3"};
  double sigma = 0.01;
  uint64_t seed = 0;
  int n_train = 100000;
  int n_val = 50000;
  TrainConfig train;   // seed field is ignored; per-image seeds derive from `seed`
  bool verbose = true;  // progress lines on stderr
};

// Table-1-shaped run: per image, degrade with a per-image seed, autotune and
// time each classical method, train leave-one-out CNNs, and record PSNR plus
// the wall time of the reconstruction call only.
BenchReport run_benchmark(const std::vector<Image>& corpus, const Psf& psf,
                          const BenchConfig& cfg);

// Data rows only; aggregates are recomputed after parsing.
void write_csv(const BenchReport& report, const std::string& path);
BenchReport read_csv(const std::string& path);

}  // namespace astro
