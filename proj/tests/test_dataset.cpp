#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <astro/dataset.hpp>
#include <doctest.h>

#include "test_util.hpp"

using namespace astro;
using astro::testutil::random_image;
using astro::testutil::TempDir;

namespace {

Psf delta_psf() {
  Psf p;
  p.kernel = Image(5, 5, 0.0f);
  p.kernel.at(2, 2) = 1.0f;
  p.support = 5;
  return p;
}

std::vector<Image> small_corpus(int n, int h = 48, int w = 48) {
  std::vector<Image> corpus;
  for (int i = 0; i < n; ++i) corpus.push_back(random_image(h, w, 9000 + i));
  return corpus;
}

DatasetSpec spec_of(int n_train, int n_val, uint64_t seed) {
  DatasetSpec s;
  s.n_train = n_train;
  s.n_val = n_val;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("samples have the contracted geometry and provenance") {
  auto corpus = small_corpus(3);
  Psf psf = airy_kernel(16, 4.0);
  Dataset ds = build_dataset(corpus, psf, NoiseSpec{0.01, 0}, spec_of(31, 10, 5));

  REQUIRE(ds.train.size() == 31);
  REQUIRE(ds.val.size() == 10);
  for (size_t s = 0; s < ds.train.size(); ++s) {
    const PatchPair& p = ds.train[s];
    CHECK(p.input.height == 32);
    CHECK(p.input.width == 32);
    CHECK(p.target.height == 14);
    CHECK(p.target.width == 14);
    CHECK(p.source_id == static_cast<int>(s % 3));  // round-robin
    CHECK(p.top >= 0);
    CHECK(p.top <= 48 - 32);
    CHECK(p.left >= 0);
    CHECK(p.left <= 48 - 32);

    // centering invariant: the target is the clean image under the window
    Image want = extract_patch(corpus[p.source_id], p.top + 9, p.left + 9, 14, 14);
    CHECK(p.target.data == want.data);
  }
}

TEST_CASE("noiseless delta-PSF samples copy the degraded center exactly") {
  auto corpus = small_corpus(2);
  Dataset ds = build_dataset(corpus, delta_psf(), NoiseSpec{0.0, 0}, spec_of(8, 2, 3));
  for (const auto& p : ds.train) {
    Image center = extract_patch(p.input, 9, 9, 14, 14);
    for (size_t i = 0; i < center.data.size(); ++i) {
      // degraded == clean up to FFT round-off
      CHECK(std::abs(static_cast<double>(center.data[i]) - static_cast<double>(p.target.data[i])) <= 1e-5);
    }
  }
}

TEST_CASE("the same image is degraded once, not per patch") {
  auto corpus = small_corpus(1, 40, 40);
  Dataset ds = build_dataset(corpus, delta_psf(), NoiseSpec{0.05, 0}, spec_of(60, 2, 11));
  // overlapping windows must agree wherever they cover the same pixel
  const PatchPair& a = ds.train[0];
  int checked = 0;
  for (size_t s = 1; s < ds.train.size(); ++s) {
    const PatchPair& b = ds.train[s];
    int r0 = std::max(a.top, b.top), r1 = std::min(a.top + 32, b.top + 32);
    int c0 = std::max(a.left, b.left), c1 = std::min(a.left + 32, b.left + 32);
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) {
        CHECK(a.input.at(r - a.top, c - a.left) == b.input.at(r - b.top, c - b.left));
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("datasets are seed-deterministic") {
  auto corpus = small_corpus(2);
  Psf psf = airy_kernel(16, 4.0);
  Dataset a = build_dataset(corpus, psf, NoiseSpec{0.01, 0}, spec_of(12, 6, 21));
  Dataset b = build_dataset(corpus, psf, NoiseSpec{0.01, 0}, spec_of(12, 6, 21));
  REQUIRE(a.train.size() == b.train.size());
  for (size_t s = 0; s < a.train.size(); ++s) {
    CHECK(a.train[s].top == b.train[s].top);
    CHECK(a.train[s].left == b.train[s].left);
    CHECK(a.train[s].input.data == b.train[s].input.data);
    CHECK(a.train[s].target.data == b.train[s].target.data);
  }

  Dataset c = build_dataset(corpus, psf, NoiseSpec{0.01, 0}, spec_of(12, 6, 22));
  bool differs = false;
  for (size_t s = 0; s < a.train.size(); ++s) {
    differs |= (a.train[s].top != c.train[s].top) || (a.train[s].left != c.train[s].left);
  }
  CHECK(differs);

  // train and validation draw from independent streams
  bool same_positions = true;
  for (size_t s = 0; s < a.val.size() && s < a.train.size(); ++s) {
    same_positions &= (a.train[s].top == a.val[s].top) && (a.train[s].left == a.val[s].left);
  }
  CHECK_FALSE(same_positions);
}

TEST_CASE("excluding an image never shifts the other images' draws") {
  auto corpus = small_corpus(3);
  Psf psf = airy_kernel(16, 4.0);
  Dataset full = build_dataset(corpus, psf, NoiseSpec{0.01, 0}, spec_of(30, 6, 77));
  DatasetSpec s = spec_of(30, 6, 77);
  s.excluded_image = 1;
  Dataset loo = build_dataset(corpus, psf, NoiseSpec{0.01, 0}, s);

  for (const auto& p : loo.train) CHECK(p.source_id != 1);

  auto per_image_positions = [](const std::vector<PatchPair>& split) {
    std::map<int, std::vector<std::pair<int, int>>> seq;
    for (const auto& p : split) seq[p.source_id].push_back({p.top, p.left});
    return seq;
  };
  auto sf = per_image_positions(full.train);
  auto sl = per_image_positions(loo.train);
  for (int id : {0, 2}) {
    size_t common = std::min(sf[id].size(), sl[id].size());
    REQUIRE(common > 0);
    for (size_t i = 0; i < common; ++i) CHECK(sf[id][i] == sl[id][i]);
  }
}

TEST_CASE("patch positions are uniform over the valid grid") {
  // 40x40 image: 9x9 = 81 valid positions; chi-square on the train stream
  auto corpus = small_corpus(1, 40, 40);
  const int cells = 81;
  const int n = 16200;  // 200 expected per cell
  Dataset ds = build_dataset(corpus, delta_psf(), NoiseSpec{0.0, 0}, spec_of(n, 1, 123));

  std::vector<int> counts(cells, 0);
  for (const auto& p : ds.train) {
    REQUIRE(p.top < 9);
    REQUIRE(p.left < 9);
    ++counts[p.top * 9 + p.left];
  }
  double expected = static_cast<double>(n) / cells;
  double chi2 = 0.0;
  for (int c : counts) {
    double d = c - expected;
    chi2 += d * d / expected;
  }
  // 99th percentile of chi-square with 80 dof
  CHECK(chi2 < 112.33);
}

TEST_CASE("dataset cache round-trips bit-exactly") {
  TempDir dir;
  auto corpus = small_corpus(2);
  Dataset ds = build_dataset(corpus, airy_kernel(16, 4.0), NoiseSpec{0.01, 0}, spec_of(9, 4, 8));
  std::string path = dir.file("cache.dsc1");
  save_dataset(ds, path);
  Dataset r = load_dataset(path);

  REQUIRE(r.train.size() == ds.train.size());
  REQUIRE(r.val.size() == ds.val.size());
  for (size_t s = 0; s < ds.train.size(); ++s) {
    CHECK(r.train[s].source_id == ds.train[s].source_id);
    CHECK(r.train[s].top == ds.train[s].top);
    CHECK(r.train[s].left == ds.train[s].left);
    CHECK(r.train[s].input.data == ds.train[s].input.data);
    CHECK(r.train[s].target.data == ds.train[s].target.data);
  }
  for (size_t s = 0; s < ds.val.size(); ++s) {
    CHECK(r.val[s].input.data == ds.val[s].input.data);
    CHECK(r.val[s].target.data == ds.val[s].target.data);
  }
}

TEST_CASE("dataset cache rejects malformed files") {
  TempDir dir;
  auto corpus = small_corpus(1);
  Dataset ds = build_dataset(corpus, delta_psf(), NoiseSpec{0.0, 0}, spec_of(3, 1, 4));
  std::string path = dir.file("cache.dsc1");
  save_dataset(ds, path);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  SUBCASE("payload truncation") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 20));
    out.close();
    CHECK_THROWS_AS(load_dataset(path), std::runtime_error);
  }

  SUBCASE("bad header") {
    bytes[0] = 'X';
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("header"), std::runtime_error);
  }

  SUBCASE("trailing data") {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out << "junk";
    out.close();
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("trailing"), std::runtime_error);
  }
}

TEST_CASE("invalid dataset requests are rejected") {
  auto corpus = small_corpus(2);
  Psf psf = delta_psf();
  CHECK_THROWS_AS(build_dataset(corpus, psf, NoiseSpec{}, spec_of(0, 5, 0)), std::invalid_argument);
  CHECK_THROWS_AS(build_dataset(corpus, psf, NoiseSpec{}, spec_of(5, 0, 0)), std::invalid_argument);

  std::vector<Image> tiny = {random_image(20, 48, 1)};
  CHECK_THROWS_WITH_AS(build_dataset(tiny, psf, NoiseSpec{}, spec_of(4, 2, 0)),
                       doctest::Contains("20x48"), std::invalid_argument);

  std::vector<Image> one = {random_image(48, 48, 2)};
  DatasetSpec s = spec_of(4, 2, 0);
  s.excluded_image = 0;
  CHECK_THROWS_WITH_AS(build_dataset(one, psf, NoiseSpec{}, s),
                       doctest::Contains("exclusion"), std::invalid_argument);
}
