#include <cmath>
#include <set>
#include <vector>

#include <astro/rng.hpp>
#include <astro/synth.hpp>
#include <doctest.h>

using namespace astro;

TEST_CASE("uniform draws live in [0,1) with the right first moments") {
  Rng rng(1);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(static_cast<double>(mean) - static_cast<double>(0.5)) <= 0.005);
  CHECK(std::abs(static_cast<double>(var) - static_cast<double>(1.0 / 12)) <= 0.005);
}

TEST_CASE("gaussian draws have standard-normal moments") {
  Rng rng(2);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian();
    m1 += g;
    m2 += g * g;
    m3 += g * g * g;
    m4 += g * g * g * g;
  }
  m1 /= n;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  CHECK(std::abs(static_cast<double>(m1) - static_cast<double>(0.0)) <= 0.02);
  CHECK(std::abs(static_cast<double>(m2) - static_cast<double>(1.0)) <= 0.03);
  CHECK(std::abs(static_cast<double>(m3) - static_cast<double>(0.0)) <= 0.06);
  CHECK(std::abs(static_cast<double>(m4) - static_cast<double>(3.0)) <= 0.15);
}

TEST_CASE("below is bounded, unbiased, and total for small n") {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int c : counts) {
    CHECK(c > 9500);
    CHECK(c < 10500);
  }
  CHECK(rng.below(0) == 0);
  CHECK(rng.below(1) == 0);
}

TEST_CASE("seeded streams replay and diverge as expected") {
  Rng a(42), b(42), c(43);
  bool all_same = true, any_same = false;
  for (int i = 0; i < 100; ++i) {
    uint64_t va = a.raw(), vb = b.raw(), vc = c.raw();
    all_same &= va == vb;
    any_same |= va == vc;
  }
  CHECK(all_same);
  CHECK_FALSE(any_same);
}

TEST_CASE("derive_seed is a stable, salt-sensitive mixer") {
  // fixed values lock the stream layout: cached datasets and saved models
  // stay replayable across releases
  CHECK(derive_seed(0, 0) == 0xE220A8397B1DCDAFULL);
  CHECK(derive_seed(42, 1) != derive_seed(42, 2));
  CHECK(derive_seed(42, 1) != derive_seed(43, 1));
  CHECK(derive_seed(0, 5) == derive_seed(0, 5));
}

TEST_CASE("synthetic images are normalized, finite, and structured") {
  Image img = synth_image(7, 128);
  CHECK(img.height == 128);
  CHECK(img.width == 128);
  CHECK(all_finite(img));
  CHECK(image_min(img) >= 0.0f);
  CHECK(image_max(img) == doctest::Approx(1.0).epsilon(1e-6));

  // not a constant field: point sources and gradients create real dynamic range
  double mean = image_sum(img) / img.pixel_count();
  CHECK(mean > 0.001);
  CHECK(mean < 0.9);
  int bright = 0;
  for (float v : img.data) bright += v > 0.5f;
  CHECK(bright > 3);  // at least a few bright source pixels
}

TEST_CASE("synthetic corpus is deterministic per seed and diverse") {
  auto a = synth_corpus(11, 4, 64);
  auto b = synth_corpus(11, 4, 64);
  REQUIRE(a.size() == 4);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);

  // images within a corpus differ from each other
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = i + 1; j < a.size(); ++j) {
      CHECK(a[i].data != a[j].data);
    }
  }

  auto c = synth_corpus(12, 4, 64);
  CHECK(a[0].data != c[0].data);
}
