#include <cmath>

#include <astro/degrade.hpp>
#include <doctest.h>

#include "test_util.hpp"

using namespace astro;
using astro::testutil::random_image;

namespace {

Psf delta_psf(int support = 5) {
  Psf p;
  p.kernel = Image(support, support, 0.0f);
  p.kernel.at(support / 2, support / 2) = 1.0f;
  p.support = support;
  return p;
}

}  // namespace

TEST_CASE("sigma 0 with a delta PSF is the identity") {
  Image x = random_image(20, 20, 31);
  Image y = degrade(x, delta_psf(), NoiseSpec{0.0, 7});
  for (size_t i = 0; i < x.data.size(); ++i) {
    CHECK(std::abs(static_cast<double>(y.data[i]) - static_cast<double>(x.data[i])) <= 1e-6);
  }
}

TEST_CASE("noise statistics match the requested sigma") {
  Image zero(512, 512, 0.0f);
  Image noisy = add_gaussian_noise(zero, NoiseSpec{0.01, 42});
  double mean = image_sum(noisy) / noisy.pixel_count();
  double var = 0.0;
  for (float v : noisy.data) var += (v - mean) * (v - mean);
  var /= noisy.pixel_count() - 1;
  double sd = std::sqrt(var);
  CHECK(sd > 0.0095);
  CHECK(sd < 0.0105);
  CHECK(std::abs(mean) < 4 * 0.01 / 512);  // 4 standard errors

  // unclipped: negatives survive on a dark background
  CHECK(image_min(noisy) < 0.0f);
}

TEST_CASE("noise is seed-deterministic") {
  Image x = random_image(16, 16, 33);
  Image a = add_gaussian_noise(x, NoiseSpec{0.05, 9});
  Image b = add_gaussian_noise(x, NoiseSpec{0.05, 9});
  for (size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);

  Image c = add_gaussian_noise(x, NoiseSpec{0.05, 10});
  bool differs = false;
  for (size_t i = 0; i < a.data.size(); ++i) differs |= (a.data[i] != c.data[i]);
  CHECK(differs);
}

TEST_CASE("flux linearity with a delta PSF") {
  Image x = random_image(24, 24, 34);
  NoiseSpec spec{0.02, 77};
  Image noise_only = add_gaussian_noise(Image(24, 24, 0.0f), spec);
  Image y = degrade(x, delta_psf(), spec);
  // same seed: degraded = blurred(x) + the same noise field
  CHECK(std::abs(static_cast<double>(image_sum(y)) -
        static_cast<double>(image_sum(x) + image_sum(noise_only))) <=
        1e-3);
}

TEST_CASE("degrade composes convolution then noise") {
  Image x = random_image(32, 32, 35);
  Psf psf = airy_kernel(16, 4.0);
  NoiseSpec spec{0.01, 5};
  Image manual = add_gaussian_noise(convolve_full_image(x, psf), spec);
  Image fused = degrade(x, psf, spec);
  for (size_t i = 0; i < x.data.size(); ++i) {
    CHECK(std::abs(static_cast<double>(fused.data[i]) - static_cast<double>(manual.data[i])) <= 1e-6);
  }
}

TEST_CASE("degradation lowers PSNR but stays finite") {
  Image x = normalize_max(random_image(64, 64, 36, 0.05f, 1.0f));
  Image y = degrade(x, airy_kernel(32, 8.0), NoiseSpec{0.01, 8});
  double q = psnr(x, y);
  CHECK(q > 5.0);
  CHECK(q < 60.0);
}
