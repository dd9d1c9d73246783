#include <cmath>
#include <vector>

#include <astro/convolve.hpp>
#include <astro/psf.hpp>
#include <doctest.h>

#include "test_util.hpp"

using namespace astro;
using astro::testutil::random_image;

namespace {

// Literal transcription of the convention: true convolution, kernel flipped,
// center at (kh/2, kw/2), circular wrap.
Image conv_reference(const Image& x, const Image& k) {
  Image out(x.height, x.width);
  const int cu = k.height / 2, cv = k.width / 2;
  for (int r = 0; r < x.height; ++r) {
    for (int c = 0; c < x.width; ++c) {
      double acc = 0.0;
      for (int u = 0; u < k.height; ++u) {
        for (int v = 0; v < k.width; ++v) {
          int rr = ((r - (u - cu)) % x.height + x.height) % x.height;
          int cc = ((c - (v - cv)) % x.width + x.width) % x.width;
          acc += static_cast<double>(k.at(u, v)) * x.at(rr, cc);
        }
      }
      out.at(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

Image cyclic_shift(const Image& x, int dr, int dc) {
  Image out(x.height, x.width);
  for (int r = 0; r < x.height; ++r) {
    for (int c = 0; c < x.width; ++c) {
      out.at((r + dr) % x.height, (c + dc) % x.width) = x.at(r, c);
    }
  }
  return out;
}

double dot(const Image& a, const Image& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) s += static_cast<double>(a.data[i]) * b.data[i];
  return s;
}

Image random_kernel(int kh, int kw, uint64_t seed) {
  Image k = random_image(kh, kw, seed);
  double s = image_sum(k);
  for (auto& v : k.data) v = static_cast<float>(v / s);
  return k;
}

}  // namespace

TEST_CASE("direct circular convolution matches the literal definition") {
  Image x = random_image(9, 7, 11);
  Image k = random_image(3, 4, 12, -0.5f, 1.0f);  // asymmetric, signed
  Image got = convolve_direct(x, k);
  Image want = conv_reference(x, k);
  for (size_t i = 0; i < got.data.size(); ++i) {
    CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-5));
  }
}

TEST_CASE("fft convolution agrees with the direct oracle") {
  // mixed sizes, including non powers of two and even/odd kernels
  const int cases[][4] = {{16, 16, 5, 5},  {32, 24, 7, 3},  {17, 23, 4, 6}, {8, 8, 8, 8},
                          {30, 30, 11, 11}, {64, 48, 9, 2}, {25, 25, 3, 3}, {12, 40, 6, 5}};
  int id = 0;
  for (auto& c : cases) {
    Image x = random_image(c[0], c[1], 100 + id);
    Image k = random_image(c[2], c[3], 200 + id, -0.3f, 1.0f);
    ++id;
    Image a = convolve_fft(x, k);
    Image b = convolve_direct(x, k);
    REQUIRE(a.same_shape(b));
    for (size_t i = 0; i < a.data.size(); ++i) {
      CHECK(std::abs(static_cast<double>(a.data[i]) - static_cast<double>(b.data[i])) <= 1e-4);
    }
  }
}

TEST_CASE("delta kernel is the identity") {
  Image x = random_image(14, 19, 13);
  Image k(5, 5, 0.0f);
  k.at(2, 2) = 1.0f;
  Image y = convolve_fft(x, k);
  for (size_t i = 0; i < x.data.size(); ++i) {
    CHECK(std::abs(static_cast<double>(y.data[i]) - static_cast<double>(x.data[i])) <= 1e-6);
  }
}

TEST_CASE("shift equivariance under circular boundary") {
  Image x = random_image(12, 10, 14);
  Image k = random_kernel(3, 3, 15);
  Image shifted_then_conv = convolve_direct(cyclic_shift(x, 3, 5), k);
  Image conv_then_shifted = cyclic_shift(convolve_direct(x, k), 3, 5);
  for (size_t i = 0; i < x.data.size(); ++i) {
    CHECK(shifted_then_conv.data[i] == doctest::Approx(conv_then_shifted.data[i]).epsilon(1e-5));
  }
}

TEST_CASE("linearity") {
  Image x = random_image(11, 13, 16), y = random_image(11, 13, 17);
  Image k = random_kernel(4, 3, 18);
  Image mix(11, 13);
  for (size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 0.7f * x.data[i] - 1.3f * y.data[i];
  Image lhs = convolve_fft(mix, k);
  Image cx = convolve_fft(x, k), cy = convolve_fft(y, k);
  for (size_t i = 0; i < lhs.data.size(); ++i) {
    CHECK(std::abs(static_cast<double>(lhs.data[i]) -
          static_cast<double>(0.7f * cx.data[i] - 1.3f * cy.data[i])) <=
          1e-5);
  }
}

TEST_CASE("flux conservation for sum-1 kernels") {
  Image x = random_image(21, 18, 19);
  Psf psf = airy_kernel(16, 4.0);
  Image y = convolve_fft(x, psf.kernel);
  CHECK(image_sum(y) == doctest::Approx(image_sum(x)).epsilon(1e-4));
}

TEST_CASE("valid convolution") {
  Image x = random_image(10, 9, 20);
  Image k = random_image(3, 4, 21);
  Image y = valid_convolve(x, k);
  REQUIRE(y.height == 8);
  REQUIRE(y.width == 6);
  // spot check against the definition: out(r,c) = sum k(u,v) x(r+kh-1-u, c+kw-1-v)
  for (int r : {0, 3, 7}) {
    for (int c : {0, 2, 5}) {
      double acc = 0.0;
      for (int u = 0; u < 3; ++u) {
        for (int v = 0; v < 4; ++v) acc += static_cast<double>(k.at(u, v)) * x.at(r + 2 - u, c + 3 - v);
      }
      CHECK(y.at(r, c) == doctest::Approx(acc).epsilon(1e-5));
    }
  }
  CHECK_THROWS(valid_convolve(Image(2, 2), Image(3, 3)));
}

TEST_CASE("CircularConvolution adjoint identity") {
  Image k = random_image(5, 4, 22, -0.2f, 1.0f);
  CircularConvolution conv(k, 15, 17);
  Image x = random_image(15, 17, 23), z = random_image(15, 17, 24);
  double lhs = dot(conv.apply(x), z);
  double rhs = dot(x, conv.apply_adjoint(z));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
}

TEST_CASE("kernel_otf of a delta is flat") {
  Image k(3, 3, 0.0f);
  k.at(1, 1) = 1.0f;
  auto otf = kernel_otf(k, 8, 8);
  for (auto& c : otf) {
    CHECK(c.real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(static_cast<double>(c.imag()) - static_cast<double>(0.0)) <= 1e-9);
  }
}
