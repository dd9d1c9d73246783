#include "astro/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace astro {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative Cooley-Tukey, n a power of two.
void fft_pow2(std::vector<cdouble>& a, bool inverse) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const cdouble wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      cdouble w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        cdouble u = a[i + j];
        cdouble v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Bluestein: DFT of arbitrary length via one circular convolution of size
// next_pow2(2n - 1).  Chirp phases use exact mod-2n index arithmetic so
// accuracy holds up for large n.
void fft_bluestein(std::vector<cdouble>& a, bool inverse) {
  const size_t n = a.size();
  size_t m = std::bit_ceil(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<cdouble> chirp(n);
  for (size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small
    size_t k2 = static_cast<size_t>((static_cast<unsigned long long>(k) * k) % (2 * n));
    double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = cdouble(std::cos(ang), std::sin(ang));
  }

  std::vector<cdouble> x(m, cdouble(0.0));
  std::vector<cdouble> y(m, cdouble(0.0));
  for (size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(chirp[k]);

  fft_pow2(x, false);
  fft_pow2(y, false);
  for (size_t k = 0; k < m; ++k) x[k] *= y[k];
  fft_pow2(x, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (size_t k = 0; k < n; ++k) a[k] = x[k] * scale * chirp[k];
}

void fft_any(std::vector<cdouble>& a, bool inverse) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size())) {
    fft_pow2(a, inverse);
  } else {
    fft_bluestein(a, inverse);
  }
}

}  // namespace

void fft(std::vector<cdouble>& a) { fft_any(a, false); }

void ifft(std::vector<cdouble>& a) {
  fft_any(a, true);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= scale;
}

namespace {

void fft2d_impl(std::vector<cdouble>& a, int h, int w, bool inverse) {
  if (h < 1 || w < 1 || a.size() != static_cast<size_t>(h) * w) {
    throw std::invalid_argument("fft2d: buffer does not match grid dimensions");
  }
  std::vector<cdouble> line(static_cast<size_t>(w));
  for (int r = 0; r < h; ++r) {
    std::copy_n(a.begin() + static_cast<size_t>(r) * w, w, line.begin());
    fft_any(line, inverse);
    std::copy_n(line.begin(), w, a.begin() + static_cast<size_t>(r) * w);
  }
  line.assign(static_cast<size_t>(h), cdouble(0.0));
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) line[static_cast<size_t>(r)] = a[static_cast<size_t>(r) * w + c];
    fft_any(line, inverse);
    for (int r = 0; r < h; ++r) a[static_cast<size_t>(r) * w + c] = line[static_cast<size_t>(r)];
  }
}

}  // namespace

void fft2d(std::vector<cdouble>& a, int h, int w) { fft2d_impl(a, h, w, false); }

void ifft2d(std::vector<cdouble>& a, int h, int w) {
  fft2d_impl(a, h, w, true);
  const double scale = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= scale;
}

}  // namespace astro
