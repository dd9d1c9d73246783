#include "astro/psf.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace astro {

namespace {

// Power series sum_m (-1)^m (x^2/4)^m / (m! (m+1)!) * (x/2); converges fast
// for |x| <= 12 (about 35 terms at the boundary).
double j1_series(double x) {
  const double q = x * x / 4.0;
  double term = 0.5;  // m = 0 of J1(x)/x... times x below
  double sum = term;
  for (int m = 1; m <= 64; ++m) {
    term *= -q / (static_cast<double>(m) * (m + 1));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return x * sum;
}

// Hankel asymptotic expansion for large arguments:
//   J1(x) = sqrt(2/(pi x)) * (P cos w - Q sin w),  w = x - 3pi/4,
// with P, Q the standard mu = 4 asymptotic sums.
double j1_asymptotic(double x) {
  const double mu = 4.0;
  const double z8 = 8.0 * x;
  double t = 1.0;
  double p = 1.0, q = 0.0;
  double sp = -1.0, sq = 1.0;
  double prev = 1.0;
  for (int m = 1; m <= 14; ++m) {
    const double odd = 2.0 * m - 1.0;
    t *= (mu - odd * odd) / (static_cast<double>(m) * z8);
    if (std::abs(t) >= prev) break;  // asymptotic tail started diverging
    prev = std::abs(t);
    if (m % 2 == 1) {
      q += sq * t;
      sq = -sq;
    } else {
      p += sp * t;
      sp = -sp;
    }
  }
  const double w = x - 3.0 * std::numbers::pi / 4.0;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(w) - q * std::sin(w));
}

}  // namespace

double bessel_j1(double x) {
  const double ax = std::abs(x);
  double v = ax <= 12.0 ? j1_series(ax) : j1_asymptotic(ax);
  return x < 0 ? -v : v;
}

namespace {

// Normalized Airy amplitude ratio 2*J1(x)/x with its x -> 0 limit.
double airy_amplitude(double x) {
  if (std::abs(x) < 1e-8) return 1.0;
  return 2.0 * bessel_j1(x) / x;
}

double bisect(double lo, double hi, double (*f)(double)) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if ((flo < 0) == (fm < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double half_max_gap(double x) {
  double a = airy_amplitude(x);
  return a * a - 0.5;
}

}  // namespace

double airy_half_max_radius() {
  static const double r = bisect(1.0, 2.5, half_max_gap);
  return r;
}

double airy_first_zero() {
  static const double r = bisect(3.0, 4.2, [](double x) { return bessel_j1(x); });
  return r;
}

double airy_radial_profile(double d, double fwhm_px) {
  if (fwhm_px <= 0) throw std::invalid_argument("FWHM must be positive");
  const double s = airy_half_max_radius() / (fwhm_px / 2.0);
  const double a = airy_amplitude(s * d);
  return a * a;
}

Psf airy_kernel(int support, double fwhm_px) {
  if (support < 3) {
    throw std::invalid_argument("PSF support must be at least 3, got " + std::to_string(support));
  }
  if (!(fwhm_px > 0) || fwhm_px >= support) {
    throw std::invalid_argument("PSF FWHM must lie in (0, support), got " +
                                std::to_string(fwhm_px));
  }
  const double center = (support - 1) / 2.0;
  Image kernel(support, support);
  double sum = 0.0;
  for (int i = 0; i < support; ++i) {
    for (int j = 0; j < support; ++j) {
      double d = std::hypot(i - center, j - center);
      sum += airy_radial_profile(d, fwhm_px);
    }
  }
  for (int i = 0; i < support; ++i) {
    for (int j = 0; j < support; ++j) {
      double d = std::hypot(i - center, j - center);
      kernel.at(i, j) = static_cast<float>(airy_radial_profile(d, fwhm_px) / sum);
    }
  }
  return Psf{std::move(kernel), fwhm_px, support};
}

}  // namespace astro
