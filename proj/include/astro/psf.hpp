#pragma once

#include "astro/image.hpp"

namespace astro {

// Airy-pattern point spread function with its calibration metadata.
struct Psf {
  Image kernel;          // square support, sums to 1
  double fwhm_px = 0.0;  // full width at half maximum, pixels
  int support = 0;       // kernel side length
};

// First-kind Bessel function of order one; absolute error <= 1e-7 on |x| <= 50.
double bessel_j1(double x);

// Root of (2*J1(x)/x)^2 = 1/2, i.e. the half-maximum radius of the unit-scale
// Airy profile (~1.61634).
double airy_half_max_radius();

// First positive zero of J1 (~3.83171), the Airy first dark ring.
double airy_first_zero();

// Normalized Airy intensity at distance d for a given FWHM: value 1 at d = 0,
// 1/2 at d = fwhm_px/2.
double airy_radial_profile(double d, double fwhm_px);

// Sampled, sum-to-one Airy kernel.  Even supports center on the half-integer
// grid point ((n-1)/2, (n-1)/2) to keep exact 8-fold symmetry.
Psf airy_kernel(int support, double fwhm_px);

}  // namespace astro
