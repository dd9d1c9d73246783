#pragma once

#include <complex>
#include <vector>

namespace astro {

using cdouble = std::complex<double>;

// In-place 1-D transforms of arbitrary length n >= 1.  Power-of-two lengths
// use the iterative radix-2 algorithm; everything else goes through
// Bluestein's chirp-z reduction to a padded power-of-two convolution.
void fft(std::vector<cdouble>& a);
void ifft(std::vector<cdouble>& a);  // includes the 1/n scale

// Row-major h*w grids.
void fft2d(std::vector<cdouble>& a, int h, int w);
void ifft2d(std::vector<cdouble>& a, int h, int w);

}  // namespace astro
