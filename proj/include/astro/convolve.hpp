#pragma once

#include <vector>

#include "astro/fft.hpp"
#include "astro/image.hpp"

namespace astro {

enum class Boundary { circular };

// Direct O(H*W*kh*kw) circular convolution -- the correctness oracle for the
// frequency-domain path.  True convolution: the kernel is flipped, with its
// center taken at (kh/2, kw/2).
Image convolve_direct(const Image& img, const Image& kernel);

// Frequency-domain circular convolution; agrees with convolve_direct
// within 1e-4 on [0,1]-scaled images.
Image convolve_fft(const Image& img, const Image& kernel);

// Valid-region true convolution: output dims (H-kh+1, W-kw+1).
Image valid_convolve(const Image& img, const Image& kernel);

// Optical transfer function: DFT of the kernel circularly embedded into an
// h*w grid so that the kernel center lands on index (0, 0).
std::vector<cdouble> kernel_otf(const Image& kernel, int h, int w);

// Repeated application of one kernel (and its adjoint) at a fixed image
// size, e.g. inside Richardson-Lucy or TV iterations.
class CircularConvolution {
 public:
  CircularConvolution(const Image& kernel, int height, int width);

  Image apply(const Image& x) const;          // h * x
  Image apply_adjoint(const Image& x) const;  // h~ * x (flipped kernel)

  const std::vector<cdouble>& otf() const { return otf_; }
  int height() const { return height_; }
  int width() const { return width_; }

 private:
  Image multiply_spectrum(const Image& x, bool conjugate) const;

  int height_;
  int width_;
  std::vector<cdouble> otf_;
};

}  // namespace astro
