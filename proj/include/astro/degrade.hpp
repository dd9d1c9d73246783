#pragma once

#include <cstdint>

#include "astro/convolve.hpp"
#include "astro/image.hpp"
#include "astro/psf.hpp"

namespace astro {

struct NoiseSpec {
  double sigma = 0.0;  // standard deviation, intensity units
  uint64_t seed = 0;
};

// Circular convolution of a full image with the PSF.
Image convolve_full_image(const Image& img, const Psf& psf,
                          Boundary boundary = Boundary::circular);

// img + i.i.d. N(0, sigma^2); deterministic per seed, bit-identical across runs.
Image add_gaussian_noise(const Image& img, const NoiseSpec& spec);

// Forward observation model: blur then noise.
Image degrade(const Image& img, const Psf& psf, const NoiseSpec& spec);

}  // namespace astro
