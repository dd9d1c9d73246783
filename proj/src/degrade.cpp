#include "astro/degrade.hpp"

#include <stdexcept>

#include "astro/rng.hpp"

namespace astro {

Image convolve_full_image(const Image& img, const Psf& psf, Boundary boundary) {
  if (boundary != Boundary::circular) {
    throw std::invalid_argument("unsupported boundary model");
  }
  return convolve_fft(img, psf.kernel);
}

Image add_gaussian_noise(const Image& img, const NoiseSpec& spec) {
  if (spec.sigma < 0) throw std::invalid_argument("noise sigma must be nonnegative");
  if (spec.sigma == 0) return img;
  Image out = img;
  Rng rng(spec.seed);
  for (auto& v : out.data) v += static_cast<float>(spec.sigma * rng.gaussian());
  return out;
}

Image degrade(const Image& img, const Psf& psf, const NoiseSpec& spec) {
  return add_gaussian_noise(convolve_full_image(img, psf), spec);
}

}  // namespace astro
