#include "astro/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "astro/rng.hpp"

namespace astro {

namespace {

void add_spot(Image& img, double cy, double cx, double amp, double sigma) {
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  const int r0 = std::max(0, static_cast<int>(cy) - radius);
  const int r1 = std::min(img.height - 1, static_cast<int>(cy) + radius);
  const int c0 = std::max(0, static_cast<int>(cx) - radius);
  const int c1 = std::min(img.width - 1, static_cast<int>(cx) + radius);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
      img.at(r, c) += static_cast<float>(amp * std::exp(-d2 * inv));
    }
  }
}

void add_galaxy(Image& img, Rng& rng) {
  const double cy = rng.uniform() * img.height;
  const double cx = rng.uniform() * img.width;
  const double sa = 40.0 + 80.0 * rng.uniform();        // major axis sigma
  const double sb = sa * (0.4 + 0.6 * rng.uniform());   // minor axis sigma
  const double theta = rng.uniform() * 3.14159265358979;
  const double amp = 0.10 + 0.25 * rng.uniform();
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double dy = r - cy, dx = c - cx;
      const double a = ct * dx + st * dy;
      const double b = -st * dx + ct * dy;
      const double e = a * a / (2.0 * sa * sa) + b * b / (2.0 * sb * sb);
      if (e < 12.0) img.at(r, c) += static_cast<float>(amp * std::exp(-e));
    }
  }
}

}  // namespace

Image synth_image(uint64_t seed, int size) {
  if (size < 32) throw std::invalid_argument("synthetic image size must be at least 32");
  Rng rng(seed);
  Image img(size, size);

  // faint sky with a mild large-scale gradient
  const double base = 0.02 + 0.02 * rng.uniform();
  const double gr = 0.03 * (2.0 * rng.uniform() - 1.0);
  const double gc = 0.03 * (2.0 * rng.uniform() - 1.0);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      img.at(r, c) = static_cast<float>(base + gr * r / size + gc * c / size);
    }
  }

  const int n_galaxies = 2 + static_cast<int>(rng.below(4));
  for (int g = 0; g < n_galaxies; ++g) add_galaxy(img, rng);

  const int n_stars = 80 + static_cast<int>(rng.below(121));
  for (int s = 0; s < n_stars; ++s) {
    const double cy = rng.uniform() * size;
    const double cx = rng.uniform() * size;
    const double u = rng.uniform();
    const double amp = 0.05 + 0.95 * u * u * u;  // mostly faint, a few bright
    const double sigma = 0.8 + 1.0 * rng.uniform();
    add_spot(img, cy, cx, amp, sigma);
  }

  return normalize_max(img);
}

std::vector<Image> synth_corpus(uint64_t seed, int count, int size) {
  if (count < 1) throw std::invalid_argument("corpus image count must be positive");
  std::vector<Image> corpus;
  corpus.reserve(count);
  for (int i = 0; i < count; ++i) {
    corpus.push_back(synth_image(derive_seed(seed, static_cast<uint64_t>(i)), size));
  }
  return corpus;
}

}  // namespace astro
