#pragma once

#include <cstdint>
#include <vector>

#include "astro/image.hpp"

namespace astro {

// Parametric stand-ins for survey images: random point sources rendered as
// small Gaussian spots over smooth elliptical "galaxy" gradients, max-normalized.
Image synth_image(uint64_t seed, int size = 512);
std::vector<Image> synth_corpus(uint64_t seed, int count = 6, int size = 512);

}  // namespace astro
