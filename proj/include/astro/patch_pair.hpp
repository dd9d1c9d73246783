#pragma once

#include "astro/image.hpp"

namespace astro {

// One training sample: a degraded input window and the clean target window
// centered underneath it.
struct PatchPair {
  Image input;   // e.g. 32x32, from the degraded image
  Image target;  // e.g. 14x14, from the clean image at (top+9, left+9)
  int source_id = 0;
  int top = 0;
  int left = 0;
};

}  // namespace astro
