#pragma once

#include <vector>

#include "astro/cnn.hpp"
#include "astro/image.hpp"

namespace astro {

// Mirror padding without repeating the edge pixel (ghost cells a, b, c for
// row 0 read rows 1, 2, 3).
Image reflect_pad(const Image& img, int pad);

// Full-image CNN reconstruction: reflect-pad by (receptive-1)/2, slide the
// model's input window at the output-window stride, remainder tiles anchored
// to the bottom/right edge.  Output dims equal input dims.
Image predict_image(const CnnModel& model, const Image& degraded);

// Per-channel post-activation images of one layer (1-based index).
std::vector<Image> extract_feature_maps(const CnnModel& model, const Image& input, int layer);

}  // namespace astro
