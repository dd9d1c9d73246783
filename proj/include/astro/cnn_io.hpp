#pragma once

#include <string>

#include "astro/cnn.hpp"

namespace astro {

// "CNN1" container: magic, version u32, layer count u32, then per layer
// out/in/kh/kw u32 + relu u8 + weights + biases as little-endian f32.
void save_model(const CnnModel& model, const std::string& path);
CnnModel load_model(const std::string& path);

}  // namespace astro
