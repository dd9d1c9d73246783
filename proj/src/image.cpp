#include "astro/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace astro {

Image::Image(int h, int w, float fill) {
  if (h < 1 || w < 1) {
    throw std::invalid_argument("image dimensions must be at least 1x1, got " +
                                std::to_string(h) + "x" + std::to_string(w));
  }
  height = h;
  width = w;
  data.assign(static_cast<size_t>(h) * w, fill);
}

Image Image::from_data(int h, int w, std::vector<float> d) {
  if (h < 1 || w < 1) {
    throw std::invalid_argument("image dimensions must be at least 1x1, got " +
                                std::to_string(h) + "x" + std::to_string(w));
  }
  if (d.size() != static_cast<size_t>(h) * w) {
    throw std::invalid_argument("image data length " + std::to_string(d.size()) +
                                " does not match " + std::to_string(h) + "x" + std::to_string(w));
  }
  Image img;
  img.height = h;
  img.width = w;
  img.data = std::move(d);
  return img;
}

Image normalize_max(const Image& img) {
  float mx = image_max(img);
  if (!(mx > 0.0f)) {
    throw std::runtime_error("degenerate image: maximum sample is not positive");
  }
  Image out = img;
  if (mx == 1.0f) return out;
  float scale = 1.0f / mx;
  for (auto& v : out.data) v *= scale;
  return out;
}

double mean_squared_error(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("MSE dimension mismatch: " + std::to_string(a.height) + "x" +
                                std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                                std::to_string(b.width));
  }
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

double psnr(const Image& reference, const Image& test, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr peak must be positive");
  double mse = mean_squared_error(reference, test);
  if (mse == 0.0) return kPsnrInfinite;
  return 10.0 * std::log10(peak * peak / mse);
}

Image extract_patch(const Image& img, int top, int left, int h, int w) {
  if (h < 1 || w < 1 || top < 0 || left < 0 || top + h > img.height || left + w > img.width) {
    throw std::out_of_range("patch (top=" + std::to_string(top) + ", left=" + std::to_string(left) +
                            ", " + std::to_string(h) + "x" + std::to_string(w) +
                            ") outside image " + std::to_string(img.height) + "x" +
                            std::to_string(img.width));
  }
  Image out(h, w);
  for (int r = 0; r < h; ++r) {
    const float* src = &img.data[static_cast<size_t>(top + r) * img.width + left];
    std::copy(src, src + w, &out.data[static_cast<size_t>(r) * w]);
  }
  return out;
}

void paste_patch(Image& img, const Image& patch, int top, int left) {
  if (top < 0 || left < 0 || top + patch.height > img.height || left + patch.width > img.width) {
    throw std::out_of_range("paste (top=" + std::to_string(top) + ", left=" +
                            std::to_string(left) + ", " + std::to_string(patch.height) + "x" +
                            std::to_string(patch.width) + ") outside image " +
                            std::to_string(img.height) + "x" + std::to_string(img.width));
  }
  for (int r = 0; r < patch.height; ++r) {
    const float* src = &patch.data[static_cast<size_t>(r) * patch.width];
    std::copy(src, src + patch.width, &img.data[static_cast<size_t>(top + r) * img.width + left]);
  }
}

double image_sum(const Image& img) {
  double acc = 0.0;
  for (float v : img.data) acc += v;
  return acc;
}

float image_min(const Image& img) {
  return *std::min_element(img.data.begin(), img.data.end());
}

float image_max(const Image& img) {
  return *std::max_element(img.data.begin(), img.data.end());
}

bool all_finite(const Image& img) {
  for (float v : img.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace astro
