#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace astro {

/// Single-channel raster, row-major float32, origin at the top-left.
/// The working currency of the whole pipeline: clean images, observed
/// images, PSF kernels, reconstructions and patches are all Images.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // height*width samples, row-major

  Image() = default;
  Image(int h, int w, float fill = 0.0f);

  /// Takes ownership of d; throws if d.size() != h*w or h,w < 1.
  static Image from_data(int h, int w, std::vector<float> d);

  float& at(int r, int c) { return data[static_cast<size_t>(r) * width + c]; }
  float at(int r, int c) const { return data[static_cast<size_t>(r) * width + c]; }

  size_t pixel_count() const { return data.size(); }
  bool same_shape(const Image& o) const { return height == o.height && width == o.width; }
};

/// Value reported by psnr when the two images are identical (MSE = 0).
inline constexpr double kPsnrInfinite = std::numeric_limits<double>::infinity();

/// Scales the image so its maximum sample is exactly 1.0.
/// Throws on images whose maximum is not strictly positive.
Image normalize_max(const Image& img);

/// 10*log10(peak^2 / MSE) in dB; kPsnrInfinite when MSE == 0.
/// Peak defaults to 1.0 since the pipeline normalizes images to max 1.
double psnr(const Image& reference, const Image& test, double peak = 1.0);

double mean_squared_error(const Image& a, const Image& b);

/// Copies the h x w rectangle with top-left corner (top, left).
/// Throws with the offending coordinates when it leaves the image.
Image extract_patch(const Image& img, int top, int left, int h, int w);

/// Writes patch into img at (top, left); inverse of extract_patch.
void paste_patch(Image& img, const Image& patch, int top, int left);

// Reductions accumulate in double.
double image_sum(const Image& img);
float image_min(const Image& img);
float image_max(const Image& img);

bool all_finite(const Image& img);

}  // namespace astro
