#include "astro/convolve.hpp"

#include <stdexcept>
#include <string>

namespace astro {

namespace {

int mod(int a, int m) {
  int r = a % m;
  return r < 0 ? r + m : r;
}

void check_kernel_fits(const Image& img, const Image& kernel) {
  if (kernel.height < 1 || kernel.width < 1) {
    throw std::invalid_argument("convolution kernel is empty");
  }
  if (kernel.height > img.height || kernel.width > img.width) {
    throw std::invalid_argument("kernel " + std::to_string(kernel.height) + "x" +
                                std::to_string(kernel.width) + " larger than image " +
                                std::to_string(img.height) + "x" + std::to_string(img.width));
  }
}

}  // namespace

Image convolve_direct(const Image& img, const Image& kernel) {
  check_kernel_fits(img, kernel);
  const int H = img.height, W = img.width;
  const int ch = kernel.height / 2, cw = kernel.width / 2;
  Image out(H, W);
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      double acc = 0.0;
      for (int u = 0; u < kernel.height; ++u) {
        int rr = mod(r - u + ch, H);
        for (int v = 0; v < kernel.width; ++v) {
          int cc = mod(c - v + cw, W);
          acc += static_cast<double>(kernel.at(u, v)) * img.at(rr, cc);
        }
      }
      out.at(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

Image valid_convolve(const Image& img, const Image& kernel) {
  check_kernel_fits(img, kernel);
  const int oh = img.height - kernel.height + 1;
  const int ow = img.width - kernel.width + 1;
  Image out(oh, ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int u = 0; u < kernel.height; ++u) {
        for (int v = 0; v < kernel.width; ++v) {
          acc += static_cast<double>(kernel.at(u, v)) *
                 img.at(r + kernel.height - 1 - u, c + kernel.width - 1 - v);
        }
      }
      out.at(r, c) = static_cast<float>(acc);
    }
  }
  return out;
}

std::vector<cdouble> kernel_otf(const Image& kernel, int h, int w) {
  if (kernel.height > h || kernel.width > w) {
    throw std::invalid_argument("kernel larger than the target grid");
  }
  const int ch = kernel.height / 2, cw = kernel.width / 2;
  std::vector<cdouble> grid(static_cast<size_t>(h) * w, cdouble(0.0));
  for (int u = 0; u < kernel.height; ++u) {
    int rr = mod(u - ch, h);
    for (int v = 0; v < kernel.width; ++v) {
      int cc = mod(v - cw, w);
      grid[static_cast<size_t>(rr) * w + cc] = cdouble(kernel.at(u, v));
    }
  }
  fft2d(grid, h, w);
  return grid;
}

CircularConvolution::CircularConvolution(const Image& kernel, int height, int width)
    : height_(height), width_(width), otf_(kernel_otf(kernel, height, width)) {}

Image CircularConvolution::multiply_spectrum(const Image& x, bool conjugate) const {
  if (x.height != height_ || x.width != width_) {
    throw std::invalid_argument("image does not match the convolution grid");
  }
  std::vector<cdouble> spec(x.data.begin(), x.data.end());
  fft2d(spec, height_, width_);
  for (size_t i = 0; i < spec.size(); ++i) {
    spec[i] *= conjugate ? std::conj(otf_[i]) : otf_[i];
  }
  ifft2d(spec, height_, width_);
  Image out(height_, width_);
  for (size_t i = 0; i < spec.size(); ++i) out.data[i] = static_cast<float>(spec[i].real());
  return out;
}

Image CircularConvolution::apply(const Image& x) const { return multiply_spectrum(x, false); }

Image CircularConvolution::apply_adjoint(const Image& x) const {
  return multiply_spectrum(x, true);
}

Image convolve_fft(const Image& img, const Image& kernel) {
  check_kernel_fits(img, kernel);
  return CircularConvolution(kernel, img.height, img.width).apply(img);
}

}  // namespace astro
