#include "astro/classical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "astro/fft.hpp"

namespace astro {

namespace {

Image laplacian_stencil() {
  Image l(3, 3);
  l.at(0, 1) = 1.0f;
  l.at(1, 0) = 1.0f;
  l.at(1, 1) = -4.0f;
  l.at(1, 2) = 1.0f;
  l.at(2, 1) = 1.0f;
  return l;
}

}  // namespace

Image wiener_deconvolve(const Image& y, const Psf& psf, const WienerParams& p) {
  if (p.lambda < 0) throw std::invalid_argument("Wiener lambda must be nonnegative");
  const int h = y.height, w = y.width;
  auto H = kernel_otf(psf.kernel, h, w);
  auto L = kernel_otf(laplacian_stencil(), h, w);

  std::vector<cdouble> spec(y.data.begin(), y.data.end());
  fft2d(spec, h, w);

  for (size_t i = 0; i < spec.size(); ++i) {
    const double hp = std::norm(H[i]);
    double den;
    if (p.lambda == 0) {
      if (hp < 1e-12) {
        throw std::runtime_error(
            "singular inversion: PSF transfer function vanishes and lambda is zero");
      }
      den = hp;
    } else {
      den = std::max(hp + p.lambda * std::norm(L[i]), 1e-12);
    }
    spec[i] = std::conj(H[i]) * spec[i] / den;
  }
  ifft2d(spec, h, w);
  Image out(h, w);
  for (size_t i = 0; i < spec.size(); ++i) out.data[i] = static_cast<float>(spec[i].real());
  return out;
}

Image richardson_lucy_from(const Image& y, const Psf& psf, const RlParams& p, const Image& x0) {
  if (p.iterations < 1) throw std::invalid_argument("RL iteration count must be positive");
  if (!(p.epsilon > 0)) throw std::invalid_argument("RL epsilon must be positive");
  if (!y.same_shape(x0)) throw std::invalid_argument("RL start does not match observation shape");

  CircularConvolution conv(psf.kernel, y.height, y.width);
  Image ypos = y;
  for (auto& v : ypos.data) v = std::max(v, 0.0f);

  Image x = x0;
  Image ratio(y.height, y.width);
  for (int k = 0; k < p.iterations; ++k) {
    Image den = conv.apply(x);
    for (size_t i = 0; i < ratio.data.size(); ++i) {
      // FFT round-off can leave tiny negatives where the true value is >= 0
      double d = std::max(static_cast<double>(den.data[i]), 0.0) + p.epsilon;
      ratio.data[i] = static_cast<float>(ypos.data[i] / d);
    }
    Image corr = conv.apply_adjoint(ratio);
    for (size_t i = 0; i < x.data.size(); ++i) {
      x.data[i] = std::max(x.data[i] * corr.data[i], 0.0f);
    }
  }
  return x;
}

Image richardson_lucy(const Image& y, const Psf& psf, const RlParams& p) {
  Image x0 = y;
  for (auto& v : x0.data) v = std::max(v, 0.0f);
  return richardson_lucy_from(y, psf, p, x0);
}

void tv_forward_diff(const Image& x, Image& dr, Image& dc) {
  const int h = x.height, w = x.width;
  if (!dr.same_shape(x)) dr = Image(h, w);
  if (!dc.same_shape(x)) dc = Image(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      dr.at(r, c) = r + 1 < h ? x.at(r + 1, c) - x.at(r, c) : 0.0f;
      dc.at(r, c) = c + 1 < w ? x.at(r, c + 1) - x.at(r, c) : 0.0f;
    }
  }
}

Image tv_adjoint(const Image& pr, const Image& pc) {
  if (!pr.same_shape(pc)) throw std::invalid_argument("dual field components differ in shape");
  const int h = pr.height, w = pr.width;
  Image out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double v = 0.0;
      if (r > 0) v += pr.at(r - 1, c);
      if (r + 1 < h) v -= pr.at(r, c);
      if (c > 0) v += pc.at(r, c - 1);
      if (c + 1 < w) v -= pc.at(r, c);
      out.at(r, c) = static_cast<float>(v);
    }
  }
  return out;
}

void project_dual_ball(Image& pr, Image& pc, double radius) {
  if (radius < 0) throw std::invalid_argument("dual ball radius must be nonnegative");
  for (size_t i = 0; i < pr.data.size(); ++i) {
    double n = std::hypot(static_cast<double>(pr.data[i]), static_cast<double>(pc.data[i]));
    if (n > radius) {
      double s = radius / n;
      pr.data[i] = static_cast<float>(pr.data[i] * s);
      pc.data[i] = static_cast<float>(pc.data[i] * s);
    }
  }
}

double tv_objective(const Image& x, const Image& y, const CircularConvolution& conv,
                    double lambda) {
  Image hx = conv.apply(x);
  double data = 0.0;
  for (size_t i = 0; i < hx.data.size(); ++i) {
    double d = static_cast<double>(hx.data[i]) - y.data[i];
    data += d * d;
  }
  Image dr, dc;
  tv_forward_diff(x, dr, dc);
  double tv = 0.0;
  for (size_t i = 0; i < dr.data.size(); ++i) {
    tv += std::hypot(static_cast<double>(dr.data[i]), static_cast<double>(dc.data[i]));
  }
  return 0.5 * data + lambda * tv;
}

Image tv_deconvolve(const Image& y, const Psf& psf, const TvParams& p) {
  if (p.lambda < 0) throw std::invalid_argument("TV lambda must be nonnegative");
  if (p.iterations < 1) throw std::invalid_argument("TV iteration count must be positive");
  if (!(p.tau > 0) || !(p.sigma_dual > 0)) {
    throw std::invalid_argument("TV step sizes must be positive");
  }
  // Condat-Vu admissibility with ||D||^2 <= 8 and L_f <= 1 for sum-1 kernels
  if (p.sigma_dual * p.tau * 8.0 > 1.0 - 0.5 * p.tau + 1e-12) {
    throw std::invalid_argument("TV step sizes violate the primal-dual convergence condition");
  }

  CircularConvolution conv(psf.kernel, y.height, y.width);
  Image x = y;
  Image pr(y.height, y.width), pc(y.height, y.width);
  Image gr, gc;
  for (int k = 0; k < p.iterations; ++k) {
    Image resid = conv.apply(x);
    for (size_t i = 0; i < resid.data.size(); ++i) resid.data[i] -= y.data[i];
    Image grad = conv.apply_adjoint(resid);
    Image dual = tv_adjoint(pr, pc);
    Image xnew(y.height, y.width);
    for (size_t i = 0; i < x.data.size(); ++i) {
      double v = x.data[i] - p.tau * (static_cast<double>(grad.data[i]) + dual.data[i]);
      xnew.data[i] = static_cast<float>(p.nonneg ? std::max(v, 0.0) : v);
    }
    Image bar(y.height, y.width);
    for (size_t i = 0; i < bar.data.size(); ++i) {
      bar.data[i] = 2.0f * xnew.data[i] - x.data[i];
    }
    tv_forward_diff(bar, gr, gc);
    for (size_t i = 0; i < pr.data.size(); ++i) {
      pr.data[i] += static_cast<float>(p.sigma_dual * gr.data[i]);
      pc.data[i] += static_cast<float>(p.sigma_dual * gc.data[i]);
    }
    project_dual_ball(pr, pc, p.lambda);
    x = std::move(xnew);
  }
  return x;
}

namespace {

std::vector<double> logspace(double lo, double hi, int count) {
  std::vector<double> out(count);
  const double llo = std::log10(lo), lhi = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    out[i] = std::pow(10.0, llo + (lhi - llo) * i / (count - 1));
  }
  return out;
}

}  // namespace

WienerTune autotune_wiener(const Image& y, const Psf& psf, const Image& clean) {
  WienerTune best{0.0, -1.0};
  for (double lambda : logspace(1e-4, 1e0, 13)) {
    Image x = wiener_deconvolve(y, psf, WienerParams{lambda});
    double q = psnr(clean, x);
    if (q > best.psnr_db) best = WienerTune{lambda, q};
  }
  return best;
}

RlTune autotune_rl(const Image& y, const Psf& psf, const Image& clean) {
  const std::vector<int> grid{5, 10, 20, 30, 50, 75, 100};
  // One checkpointed run instead of re-running from scratch per grid point
  CircularConvolution conv(psf.kernel, y.height, y.width);
  Image ypos = y;
  for (auto& v : ypos.data) v = std::max(v, 0.0f);
  Image x = ypos;
  Image ratio(y.height, y.width);
  RlTune best{0, -1.0};
  size_t next = 0;
  for (int k = 1; k <= grid.back(); ++k) {
    Image den = conv.apply(x);
    for (size_t i = 0; i < ratio.data.size(); ++i) {
      double d = std::max(static_cast<double>(den.data[i]), 0.0) + 1e-12;
      ratio.data[i] = static_cast<float>(ypos.data[i] / d);
    }
    Image corr = conv.apply_adjoint(ratio);
    for (size_t i = 0; i < x.data.size(); ++i) {
      x.data[i] = std::max(x.data[i] * corr.data[i], 0.0f);
    }
    if (next < grid.size() && k == grid[next]) {
      double q = psnr(clean, x);
      if (q > best.psnr_db) best = RlTune{k, q};
      ++next;
    }
  }
  return best;
}

TvTune autotune_tv(const Image& y, const Psf& psf, const Image& clean) {
  TvTune best{0.0, -1.0};
  for (double lambda : logspace(1e-4, 1e-1, 10)) {
    TvParams p;
    p.lambda = lambda;
    Image x = tv_deconvolve(y, psf, p);
    double q = psnr(clean, x);
    if (q > best.psnr_db) best = TvTune{lambda, q};
  }
  return best;
}

}  // namespace astro
