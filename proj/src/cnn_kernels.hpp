#pragma once

#include <algorithm>
#include <cstddef>
#include <type_traits>

// Convolution microkernels over channels-innermost (HWC) activations.
// Weight packings:
//   forward        [u][v][i][o]  -- broadcast one input sample, vectorize over o
//   backward-data  [u][v][o][i]  -- broadcast one delta sample, vectorize over i
// Per output pixel the reduction order over (u, v, i) is fixed, so results are
// identical regardless of pixel blocking or tiling.
//
// The float kernels for the production channel counts (64, 16) are written with
// explicit SIMD intrinsics: the scalar loops below express the same math, but
// compilers tend to mangle the accumulator layout with shuffles.  The template
// versions remain as the portable fallback and as the double-precision path
// used by the finite-difference gradient oracle.

#if defined(__AVX512F__) || (defined(__AVX2__) && defined(__FMA__))
#define ASTRO_CNN_SIMD 1
#include <immintrin.h>
#endif

namespace astro::detail {

#ifdef ASTRO_CNN_SIMD
namespace simd {

#ifdef __AVX512F__
using vfloat = __m512;
inline constexpr int kLanes = 16;
inline vfloat v_load(const float* p) { return _mm512_loadu_ps(p); }
inline vfloat v_set1(float x) { return _mm512_set1_ps(x); }
inline vfloat v_fma(vfloat a, vfloat b, vfloat c) { return _mm512_fmadd_ps(a, b, c); }
inline vfloat v_max0(vfloat a) { return _mm512_max_ps(a, _mm512_setzero_ps()); }
inline vfloat v_zero() { return _mm512_setzero_ps(); }
inline void v_store(float* p, vfloat a) { _mm512_storeu_ps(p, a); }
#else
using vfloat = __m256;
inline constexpr int kLanes = 8;
inline vfloat v_load(const float* p) { return _mm256_loadu_ps(p); }
inline vfloat v_set1(float x) { return _mm256_set1_ps(x); }
inline vfloat v_fma(vfloat a, vfloat b, vfloat c) { return _mm256_fmadd_ps(a, b, c); }
inline vfloat v_max0(vfloat a) { return _mm256_max_ps(a, _mm256_setzero_ps()); }
inline vfloat v_zero() { return _mm256_setzero_ps(); }
inline void v_store(float* p, vfloat a) { _mm256_storeu_ps(p, a); }
#endif

// Pixels per forward tile: as wide as the accumulators fit in registers.
constexpr int pick_bw(int nr) {
  int regs = kLanes == 16 ? 32 : 16;
  int bw = (regs - 4) / nr - 1;
  return bw < 1 ? 1 : (bw > 16 ? 16 : bw);
}

template <int NR, int BW>
inline void fwd_tile(const float* in, const float* w, const float* bias, float* out, int iw,
                     int ic, int ow, int kh, int kw, bool relu, int r, int c0) {
  constexpr int OC = NR * kLanes;
  vfloat acc[BW][NR];
  for (int b = 0; b < BW; ++b) {
    for (int n = 0; n < NR; ++n) acc[b][n] = v_load(bias + n * kLanes);
  }
  for (int u = 0; u < kh; ++u) {
    const float* inrow = in + (static_cast<size_t>(r + u) * iw + c0) * ic;
    const float* wrow = w + static_cast<size_t>(u) * kw * ic * OC;
    for (int v = 0; v < kw; ++v) {
      for (int i = 0; i < ic; ++i) {
        const float* wv = wrow + (static_cast<size_t>(v) * ic + i) * OC;
        vfloat wz[NR];
        for (int n = 0; n < NR; ++n) wz[n] = v_load(wv + n * kLanes);
        const float* xp = inrow + i;
        for (int b = 0; b < BW; ++b) {
          vfloat xb = v_set1(xp[(static_cast<size_t>(b) + v) * ic]);
          for (int n = 0; n < NR; ++n) acc[b][n] = v_fma(xb, wz[n], acc[b][n]);
        }
      }
    }
  }
  for (int b = 0; b < BW; ++b) {
    float* op = out + (static_cast<size_t>(r) * ow + c0 + b) * OC;
    for (int n = 0; n < NR; ++n) v_store(op + n * kLanes, relu ? v_max0(acc[b][n]) : acc[b][n]);
  }
}

// Remainder columns are covered by progressively narrower tiles; a pixel's
// value does not depend on the tile width (the reduction order over
// (u, v, i) is the same in every lane), so the cover is seamless.
template <int NR, int W>
inline void fwd_rem(const float* in, const float* w, const float* bias, float* out, int iw,
                    int ic, int ow, int kh, int kw, bool relu, int r, int& c) {
  if (ow - c >= W) {
    fwd_tile<NR, W>(in, w, bias, out, iw, ic, ow, kh, kw, relu, r, c);
    c += W;
  }
  if constexpr (W > 1) {
    fwd_rem<NR, W / 2>(in, w, bias, out, iw, ic, ow, kh, kw, relu, r, c);
  }
}

template <int OC>
inline void fwd(const float* in, const float* w, const float* bias, float* out, int iw, int ic,
                int oh, int ow, int kh, int kw, bool relu) {
  static_assert(OC % kLanes == 0);
  constexpr int NR = OC / kLanes;
  constexpr int BW = pick_bw(NR);
  constexpr int W0 = BW > 8 ? 8 : 4;
  for (int r = 0; r < oh; ++r) {
    int c = 0;
    for (; c + BW <= ow; c += BW) {
      fwd_tile<NR, BW>(in, w, bias, out, iw, ic, ow, kh, kw, relu, r, c);
    }
    while (c < ow) fwd_rem<NR, W0>(in, w, bias, out, iw, ic, ow, kh, kw, relu, r, c);
  }
}

// dW[u][v][i][:] accumulated in registers across the whole output plane, one
// store per slot (the scalar fallback read-modify-writes the slab per pixel).
// CH interleaved column chains hide the FMA latency; the chain split depends
// only on ow, so the summation order is fixed for a given layer shape.
// One dw cell (fixed u, v, i): x walks (r, c) with the given strides while the
// matching delta row is consumed; two column chains hide the FMA latency.
template <int OC>
inline void wg_cell(const float* x, const float* delta, float* out, int xrs, int xcs, int oh,
                    int ow) {
  constexpr int NR = OC / kLanes;
  constexpr int CH = NR >= 4 ? 2 : 4;
  vfloat acc[CH][NR];
  for (int p = 0; p < CH; ++p) {
    for (int n = 0; n < NR; ++n) acc[p][n] = v_zero();
  }
  for (int r = 0; r < oh; ++r) {
    const float* xrow = x + static_cast<size_t>(r) * xrs;
    const float* drow = delta + static_cast<size_t>(r) * ow * OC;
    int c = 0;
    for (; c + CH <= ow; c += CH) {
      for (int p = 0; p < CH; ++p) {
        vfloat xb = v_set1(xrow[(static_cast<size_t>(c) + p) * xcs]);
        const float* dp = drow + (static_cast<size_t>(c) + p) * OC;
        for (int n = 0; n < NR; ++n) acc[p][n] = v_fma(xb, v_load(dp + n * kLanes), acc[p][n]);
      }
    }
    for (int p = 0; c < ow; ++c, ++p) {
      vfloat xb = v_set1(xrow[static_cast<size_t>(c) * xcs]);
      const float* dp = drow + static_cast<size_t>(c) * OC;
      for (int n = 0; n < NR; ++n) acc[p][n] = v_fma(xb, v_load(dp + n * kLanes), acc[p][n]);
    }
  }
  for (int n = 0; n < NR; ++n) {
    vfloat sum = acc[0][n];
    for (int p = 1; p < CH; ++p) sum = sum + acc[p][n];
    v_store(out + n * kLanes, sum);
  }
}

// dw[u][v][i][o] = sum_{r,c} x[r+u][c+v][i] * delta[r][c][o].  The r/c loops
// run once per block of IB input channels (one delta load feeds IB FMA
// chains), or per pair of kernel columns when the channel axis is degenerate,
// so every column is covered with no remainder inside the hot loop.
template <int OC>
inline void weight_grad(const float* in, const float* delta, float* dw, int iw, int ic, int oh,
                        int ow, int kh, int kw) {
  static_assert(OC % kLanes == 0);
  constexpr int NR = OC / kLanes;
  constexpr int IB = NR >= 4 ? 4 : 16;
  for (int u = 0; u < kh; ++u) {
    if (ic == 1 && kw % 2 == 0) {
      for (int v = 0; v < kw; v += 2) {
        vfloat acc[2][NR];
        for (int p = 0; p < 2; ++p) {
          for (int n = 0; n < NR; ++n) acc[p][n] = v_zero();
        }
        for (int r = 0; r < oh; ++r) {
          const float* xrow = in + (static_cast<size_t>(r) + u) * iw + v;
          const float* drow = delta + static_cast<size_t>(r) * ow * OC;
          for (int c = 0; c < ow; ++c) {
            vfloat x0 = v_set1(xrow[c]);
            vfloat x1 = v_set1(xrow[c + 1]);
            const float* dp = drow + static_cast<size_t>(c) * OC;
            for (int n = 0; n < NR; ++n) {
              vfloat dz = v_load(dp + n * kLanes);
              acc[0][n] = v_fma(x0, dz, acc[0][n]);
              acc[1][n] = v_fma(x1, dz, acc[1][n]);
            }
          }
        }
        float* s = dw + (static_cast<size_t>(u) * kw + v) * OC;
        for (int p = 0; p < 2; ++p) {
          for (int n = 0; n < NR; ++n) v_store(s + p * OC + n * kLanes, acc[p][n]);
        }
      }
      continue;
    }
    for (int v = 0; v < kw; ++v) {
      float* slab = dw + (static_cast<size_t>(u) * kw + v) * ic * OC;
      const float* xbase = in + (static_cast<size_t>(u) * iw + v) * ic;
      int i0 = 0;
      for (; i0 + IB <= ic; i0 += IB) {
        vfloat acc[IB][NR];
        for (int p = 0; p < IB; ++p) {
          for (int n = 0; n < NR; ++n) acc[p][n] = v_zero();
        }
        for (int r = 0; r < oh; ++r) {
          const float* xrow = xbase + static_cast<size_t>(r) * iw * ic + i0;
          const float* drow = delta + static_cast<size_t>(r) * ow * OC;
          for (int c = 0; c < ow; ++c) {
            vfloat dz[NR];
            const float* dp = drow + static_cast<size_t>(c) * OC;
            for (int n = 0; n < NR; ++n) dz[n] = v_load(dp + n * kLanes);
            const float* xp = xrow + static_cast<size_t>(c) * ic;
            for (int p = 0; p < IB; ++p) {
              vfloat xb = v_set1(xp[p]);
              for (int n = 0; n < NR; ++n) acc[p][n] = v_fma(xb, dz[n], acc[p][n]);
            }
          }
        }
        for (int p = 0; p < IB; ++p) {
          float* s = slab + (static_cast<size_t>(i0) + p) * OC;
          for (int n = 0; n < NR; ++n) v_store(s + n * kLanes, acc[p][n]);
        }
      }
      for (; i0 < ic; ++i0) {
        wg_cell<OC>(xbase + i0, delta, slab + static_cast<size_t>(i0) * OC, iw * ic, ic, oh, ow);
      }
    }
  }
}

}  // namespace simd
#endif  // ASTRO_CNN_SIMD

template <typename T, int OC, int BW>
inline void fwd_tile(const T* __restrict in, const T* __restrict w, const T* __restrict bias,
                     T* __restrict out, int iw, int ic, int ow, int kh, int kw, bool relu, int r,
                     int c0) {
  T acc[BW][OC];
  for (int b = 0; b < BW; ++b) {
    for (int o = 0; o < OC; ++o) acc[b][o] = bias[o];
  }
  for (int u = 0; u < kh; ++u) {
    const T* inrow = in + (static_cast<size_t>(r + u) * iw + c0) * ic;
    const T* wrow = w + static_cast<size_t>(u) * kw * ic * OC;
    for (int v = 0; v < kw; ++v) {
      for (int i = 0; i < ic; ++i) {
        const T* wv = wrow + (static_cast<size_t>(v) * ic + i) * OC;
        for (int b = 0; b < BW; ++b) {
          T x = inrow[(static_cast<size_t>(b) + v) * ic + i];
          for (int o = 0; o < OC; ++o) acc[b][o] += x * wv[o];
        }
      }
    }
  }
  for (int b = 0; b < BW; ++b) {
    T* op = out + (static_cast<size_t>(r) * ow + c0 + b) * OC;
    for (int o = 0; o < OC; ++o) op[o] = relu ? std::max(acc[b][o], T(0)) : acc[b][o];
  }
}

template <typename T, int OC>
inline void fwd_fixed_oc(const T* in, const T* w, const T* bias, T* out, int iw, int ic, int oh,
                         int ow, int kh, int kw, bool relu) {
  constexpr int BW = OC >= 64 ? 4 : 8;
  for (int r = 0; r < oh; ++r) {
    int c = 0;
    for (; c + BW <= ow; c += BW) {
      fwd_tile<T, OC, BW>(in, w, bias, out, iw, ic, ow, kh, kw, relu, r, c);
    }
    for (; c < ow; ++c) {
      fwd_tile<T, OC, 1>(in, w, bias, out, iw, ic, ow, kh, kw, relu, r, c);
    }
  }
}

// Single output channel: each pixel is kh row-dot-products of length kw*ic
// over contiguous memory.  Explicit partial-sum lanes so the reduction
// vectorizes without relaxed float semantics.
template <typename T>
inline void fwd_oc1(const T* __restrict in, const T* __restrict w, T bias, T* __restrict out,
                    int iw, int ic, int oh, int ow, int kh, int kw, bool relu) {
  const int klen = kw * ic;
  constexpr int L = 16;
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      T part[L] = {};
      T tail = 0;
      for (int u = 0; u < kh; ++u) {
        const T* x = in + (static_cast<size_t>(r + u) * iw + c) * ic;
        const T* wr = w + static_cast<size_t>(u) * klen;
        int j = 0;
        for (; j + L <= klen; j += L) {
          for (int l = 0; l < L; ++l) part[l] += x[j + l] * wr[j + l];
        }
        for (; j < klen; ++j) tail += x[j] * wr[j];
      }
      T acc = bias;
      for (int l = 0; l < L; ++l) acc += part[l];
      acc += tail;
      out[static_cast<size_t>(r) * ow + c] = relu ? std::max(acc, T(0)) : acc;
    }
  }
}

template <typename T>
inline void fwd_generic(const T* in, const T* w, const T* bias, T* out, int iw, int ic, int oc,
                        int oh, int ow, int kh, int kw, bool relu) {
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      T* op = out + (static_cast<size_t>(r) * ow + c) * oc;
      for (int o = 0; o < oc; ++o) op[o] = bias[o];
      for (int u = 0; u < kh; ++u) {
        const T* inrow = in + (static_cast<size_t>(r + u) * iw + c) * ic;
        const T* wrow = w + static_cast<size_t>(u) * kw * ic * oc;
        for (int v = 0; v < kw; ++v) {
          for (int i = 0; i < ic; ++i) {
            T x = inrow[static_cast<size_t>(v) * ic + i];
            const T* wv = wrow + (static_cast<size_t>(v) * ic + i) * oc;
            for (int o = 0; o < oc; ++o) op[o] += x * wv[o];
          }
        }
      }
      if (relu) {
        for (int o = 0; o < oc; ++o) op[o] = std::max(op[o], T(0));
      }
    }
  }
}

template <typename T>
inline void conv_forward(const T* in, const T* w_fwd, const T* bias, T* out, int iw, int ic,
                         int oc, int oh, int ow, int kh, int kw, bool relu) {
#ifdef ASTRO_CNN_SIMD
  if constexpr (std::is_same_v<T, float>) {
    if (oc == 64) return simd::fwd<64>(in, w_fwd, bias, out, iw, ic, oh, ow, kh, kw, relu);
    if (oc == 16) return simd::fwd<16>(in, w_fwd, bias, out, iw, ic, oh, ow, kh, kw, relu);
  }
#endif
  if (oc == 64) {
    fwd_fixed_oc<T, 64>(in, w_fwd, bias, out, iw, ic, oh, ow, kh, kw, relu);
  } else if (oc == 16) {
    fwd_fixed_oc<T, 16>(in, w_fwd, bias, out, iw, ic, oh, ow, kh, kw, relu);
  } else if (oc == 1) {
    fwd_oc1<T>(in, w_fwd, bias[0], out, iw, ic, oh, ow, kh, kw, relu);
  } else {
    fwd_generic<T>(in, w_fwd, bias, out, iw, ic, oc, oh, ow, kh, kw, relu);
  }
}

// delta <- delta where the post-activation was positive, else 0
template <typename T>
inline void relu_backward(const T* act, T* delta, size_t n) {
  for (size_t j = 0; j < n; ++j) delta[j] = act[j] > T(0) ? delta[j] : T(0);
}

template <typename T>
inline void bias_grad(const T* delta, int npix, int oc, T* db) {
  for (int p = 0; p < npix; ++p) {
    const T* dp = delta + static_cast<size_t>(p) * oc;
    for (int o = 0; o < oc; ++o) db[o] += dp[o];
  }
}

// dW accumulated in the forward packing [u][v][i][o]; dw zeroed by the caller.
template <typename T, int OC>
inline void weight_grad_fixed_oc(const T* in, const T* delta, T* dw, int iw, int ic, int oh,
                                 int ow, int kh, int kw) {
  for (int u = 0; u < kh; ++u) {
    for (int v = 0; v < kw; ++v) {
      T* __restrict slab = dw + (static_cast<size_t>(u) * kw + v) * ic * OC;
      for (int r = 0; r < oh; ++r) {
        const T* inrow = in + (static_cast<size_t>(r + u) * iw + v) * ic;
        const T* drow = delta + static_cast<size_t>(r) * ow * OC;
        for (int c = 0; c < ow; ++c) {
          const T* dp = drow + static_cast<size_t>(c) * OC;
          const T* xp = inrow + static_cast<size_t>(c) * ic;
          for (int i = 0; i < ic; ++i) {
            T x = xp[i];
            T* s = slab + static_cast<size_t>(i) * OC;
            for (int o = 0; o < OC; ++o) s[o] += x * dp[o];
          }
        }
      }
    }
  }
}

template <typename T>
inline void weight_grad_oc1(const T* in, const T* delta, T* dw, int iw, int ic, int oh, int ow,
                            int kh, int kw) {
  const int klen = kw * ic;
  for (int u = 0; u < kh; ++u) {
    T* __restrict wrow = dw + static_cast<size_t>(u) * klen;
    for (int r = 0; r < oh; ++r) {
      const T* inrow = in + static_cast<size_t>(r + u) * iw * ic;
      const T* drow = delta + static_cast<size_t>(r) * ow;
      for (int c = 0; c < ow; ++c) {
        T d = drow[c];
        const T* xp = inrow + static_cast<size_t>(c) * ic;
        for (int j = 0; j < klen; ++j) wrow[j] += d * xp[j];
      }
    }
  }
}

template <typename T>
inline void weight_grad_generic(const T* in, const T* delta, T* dw, int iw, int ic, int oc,
                                int oh, int ow, int kh, int kw) {
  for (int u = 0; u < kh; ++u) {
    for (int v = 0; v < kw; ++v) {
      T* slab = dw + (static_cast<size_t>(u) * kw + v) * ic * oc;
      for (int r = 0; r < oh; ++r) {
        const T* inrow = in + (static_cast<size_t>(r + u) * iw + v) * ic;
        const T* drow = delta + static_cast<size_t>(r) * ow * oc;
        for (int c = 0; c < ow; ++c) {
          const T* dp = drow + static_cast<size_t>(c) * oc;
          const T* xp = inrow + static_cast<size_t>(c) * ic;
          for (int i = 0; i < ic; ++i) {
            T x = xp[i];
            T* s = slab + static_cast<size_t>(i) * oc;
            for (int o = 0; o < oc; ++o) s[o] += x * dp[o];
          }
        }
      }
    }
  }
}

template <typename T>
inline void weight_grad(const T* in, const T* delta, T* dw, int iw, int ic, int oc, int oh,
                        int ow, int kh, int kw) {
#ifdef ASTRO_CNN_SIMD
  if constexpr (std::is_same_v<T, float>) {
    if (oc == 64) return simd::weight_grad<64>(in, delta, dw, iw, ic, oh, ow, kh, kw);
    if (oc == 16) return simd::weight_grad<16>(in, delta, dw, iw, ic, oh, ow, kh, kw);
  }
#endif
  if (oc == 64) {
    weight_grad_fixed_oc<T, 64>(in, delta, dw, iw, ic, oh, ow, kh, kw);
  } else if (oc == 16) {
    weight_grad_fixed_oc<T, 16>(in, delta, dw, iw, ic, oh, ow, kh, kw);
  } else if (oc == 1) {
    weight_grad_oc1<T>(in, delta, dw, iw, ic, oh, ow, kh, kw);
  } else {
    weight_grad_generic<T>(in, delta, dw, iw, ic, oc, oh, ow, kh, kw);
  }
}

}  // namespace astro::detail
