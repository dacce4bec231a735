#include <algorithm>
#include <array>
#include <vector>

#include "clifford/optimized.hpp"
#include "dispatch.hpp"
#include "g3_terms.hpp"
#include "simd.hpp"
#include "taps.hpp"

namespace clifford::opt {

namespace {

using detail::kG3Terms;
constexpr std::size_t kVec = kG3VectorBlades;
constexpr std::size_t kEven = kG3WeightBlades;
constexpr int kTerms = static_cast<int>(kG3Terms.size());

struct G3Args {
  const float* w;
  const float* x;     // (B, CI, H, W, 3)
  const float* bias;  // (C_out, 3)
  float* y;           // (B, C_out, OH, OW, 3)
  ConvShape s;
};

inline float* y_at(const G3Args& a, std::size_t b, std::size_t co, std::size_t oh, std::size_t ow) {
  const ConvShape& s = a.s;
  return a.y + (((b * s.out_channels + co) * s.out[1] + oh) * s.out[2] + ow) * kVec;
}

inline const float* x_row(const G3Args& a, std::size_t b, std::size_t ci, std::size_t ih) {
  const ConvShape& s = a.s;
  return a.x + ((b * s.in_channels + ci) * s.in[1] + ih) * s.in[2] * kVec;
}

// Forward weight row (co, cl, kh) or transposed weight row (ci, col, kh).
inline const float* w_row(const G3Args& a, std::size_t c0, std::size_t c1, std::size_t c1_extent,
                          std::size_t kh) {
  const ConvShape& s = a.s;
  return a.w + ((c0 * c1_extent + c1) * s.kernel[1] + kh) * s.kernel[2] * kEven;
}

template <int U>
void store_forward(const G3Args& a, std::size_t b0, std::size_t co, std::size_t oh, std::size_t ow,
                   const float (&sum)[U][kTerms]) {
  for (int u = 0; u < U; ++u) {
    float out[kVec] = {a.bias[co * kVec], a.bias[co * kVec + 1], a.bias[co * kVec + 2]};
    for (int k = 0; k < kTerms; ++k) {
      const auto& term = kG3Terms[static_cast<std::size_t>(k)];
      out[term.r] = term.sign > 0 ? out[term.r] + sum[u][k] : out[term.r] - sum[u][k];
    }
    std::copy(out, out + kVec, y_at(a, b0 + static_cast<std::size_t>(u), co, oh, ow));
  }
}

template <int U>
void g3_forward_scalar(const G3Args& a, std::size_t b0) {
  const ConvShape& s = a.s;
  const std::size_t cig = s.in_group();
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const std::size_t g = co / s.out_group();
    for (std::size_t oh = 0; oh < s.out[1]; ++oh) {
      const auto rh = detail::tap_range(oh, s.stride[1], s.padding[1], s.dilation[1], s.kernel[1], s.in[1]);
      for (std::size_t ow = 0; ow < s.out[2]; ++ow) {
        const auto rw = detail::tap_range(ow, s.stride[2], s.padding[2], s.dilation[2], s.kernel[2], s.in[2]);
        float sum[U][kTerms] = {};
        for (std::size_t cl = 0; cl < cig; ++cl) {
          for (std::size_t kh = rh.lo; kh < rh.hi; ++kh) {
            const std::size_t ih = oh * s.stride[1] + kh * s.dilation[1] - s.padding[1];
            const float* wr = w_row(a, co, cl, cig, kh);
            const float* xr[U];
            for (int u = 0; u < U; ++u) xr[u] = x_row(a, b0 + static_cast<std::size_t>(u), g * cig + cl, ih);
            for (std::size_t kw = rw.lo; kw < rw.hi; ++kw) {
              const std::size_t iw = ow * s.stride[2] + kw * s.dilation[2] - s.padding[2];
              const float* ws = wr + kw * kEven;
              for (int u = 0; u < U; ++u) {
                const float* xs = xr[u] + iw * kVec;
                for (int k = 0; k < kTerms; ++k) {
                  const auto& term = kG3Terms[static_cast<std::size_t>(k)];
                  sum[u][k] += ws[term.s] * xs[term.t];
                }
              }
            }
          }
        }
        store_forward<U>(a, b0, co, oh, ow, sum);
      }
    }
  }
}

// Transposed: output (co, oh, ow) gathers every input (ci, ih, iw) with
// ih*S - P + kh*Di == oh and applies the transposed per-tap matrix:
// out[t] += sign * w[s] * x[r] for each forward term (s, t -> r).
template <int U>
void store_transpose(const G3Args& a, std::size_t b0, std::size_t co, std::size_t oh, std::size_t ow,
                     const float (&sum)[U][kTerms]) {
  for (int u = 0; u < U; ++u) {
    float out[kVec] = {a.bias[co * kVec], a.bias[co * kVec + 1], a.bias[co * kVec + 2]};
    for (int k = 0; k < kTerms; ++k) {
      const auto& term = kG3Terms[static_cast<std::size_t>(k)];
      out[term.t] = term.sign > 0 ? out[term.t] + sum[u][k] : out[term.t] - sum[u][k];
    }
    std::copy(out, out + kVec, y_at(a, b0 + static_cast<std::size_t>(u), co, oh, ow));
  }
}

// Input index feeding output o through tap k, or -1.
inline long long transpose_source(std::size_t o, std::size_t k, std::size_t stride, std::size_t padding,
                                  std::size_t dilation, std::size_t length) {
  const long long num = static_cast<long long>(o + padding) - static_cast<long long>(k * dilation);
  if (num < 0 || num % static_cast<long long>(stride)) return -1;
  const long long i = num / static_cast<long long>(stride);
  return i < static_cast<long long>(length) ? i : -1;
}

// (tap, input index) pairs feeding each output index along one axis.
struct TapList {
  std::vector<std::size_t> begin;  // out + 1 offsets into taps
  std::vector<std::array<std::size_t, 2>> taps;
};

TapList transpose_taps(std::size_t out, std::size_t kernel, std::size_t stride, std::size_t padding,
                       std::size_t dilation, std::size_t length) {
  TapList list;
  list.begin.reserve(out + 1);
  for (std::size_t o = 0; o < out; ++o) {
    list.begin.push_back(list.taps.size());
    for (std::size_t k = 0; k < kernel; ++k) {
      const long long i = transpose_source(o, k, stride, padding, dilation, length);
      if (i >= 0) list.taps.push_back({k, static_cast<std::size_t>(i)});
    }
  }
  list.begin.push_back(list.taps.size());
  return list;
}

template <int U>
void g3_transpose_scalar(const G3Args& a, std::size_t b0, const TapList& th, const TapList& tw) {
  const ConvShape& s = a.s;
  const std::size_t cig = s.in_group();
  const std::size_t cog = s.out_group();
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const std::size_t g = co / cog;
    const std::size_t col = co % cog;
    for (std::size_t oh = 0; oh < s.out[1]; ++oh) {
      for (std::size_t ow = 0; ow < s.out[2]; ++ow) {
        float sum[U][kTerms] = {};
        for (std::size_t cl = 0; cl < cig; ++cl) {
          const std::size_t ci = g * cig + cl;
          for (std::size_t hi = th.begin[oh]; hi < th.begin[oh + 1]; ++hi) {
            const auto [kh, ih] = th.taps[hi];
            const float* wr = w_row(a, ci, col, cog, kh);
            const float* xr[U];
            for (int u = 0; u < U; ++u) xr[u] = x_row(a, b0 + static_cast<std::size_t>(u), ci, ih);
            for (std::size_t wi = tw.begin[ow]; wi < tw.begin[ow + 1]; ++wi) {
              const auto [kw, iw] = tw.taps[wi];
              const float* ws = wr + kw * kEven;
              for (int u = 0; u < U; ++u) {
                const float* xs = xr[u] + iw * kVec;
                for (int k = 0; k < kTerms; ++k) {
                  const auto& term = kG3Terms[static_cast<std::size_t>(k)];
                  sum[u][k] += ws[term.s] * xs[term.r];
                }
              }
            }
          }
        }
        store_transpose<U>(a, b0, co, oh, ow, sum);
      }
    }
  }
}

#if CLIFFORD_HAVE_AVX2

// Component planes of the input rows of U batch entries, zero padded along
// W so every tap of an 8-column output block is a plain unaligned load.
struct Planes {
  std::vector<float> data;
  std::size_t width = 0;  // padded row length
  std::size_t left = 0;   // zeros before input column 0
  std::size_t channels = 0;
  std::size_t height = 0;

  const float* row(std::size_t u, std::size_t ci, std::size_t ih) const {
    return data.data() + ((u * channels + ci) * height + ih) * kVec * width;
  }
};

Planes make_planes(const ConvShape& s, int unroll, std::size_t left, std::size_t width) {
  Planes p;
  p.left = left;
  p.width = width;
  p.channels = s.in_channels;
  p.height = s.in[1];
  p.data.assign(static_cast<std::size_t>(unroll) * p.channels * p.height * kVec * width, 0.0f);
  return p;
}

void fill_planes(Planes& p, const G3Args& a, std::size_t b0, int count) {
  const ConvShape& s = a.s;
  const std::size_t w = s.in[2];
  for (int u = 0; u < count; ++u) {
    for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
      for (std::size_t ih = 0; ih < s.in[1]; ++ih) {
        const float* src = x_row(a, b0 + static_cast<std::size_t>(u), ci, ih);
        float* dst = const_cast<float*>(p.row(static_cast<std::size_t>(u), ci, ih)) + p.left;
        std::size_t iw = 0;
        for (; iw + detail::kLanes <= w; iw += detail::kLanes) {
          __m256 c0, c1, c2;
          detail::deinterleave3(_mm256_loadu_ps(src + iw * kVec), _mm256_loadu_ps(src + iw * kVec + 8),
                                _mm256_loadu_ps(src + iw * kVec + 16), c0, c1, c2);
          _mm256_storeu_ps(dst + iw, c0);
          _mm256_storeu_ps(dst + p.width + iw, c1);
          _mm256_storeu_ps(dst + 2 * p.width + iw, c2);
        }
        for (; iw < w; ++iw) {
          for (std::size_t t = 0; t < kVec; ++t) dst[t * p.width + iw] = src[iw * kVec + t];
        }
      }
    }
  }
}

// Combines the nine term streams of an 8-column block (bias added) and
// writes `count` interleaved output vectors.
template <int U, bool Transposed>
void store_block(const G3Args& a, std::size_t b0, std::size_t co, std::size_t oh, std::size_t ow0, int count,
                 const __m256 (&acc)[U][kTerms]) {
  for (int u = 0; u < U; ++u) {
    __m256 out[kVec];
    for (std::size_t c = 0; c < kVec; ++c) out[c] = _mm256_set1_ps(a.bias[co * kVec + c]);
    for (int k = 0; k < kTerms; ++k) {
      const auto& term = kG3Terms[static_cast<std::size_t>(k)];
      const int dest = Transposed ? term.t : term.r;
      out[dest] = term.sign > 0 ? _mm256_add_ps(out[dest], acc[u][k]) : _mm256_sub_ps(out[dest], acc[u][k]);
    }
    __m256 v0, v1, v2;
    detail::interleave3(out[0], out[1], out[2], v0, v1, v2);
    float* y = y_at(a, b0 + static_cast<std::size_t>(u), co, oh, ow0);
    if (count == detail::kLanes) {
      _mm256_storeu_ps(y, v0);
      _mm256_storeu_ps(y + 8, v1);
      _mm256_storeu_ps(y + 16, v2);
    } else {
      alignas(32) float tmp[detail::kLanes * kVec];
      _mm256_store_ps(tmp, v0);
      _mm256_store_ps(tmp + 8, v1);
      _mm256_store_ps(tmp + 16, v2);
      std::copy(tmp, tmp + static_cast<std::size_t>(count) * kVec, y);
    }
  }
}

// One kernel row: every kw tap of an 8-column block, input columns
// advancing by `step` (+Di forward, -Di transposed) from `first`.
template <int U, bool Transposed>
inline void accumulate_row(const Planes& p, std::size_t ci, std::size_t ih, const float* wr, std::size_t kernel,
                           std::size_t first, std::ptrdiff_t step, __m256 (&acc)[U][kTerms]) {
  for (std::size_t kw = 0; kw < kernel; ++kw) {
    __m256 wv[kEven];
    for (std::size_t c = 0; c < kEven; ++c) wv[c] = _mm256_broadcast_ss(wr + kw * kEven + c);
    const std::size_t col = first + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(kw) * step);
    for (int u = 0; u < U; ++u) {
      const float* xs = p.row(static_cast<std::size_t>(u), ci, ih) + col;
      __m256 xv[kVec];
      for (std::size_t c = 0; c < kVec; ++c) xv[c] = _mm256_loadu_ps(xs + c * p.width);
      for (int k = 0; k < kTerms; ++k) {
        const auto& term = kG3Terms[static_cast<std::size_t>(k)];
        acc[u][k] = _mm256_fmadd_ps(wv[term.s], xv[Transposed ? term.r : term.t], acc[u][k]);
      }
    }
  }
}

constexpr std::size_t round_up_lanes(std::size_t v) {
  return (v + detail::kLanes - 1) / detail::kLanes * detail::kLanes;
}

// Unit stride along W: eight consecutive output columns per register.
template <int U>
void g3_forward_columns(const G3Args& a, std::size_t b0, const Planes& p) {
  const ConvShape& s = a.s;
  const std::size_t cig = s.in_group();
  const auto dil = static_cast<std::ptrdiff_t>(s.dilation[2]);
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const std::size_t g = co / s.out_group();
    for (std::size_t oh = 0; oh < s.out[1]; ++oh) {
      const auto rh = detail::tap_range(oh, s.stride[1], s.padding[1], s.dilation[1], s.kernel[1], s.in[1]);
      for (std::size_t ow0 = 0; ow0 < s.out[2]; ow0 += detail::kLanes) {
        __m256 acc[U][kTerms];
        for (int u = 0; u < U; ++u) {
          for (int k = 0; k < kTerms; ++k) acc[u][k] = _mm256_setzero_ps();
        }
        for (std::size_t cl = 0; cl < cig; ++cl) {
          for (std::size_t kh = rh.lo; kh < rh.hi; ++kh) {
            const std::size_t ih = oh * s.stride[1] + kh * s.dilation[1] - s.padding[1];
            accumulate_row<U, false>(p, g * cig + cl, ih, w_row(a, co, cl, cig, kh), s.kernel[2],
                                     p.left + ow0 - s.padding[2], dil, acc);
          }
        }
        const int count = static_cast<int>(std::min<std::size_t>(detail::kLanes, s.out[2] - ow0));
        store_block<U, false>(a, b0, co, oh, ow0, count, acc);
      }
    }
  }
}

template <int U>
void g3_transpose_columns(const G3Args& a, std::size_t b0, const Planes& p, const TapList& th) {
  const ConvShape& s = a.s;
  const std::size_t cig = s.in_group();
  const std::size_t cog = s.out_group();
  const auto dil = static_cast<std::ptrdiff_t>(s.dilation[2]);
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const std::size_t g = co / cog;
    const std::size_t col = co % cog;
    for (std::size_t oh = 0; oh < s.out[1]; ++oh) {
      for (std::size_t ow0 = 0; ow0 < s.out[2]; ow0 += detail::kLanes) {
        __m256 acc[U][kTerms];
        for (int u = 0; u < U; ++u) {
          for (int k = 0; k < kTerms; ++k) acc[u][k] = _mm256_setzero_ps();
        }
        for (std::size_t cl = 0; cl < cig; ++cl) {
          const std::size_t ci = g * cig + cl;
          for (std::size_t hi = th.begin[oh]; hi < th.begin[oh + 1]; ++hi) {
            const auto [kh, ih] = th.taps[hi];
            accumulate_row<U, true>(p, ci, ih, w_row(a, ci, col, cog, kh), s.kernel[2],
                                    p.left + ow0 + s.padding[2], -dil, acc);
          }
        }
        const int count = static_cast<int>(std::min<std::size_t>(detail::kLanes, s.out[2] - ow0));
        store_block<U, true>(a, b0, co, oh, ow0, count, acc);
      }
    }
  }
}

// Narrow outputs: eight consecutive kernel columns per register instead.
// Weights are gathered (masked past the last column), inputs come from the
// planes, contiguous when Di = 1.
template <int U>
void g3_forward_taps(const G3Args& a, std::size_t b0, const Planes& p) {
  const ConvShape& s = a.s;
  const std::size_t cig = s.in_group();
  const std::size_t dil = s.dilation[2];
  const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  const __m256i x_idx = _mm256_mullo_epi32(lane, _mm256_set1_epi32(static_cast<int>(dil)));
  __m256i w_idx[kEven];
  for (std::size_t c = 0; c < kEven; ++c) {
    w_idx[c] = _mm256_add_epi32(_mm256_slli_epi32(lane, 2), _mm256_set1_epi32(static_cast<int>(c)));
  }
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const std::size_t g = co / s.out_group();
    for (std::size_t oh = 0; oh < s.out[1]; ++oh) {
      const auto rh = detail::tap_range(oh, s.stride[1], s.padding[1], s.dilation[1], s.kernel[1], s.in[1]);
      for (std::size_t ow = 0; ow < s.out[2]; ++ow) {
        __m256 acc[U][kTerms];
        for (int u = 0; u < U; ++u) {
          for (int k = 0; k < kTerms; ++k) acc[u][k] = _mm256_setzero_ps();
        }
        for (std::size_t cl = 0; cl < cig; ++cl) {
          const std::size_t ci = g * cig + cl;
          for (std::size_t kh = rh.lo; kh < rh.hi; ++kh) {
            const std::size_t ih = oh * s.stride[1] + kh * s.dilation[1] - s.padding[1];
            const float* wr = w_row(a, co, cl, cig, kh);
            for (std::size_t kw = 0; kw < s.kernel[2]; kw += detail::kLanes) {
              const int count = static_cast<int>(std::min<std::size_t>(detail::kLanes, s.kernel[2] - kw));
              const __m256 mask = _mm256_castsi256_ps(detail::first_lanes(count));
              __m256 wv[kEven];
              for (std::size_t c = 0; c < kEven; ++c) {
                wv[c] = _mm256_mask_i32gather_ps(_mm256_setzero_ps(), wr + kw * kEven, w_idx[c], mask, 4);
              }
              const std::size_t col = p.left + ow * s.stride[2] - s.padding[2] + kw * dil;
              for (int u = 0; u < U; ++u) {
                const float* xs = p.row(static_cast<std::size_t>(u), ci, ih) + col;
                __m256 xv[kVec];
                for (std::size_t c = 0; c < kVec; ++c) {
                  xv[c] = dil == 1 ? _mm256_loadu_ps(xs + c * p.width)
                                   : _mm256_i32gather_ps(xs + c * p.width, x_idx, 4);
                }
                for (int k = 0; k < kTerms; ++k) {
                  const auto& term = kG3Terms[static_cast<std::size_t>(k)];
                  acc[u][k] = _mm256_fmadd_ps(wv[term.s], xv[term.t], acc[u][k]);
                }
              }
            }
          }
        }
        float sum[U][kTerms];
        for (int u = 0; u < U; ++u) {
          for (int k = 0; k < kTerms; ++k) sum[u][k] = detail::hsum(acc[u][k]);
        }
        store_forward<U>(a, b0, co, oh, ow, sum);
      }
    }
  }
}

// Batch blocks of `unroll` entries sharing one plane buffer.
template <class Kernel>
void run_columns(const G3Args& a, int unroll, Planes& p, Kernel&& kernel) {
  const std::size_t batch = a.s.batch;
  const auto step = static_cast<std::size_t>(unroll);
  std::size_t b = 0;
  for (; b + step <= batch; b += step) {
    fill_planes(p, a, b, unroll);
    switch (unroll) {
      case 1: kernel.template operator()<1>(b); break;
      case 2: kernel.template operator()<2>(b); break;
      case 4: kernel.template operator()<4>(b); break;
      default: kernel.template operator()<8>(b); break;
    }
  }
  for (; b < batch; ++b) {
    fill_planes(p, a, b, 1);
    kernel.template operator()<1>(b);
  }
}

#endif

G3Args make_args(const Tensor& w, const Tensor& x, const Tensor& bias, Tensor& y, const ConvShape& s) {
  return {w.data(), x.data(), bias.data(), y.data(), s};
}

}  // namespace

Tensor g3_conv2d(const G3ConvParams& p, const Tensor& x, const BackendConfig& cfg) {
  validate(cfg);
  const ConvShape s = resolve_g3_conv(p, x);
  const Tensor w = detail::contiguous(p.weight);
  const Tensor xin = detail::contiguous(x);
  const Tensor bias = detail::contiguous(p.bias);
  Tensor y = Tensor::zeros(s.output_shape(kVec));
  const G3Args args = make_args(w, xin, bias, y, s);
#if CLIFFORD_HAVE_AVX2
  if (cfg.simd) {
    if (s.stride[2] == 1 && s.out[2] >= detail::kLanes) {
      // column index = left + ow + kw*Di - P, left = P
      const std::size_t width =
          std::max(s.padding[2] + s.in[2], round_up_lanes(s.out[2]) + (s.kernel[2] - 1) * s.dilation[2]);
      Planes planes = make_planes(s, cfg.unroll, s.padding[2], width);
      run_columns(args, cfg.unroll, planes, [&]<int U>(std::size_t b0) { g3_forward_columns<U>(args, b0, planes); });
      return y;
    }
    // column index = left + ow*S - P + kw*Di over all taps, padded to 8
    const std::size_t span = (round_up_lanes(s.kernel[2]) - 1) * s.dilation[2] + 1;
    const std::size_t width = std::max(s.padding[2] + s.in[2], (s.out[2] - 1) * s.stride[2] + span);
    Planes planes = make_planes(s, cfg.unroll, s.padding[2], width);
    run_columns(args, cfg.unroll, planes, [&]<int U>(std::size_t b0) { g3_forward_taps<U>(args, b0, planes); });
    return y;
  }
#endif
  detail::for_each_unrolled(s.batch, cfg.unroll, [&]<int U>(std::size_t b0) { g3_forward_scalar<U>(args, b0); });
  return y;
}

Tensor g3_conv_transpose2d(const G3ConvParams& p, const Tensor& x, const BackendConfig& cfg) {
  validate(cfg);
  const ConvShape s = resolve_g3_conv_transpose(p, x);
  const Tensor w = detail::contiguous(p.weight);
  const Tensor xin = detail::contiguous(x);
  const Tensor bias = detail::contiguous(p.bias);
  Tensor y = Tensor::zeros(s.output_shape(kVec));
  const G3Args args = make_args(w, xin, bias, y, s);
  const TapList th = transpose_taps(s.out[1], s.kernel[1], s.stride[1], s.padding[1], s.dilation[1], s.in[1]);
#if CLIFFORD_HAVE_AVX2
  if (cfg.simd && cfg.vectorize_g3_transpose && s.stride[2] == 1) {
    // column index = left + ow + P - kw*Di
    const std::size_t reach = (s.kernel[2] - 1) * s.dilation[2];
    const std::size_t left = reach > s.padding[2] ? reach - s.padding[2] : 0;
    const std::size_t width = std::max(left + s.in[2], left + round_up_lanes(s.out[2]) + s.padding[2]);
    Planes planes = make_planes(s, cfg.unroll, left, width);
    run_columns(args, cfg.unroll, planes,
                [&]<int U>(std::size_t b0) { g3_transpose_columns<U>(args, b0, planes, th); });
    return y;
  }
#endif
  const TapList tw = transpose_taps(s.out[2], s.kernel[2], s.stride[2], s.padding[2], s.dilation[2], s.in[2]);
  detail::for_each_unrolled(s.batch, cfg.unroll,
                            [&]<int U>(std::size_t b0) { g3_transpose_scalar<U>(args, b0, th, tw); });
  return y;
}

}  // namespace clifford::opt
