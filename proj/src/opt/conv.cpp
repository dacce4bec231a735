#include <algorithm>
#include <array>

#include "clifford/optimized.hpp"
#include "dispatch.hpp"
#include "simd.hpp"
#include "taps.hpp"

namespace clifford::opt {

namespace {

struct ConvArgs {
  const float* w;     // (CO, CI/G, KD, KH, KW, N)
  const float* x;     // (B, CI, D, H, W, N)
  const float* bias;  // (CO, N)
  float* y;           // (B, CO, OD, OH, OW, N)
  ConvShape s;
  const MultTable* table;
};

// Walks every output position of one (batch block, output channel). `taps`
// reduces over the valid tap window into out[u][blade]; bias is added on store.
template <int N, int U, class Taps>
void for_each_output(const ConvArgs& a, std::size_t b0, std::size_t co, Taps&& taps) {
  const ConvShape& s = a.s;
  const std::size_t g = co / s.out_group();
  for (std::size_t od = 0; od < s.out[0]; ++od) {
    const auto rd = detail::tap_range(od, s.stride[0], s.padding[0], s.dilation[0], s.kernel[0], s.in[0]);
    for (std::size_t oh = 0; oh < s.out[1]; ++oh) {
      const auto rh = detail::tap_range(oh, s.stride[1], s.padding[1], s.dilation[1], s.kernel[1], s.in[1]);
      for (std::size_t ow = 0; ow < s.out[2]; ++ow) {
        const auto rw = detail::tap_range(ow, s.stride[2], s.padding[2], s.dilation[2], s.kernel[2], s.in[2]);
        float out[U][N];
        taps(g, std::array<std::size_t, 3>{od, oh, ow}, rd, rh, rw, out);
        for (int u = 0; u < U; ++u) {
          float* yo = a.y + ((((b0 + static_cast<std::size_t>(u)) * s.out_channels + co) * s.out[0] + od) * s.out[1] + oh) *
                                s.out[2] * N +
                      ow * N;
          for (int r = 0; r < N; ++r) yo[r] = out[u][r] + a.bias[co * N + static_cast<std::size_t>(r)];
        }
      }
    }
  }
}

// Input row (ci, id, ih) of batch item b and weight row (co, cl, kd, kh).
inline const float* x_row(const ConvArgs& a, std::size_t b, std::size_t ci, std::size_t id,
                          std::size_t ih, std::size_t n) {
  const ConvShape& s = a.s;
  return a.x + (((b * s.in_channels + ci) * s.in[0] + id) * s.in[1] + ih) * s.in[2] * n;
}

inline const float* w_row(const ConvArgs& a, std::size_t co, std::size_t cl, std::size_t kd,
                          std::size_t kh, std::size_t n) {
  const ConvShape& s = a.s;
  return a.w + (((co * s.in_group() + cl) * s.kernel[0] + kd) * s.kernel[1] + kh) * s.kernel[2] * n;
}

template <int N, int U>
void conv_block_scalar(const ConvArgs& a, std::size_t b0) {
  const ConvShape& s = a.s;
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    for_each_output<N, U>(a, b0, co, [&](std::size_t g, std::array<std::size_t, 3> o, detail::TapRange rd,
                                         detail::TapRange rh, detail::TapRange rw, float (&out)[U][N]) {
      float sum[U][N][N] = {};
      for (std::size_t cl = 0; cl < s.in_group(); ++cl) {
        const std::size_t ci = g * s.in_group() + cl;
        for (std::size_t kd = rd.lo; kd < rd.hi; ++kd) {
          const std::size_t id = o[0] * s.stride[0] + kd * s.dilation[0] - s.padding[0];
          for (std::size_t kh = rh.lo; kh < rh.hi; ++kh) {
            const std::size_t ih = o[1] * s.stride[1] + kh * s.dilation[1] - s.padding[1];
            const float* wr = w_row(a, co, cl, kd, kh, N);
            const float* xr[U];
            for (int u = 0; u < U; ++u) xr[u] = x_row(a, b0 + static_cast<std::size_t>(u), ci, id, ih, N);
            for (std::size_t kw = rw.lo; kw < rw.hi; ++kw) {
              const std::size_t iw = o[2] * s.stride[2] + kw * s.dilation[2] - s.padding[2];
              const float* ws = wr + kw * N;
              for (int u = 0; u < U; ++u) {
                const float* xs = xr[u] + iw * N;
                for (int bs = 0; bs < N; ++bs) {
                  for (int bt = 0; bt < N; ++bt) sum[u][bs][bt] += ws[bs] * xs[bt];
                }
              }
            }
          }
        }
      }
      for (int u = 0; u < U; ++u) {
        for (int r = 0; r < N; ++r) {
          float acc = 0.0f;
          for (int bs = 0; bs < N; ++bs) {
            const float v = sum[u][bs][bs ^ r];
            acc = a.table->sign(bs, bs ^ r) > 0 ? acc + v : acc - v;
          }
          out[u][r] = acc;
        }
      }
    });
  }
}

#if CLIFFORD_HAVE_AVX2

template <int N, int U>
void conv_block_simd(const ConvArgs& a, std::size_t b0,
                     const std::array<std::array<float, detail::kLanes>, kMaxBlades>& signs) {
  using detail::xor_lanes;
  constexpr int per_vec = detail::kLanes / N;  // multivectors (taps) per register
  const ConvShape& s = a.s;
  const auto x_step = static_cast<std::ptrdiff_t>(s.dilation[2] * N);
  const bool contiguous_taps = s.dilation[2] == 1;
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    for_each_output<N, U>(a, b0, co, [&](std::size_t g, std::array<std::size_t, 3> o, detail::TapRange rd,
                                         detail::TapRange rh, detail::TapRange rw, float (&out)[U][N]) {
      __m256 acc[U][N];
      for (int u = 0; u < U; ++u) {
        for (int r = 0; r < N; ++r) acc[u][r] = _mm256_setzero_ps();
      }
      for (std::size_t cl = 0; cl < s.in_group(); ++cl) {
        const std::size_t ci = g * s.in_group() + cl;
        for (std::size_t kd = rd.lo; kd < rd.hi; ++kd) {
          const std::size_t id = o[0] * s.stride[0] + kd * s.dilation[0] - s.padding[0];
          for (std::size_t kh = rh.lo; kh < rh.hi; ++kh) {
            const std::size_t ih = o[1] * s.stride[1] + kh * s.dilation[1] - s.padding[1];
            const float* wr = w_row(a, co, cl, kd, kh, N);
            const float* xr[U];
            for (int u = 0; u < U; ++u) xr[u] = x_row(a, b0 + static_cast<std::size_t>(u), ci, id, ih, N);
            for (std::size_t kw = rw.lo; kw < rw.hi; kw += per_vec) {
              const int count = static_cast<int>(std::min<std::size_t>(per_vec, rw.hi - kw));
              const std::size_t iw = o[2] * s.stride[2] + kw * s.dilation[2] - s.padding[2];
              const __m256 w = count == per_vec
                                   ? _mm256_loadu_ps(wr + kw * N)
                                   : _mm256_maskload_ps(wr + kw * N, detail::first_lanes(count * N));
              __m256 wp[N];
              wp[0] = w;
              wp[1] = xor_lanes<1>(w);
              if constexpr (N > 2) {
                wp[2] = xor_lanes<2>(w);
                wp[3] = xor_lanes<3>(w);
              }
              if constexpr (N > 4) {
                wp[4] = xor_lanes<4>(w);
                wp[5] = xor_lanes<5>(w);
                wp[6] = xor_lanes<6>(w);
                wp[7] = xor_lanes<7>(w);
              }
              for (int u = 0; u < U; ++u) {
                const float* xs = xr[u] + iw * N;
                const __m256 xv = (contiguous_taps && count == per_vec)
                                      ? _mm256_loadu_ps(xs)
                                      : detail::load_multivectors<N>(xs, count, x_step);
                for (int r = 0; r < N; ++r) acc[u][r] = _mm256_fmadd_ps(wp[r], xv, acc[u][r]);
              }
            }
          }
        }
      }
      for (int u = 0; u < U; ++u) {
        for (int r = 0; r < N; ++r) {
          out[u][r] = detail::hsum(_mm256_mul_ps(acc[u][r], _mm256_loadu_ps(signs[static_cast<std::size_t>(r)].data())));
        }
      }
    });
  }
}

#endif

template <int N>
void run_conv(const ConvArgs& a, const BackendConfig& cfg) {
#if CLIFFORD_HAVE_AVX2
  if (cfg.simd) {
    const auto signs = detail::lane_signs(*a.table);
    detail::for_each_unrolled(a.s.batch, cfg.unroll,
                              [&]<int U>(std::size_t b0) { conv_block_simd<N, U>(a, b0, signs); });
    return;
  }
#endif
  detail::for_each_unrolled(a.s.batch, cfg.unroll,
                            [&]<int U>(std::size_t b0) { conv_block_scalar<N, U>(a, b0); });
}

Tensor conv_nd(const ConvParams& p, const Tensor& x, const BackendConfig& cfg, std::size_t rank) {
  validate(cfg);
  const ConvShape s = resolve_conv(p, x, rank);
  const Tensor w = detail::contiguous(p.weight);
  const Tensor xin = detail::contiguous(x);
  const Tensor bias = detail::contiguous(p.bias);
  const MultTable table(p.sig);
  const auto n = static_cast<std::size_t>(p.sig.blades());
  Tensor y = Tensor::zeros(s.output_shape(n));
  const ConvArgs args{w.data(), xin.data(), bias.data(), y.data(), s, &table};
  detail::dispatch_blades(p.sig.blades(), [&]<int N>() { run_conv<N>(args, cfg); });
  return y;
}

}  // namespace

Tensor conv1d(const ConvParams& p, const Tensor& x, const BackendConfig& cfg) { return conv_nd(p, x, cfg, 1); }
Tensor conv2d(const ConvParams& p, const Tensor& x, const BackendConfig& cfg) { return conv_nd(p, x, cfg, 2); }
Tensor conv3d(const ConvParams& p, const Tensor& x, const BackendConfig& cfg) { return conv_nd(p, x, cfg, 3); }

}  // namespace clifford::opt
