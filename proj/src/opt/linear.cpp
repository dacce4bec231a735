#include <array>

#include "clifford/optimized.hpp"
#include "dispatch.hpp"
#include "simd.hpp"

namespace clifford::opt {

namespace {

struct LinearArgs {
  const float* w;     // (O, I, N)
  const float* x;     // (B, I, N)
  const float* bias;  // (O, N)
  float* y;           // (B, O, N)
  std::size_t batch, out, in;
  const MultTable* table;
};

template <int N, int U>
void linear_rows_scalar(const LinearArgs& a, std::size_t b0) {
  const std::size_t row = a.in * N;
  for (std::size_t o = 0; o < a.out; ++o) {
    const float* wo = a.w + o * row;
    float sum[U][N][N] = {};
    for (std::size_t i = 0; i < a.in; ++i) {
      const float* wi = wo + i * N;
      for (int u = 0; u < U; ++u) {
        const float* xi = a.x + (b0 + static_cast<std::size_t>(u)) * row + i * N;
        for (int s = 0; s < N; ++s) {
          for (int t = 0; t < N; ++t) sum[u][s][t] += wi[s] * xi[t];
        }
      }
    }
    for (int u = 0; u < U; ++u) {
      float* yo = a.y + ((b0 + static_cast<std::size_t>(u)) * a.out + o) * N;
      for (int r = 0; r < N; ++r) {
        float acc = a.bias[o * N + static_cast<std::size_t>(r)];
        for (int s = 0; s < N; ++s) {
          const float v = sum[u][s][s ^ r];
          acc = a.table->sign(s, s ^ r) > 0 ? acc + v : acc - v;
        }
        yo[r] = acc;
      }
    }
  }
}

#if CLIFFORD_HAVE_AVX2

template <int N, int U>
void linear_rows_simd(const LinearArgs& a, std::size_t b0,
                      const std::array<std::array<float, detail::kLanes>, kMaxBlades>& signs) {
  using detail::xor_lanes;
  const std::size_t row = a.in * N;
  const std::size_t full = row / detail::kLanes * detail::kLanes;
  for (std::size_t o = 0; o < a.out; ++o) {
    const float* wo = a.w + o * row;
    __m256 acc[U][N];
    for (int u = 0; u < U; ++u) {
      for (int r = 0; r < N; ++r) acc[u][r] = _mm256_setzero_ps();
    }
    for (std::size_t k = 0; k < full; k += detail::kLanes) {
      const __m256 w = _mm256_loadu_ps(wo + k);
      __m256 wr[N];
      wr[0] = w;
      if constexpr (N > 1) wr[1] = xor_lanes<1>(w);
      if constexpr (N > 2) {
        wr[2] = xor_lanes<2>(w);
        wr[3] = xor_lanes<3>(w);
      }
      if constexpr (N > 4) {
        wr[4] = xor_lanes<4>(w);
        wr[5] = xor_lanes<5>(w);
        wr[6] = xor_lanes<6>(w);
        wr[7] = xor_lanes<7>(w);
      }
      for (int u = 0; u < U; ++u) {
        const __m256 xv = _mm256_loadu_ps(a.x + (b0 + static_cast<std::size_t>(u)) * row + k);
        for (int r = 0; r < N; ++r) acc[u][r] = _mm256_fmadd_ps(wr[r], xv, acc[u][r]);
      }
    }
    for (int u = 0; u < U; ++u) {
      const float* xb = a.x + (b0 + static_cast<std::size_t>(u)) * row;
      // Feature tail shorter than one register.
      float tail[N] = {};
      for (std::size_t k = full; k < row; k += N) {
        for (int s = 0; s < N; ++s) {
          for (int t = 0; t < N; ++t) {
            const float v = wo[k + static_cast<std::size_t>(s)] * xb[k + static_cast<std::size_t>(t)];
            tail[s ^ t] = a.table->sign(s, t) > 0 ? tail[s ^ t] + v : tail[s ^ t] - v;
          }
        }
      }
      float* yo = a.y + ((b0 + static_cast<std::size_t>(u)) * a.out + o) * N;
      for (int r = 0; r < N; ++r) {
        const __m256 signed_acc = _mm256_mul_ps(acc[u][r], _mm256_loadu_ps(signs[static_cast<std::size_t>(r)].data()));
        yo[r] = detail::hsum(signed_acc) + tail[r] + a.bias[o * N + static_cast<std::size_t>(r)];
      }
    }
  }
}

#endif

template <int N>
void run_linear(const LinearArgs& a, const BackendConfig& cfg) {
#if CLIFFORD_HAVE_AVX2
  if (cfg.simd) {
    const auto signs = detail::lane_signs(*a.table);
    detail::for_each_unrolled(a.batch, cfg.unroll, [&]<int U>(std::size_t b0) {
      linear_rows_simd<N, U>(a, b0, signs);
    });
    return;
  }
#endif
  detail::for_each_unrolled(a.batch, cfg.unroll,
                            [&]<int U>(std::size_t b0) { linear_rows_scalar<N, U>(a, b0); });
}

}  // namespace

Tensor linear(const LinearParams& p, const Tensor& x, const BackendConfig& cfg) {
  validate(cfg);
  check_linear(p, x);
  const Tensor w = detail::contiguous(p.weight);
  const Tensor xin = detail::contiguous(x);
  const Tensor bias = detail::contiguous(p.bias);
  const MultTable table(p.sig);
  Tensor y = Tensor::zeros({x.extent(0), p.weight.extent(0), x.extent(2)});
  const LinearArgs args{w.data(),    xin.data(),          bias.data(),         y.data(),
                        x.extent(0), p.weight.extent(0), p.weight.extent(1), &table};
  detail::dispatch_blades(p.sig.blades(), [&]<int N>() { run_linear<N>(args, cfg); });
  return y;
}

}  // namespace clifford::opt
