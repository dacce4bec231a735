#include <algorithm>

#include "clifford/optimized.hpp"
#include "dispatch.hpp"
#include "simd.hpp"

namespace clifford::opt {

namespace {

constexpr std::size_t kVec = kG3VectorBlades;

enum class Aggregate { kSum, kMean };

// One fused pass: aggregate, sigmoid and gating per vector. Gate
// pre-activations are produced by `pre(v, x)` for vector index v.
template <int U, class Pre>
void gate_block_scalar(const float* x, float* y, std::size_t v0, Pre&& pre) {
  float gate[U];
  for (int u = 0; u < U; ++u) {
    const std::size_t v = v0 + static_cast<std::size_t>(u);
    gate[u] = sigmoid(pre(v, x + v * kVec));
  }
  for (int u = 0; u < U; ++u) {
    const std::size_t v = v0 + static_cast<std::size_t>(u);
    y[v * kVec] = x[v * kVec] * gate[u];
    y[v * kVec + 1] = x[v * kVec + 1] * gate[u];
    y[v * kVec + 2] = x[v * kVec + 2] * gate[u];
  }
}

#if CLIFFORD_HAVE_AVX2

// Eight vectors (24 interleaved floats) per step: components split into
// registers, gate computed 8-wide, then spread back over the interleaved
// layout.
template <class PreVec>
inline void gate_block8_simd(const float* x, float* y, PreVec&& pre) {
  const __m256 a = _mm256_loadu_ps(x);
  const __m256 b = _mm256_loadu_ps(x + 8);
  const __m256 c = _mm256_loadu_ps(x + 16);
  __m256 c0, c1, c2;
  detail::deinterleave3(a, b, c, c0, c1, c2);
  const __m256 g = detail::sigmoid8(pre(c0, c1, c2));
  const __m256 g0 = _mm256_permutevar8x32_ps(g, _mm256_setr_epi32(0, 0, 0, 1, 1, 1, 2, 2));
  const __m256 g1 = _mm256_permutevar8x32_ps(g, _mm256_setr_epi32(2, 3, 3, 3, 4, 4, 4, 5));
  const __m256 g2 = _mm256_permutevar8x32_ps(g, _mm256_setr_epi32(5, 5, 6, 6, 6, 7, 7, 7));
  _mm256_storeu_ps(y, _mm256_mul_ps(a, g0));
  _mm256_storeu_ps(y + 8, _mm256_mul_ps(b, g1));
  _mm256_storeu_ps(y + 16, _mm256_mul_ps(c, g2));
}

#endif

// `pre(v, x)` gives the scalar pre-activation of vector v; `pre_vec(x0, x1,
// x2)` the same for eight vectors split by component.
template <class Pre, class PreVec>
void run_gate(const float* x, float* y, std::size_t vectors, const BackendConfig& cfg, Pre&& pre,
              [[maybe_unused]] PreVec&& pre_vec) {
#if CLIFFORD_HAVE_AVX2
  if (cfg.simd) {
    // unroll counts 8-vector blocks here
    const std::size_t block = detail::kLanes * kVec;
    const std::size_t step = detail::kLanes * static_cast<std::size_t>(cfg.unroll);
    std::size_t v = 0;
    for (; v + step <= vectors; v += step) {
      for (int u = 0; u < cfg.unroll; ++u) {
        const std::size_t off = v * kVec + static_cast<std::size_t>(u) * block;
        gate_block8_simd(x + off, y + off, pre_vec);
      }
    }
    for (; v + detail::kLanes <= vectors; v += detail::kLanes) gate_block8_simd(x + v * kVec, y + v * kVec, pre_vec);
    for (; v < vectors; ++v) gate_block_scalar<1>(x, y, v, pre);
    return;
  }
#endif
  detail::for_each_unrolled(vectors, cfg.unroll,
                            [&]<int U>(std::size_t v0) { gate_block_scalar<U>(x, y, v0, pre); });
}

#if CLIFFORD_HAVE_AVX2
#define CLIFFORD_VEC_PRE(expr) [&](__m256 x0, __m256 x1, __m256 x2) { return expr; }
#else
#define CLIFFORD_VEC_PRE(expr) 0
#endif

Tensor blade_gate(const Tensor& x, const BackendConfig& cfg, Aggregate agg) {
  validate(cfg);
  check_vector_field(x);
  const Tensor xin = detail::contiguous(x);
  Tensor y = Tensor::zeros(x.shape());
  const std::size_t vectors = x.size() / kVec;
  if (agg == Aggregate::kSum) {
    run_gate(xin.data(), y.data(), vectors, cfg, [](std::size_t, const float* v) { return v[0] + v[1] + v[2]; },
             CLIFFORD_VEC_PRE(_mm256_add_ps(_mm256_add_ps(x0, x1), x2)));
  } else {
    run_gate(xin.data(), y.data(), vectors, cfg,
             [](std::size_t, const float* v) { return (v[0] + v[1] + v[2]) / static_cast<float>(kVec); },
             CLIFFORD_VEC_PRE(_mm256_div_ps(_mm256_add_ps(_mm256_add_ps(x0, x1), x2), _mm256_set1_ps(3.0f))));
  }
  return y;
}

}  // namespace

Tensor sum_vsilu(const Tensor& x, const BackendConfig& cfg) { return blade_gate(x, cfg, Aggregate::kSum); }

Tensor mean_vsilu(const Tensor& x, const BackendConfig& cfg) { return blade_gate(x, cfg, Aggregate::kMean); }

Tensor linear_vsilu(const GateParams& p, const Tensor& x, const BackendConfig& cfg) {
  validate(cfg);
  check_gate(p, x);
  const Tensor xin = detail::contiguous(x);
  const Tensor w = detail::contiguous(p.weight);
  const Tensor bias = detail::contiguous(p.bias);
  Tensor y = Tensor::zeros(x.shape());
  const std::size_t channels = x.extent(1);
  std::size_t positions = 1;
  for (std::size_t a = 2; a + 1 < x.rank(); ++a) positions *= x.extent(a);
  const std::size_t planes = x.extent(0) * channels;
  for (std::size_t plane = 0; plane < planes; ++plane) {
    const std::size_t c = plane % channels;
    const float* wc = w.data() + c * kVec;
    const float bc = bias.data()[c];
    const std::size_t offset = plane * positions * kVec;
#if CLIFFORD_HAVE_AVX2
    const __m256 w0 = _mm256_set1_ps(wc[0]), w1 = _mm256_set1_ps(wc[1]), w2 = _mm256_set1_ps(wc[2]);
    const __m256 wb = _mm256_set1_ps(bc);
#endif
    run_gate(xin.data() + offset, y.data() + offset, positions, cfg,
             [&](std::size_t, const float* xs) { return wc[0] * xs[0] + wc[1] * xs[1] + wc[2] * xs[2] + bc; },
             CLIFFORD_VEC_PRE(_mm256_add_ps(
                 _mm256_fmadd_ps(w2, x2, _mm256_fmadd_ps(w1, x1, _mm256_mul_ps(w0, x0))), wb)));
  }
  return y;
}

}  // namespace clifford::opt
