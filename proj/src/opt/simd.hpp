#pragma once

// 8-lane single-precision helpers for the optimized kernels. Everything here
// is only compiled when CLIFFORD_HAVE_AVX2 is set.

#include <array>
#include <cstddef>

#include "clifford/algebra.hpp"

#if CLIFFORD_HAVE_AVX2
#include <immintrin.h>
#endif

namespace clifford::opt::detail {

inline constexpr int kLanes = 8;

/// sign of the pair (s, t) feeding lane j of XOR stream r:
/// t = j % n, s = t ^ r, so the product lands on blade r.
inline std::array<std::array<float, kLanes>, kMaxBlades> lane_signs(const MultTable& table) {
  std::array<std::array<float, kLanes>, kMaxBlades> signs{};
  const int n = table.blades();
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < kLanes; ++j) {
      const int t = j % n;
      signs[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
          static_cast<float>(table.sign(t ^ r, t));
    }
  }
  return signs;
}

#if CLIFFORD_HAVE_AVX2

/// Lane j of the result is lane j ^ R of v.
template <int R>
inline __m256 xor_lanes(__m256 v) {
  static_assert(R >= 0 && R < 8);
  if constexpr (R >= 4) {
    v = _mm256_permute2f128_ps(v, v, 0x01);
  }
  constexpr int low = R & 3;
  if constexpr (low == 1) return _mm256_permute_ps(v, 0xB1);
  if constexpr (low == 2) return _mm256_permute_ps(v, 0x4E);
  if constexpr (low == 3) return _mm256_permute_ps(v, 0x1B);
  return v;
}

inline float hsum(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_movehdup_ps(s));
  return _mm_cvtss_f32(s);
}

/// Mask enabling the first `count` lanes.
inline __m256i first_lanes(int count) {
  const __m256i idx = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  return _mm256_cmpgt_epi32(_mm256_set1_epi32(count), idx);
}

/// Loads `count` <= 8/N multivectors of N floats spaced `step` floats apart;
/// missing lanes are zero.
template <int N>
inline __m256 load_multivectors(const float* p, int count, std::ptrdiff_t step) {
  static_assert(N == 2 || N == 4 || N == 8);
  if constexpr (N == 8) {
    return _mm256_loadu_ps(p);
  } else if constexpr (N == 4) {
    const __m128 lo = _mm_loadu_ps(p);
    const __m128 hi = count > 1 ? _mm_loadu_ps(p + step) : _mm_setzero_ps();
    return _mm256_insertf128_ps(_mm256_castps128_ps256(lo), hi, 1);
  } else {
    const __m128 zero = _mm_setzero_ps();
    const auto pair = [&](int k) {
      return k < count ? _mm_castpd_ps(_mm_load_sd(reinterpret_cast<const double*>(p + k * step)))
                       : zero;
    };
    const __m128 lo = _mm_movelh_ps(pair(0), pair(1));
    const __m128 hi = _mm_movelh_ps(pair(2), pair(3));
    return _mm256_insertf128_ps(_mm256_castps128_ps256(lo), hi, 1);
  }
}

/// e^v, Cephes-style range reduction plus degree-5 polynomial; within a few
/// ulp of std::exp over the clamped range.
inline __m256 exp8(__m256 v) {
  v = _mm256_min_ps(_mm256_max_ps(v, _mm256_set1_ps(-87.3365f)), _mm256_set1_ps(88.3762f));
  __m256 k = _mm256_fmadd_ps(v, _mm256_set1_ps(1.44269504088896341f), _mm256_set1_ps(0.5f));
  k = _mm256_floor_ps(k);
  v = _mm256_fnmadd_ps(k, _mm256_set1_ps(0.693359375f), v);
  v = _mm256_fnmadd_ps(k, _mm256_set1_ps(-2.12194440e-4f), v);
  __m256 p = _mm256_set1_ps(1.9875691500e-4f);
  p = _mm256_fmadd_ps(p, v, _mm256_set1_ps(1.3981999507e-3f));
  p = _mm256_fmadd_ps(p, v, _mm256_set1_ps(8.3334519073e-3f));
  p = _mm256_fmadd_ps(p, v, _mm256_set1_ps(4.1665795894e-2f));
  p = _mm256_fmadd_ps(p, v, _mm256_set1_ps(1.6666665459e-1f));
  p = _mm256_fmadd_ps(p, v, _mm256_set1_ps(5.0000001201e-1f));
  p = _mm256_fmadd_ps(p, _mm256_mul_ps(v, v), _mm256_add_ps(v, _mm256_set1_ps(1.0f)));
  const __m256i scale = _mm256_slli_epi32(_mm256_add_epi32(_mm256_cvtps_epi32(k), _mm256_set1_epi32(127)), 23);
  return _mm256_mul_ps(p, _mm256_castsi256_ps(scale));
}

/// 1 / (1 + e^-v)
inline __m256 sigmoid8(__m256 v) {
  const __m256 one = _mm256_set1_ps(1.0f);
  return _mm256_div_ps(one, _mm256_add_ps(one, exp8(_mm256_sub_ps(_mm256_setzero_ps(), v))));
}

/// Splits eight interleaved 3-vectors (a, b, c = floats 0-7, 8-15, 16-23)
/// into one register per component.
inline void deinterleave3(__m256 a, __m256 b, __m256 c, __m256& c0, __m256& c1, __m256& c2) {
  c0 = _mm256_permutevar8x32_ps(_mm256_blend_ps(_mm256_blend_ps(a, b, 0b10010010), c, 0b00100100),
                                _mm256_setr_epi32(0, 3, 6, 1, 4, 7, 2, 5));
  c1 = _mm256_permutevar8x32_ps(_mm256_blend_ps(_mm256_blend_ps(a, b, 0b00100100), c, 0b01001001),
                                _mm256_setr_epi32(1, 4, 7, 2, 5, 0, 3, 6));
  c2 = _mm256_permutevar8x32_ps(_mm256_blend_ps(_mm256_blend_ps(a, b, 0b01001001), c, 0b10010010),
                                _mm256_setr_epi32(2, 5, 0, 3, 6, 1, 4, 7));
}

/// Inverse of deinterleave3.
inline void interleave3(__m256 c0, __m256 c1, __m256 c2, __m256& a, __m256& b, __m256& c) {
  const __m256 t0 = _mm256_permutevar8x32_ps(c0, _mm256_setr_epi32(0, 3, 6, 1, 4, 7, 2, 5));
  const __m256 t1 = _mm256_permutevar8x32_ps(c1, _mm256_setr_epi32(5, 0, 3, 6, 1, 4, 7, 2));
  const __m256 t2 = _mm256_permutevar8x32_ps(c2, _mm256_setr_epi32(2, 5, 0, 3, 6, 1, 4, 7));
  a = _mm256_blend_ps(_mm256_blend_ps(t0, t1, 0b10010010), t2, 0b00100100);
  b = _mm256_blend_ps(_mm256_blend_ps(t0, t1, 0b00100100), t2, 0b01001001);
  c = _mm256_blend_ps(_mm256_blend_ps(t0, t1, 0b01001001), t2, 0b10010010);
}

#endif

}  // namespace clifford::opt::detail
