#pragma once

// Independent oracles for the test suites.
//
// Blade products come from explicit generator-word reduction (bubble sort
// with sign flips, adjacent equal generators contracted through the
// metric), not from the library's bitmask formula. Layers are plain
// direct-summation loops templated on the scalar type: with double they are
// numeric oracles, with Counted they count arithmetic operations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "clifford/tensor.hpp"

namespace oracle {

struct Blade {
  int sign = 1;
  unsigned mask = 0;
};

inline Blade blade_product(unsigned a, unsigned b, std::span<const int> metric) {
  std::vector<int> word;
  for (int i = 0; i < 3; ++i)
    if ((a >> i) & 1u) word.push_back(i);
  for (int i = 0; i < 3; ++i)
    if ((b >> i) & 1u) word.push_back(i);
  int sign = 1;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k + 1 < word.size(); ++k) {
      if (word[k] > word[k + 1]) {
        std::swap(word[k], word[k + 1]);
        sign = -sign;
        changed = true;
        break;
      }
      if (word[k] == word[k + 1]) {
        sign *= metric[static_cast<std::size_t>(word[k])];
        word.erase(word.begin() + static_cast<std::ptrdiff_t>(k), word.begin() + static_cast<std::ptrdiff_t>(k) + 2);
        changed = true;
        break;
      }
    }
  }
  unsigned mask = 0;
  for (int g : word) mask |= 1u << g;
  return {sign, mask};
}

// ------------------------------------------------------------ op counting

struct OpCounts {
  std::uint64_t adds = 0;
  std::uint64_t mults = 0;
  std::uint64_t divs = 0;
  std::uint64_t other = 0;  // exp, negation inside the sigmoid
  std::uint64_t flops() const { return adds + mults + divs + other; }
};

inline OpCounts& counts() {
  static OpCounts c;
  return c;
}
inline void reset_counts() { counts() = {}; }

struct Counted {
  double v = 0;
  Counted() = default;
  Counted(double x) : v(x) {}  // NOLINT: implicit on purpose
};

inline Counted operator+(Counted a, Counted b) { ++counts().adds; return {a.v + b.v}; }
inline Counted operator-(Counted a, Counted b) { ++counts().adds; return {a.v - b.v}; }
inline Counted operator*(Counted a, Counted b) { ++counts().mults; return {a.v * b.v}; }
inline Counted operator/(Counted a, Counted b) { ++counts().divs; return {a.v / b.v}; }
// sign flips are data movement
inline Counted operator-(Counted a) { return {-a.v}; }

inline double value(double x) { return x; }
inline double value(Counted x) { return x.v; }

inline double exp_of(double x) { return std::exp(x); }
inline Counted exp_of(Counted x) { ++counts().other; return {std::exp(x.v)}; }
inline double negate_counted(double x) { return -x; }
inline Counted negate_counted(Counted x) { ++counts().other; return {-x.v}; }

template <class T>
T sigmoid(T z) {
  const T one(1.0);
  return one / (one + exp_of(negate_counted(z)));
}

// acc ± p without counting the sign
template <class T>
T signed_add(T acc, int sign, T p) {
  return sign > 0 ? acc + p : acc - p;
}

template <class T>
std::vector<T> to_values(const clifford::Tensor& t) {
  const clifford::Tensor c = t.materialize();
  std::vector<T> out;
  out.reserve(c.size());
  for (float v : c.values()) out.emplace_back(static_cast<double>(v));
  return out;
}

template <class T>
std::vector<double> to_doubles(const std::vector<T>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const T& x : v) out.push_back(value(x));
  return out;
}

/// max|a-b| / max(max|b|, tiny)
inline double rel_error(std::span<const float> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) return INFINITY;
    diff = std::max(diff, std::abs(static_cast<double>(a[i]) - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / std::max(scale, 1e-30);
}

inline double rel_error(const clifford::Tensor& a, const std::vector<double>& b) {
  const clifford::Tensor c = a.materialize();
  return rel_error(c.values(), b);
}

// -------------------------------------------------------------- multivectors

template <class T>
std::vector<T> product(const std::vector<T>& a, const std::vector<T>& b, std::span<const int> metric) {
  const std::size_t n = a.size();
  std::vector<T> out(n, T(0.0));
  for (unsigned s = 0; s < n; ++s)
    for (unsigned t = 0; t < n; ++t) {
      const Blade p = blade_product(s, t, metric);
      out[p.mask] = signed_add(out[p.mask], p.sign, a[s] * b[t]);
    }
  return out;
}

/// y[b,o] = bias[o] + sum_i w[o,i] x[b,i]
template <class T>
std::vector<T> linear_direct(const std::vector<T>& w, const std::vector<T>& bias, const std::vector<T>& x,
                             std::size_t B, std::size_t O, std::size_t I, std::span<const int> metric) {
  const std::size_t N = std::size_t{1} << metric.size();
  std::vector<T> y(B * O * N);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < O; ++o) {
      std::vector<T> acc(bias.begin() + static_cast<std::ptrdiff_t>(o * N),
                         bias.begin() + static_cast<std::ptrdiff_t>((o + 1) * N));
      for (std::size_t i = 0; i < I; ++i) {
        std::vector<T> wv(w.begin() + static_cast<std::ptrdiff_t>((o * I + i) * N),
                          w.begin() + static_cast<std::ptrdiff_t>((o * I + i + 1) * N));
        std::vector<T> xv(x.begin() + static_cast<std::ptrdiff_t>((b * I + i) * N),
                          x.begin() + static_cast<std::ptrdiff_t>((b * I + i + 1) * N));
        const std::vector<T> p = product(wv, xv, metric);
        for (std::size_t r = 0; r < N; ++r) acc[r] = acc[r] + p[r];
      }
      std::copy(acc.begin(), acc.end(), y.begin() + static_cast<std::ptrdiff_t>((b * O + o) * N));
    }
  return y;
}

/// Kernel-trick linear: expanded (N O) x (N I) real kernel, real matmul
/// accumulating from zero, then the bias add.
template <class T>
std::vector<T> linear_kernel_trick(const std::vector<T>& w, const std::vector<T>& bias, const std::vector<T>& x,
                                   std::size_t B, std::size_t O, std::size_t I, std::span<const int> metric) {
  const std::size_t N = std::size_t{1} << metric.size();
  std::vector<T> kernel(N * O * N * I);
  for (unsigned r = 0; r < N; ++r)
    for (unsigned t = 0; t < N; ++t) {
      const unsigned s = r ^ t;
      const int sign = blade_product(s, t, metric).sign;
      for (std::size_t o = 0; o < O; ++o)
        for (std::size_t i = 0; i < I; ++i) {
          const T v = w[(o * I + i) * N + s];
          kernel[(r * O + o) * N * I + t * I + i] = sign > 0 ? v : -v;
        }
    }
  std::vector<T> y(B * O * N);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t o = 0; o < O; ++o) {
        T acc(0.0);
        for (std::size_t t = 0; t < N; ++t)
          for (std::size_t i = 0; i < I; ++i)
            acc = acc + kernel[(r * O + o) * N * I + t * I + i] * x[(b * I + i) * N + t];
        y[(b * O + o) * N + r] = acc + bias[o * N + r];
      }
  return y;
}

/// Inlined linear: N*N pair sums over the reduction axis, combined through
/// the sign table on top of the bias.
template <class T>
std::vector<T> linear_inlined(const std::vector<T>& w, const std::vector<T>& bias, const std::vector<T>& x,
                              std::size_t B, std::size_t O, std::size_t I, std::span<const int> metric) {
  const std::size_t N = std::size_t{1} << metric.size();
  std::vector<T> y(B * O * N);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < O; ++o) {
      std::vector<T> sums(N * N, T(0.0));
      for (std::size_t i = 0; i < I; ++i)
        for (std::size_t s = 0; s < N; ++s)
          for (std::size_t t = 0; t < N; ++t)
            sums[s * N + t] = sums[s * N + t] + w[(o * I + i) * N + s] * x[(b * I + i) * N + t];
      for (unsigned r = 0; r < N; ++r) {
        T acc = bias[o * N + r];
        for (unsigned s = 0; s < N; ++s) {
          const unsigned t = s ^ r;
          acc = signed_add(acc, blade_product(s, t, metric).sign, sums[s * N + t]);
        }
        y[(b * O + o) * N + r] = acc;
      }
    }
  return y;
}

// ---------------------------------------------------------------- convolution

/// Shapes with spatial axes padded to three (leading extent-1 axes).
struct ConvDims {
  std::size_t batch = 1, in_channels = 1, out_channels = 1, groups = 1;
  std::array<std::size_t, 3> in{1, 1, 1}, kernel{1, 1, 1};
  std::array<std::size_t, 3> stride{1, 1, 1}, padding{0, 0, 0}, dilation{1, 1, 1};

  std::array<std::size_t, 3> out() const {
    std::array<std::size_t, 3> o{};
    for (int a = 0; a < 3; ++a) {
      const long long span = static_cast<long long>(in[a] + 2 * padding[a]) -
                             static_cast<long long>(dilation[a] * (kernel[a] - 1)) - 1;
      o[a] = span < 0 ? 0 : static_cast<std::size_t>(span) / stride[a] + 1;
    }
    return o;
  }
  /// (L-1)S - 2P + Di(K-1) + 1
  std::array<std::size_t, 3> transpose_out() const {
    std::array<std::size_t, 3> o{};
    for (int a = 0; a < 3; ++a)
      o[a] = (in[a] - 1) * stride[a] + dilation[a] * (kernel[a] - 1) + 1 - 2 * padding[a];
    return o;
  }
  std::size_t taps() const { return kernel[0] * kernel[1] * kernel[2]; }
};

inline std::size_t volume(const std::array<std::size_t, 3>& e) { return e[0] * e[1] * e[2]; }

/// Zero-padded copy of a (B, C, D, H, W, N) field.
template <class T>
std::vector<T> pad_input(const std::vector<T>& x, const ConvDims& d, std::size_t blades,
                         std::array<std::size_t, 3>& padded) {
  for (int a = 0; a < 3; ++a) padded[a] = d.in[a] + 2 * d.padding[a];
  std::vector<T> out(d.batch * d.in_channels * volume(padded) * blades, T(0.0));
  for (std::size_t bc = 0; bc < d.batch * d.in_channels; ++bc)
    for (std::size_t i0 = 0; i0 < d.in[0]; ++i0)
      for (std::size_t i1 = 0; i1 < d.in[1]; ++i1)
        for (std::size_t i2 = 0; i2 < d.in[2]; ++i2) {
          const std::size_t src = ((bc * d.in[0] + i0) * d.in[1] + i1) * d.in[2] + i2;
          const std::size_t dst = ((bc * padded[0] + i0 + d.padding[0]) * padded[1] + i1 + d.padding[1]) * padded[2] +
                                  i2 + d.padding[2];
          for (std::size_t k = 0; k < blades; ++k) out[dst * blades + k] = x[src * blades + k];
        }
  return out;
}

/// One contributing term of a per-tap product: out[r] += sign * w[s] * x[t].
struct Term {
  std::size_t s, t, r;
  int sign;
};

/// Full Clifford product: every blade pair contributes.
inline std::vector<Term> clifford_terms(std::span<const int> metric) {
  const unsigned n = 1u << metric.size();
  std::vector<Term> terms;
  for (unsigned s = 0; s < n; ++s)
    for (unsigned t = 0; t < n; ++t) {
      const Blade p = blade_product(s, t, metric);
      terms.push_back({s, t, p.mask, p.sign});
    }
  return terms;
}

inline constexpr std::array<int, 3> kG3Metric{-1, -1, -1};
inline constexpr std::array<unsigned, 4> kEven{0b000, 0b011, 0b101, 0b110};
inline constexpr std::array<unsigned, 3> kVector{0b001, 0b010, 0b100};

/// Grade-1 projection of (even weight) * (vector): keep products landing
/// on a vector blade.
inline std::vector<Term> g3_terms() {
  std::vector<Term> terms;
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t t = 0; t < 3; ++t) {
      const Blade p = blade_product(kEven[s], kVector[t], kG3Metric);
      for (std::size_t r = 0; r < 3; ++r)
        if (p.mask == kVector[r]) terms.push_back({s, t, r, p.sign});
    }
  return terms;
}

/// Direct summation over a zero-padded input, padded taps included:
/// out[b,co,o] = bias[co] + sum_{ci in group, k} W[co,ci,k] (x) x[b,ci,S o - P + Di k].
/// `in_blades`/`out_blades`/`weight_blades` size the per-entry arrays.
template <class T>
std::vector<T> conv_direct(const std::vector<T>& x, const std::vector<T>& w, const std::vector<T>& bias,
                           const ConvDims& d, const std::vector<Term>& terms, std::size_t in_blades,
                           std::size_t weight_blades, std::size_t out_blades) {
  std::array<std::size_t, 3> padded{};
  const std::vector<T> xp = pad_input(x, d, in_blades, padded);
  const auto out = d.out();
  const std::size_t ci_g = d.in_channels / d.groups, co_g = d.out_channels / d.groups;
  std::vector<T> y(d.batch * d.out_channels * volume(out) * out_blades);
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t co = 0; co < d.out_channels; ++co) {
      const std::size_t g = co / co_g;
      for (std::size_t o0 = 0; o0 < out[0]; ++o0)
        for (std::size_t o1 = 0; o1 < out[1]; ++o1)
          for (std::size_t o2 = 0; o2 < out[2]; ++o2) {
            std::vector<T> acc(bias.begin() + static_cast<std::ptrdiff_t>(co * out_blades),
                               bias.begin() + static_cast<std::ptrdiff_t>((co + 1) * out_blades));
            for (std::size_t c = 0; c < ci_g; ++c) {
              const std::size_t ci = g * ci_g + c;
              for (std::size_t k0 = 0; k0 < d.kernel[0]; ++k0)
                for (std::size_t k1 = 0; k1 < d.kernel[1]; ++k1)
                  for (std::size_t k2 = 0; k2 < d.kernel[2]; ++k2) {
                    const std::size_t i0 = o0 * d.stride[0] + k0 * d.dilation[0];
                    const std::size_t i1 = o1 * d.stride[1] + k1 * d.dilation[1];
                    const std::size_t i2 = o2 * d.stride[2] + k2 * d.dilation[2];
                    const std::size_t xi =
                        (((b * d.in_channels + ci) * padded[0] + i0) * padded[1] + i1) * padded[2] + i2;
                    const std::size_t wi = (((co * ci_g + c) * d.kernel[0] + k0) * d.kernel[1] + k1) * d.kernel[2] + k2;
                    for (const Term& term : terms)
                      acc[term.r] = signed_add(acc[term.r], term.sign,
                                               w[wi * weight_blades + term.s] * xp[xi * in_blades + term.t]);
                  }
            }
            const std::size_t yi = (((b * d.out_channels + co) * out[0] + o0) * out[1] + o1) * out[2] + o2;
            std::copy(acc.begin(), acc.end(), y.begin() + static_cast<std::ptrdiff_t>(yi * out_blades));
          }
    }
  return y;
}

/// Transposed g3 convolution in scatter form: every (input position, tap)
/// pair lands on an uncropped output, which is cropped by P per side.
/// Weight (CI, CO/G, K..., 4); the per-tap map is the transpose of the
/// forward one: out[t] += sign * w[s] * x[r].
template <class T>
std::vector<T> g3_transpose_scatter(const std::vector<T>& x, const std::vector<T>& w, const std::vector<T>& bias,
                                    const ConvDims& d) {
  const std::vector<Term> terms = g3_terms();
  std::array<std::size_t, 3> full{};
  for (int a = 0; a < 3; ++a) full[a] = (d.in[a] - 1) * d.stride[a] + d.dilation[a] * (d.kernel[a] - 1) + 1;
  const std::size_t ci_g = d.in_channels / d.groups, co_g = d.out_channels / d.groups;
  std::vector<T> acc(d.batch * d.out_channels * volume(full) * 3);
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t co = 0; co < d.out_channels; ++co)
      for (std::size_t p = 0; p < volume(full); ++p)
        for (std::size_t k = 0; k < 3; ++k)
          acc[((b * d.out_channels + co) * volume(full) + p) * 3 + k] = bias[co * 3 + k];
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t ci = 0; ci < d.in_channels; ++ci) {
      const std::size_t g = ci / ci_g;
      for (std::size_t c = 0; c < co_g; ++c) {
        const std::size_t co = g * co_g + c;
        for (std::size_t i0 = 0; i0 < d.in[0]; ++i0)
          for (std::size_t i1 = 0; i1 < d.in[1]; ++i1)
            for (std::size_t i2 = 0; i2 < d.in[2]; ++i2)
              for (std::size_t k0 = 0; k0 < d.kernel[0]; ++k0)
                for (std::size_t k1 = 0; k1 < d.kernel[1]; ++k1)
                  for (std::size_t k2 = 0; k2 < d.kernel[2]; ++k2) {
                    const std::size_t o0 = i0 * d.stride[0] + k0 * d.dilation[0];
                    const std::size_t o1 = i1 * d.stride[1] + k1 * d.dilation[1];
                    const std::size_t o2 = i2 * d.stride[2] + k2 * d.dilation[2];
                    const std::size_t xi = (((b * d.in_channels + ci) * d.in[0] + i0) * d.in[1] + i1) * d.in[2] + i2;
                    const std::size_t wi = (((ci * co_g + c) * d.kernel[0] + k0) * d.kernel[1] + k1) * d.kernel[2] + k2;
                    const std::size_t oi = (((b * d.out_channels + co) * full[0] + o0) * full[1] + o1) * full[2] + o2;
                    for (const Term& term : terms)
                      acc[oi * 3 + term.t] =
                          signed_add(acc[oi * 3 + term.t], term.sign, w[wi * 4 + term.s] * x[xi * 3 + term.r]);
                  }
      }
    }
  const auto out = d.transpose_out();
  std::vector<T> y(d.batch * d.out_channels * volume(out) * 3);
  for (std::size_t bc = 0; bc < d.batch * d.out_channels; ++bc)
    for (std::size_t o0 = 0; o0 < out[0]; ++o0)
      for (std::size_t o1 = 0; o1 < out[1]; ++o1)
        for (std::size_t o2 = 0; o2 < out[2]; ++o2) {
          const std::size_t src =
              ((bc * full[0] + o0 + d.padding[0]) * full[1] + o1 + d.padding[1]) * full[2] + o2 + d.padding[2];
          const std::size_t dst = ((bc * out[0] + o0) * out[1] + o1) * out[2] + o2;
          for (std::size_t k = 0; k < 3; ++k) y[dst * 3 + k] = acc[src * 3 + k];
        }
  return y;
}

// ---------------------------------------------------------------- activations

enum class Gate { kSum, kMean };

/// x[v, k] * sigmoid(aggregate of x[v, :]) over consecutive N-vectors.
template <class T>
std::vector<T> vsilu(const std::vector<T>& x, std::size_t blades, Gate gate) {
  std::vector<T> y(x.size());
  for (std::size_t v = 0; v * blades < x.size(); ++v) {
    T z = x[v * blades];
    for (std::size_t k = 1; k < blades; ++k) z = z + x[v * blades + k];
    if (gate == Gate::kMean) z = z / T(static_cast<double>(blades));
    const T s = sigmoid(z);
    for (std::size_t k = 0; k < blades; ++k) y[v * blades + k] = x[v * blades + k] * s;
  }
  return y;
}

/// Per-channel affine gate on (B, C, positions, 3) fields.
template <class T>
std::vector<T> linear_vsilu(const std::vector<T>& x, const std::vector<T>& w, const std::vector<T>& bias,
                            std::size_t batch, std::size_t channels) {
  const std::size_t positions = x.size() / (batch * channels * 3);
  std::vector<T> y(x.size());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t p = 0; p < positions; ++p) {
        const std::size_t base = ((b * channels + c) * positions + p) * 3;
        T z = w[c * 3] * x[base];
        for (std::size_t k = 1; k < 3; ++k) z = z + w[c * 3 + k] * x[base + k];
        z = z + bias[c];
        const T s = sigmoid(z);
        for (std::size_t k = 0; k < 3; ++k) y[base + k] = x[base + k] * s;
      }
  return y;
}

}  // namespace oracle
