#pragma once

// Real Clifford algebras Cl(p,q) with up to three generators.
//
// Blades are identified by generator bitmasks (bit i set <=> e_{i+1} is a
// factor) and coefficient arrays are ordered by ascending mask:
//   n=2: {1, e1, e2, e12}
//   n=3: {1, e1, e2, e12, e3, e13, e23, e123}
// so the product of two blades always lands on blade (a XOR b).

#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>

namespace clifford {

inline constexpr int kMaxGenerators = 3;
inline constexpr int kMaxBlades = 1 << kMaxGenerators;

/// Metric of the algebra: g[i] is the square of generator e_{i+1}, either -1
/// or +1. Degenerate (zero) squares are not supported.
class Signature {
 public:
  /// Throws std::invalid_argument unless 1 <= metric.size() <= 3 and every
  /// entry is +-1.
  Signature(std::initializer_list<int> metric);
  explicit Signature(std::span<const int> metric);

  /// e1^2 = -1: the algebra isomorphic to the complex numbers.
  static Signature complex() { return Signature{-1}; }
  /// e1^2 = e2^2 = -1: the algebra isomorphic to the quaternions.
  static Signature quaternion() { return Signature{-1, -1}; }
  /// All squares -1, the convention of the algebras used by the benchmark
  /// layers (Cl(1,0), Cl(2,0), Cl(3,0) with p counting negative squares).
  static Signature negative(int generators);
  /// All squares +1.
  static Signature euclidean(int generators);

  int generators() const { return n_; }
  int blades() const { return 1 << n_; }
  int metric(int i) const { return metric_[static_cast<std::size_t>(i)]; }

  std::string to_string() const;

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  int n_ = 0;
  std::array<int, kMaxGenerators> metric_{};
};

struct BladeIndex {
  unsigned bits = 0;

  constexpr int grade() const { return std::popcount(bits); }
  friend constexpr bool operator==(BladeIndex, BladeIndex) = default;
};

struct BladeProduct {
  int sign = 1;
  BladeIndex result;
};

/// Sign of e_a e_b after reordering the generator factors, ignoring the
/// metric. Each generator of b has to move past the generators of a with a
/// larger index.
constexpr int reorder_sign(unsigned a, unsigned b) {
  int swaps = 0;
  for (unsigned rest = a >> 1; rest != 0; rest >>= 1) {
    swaps += std::popcount(rest & b);
  }
  return (swaps & 1) ? -1 : 1;
}

/// e_a e_b = sign * e_{a^b}. `metric` holds the squares of the generators.
constexpr BladeProduct blade_product(BladeIndex a, BladeIndex b,
                                     std::span<const int> metric) {
  int sign = reorder_sign(a.bits, b.bits);
  for (unsigned common = a.bits & b.bits; common != 0; common &= common - 1) {
    sign *= metric[static_cast<std::size_t>(std::countr_zero(common))];
  }
  return {sign, BladeIndex{a.bits ^ b.bits}};
}

BladeProduct blade_product(BladeIndex a, BladeIndex b, const Signature& sig);

/// Precomputed blade products for every ordered pair of blades.
class MultTable {
 public:
  explicit MultTable(const Signature& sig);

  const Signature& signature() const { return sig_; }
  int blades() const { return sig_.blades(); }
  int sign(int a, int b) const { return sign_[idx(a, b)]; }
  int target(int a, int b) const { return target_[idx(a, b)]; }

 private:
  static std::size_t idx(int a, int b) {
    return static_cast<std::size_t>(a * kMaxBlades + b);
  }

  Signature sig_;
  std::array<std::int8_t, kMaxBlades * kMaxBlades> sign_{};
  std::array<std::uint8_t, kMaxBlades * kMaxBlades> target_{};
};

MultTable build_mult_table(const Signature& sig);

/// A single multivector with single-precision coefficients in blade order.
class Multivector {
 public:
  explicit Multivector(const Signature& sig);
  Multivector(const Signature& sig, std::span<const float> coeffs);
  Multivector(const Signature& sig, std::initializer_list<float> coeffs);

  /// lambda * 1
  static Multivector scalar(const Signature& sig, float lambda);

  const Signature& signature() const { return sig_; }
  int blades() const { return sig_.blades(); }
  std::span<const float> coeffs() const {
    return {coeffs_.data(), static_cast<std::size_t>(blades())};
  }
  std::span<float> coeffs() {
    return {coeffs_.data(), static_cast<std::size_t>(blades())};
  }
  float operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }
  float& operator[](int k) { return coeffs_[static_cast<std::size_t>(k)]; }

  friend bool operator==(const Multivector& a, const Multivector& b);

 private:
  Signature sig_;
  std::array<float, kMaxBlades> coeffs_{};
};

/// Element-wise sum. Throws std::invalid_argument on signature mismatch.
Multivector mv_add(const Multivector& a, const Multivector& b);

/// Geometric product a*b. Throws std::invalid_argument unless a, b and the
/// table share one signature.
Multivector mv_product(const Multivector& a, const Multivector& b,
                       const MultTable& table);

struct Quaternion {
  float w = 0, x = 0, y = 0, z = 0;
};

/// Cl with g=(-1): a0 + a1 e1 -> a0 + a1 i.
std::complex<float> to_complex(const Multivector& a);
/// Cl with g=(-1,-1): (a0, a1, a2, a12) -> w + x i + y j + z k.
Quaternion to_quaternion(const Multivector& a);

}  // namespace clifford
