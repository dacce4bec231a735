#include "clifford/algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace clifford {

Signature::Signature(std::initializer_list<int> metric)
    : Signature(std::span<const int>(metric.begin(), metric.size())) {}

Signature::Signature(std::span<const int> metric) {
  if (metric.empty() || metric.size() > kMaxGenerators) {
    throw std::invalid_argument("signature needs between 1 and 3 generators, got " +
                                std::to_string(metric.size()));
  }
  for (int g : metric) {
    if (g != -1 && g != 1) {
      throw std::invalid_argument("generator squares must be -1 or +1, got " +
                                  std::to_string(g));
    }
  }
  n_ = static_cast<int>(metric.size());
  std::copy(metric.begin(), metric.end(), metric_.begin());
}

Signature Signature::negative(int generators) {
  std::array<int, kMaxGenerators> g{-1, -1, -1};
  if (generators < 1 || generators > kMaxGenerators) {
    throw std::invalid_argument("signature needs between 1 and 3 generators");
  }
  return Signature(std::span<const int>(g.data(), static_cast<std::size_t>(generators)));
}

Signature Signature::euclidean(int generators) {
  std::array<int, kMaxGenerators> g{1, 1, 1};
  if (generators < 1 || generators > kMaxGenerators) {
    throw std::invalid_argument("signature needs between 1 and 3 generators");
  }
  return Signature(std::span<const int>(g.data(), static_cast<std::size_t>(generators)));
}

std::string Signature::to_string() const {
  std::string out = "g=(";
  for (int i = 0; i < n_; ++i) {
    if (i) out += ',';
    out += metric_[static_cast<std::size_t>(i)] < 0 ? "-1" : "+1";
  }
  return out + ")";
}

BladeProduct blade_product(BladeIndex a, BladeIndex b, const Signature& sig) {
  std::array<int, kMaxGenerators> g{};
  for (int i = 0; i < sig.generators(); ++i) g[static_cast<std::size_t>(i)] = sig.metric(i);
  return blade_product(a, b, std::span<const int>(g.data(), static_cast<std::size_t>(sig.generators())));
}

MultTable::MultTable(const Signature& sig) : sig_(sig) {
  const int n = sig.blades();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      auto p = blade_product(BladeIndex{static_cast<unsigned>(a)},
                             BladeIndex{static_cast<unsigned>(b)}, sig);
      sign_[idx(a, b)] = static_cast<std::int8_t>(p.sign);
      target_[idx(a, b)] = static_cast<std::uint8_t>(p.result.bits);
    }
  }
}

MultTable build_mult_table(const Signature& sig) { return MultTable(sig); }

Multivector::Multivector(const Signature& sig) : sig_(sig) {}

Multivector::Multivector(const Signature& sig, std::span<const float> coeffs) : sig_(sig) {
  if (coeffs.size() != static_cast<std::size_t>(sig.blades())) {
    throw std::invalid_argument("multivector of " + sig.to_string() + " needs " +
                                std::to_string(sig.blades()) + " coefficients, got " +
                                std::to_string(coeffs.size()));
  }
  std::copy(coeffs.begin(), coeffs.end(), coeffs_.begin());
}

Multivector::Multivector(const Signature& sig, std::initializer_list<float> coeffs)
    : Multivector(sig, std::span<const float>(coeffs.begin(), coeffs.size())) {}

Multivector Multivector::scalar(const Signature& sig, float lambda) {
  Multivector m(sig);
  m.coeffs_[0] = lambda;
  return m;
}

bool operator==(const Multivector& a, const Multivector& b) {
  return a.sig_ == b.sig_ && std::ranges::equal(a.coeffs(), b.coeffs());
}

Multivector mv_add(const Multivector& a, const Multivector& b) {
  if (a.signature() != b.signature()) {
    throw std::invalid_argument("mv_add: signature mismatch " + a.signature().to_string() +
                                " vs " + b.signature().to_string());
  }
  Multivector out(a.signature());
  for (int k = 0; k < a.blades(); ++k) out[k] = a[k] + b[k];
  return out;
}

Multivector mv_product(const Multivector& a, const Multivector& b, const MultTable& table) {
  if (a.signature() != b.signature() || a.signature() != table.signature()) {
    throw std::invalid_argument("mv_product: operands and table must share a signature");
  }
  Multivector out(a.signature());
  const int n = a.blades();
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      out[table.target(s, t)] += static_cast<float>(table.sign(s, t)) * a[s] * b[t];
    }
  }
  return out;
}

std::complex<float> to_complex(const Multivector& a) {
  if (a.signature() != Signature::complex()) {
    throw std::invalid_argument("to_complex requires g=(-1), got " + a.signature().to_string());
  }
  return {a[0], a[1]};
}

Quaternion to_quaternion(const Multivector& a) {
  if (a.signature() != Signature::quaternion()) {
    throw std::invalid_argument("to_quaternion requires g=(-1,-1), got " +
                                a.signature().to_string());
  }
  return {a[0], a[1], a[2], a[3]};
}

}  // namespace clifford
