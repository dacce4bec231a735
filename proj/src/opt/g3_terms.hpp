#pragma once

#include <array>
#include <span>

#include "clifford/algebra.hpp"
#include "clifford/layers.hpp"

namespace clifford::opt::detail {

/// One nonzero entry of the grade-1 part of (even weight) * (vector):
/// out[r] += sign * w[s] * x[t].
struct G3Term {
  int s, t, r, sign;
};

constexpr std::array<G3Term, 9> make_g3_terms() {
  std::array<G3Term, 9> terms{};
  std::size_t k = 0;
  for (int s = 0; s < 4; ++s) {
    for (int t = 0; t < 3; ++t) {
      const auto p = blade_product(BladeIndex{kG3EvenBlades[static_cast<std::size_t>(s)]},
                                   BladeIndex{kG3VectorBladeMasks[static_cast<std::size_t>(t)]},
                                   std::span<const int>(kG3Metric));
      for (int r = 0; r < 3; ++r) {
        if (p.result.bits == kG3VectorBladeMasks[static_cast<std::size_t>(r)]) {
          terms[k++] = {s, t, r, p.sign};
        }
      }
    }
  }
  return terms;
}

inline constexpr std::array<G3Term, 9> kG3Terms = make_g3_terms();

}  // namespace clifford::opt::detail
