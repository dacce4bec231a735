#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "clifford/tensor.hpp"

namespace clifford::opt::detail {

inline Tensor contiguous(const Tensor& t) { return t.is_contiguous() ? t : t.materialize(); }

/// Calls f.operator()<N>() for a runtime blade count.
template <class F>
void dispatch_blades(int blades, F&& f) {
  switch (blades) {
    case 2: f.template operator()<2>(); break;
    case 4: f.template operator()<4>(); break;
    case 8: f.template operator()<8>(); break;
    default: throw std::invalid_argument("unsupported blade count " + std::to_string(blades));
  }
}

/// Walks [0, count) in blocks of `unroll` rows, calling f.operator()<U>(first)
/// per block; the remainder runs one row at a time.
template <class F>
void for_each_unrolled(std::size_t count, int unroll, F&& f) {
  const auto run = [&]<int U>() {
    std::size_t i = 0;
    for (; i + U <= count; i += U) f.template operator()<U>(i);
    for (; i < count; ++i) f.template operator()<1>(i);
  };
  switch (unroll) {
    case 1: run.template operator()<1>(); break;
    case 2: run.template operator()<2>(); break;
    case 4: run.template operator()<4>(); break;
    case 8: run.template operator()<8>(); break;
    default: throw std::invalid_argument("unsupported unroll factor " + std::to_string(unroll));
  }
}

}  // namespace clifford::opt::detail
