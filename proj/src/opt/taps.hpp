#pragma once

#include <algorithm>
#include <cstddef>

namespace clifford::opt::detail {

/// Kernel taps k in [lo, hi) whose input index o*S - P + k*Di lies in [0, L).
struct TapRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

inline TapRange tap_range(std::size_t o, std::size_t stride, std::size_t padding,
                          std::size_t dilation, std::size_t kernel, std::size_t length) {
  const auto base = static_cast<long long>(o * stride) - static_cast<long long>(padding);
  const auto di = static_cast<long long>(dilation);
  const auto k = static_cast<long long>(kernel);
  const long long lo = base >= 0 ? 0 : (-base + di - 1) / di;
  const long long last = static_cast<long long>(length) - 1 - base;
  const long long hi = last < 0 ? 0 : std::min(k, last / di + 1);
  TapRange r;
  r.lo = static_cast<std::size_t>(std::min(lo, k));
  r.hi = static_cast<std::size_t>(std::max(hi, static_cast<long long>(r.lo)));
  return r;
}

}  // namespace clifford::opt::detail
