#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace clifford::timing {

/// Monotonic nanoseconds.
using Clock = std::function<std::int64_t()>;

std::int64_t steady_now_ns();

/// Median of the samples (mean of the middle pair for even counts).
double median(std::vector<double> samples);

/// Runs `fn` `warmup` times untimed, then `reps` timed runs; returns the
/// median duration in nanoseconds, clamped to >= 1.
double median_runtime_ns(const std::function<void()>& fn, int reps, int warmup,
                         const Clock& clock = {});

}  // namespace clifford::timing
