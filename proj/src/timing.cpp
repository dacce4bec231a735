#include "clifford/timing.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace clifford::timing {

std::int64_t steady_now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double median(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("median of no samples");
  const std::size_t mid = samples.size() / 2;
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(mid), samples.end());
  const double upper = samples[mid];
  if (samples.size() % 2) return upper;
  const double lower = *std::max_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double median_runtime_ns(const std::function<void()>& fn, int reps, int warmup, const Clock& clock) {
  if (reps < 1) throw std::invalid_argument("need at least one timed repetition");
  const Clock& now = clock ? clock : Clock(steady_now_ns);
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const std::int64_t start = now();
    fn();
    const std::int64_t stop = now();
    samples.push_back(static_cast<double>(stop - start));
  }
  return std::max(1.0, median(std::move(samples)));
}

}  // namespace clifford::timing
