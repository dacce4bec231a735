#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "clifford/optimized.hpp"
#include "clifford/timing.hpp"

namespace clifford::opt {

void validate(const BackendConfig& cfg) {
  if (cfg.unroll != 1 && cfg.unroll != 2 && cfg.unroll != 4 && cfg.unroll != 8) {
    throw std::invalid_argument("unroll factor must be 1, 2, 4 or 8, got " + std::to_string(cfg.unroll));
  }
}

bool simd_available() { return CLIFFORD_HAVE_AVX2 != 0; }

BackendConfig select_fastest(std::span<const TuneResult> results, BackendConfig base) {
  if (results.empty()) throw std::invalid_argument("autotune needs at least one candidate");
  const TuneResult* best = &results.front();
  for (const TuneResult& r : results) {
    if (r.median_ns < best->median_ns || (r.median_ns == best->median_ns && r.unroll < best->unroll)) {
      best = &r;
    }
  }
  base.unroll = best->unroll;
  return base;
}

BackendConfig autotune(const std::function<void(const BackendConfig&)>& run, std::span<const int> candidates,
                       BackendConfig base, int reps, int warmup, const std::function<std::int64_t()>& clock) {
  if (candidates.empty()) throw std::invalid_argument("autotune needs at least one candidate");
  std::vector<TuneResult> results;
  for (int unroll : candidates) {
    BackendConfig cfg = base;
    cfg.unroll = unroll;
    validate(cfg);
    results.push_back({unroll, timing::median_runtime_ns([&] { run(cfg); }, reps, warmup, clock)});
  }
  return select_fastest(results, base);
}

}  // namespace clifford::opt
