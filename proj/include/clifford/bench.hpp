#pragma once

// Benchmark workloads, timing sweeps, CSV I/O, roofline and speedup
// summaries for the eleven benchmarked functions.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clifford/optimized.hpp"
#include "clifford/perf_model.hpp"
#include "clifford/tensor.hpp"
#include "clifford/timing.hpp"

namespace clifford::bench {

enum class Backend { kReference, kOptScalar, kOptSimd };

std::string_view backend_name(Backend b);
std::optional<Backend> parse_backend(std::string_view name);
inline constexpr Backend kAllBackends[] = {Backend::kReference, Backend::kOptScalar, Backend::kOptSimd};

/// The eleven function names, in report order.
std::span<const std::string_view> function_names();
bool is_function(std::string_view name);

/// Prepared inputs of one function call plus its per-backend evaluation.
struct Workload {
  std::string function;
  /// Every input array (activations first, then parameters), for
  /// reproducibility checks.
  std::vector<Tensor> tensors;
  std::function<Tensor(Backend, const opt::BackendConfig&)> run;
  perf::CostEstimate baseline_cost;
  perf::CostEstimate optimized_cost;

  const perf::CostEstimate& cost(Backend b) const {
    return b == Backend::kReference ? baseline_cost : optimized_cost;
  }
  /// Runs with the backend's default configuration.
  Tensor operator()(Backend b) const;
};

/// Backend configuration used by sweeps: scalar or 8-lane, with the
/// function's tuned unroll factor.
opt::BackendConfig default_config(std::string_view function, Backend b);

/// Fixed benchmark shapes with batch n; inputs uniform in [-1, 1] from a
/// generator seeded by (seed, function, n). Throws std::invalid_argument
/// for an unknown function or n == 0.
Workload make_bench_workload(std::string_view function, std::size_t n, std::uint64_t seed);

/// Small random shapes (every axis <= 8) with random stride, padding,
/// dilation, groups and metric signs, for oracle checks.
Workload make_random_workload(std::string_view function, std::mt19937_64& rng);

/// Uniform [-1, 1] tensor.
Tensor random_tensor(Shape shape, std::mt19937_64& rng);

/// max|a - b| / max(max|b|, tiny). Throws std::invalid_argument on shape
/// mismatch.
double relative_error(const Tensor& a, const Tensor& b);

// ---------------------------------------------------------------- sweeps

struct BenchRecord {
  std::string function;
  Backend backend = Backend::kReference;
  std::size_t n = 0;
  /// Median runtime; absent when the row failed (allocation failure).
  std::optional<double> runtime_ns;
  std::uint64_t flops = 0;
  std::uint64_t bytes_min = 0;
  double op_intensity = 0.0;
  /// Reference runtime / this runtime; absent without a reference row.
  std::optional<double> speedup_vs_reference;
};

struct SweepSpec {
  std::vector<std::string> functions;
  std::vector<std::size_t> n_values{16, 32, 64, 128, 256};
  std::vector<Backend> backends{kAllBackends[0], kAllBackends[1], kAllBackends[2]};
  int reps = 10;
  int warmup = 3;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument unless reps >= 3, warmup >= 0, n values are
/// non-empty, positive and strictly increasing, and every function and
/// backend is known.
void validate(const SweepSpec& spec);

/// Optional per-row progress callback.
using Progress = std::function<void(const BenchRecord&)>;

std::vector<BenchRecord> run_sweep(const SweepSpec& spec, const timing::Clock& clock = {},
                                   const Progress& progress = {});

/// Fills speedup_vs_reference from matching reference rows.
void assign_speedups(std::vector<BenchRecord>& records);

inline constexpr std::string_view kCsvHeader =
    "function,backend,n,runtime_ns,flops,bytes_min,op_intensity,speedup_vs_reference";
inline constexpr std::string_view kErrorMarker = "error";

void write_csv(std::ostream& out, std::span<const BenchRecord> records);
/// Throws std::runtime_error on a bad header or malformed row.
std::vector<BenchRecord> read_csv(std::istream& in);

// -------------------------------------------------------------- roofline

struct MachinePeaks {
  double peak_scalar = 0;  // flop/s
  double peak_simd = 0;    // flop/s
  double bandwidth = 0;    // byte/s
};

struct RooflinePoint {
  std::string function;
  Backend backend = Backend::kReference;
  std::size_t n = 0;
  double op_intensity = 0;
  double achieved_flops_per_sec = 0;
  double bound = 0;
  bool memory_bound = false;
  bool violation = false;
};

inline constexpr std::string_view kRooflineHeader =
    "function,backend,n,op_intensity,achieved_flops_per_sec,bound,region,violation";

/// Rows with an error marker are skipped. Throws std::invalid_argument for
/// non-positive peaks.
std::vector<RooflinePoint> roofline(std::span<const BenchRecord> records, const MachinePeaks& peaks);
void write_roofline_csv(std::ostream& out, std::span<const RooflinePoint> points);

// ---------------------------------------------------------------- report

struct FunctionSpeedup {
  std::string function;
  Backend backend = Backend::kReference;
  double geomean = 0;
  std::size_t samples = 0;
};

struct SpeedupReport {
  std::vector<FunctionSpeedup> per_function;
  /// Geometric mean of the per-function means, per backend.
  std::vector<std::pair<Backend, double>> overall;
};

double geometric_mean(std::span<const double> values);

/// Throws std::invalid_argument when no record carries a speedup.
SpeedupReport summarize(std::span<const BenchRecord> records);
void write_report(std::ostream& out, const SpeedupReport& report);
void write_report_csv(std::ostream& out, const SpeedupReport& report);

// ---------------------------------------------------------------- verify

struct TrialResult {
  std::string check;
  double max_rel_error = 0;
  double tolerance = 0;
  bool pass() const { return max_rel_error <= tolerance; }
};

struct VerifyReport {
  std::string function;
  std::vector<TrialResult> trials;
  bool pass() const;
  double max_rel_error() const;
};

/// Randomized oracle equivalence (optimized scalar and 8-lane paths against
/// the reference) plus isomorphism checks where the algebra admits one.
/// `tolerance` overrides the per-check default. Throws
/// std::invalid_argument for an unknown function.
VerifyReport verify(std::string_view function, int trials, std::uint64_t seed,
                    std::optional<double> tolerance = std::nullopt);

/// Tolerance of the optimized-vs-reference check for a function.
double oracle_tolerance(std::string_view function);

}  // namespace clifford::bench
