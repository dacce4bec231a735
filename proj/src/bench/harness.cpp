#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <map>
#include <new>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "clifford/algebra.hpp"
#include "clifford/bench.hpp"
#include "clifford/reference.hpp"

namespace clifford::bench {

namespace {

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <class T>
T parse_number(const std::string& s, const char* what) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw std::runtime_error(std::string("bad ") + what + " '" + s + "'");
    v = static_cast<T>(d);
  } else {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw std::runtime_error(std::string("bad ") + what + " '" + s + "'");
    }
  }
  return v;
}

constexpr double kPublishedOverallSpeedup = 21.35;
constexpr double kIsomorphismTolerance = 1e-5;

// Complex-valued linear layer on the coefficients of a Cl(g=-1) instance.
double complex_linear_error(std::mt19937_64& rng) {
  const Signature sig = Signature::complex();
  const std::size_t batch = 1 + rng() % 4, out = 1 + rng() % 5, in = 1 + rng() % 6;
  LinearParams p{random_tensor({out, in, 2}, rng), random_tensor({out, 2}, rng), sig};
  const Tensor x = random_tensor({batch, in, 2}, rng);
  const Tensor y = ref::linear(p, x);
  Tensor expect = Tensor::zeros(y.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) {
      std::complex<double> acc(p.bias.at({o, 0}), p.bias.at({o, 1}));
      for (std::size_t i = 0; i < in; ++i) {
        const std::complex<double> w(p.weight.at({o, i, 0}), p.weight.at({o, i, 1}));
        const std::complex<double> v(x.at({b, i, 0}), x.at({b, i, 1}));
        acc += w * v;
      }
      expect.data()[(b * out + o) * 2] = static_cast<float>(acc.real());
      expect.data()[(b * out + o) * 2 + 1] = static_cast<float>(acc.imag());
    }
  }
  return relative_error(y, expect);
}

// Quaternion-valued linear layer on a Cl(g=-1,-1) instance.
double quaternion_linear_error(std::mt19937_64& rng) {
  const Signature sig = Signature::quaternion();
  const std::size_t batch = 1 + rng() % 4, out = 1 + rng() % 5, in = 1 + rng() % 6;
  LinearParams p{random_tensor({out, in, 4}, rng), random_tensor({out, 4}, rng), sig};
  const Tensor x = random_tensor({batch, in, 4}, rng);
  const Tensor y = ref::linear(p, x);
  Tensor expect = Tensor::zeros(y.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc[4];
      for (std::size_t k = 0; k < 4; ++k) acc[k] = p.bias.at({o, k});
      for (std::size_t i = 0; i < in; ++i) {
        const double w0 = p.weight.at({o, i, 0}), w1 = p.weight.at({o, i, 1}), w2 = p.weight.at({o, i, 2}),
                     w3 = p.weight.at({o, i, 3});
        const double x0 = x.at({b, i, 0}), x1 = x.at({b, i, 1}), x2 = x.at({b, i, 2}), x3 = x.at({b, i, 3});
        // Hamilton product, (w, i, j, k) order
        acc[0] += w0 * x0 - w1 * x1 - w2 * x2 - w3 * x3;
        acc[1] += w0 * x1 + w1 * x0 + w2 * x3 - w3 * x2;
        acc[2] += w0 * x2 - w1 * x3 + w2 * x0 + w3 * x1;
        acc[3] += w0 * x3 + w1 * x2 - w2 * x1 + w3 * x0;
      }
      for (std::size_t k = 0; k < 4; ++k) expect.data()[(b * out + o) * 4 + k] = static_cast<float>(acc[k]);
    }
  }
  return relative_error(y, expect);
}

}  // namespace

// ---------------------------------------------------------------- sweeps

void validate(const SweepSpec& spec) {
  if (spec.reps < 3) throw std::invalid_argument("reps must be >= 3");
  if (spec.warmup < 0) throw std::invalid_argument("warmup must be >= 0");
  if (spec.functions.empty()) throw std::invalid_argument("no functions selected");
  if (spec.backends.empty()) throw std::invalid_argument("no backends selected");
  if (spec.n_values.empty()) throw std::invalid_argument("n list is empty");
  for (std::size_t i = 0; i < spec.n_values.size(); ++i) {
    if (spec.n_values[i] == 0) throw std::invalid_argument("n values must be positive");
    if (i > 0 && spec.n_values[i] <= spec.n_values[i - 1]) {
      throw std::invalid_argument("n values must be strictly increasing");
    }
  }
  for (const std::string& f : spec.functions) {
    if (!is_function(f)) throw std::invalid_argument("unknown function '" + f + "'");
  }
}

std::vector<BenchRecord> run_sweep(const SweepSpec& spec, const timing::Clock& clock, const Progress& progress) {
  validate(spec);
  std::vector<BenchRecord> records;
  for (const std::string& function : spec.functions) {
    for (std::size_t n : spec.n_values) {
      std::optional<Workload> work;
      try {
        work = make_bench_workload(function, n, spec.seed);
      } catch (const std::bad_alloc&) {
      }
      for (Backend backend : spec.backends) {
        BenchRecord rec;
        rec.function = function;
        rec.backend = backend;
        rec.n = n;
        if (work) {
          const perf::CostEstimate& cost = work->cost(backend);
          rec.flops = cost.flops;
          rec.bytes_min = cost.bytes_min;
          rec.op_intensity = cost.op_intensity;
          const opt::BackendConfig cfg = default_config(function, backend);
          try {
            rec.runtime_ns = timing::median_runtime_ns([&] { (void)work->run(backend, cfg); }, spec.reps,
                                                       spec.warmup, clock);
          } catch (const std::bad_alloc&) {
            rec.runtime_ns.reset();
          }
        }
        records.push_back(rec);
        if (progress) progress(rec);
      }
    }
  }
  assign_speedups(records);
  return records;
}

void assign_speedups(std::vector<BenchRecord>& records) {
  std::map<std::pair<std::string, std::size_t>, double> reference;
  for (const BenchRecord& r : records) {
    if (r.backend == Backend::kReference && r.runtime_ns) reference[{r.function, r.n}] = *r.runtime_ns;
  }
  for (BenchRecord& r : records) {
    r.speedup_vs_reference.reset();
    const auto it = reference.find({r.function, r.n});
    if (it != reference.end() && r.runtime_ns) r.speedup_vs_reference = it->second / *r.runtime_ns;
  }
}

void write_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << kCsvHeader << '\n';
  for (const BenchRecord& r : records) {
    out << r.function << ',' << backend_name(r.backend) << ',' << r.n << ',';
    out << (r.runtime_ns ? format_double("%.1f", *r.runtime_ns) : std::string(kErrorMarker)) << ',';
    out << r.flops << ',' << r.bytes_min << ',' << format_double("%.9g", r.op_intensity) << ',';
    if (r.speedup_vs_reference) {
      out << format_double("%.6f", *r.speedup_vs_reference);
    } else if (!r.runtime_ns) {
      out << kErrorMarker;
    }
    out << '\n';
  }
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::runtime_error("unexpected CSV header '" + line + "'");
  std::vector<BenchRecord> records;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() != 8) throw std::runtime_error("row " + std::to_string(row) + ": expected 8 fields");
    BenchRecord r;
    r.function = f[0];
    const auto backend = parse_backend(f[1]);
    if (!backend) throw std::runtime_error("row " + std::to_string(row) + ": unknown backend '" + f[1] + "'");
    r.backend = *backend;
    r.n = parse_number<std::size_t>(f[2], "n");
    if (f[3] != kErrorMarker) r.runtime_ns = parse_number<double>(f[3], "runtime_ns");
    r.flops = parse_number<std::uint64_t>(f[4], "flops");
    r.bytes_min = parse_number<std::uint64_t>(f[5], "bytes_min");
    r.op_intensity = parse_number<double>(f[6], "op_intensity");
    if (!f[7].empty() && f[7] != kErrorMarker) r.speedup_vs_reference = parse_number<double>(f[7], "speedup");
    records.push_back(std::move(r));
  }
  return records;
}

// -------------------------------------------------------------- roofline

std::vector<RooflinePoint> roofline(std::span<const BenchRecord> records, const MachinePeaks& peaks) {
  if (!(peaks.peak_scalar > 0) || !(peaks.peak_simd > 0) || !(peaks.bandwidth > 0)) {
    throw std::invalid_argument("peaks and bandwidth must be positive");
  }
  std::vector<RooflinePoint> points;
  for (const BenchRecord& r : records) {
    if (!r.runtime_ns) continue;
    RooflinePoint p;
    p.function = r.function;
    p.backend = r.backend;
    p.n = r.n;
    p.op_intensity = r.op_intensity;
    const double runtime = std::max(*r.runtime_ns, 1.0);
    p.achieved_flops_per_sec = static_cast<double>(r.flops) / (runtime * 1e-9);
    const double peak = r.backend == Backend::kOptSimd ? peaks.peak_simd : peaks.peak_scalar;
    const double memory_roof = r.op_intensity * peaks.bandwidth;
    p.memory_bound = memory_roof < peak;
    p.bound = std::min(peak, memory_roof);
    p.violation = p.achieved_flops_per_sec > p.bound;
    points.push_back(std::move(p));
  }
  return points;
}

void write_roofline_csv(std::ostream& out, std::span<const RooflinePoint> points) {
  out << kRooflineHeader << '\n';
  for (const RooflinePoint& p : points) {
    out << p.function << ',' << backend_name(p.backend) << ',' << p.n << ',' << format_double("%.9g", p.op_intensity)
        << ',' << format_double("%.6e", p.achieved_flops_per_sec) << ',' << format_double("%.6e", p.bound) << ','
        << (p.memory_bound ? "memory" : "compute") << ',' << (p.violation ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------- report

double geometric_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("geometric mean of nothing");
  double log_sum = 0;
  for (double v : values) {
    if (!(v > 0)) throw std::invalid_argument("geometric mean needs positive values");
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

SpeedupReport summarize(std::span<const BenchRecord> records) {
  SpeedupReport report;
  std::vector<std::pair<std::pair<std::string, Backend>, std::vector<double>>> groups;
  for (const BenchRecord& r : records) {
    if (!r.speedup_vs_reference || r.backend == Backend::kReference) continue;
    const auto key = std::make_pair(r.function, r.backend);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = std::prev(groups.end());
    }
    it->second.push_back(*r.speedup_vs_reference);
  }
  if (groups.empty()) {
    // only reference rows (or nothing) carry a speedup
    for (const BenchRecord& r : records) {
      if (r.speedup_vs_reference) {
        report.per_function.push_back({r.function, r.backend, *r.speedup_vs_reference, 1});
      }
    }
    if (report.per_function.empty()) throw std::invalid_argument("no speedup values in records");
  }
  for (const auto& [key, values] : groups) {
    report.per_function.push_back({key.first, key.second, geometric_mean(values), values.size()});
  }
  for (Backend b : kAllBackends) {
    std::vector<double> means;
    for (const FunctionSpeedup& f : report.per_function) {
      if (f.backend == b) means.push_back(f.geomean);
    }
    if (!means.empty()) report.overall.emplace_back(b, geometric_mean(means));
  }
  return report;
}

void write_report(std::ostream& out, const SpeedupReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-36s %-11s %9s %4s\n", "function", "backend", "speedup", "n");
  out << line;
  for (const FunctionSpeedup& f : report.per_function) {
    std::snprintf(line, sizeof line, "%-36s %-11s %8.2fx %4zu\n", f.function.c_str(),
                  std::string(backend_name(f.backend)).c_str(), f.geomean, f.samples);
    out << line;
  }
  for (const auto& [backend, mean] : report.overall) {
    std::snprintf(line, sizeof line, "overall %-11s geomean %8.2fx\n", std::string(backend_name(backend)).c_str(),
                  mean);
    out << line;
  }
  std::snprintf(line, sizeof line, "published reference, 8-lane AVX2 single core: %.2fx\n", kPublishedOverallSpeedup);
  out << line;
}

void write_report_csv(std::ostream& out, const SpeedupReport& report) {
  out << "function,backend,geomean_speedup,samples\n";
  for (const FunctionSpeedup& f : report.per_function) {
    out << f.function << ',' << backend_name(f.backend) << ',' << format_double("%.6f", f.geomean) << ','
        << f.samples << '\n';
  }
  for (const auto& [backend, mean] : report.overall) {
    out << "overall," << backend_name(backend) << ',' << format_double("%.6f", mean) << ",\n";
  }
}

// ---------------------------------------------------------------- verify

bool VerifyReport::pass() const {
  return std::all_of(trials.begin(), trials.end(), [](const TrialResult& t) { return t.pass(); });
}

double VerifyReport::max_rel_error() const {
  double worst = 0;
  for (const TrialResult& t : trials) {
    if (!(t.max_rel_error <= worst)) worst = t.max_rel_error;
  }
  return worst;
}

double oracle_tolerance(std::string_view function) {
  if (!is_function(function)) throw std::invalid_argument("unknown function '" + std::string(function) + "'");
  return function.ends_with("vsilu") ? 1e-5 : 1e-4;
}

VerifyReport verify(std::string_view function, int trials, std::uint64_t seed, std::optional<double> tolerance) {
  const double tol = tolerance.value_or(oracle_tolerance(function));
  const double iso_tol = tolerance.value_or(kIsomorphismTolerance);
  VerifyReport report;
  report.function = std::string(function);
  std::mt19937_64 rng(seed);
  constexpr int kUnrolls[] = {1, 2, 4, 8};
  for (int t = 0; t < trials; ++t) {
    const Workload w = make_random_workload(function, rng);
    const Tensor expect = w.run(Backend::kReference, {});
    opt::BackendConfig scalar = opt::BackendConfig::scalar(kUnrolls[rng() % 4]);
    opt::BackendConfig simd;
    simd.unroll = kUnrolls[rng() % 4];
    simd.vectorize_g3_transpose = (rng() & 1) != 0;
    TrialResult s{"opt-scalar", relative_error(w.run(Backend::kOptScalar, scalar), expect), tol};
    TrialResult v{"opt-simd", relative_error(w.run(Backend::kOptSimd, simd), expect), tol};
    TrialResult combined{"trial " + std::to_string(t), std::max(s.max_rel_error, v.max_rel_error), tol};
    if (std::isnan(s.max_rel_error) || std::isnan(v.max_rel_error)) combined.max_rel_error = NAN;
    report.trials.push_back(combined);
    if (function == "clifford_linear_1d_forward") {
      report.trials.push_back({"complex isomorphism", complex_linear_error(rng), iso_tol});
    } else if (function == "clifford_linear_2d_forward") {
      report.trials.push_back({"quaternion isomorphism", quaternion_linear_error(rng), iso_tol});
    }
  }
  return report;
}

}  // namespace clifford::bench
