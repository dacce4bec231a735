#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "clifford/bench.hpp"
#include "clifford/reference.hpp"

namespace clifford::bench {

namespace {

enum class Kind { kLinear, kConv, kG3Conv, kG3ConvTranspose, kLinearVsilu, kSumVsilu, kMeanVsilu };

// Fixed dims of the benchmark tables; batch is the swept n.
struct ConvDims {
  std::size_t in_channels;
  std::size_t length;
  std::size_t out_channels;
  std::size_t kernel;
};

// Unroll factors picked by timing every candidate at n = 64 (n = 16 for the
// 3D convolution) on an AVX2 host.
struct FunctionInfo {
  std::string_view name;
  Kind kind;
  int generators;  // blades = 2^generators for linear and conv kinds
  ConvDims conv;
  int unroll_scalar;
  int unroll_simd;
};

constexpr std::size_t kLinearFeatures = 100;
constexpr std::size_t kGateExtent = 20;

constexpr std::array<FunctionInfo, 11> kFunctions{{
    {"clifford_1d_forward", Kind::kConv, 1, {8, 128, 8, 16}, 4, 4},
    {"clifford_2d_forward", Kind::kConv, 2, {4, 32, 2, 16}, 1, 4},
    {"clifford_3d_forward", Kind::kConv, 3, {4, 16, 16, 4}, 1, 2},
    {"clifford_linear_1d_forward", Kind::kLinear, 1, {}, 2, 4},
    {"clifford_linear_2d_forward", Kind::kLinear, 2, {}, 1, 2},
    {"clifford_linear_3d_forward", Kind::kLinear, 3, {}, 1, 1},
    {"clifford_g3_conv_2d_forward", Kind::kG3Conv, 3, {8, 10, 10, 10}, 1, 8},
    {"clifford_g3_conv_trans_2d_forward", Kind::kG3ConvTranspose, 3, {4, 32, 2, 4}, 1, 1},
    {"clifford_g3_linear_vsilu", Kind::kLinearVsilu, 3, {}, 2, 2},
    {"clifford_g3_sum_vsilu", Kind::kSumVsilu, 3, {}, 8, 8},
    {"clifford_g3_mean_vsilu", Kind::kMeanVsilu, 3, {}, 8, 8},
}};

constexpr auto kNames = [] {
  std::array<std::string_view, kFunctions.size()> names{};
  for (std::size_t i = 0; i < kFunctions.size(); ++i) names[i] = kFunctions[i].name;
  return names;
}();

const FunctionInfo& lookup(std::string_view name) {
  for (const FunctionInfo& f : kFunctions) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown function '" + std::string(name) + "'");
}

std::size_t function_index(std::string_view name) {
  return static_cast<std::size_t>(&lookup(name) - kFunctions.data());
}

opt::BackendConfig config_for(const FunctionInfo& f, Backend b) {
  opt::BackendConfig cfg;
  cfg.simd = b == Backend::kOptSimd && opt::simd_available();
  cfg.unroll = cfg.simd ? f.unroll_simd : f.unroll_scalar;
  cfg.vectorize_g3_transpose = cfg.simd;
  return cfg;
}

// Shape description shared by the table and random builders.
struct ConvSetup {
  std::size_t batch = 1, in_channels = 1, out_channels = 1;
  std::size_t rank = 1;
  std::array<std::size_t, 3> length{1, 1, 1};
  std::array<std::size_t, 3> kernel{1, 1, 1};
  ConvGeometry geom;
};

Shape with_spatial(Shape head, const std::array<std::size_t, 3>& extents, std::size_t rank, Shape tail) {
  for (std::size_t a = 0; a < rank; ++a) head.push_back(extents[a]);
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

Workload linear_workload(const FunctionInfo& f, const Signature& sig, std::size_t batch, std::size_t out,
                         std::size_t in, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(sig.blades());
  LinearParams p{Tensor(), Tensor(), sig};
  Tensor x = random_tensor({batch, in, n}, rng);
  p.weight = random_tensor({out, in, n}, rng);
  p.bias = random_tensor({out, n}, rng);
  Workload w;
  w.function = std::string(f.name);
  w.tensors = {x, p.weight, p.bias};
  w.run = [p, x](Backend b, const opt::BackendConfig& cfg) {
    return b == Backend::kReference ? ref::linear(p, x) : opt::linear(p, x, cfg);
  };
  w.baseline_cost = perf::cost_linear(batch, out, in, n, true);
  w.optimized_cost = perf::cost_linear(batch, out, in, n, false);
  return w;
}

Workload conv_workload(const FunctionInfo& f, const Signature& sig, const ConvSetup& s, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(sig.blades());
  ConvParams p{Tensor(), Tensor(), sig, s.geom};
  Tensor x = random_tensor(with_spatial({s.batch, s.in_channels}, s.length, s.rank, {n}), rng);
  p.weight = random_tensor(with_spatial({s.out_channels, s.in_channels / s.geom.groups}, s.kernel, s.rank, {n}), rng);
  p.bias = random_tensor({s.out_channels, n}, rng);
  Workload w;
  w.function = std::string(f.name);
  w.tensors = {x, p.weight, p.bias};
  const std::size_t rank = s.rank;
  w.run = [p, x, rank](Backend b, const opt::BackendConfig& cfg) {
    const bool reference = b == Backend::kReference;
    switch (rank) {
      case 1: return reference ? ref::conv1d(p, x) : opt::conv1d(p, x, cfg);
      case 2: return reference ? ref::conv2d(p, x) : opt::conv2d(p, x, cfg);
      default: return reference ? ref::conv3d(p, x) : opt::conv3d(p, x, cfg);
    }
  };
  w.baseline_cost = w.optimized_cost = perf::cost_conv(resolve_conv(p, x, rank));
  return w;
}

Workload g3_conv_workload(const FunctionInfo& f, const ConvSetup& s, bool transposed, std::mt19937_64& rng) {
  G3ConvParams p{Tensor(), Tensor(), s.geom};
  const std::size_t g = s.geom.groups;
  Tensor x = random_tensor(with_spatial({s.batch, s.in_channels}, s.length, 2, {kG3VectorBlades}), rng);
  const Shape weight_head = transposed ? Shape{s.in_channels, s.out_channels / g} : Shape{s.out_channels, s.in_channels / g};
  p.weight = random_tensor(with_spatial(weight_head, s.kernel, 2, {kG3WeightBlades}), rng);
  p.bias = random_tensor({s.out_channels, kG3VectorBlades}, rng);
  Workload w;
  w.function = std::string(f.name);
  w.tensors = {x, p.weight, p.bias};
  if (transposed) {
    w.run = [p, x](Backend b, const opt::BackendConfig& cfg) {
      return b == Backend::kReference ? ref::g3_conv_transpose2d(p, x) : opt::g3_conv_transpose2d(p, x, cfg);
    };
    w.baseline_cost = w.optimized_cost = perf::cost_g3_conv_transpose(resolve_g3_conv_transpose(p, x));
  } else {
    w.run = [p, x](Backend b, const opt::BackendConfig& cfg) {
      return b == Backend::kReference ? ref::g3_conv2d(p, x) : opt::g3_conv2d(p, x, cfg);
    };
    w.baseline_cost = w.optimized_cost = perf::cost_g3_conv(resolve_g3_conv(p, x));
  }
  return w;
}

Workload activation_workload(const FunctionInfo& f, const Shape& shape, std::mt19937_64& rng) {
  Tensor x = random_tensor(shape, rng);
  Workload w;
  w.function = std::string(f.name);
  w.tensors = {x};
  perf::CostEstimate cost;
  switch (f.kind) {
    case Kind::kSumVsilu:
      w.run = [x](Backend b, const opt::BackendConfig& cfg) {
        return b == Backend::kReference ? ref::sum_vsilu(x) : opt::sum_vsilu(x, cfg);
      };
      cost = perf::cost_activation(x.size(), kG3VectorBlades, perf::Activation::kSum);
      break;
    case Kind::kMeanVsilu:
      w.run = [x](Backend b, const opt::BackendConfig& cfg) {
        return b == Backend::kReference ? ref::mean_vsilu(x) : opt::mean_vsilu(x, cfg);
      };
      cost = perf::cost_activation(x.size(), kG3VectorBlades, perf::Activation::kMean);
      break;
    default: {
      const std::size_t channels = shape.at(1);
      GateParams p{random_tensor({channels, kG3VectorBlades}, rng), random_tensor({channels}, rng)};
      w.tensors.push_back(p.weight);
      w.tensors.push_back(p.bias);
      w.run = [p, x](Backend b, const opt::BackendConfig& cfg) {
        return b == Backend::kReference ? ref::linear_vsilu(p, x) : opt::linear_vsilu(p, x, cfg);
      };
      cost = perf::cost_activation(x.size(), kG3VectorBlades, perf::Activation::kLinear, channels);
    }
  }
  w.baseline_cost = w.optimized_cost = cost;
  return w;
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Random geometry on `rank` axes with every output extent >= 1 and every
// axis (input, kernel, output) <= 8.
ConvSetup random_conv_setup(std::size_t rank, bool transposed, std::mt19937_64& rng) {
  ConvSetup s;
  s.rank = rank;
  s.batch = pick(rng, 1, 3);
  s.geom.groups = pick(rng, 1, 2);
  s.in_channels = s.geom.groups * pick(rng, 1, 3);
  s.out_channels = s.geom.groups * pick(rng, 1, 3);
  for (std::size_t a = 0; a < rank; ++a) {
    const std::size_t stride = pick(rng, 1, 2);
    const std::size_t padding = pick(rng, 0, 1);
    const std::size_t dilation = pick(rng, 1, 2);
    for (;;) {
      const std::size_t kernel = pick(rng, 1, 3);
      const std::size_t span = dilation * (kernel - 1) + 1;
      if (transposed) {
        const std::size_t length = pick(rng, 1, 6);
        const long out = static_cast<long>((length - 1) * stride + span) - 2 * static_cast<long>(padding);
        if (out < 1 || out > 8) continue;
        s.length[a] = length;
      } else {
        const std::size_t lo = span > 2 * padding ? span - 2 * padding : 1;
        if (lo > 8) continue;
        s.length[a] = pick(rng, lo, 8);
      }
      s.kernel[a] = kernel;
      break;
    }
    s.geom.stride[a] = stride;
    s.geom.padding[a] = padding;
    s.geom.dilation[a] = dilation;
  }
  return s;
}

Signature random_signature(int generators, std::mt19937_64& rng) {
  std::array<int, kMaxGenerators> metric{};
  for (int i = 0; i < generators; ++i) metric[static_cast<std::size_t>(i)] = pick(rng, 0, 1) ? 1 : -1;
  return Signature(std::span<const int>(metric.data(), static_cast<std::size_t>(generators)));
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kReference: return "reference";
    case Backend::kOptScalar: return "opt-scalar";
    case Backend::kOptSimd: return "opt-simd";
  }
  return "?";
}

std::optional<Backend> parse_backend(std::string_view name) {
  for (Backend b : kAllBackends) {
    if (backend_name(b) == name) return b;
  }
  return std::nullopt;
}

std::span<const std::string_view> function_names() { return kNames; }

bool is_function(std::string_view name) {
  return std::find(kNames.begin(), kNames.end(), name) != kNames.end();
}

Tensor Workload::operator()(Backend b) const { return run(b, default_config(function, b)); }

opt::BackendConfig default_config(std::string_view function, Backend b) { return config_for(lookup(function), b); }

Tensor random_tensor(Shape shape, std::mt19937_64& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (float& v : t.values()) v = dist(rng);
  return t;
}

double relative_error(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  const Tensor ac = a.materialize();
  const Tensor bc = b.materialize();
  double diff = 0, scale = 0;
  const auto av = ac.values();
  const auto bv = bc.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = std::abs(static_cast<double>(av[i]) - bv[i]);
    if (!(d <= diff)) diff = d;  // keeps NaN
    scale = std::max(scale, std::abs(static_cast<double>(bv[i])));
  }
  return diff / std::max(scale, static_cast<double>(std::numeric_limits<float>::min()));
}

Workload make_bench_workload(std::string_view function, std::size_t n, std::uint64_t seed) {
  const FunctionInfo& f = lookup(function);
  if (n == 0) throw std::invalid_argument("n must be positive");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(function_index(function)), static_cast<std::uint32_t>(n),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(n) >> 32)};
  std::mt19937_64 rng(seq);
  switch (f.kind) {
    case Kind::kLinear:
      return linear_workload(f, Signature::negative(f.generators), n, kLinearFeatures, kLinearFeatures, rng);
    case Kind::kConv:
    case Kind::kG3Conv:
    case Kind::kG3ConvTranspose: {
      ConvSetup s;
      s.batch = n;
      s.in_channels = f.conv.in_channels;
      s.out_channels = f.conv.out_channels;
      s.rank = f.kind == Kind::kConv ? static_cast<std::size_t>(f.generators) : 2;
      for (std::size_t a = 0; a < s.rank; ++a) {
        s.length[a] = f.conv.length;
        s.kernel[a] = f.conv.kernel;
      }
      if (f.kind == Kind::kConv) return conv_workload(f, Signature::negative(f.generators), s, rng);
      return g3_conv_workload(f, s, f.kind == Kind::kG3ConvTranspose, rng);
    }
    case Kind::kLinearVsilu:
      return activation_workload(f, {n, n, kGateExtent, kGateExtent, kG3VectorBlades}, rng);
    default:
      return activation_workload(f, {n, n, kG3VectorBlades}, rng);
  }
}

Workload make_random_workload(std::string_view function, std::mt19937_64& rng) {
  const FunctionInfo& f = lookup(function);
  switch (f.kind) {
    case Kind::kLinear:
      return linear_workload(f, random_signature(f.generators, rng), pick(rng, 1, 4), pick(rng, 1, 5),
                             pick(rng, 1, 6), rng);
    case Kind::kConv: {
      const auto rank = static_cast<std::size_t>(f.generators);
      return conv_workload(f, random_signature(f.generators, rng), random_conv_setup(rank, false, rng), rng);
    }
    case Kind::kG3Conv:
      return g3_conv_workload(f, random_conv_setup(2, false, rng), false, rng);
    case Kind::kG3ConvTranspose:
      return g3_conv_workload(f, random_conv_setup(2, true, rng), true, rng);
    case Kind::kLinearVsilu: {
      Shape shape{pick(rng, 1, 4), pick(rng, 1, 6)};
      const std::size_t extra = pick(rng, 0, 2);
      for (std::size_t a = 0; a < extra; ++a) shape.push_back(pick(rng, 1, 8));
      shape.push_back(kG3VectorBlades);
      return activation_workload(f, shape, rng);
    }
    default: {
      Shape shape;
      const std::size_t lead = pick(rng, 1, 3);
      for (std::size_t a = 0; a < lead; ++a) shape.push_back(pick(rng, 1, 8));
      shape.push_back(kG3VectorBlades);
      return activation_workload(f, shape, rng);
    }
  }
}

}  // namespace clifford::bench
