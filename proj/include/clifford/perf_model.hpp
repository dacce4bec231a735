#pragma once

// Analytic flop and compulsory-traffic models. Flops count single-precision
// adds and multiplies (a subtraction is an add, a sign flip is free); the
// logistic sigmoid counts as kSigmoidFlops. Bytes count every array touched
// once at 4 bytes per element.

#include <cstdint>

#include "clifford/layers.hpp"

namespace clifford::perf {

inline constexpr std::uint64_t kSigmoidFlops = 4;
inline constexpr std::uint64_t kBytesPerElement = 4;

struct CostEstimate {
  std::uint64_t flops = 0;
  std::uint64_t bytes_min = 0;
  /// flops / bytes_min, 0 when no traffic.
  double op_intensity = 0.0;
};

CostEstimate make_cost(std::uint64_t flops, std::uint64_t bytes_min);

struct LinearOps {
  std::uint64_t mults = 0;
  std::uint64_t adds = 0;
  std::uint64_t flops() const { return mults + adds; }
};

/// Operation counts of a Clifford linear layer. The kernel-trick baseline
/// accumulates each real output from zero and adds the bias; the inlined
/// version additionally combines N signed pair sums per output blade.
LinearOps linear_ops(std::uint64_t batch, std::uint64_t out, std::uint64_t in, std::uint64_t blades,
                     bool baseline);

/// bytes_min = 4 (B O N + B I N + N O I), plus N^2 O I kernel elements for
/// the baseline.
CostEstimate cost_linear(std::uint64_t batch, std::uint64_t out, std::uint64_t in, std::uint64_t blades,
                         bool baseline);

/// Upper bound 2 N^2 B CO (CI/G) L K: one multiply and one add per blade
/// pair per tap, padded taps included.
CostEstimate cost_conv(const ConvShape& s);
CostEstimate cost_conv(std::uint64_t batch, std::uint64_t out_channels, std::uint64_t in_channels,
                       std::uint64_t out_positions, std::uint64_t kernel_taps, std::uint64_t blades,
                       std::uint64_t groups = 1, std::uint64_t in_positions = 0);

/// g3 convolutions: 9 contributing (weight blade, vector blade) pairs per tap.
inline constexpr std::uint64_t kG3PairsPerTap = 9;
CostEstimate cost_g3_conv(const ConvShape& s);
/// Scatter form: every (input position, tap) pair, cropped ones included.
CostEstimate cost_g3_conv_transpose(const ConvShape& s);

enum class Activation { kSum, kMean, kLinear };

/// M = total element count (vectors * blades). `channels` sizes the linear
/// gate parameters.
CostEstimate cost_activation(std::uint64_t elements, std::uint64_t blades, Activation variant,
                             std::uint64_t channels = 0);

}  // namespace clifford::perf
