#include "clifford/perf_model.hpp"

namespace clifford::perf {

CostEstimate make_cost(std::uint64_t flops, std::uint64_t bytes_min) {
  CostEstimate c;
  c.flops = flops;
  c.bytes_min = bytes_min;
  c.op_intensity = bytes_min > 0 ? static_cast<double>(flops) / static_cast<double>(bytes_min) : 0.0;
  return c;
}

LinearOps linear_ops(std::uint64_t batch, std::uint64_t out, std::uint64_t in, std::uint64_t blades,
                     bool baseline) {
  const std::uint64_t pairs = blades * blades * batch * out * in;
  LinearOps ops;
  ops.mults = pairs;
  ops.adds = pairs + blades * batch * out;
  if (!baseline) ops.adds += blades * (blades - 1) * batch * out;
  return ops;
}

CostEstimate cost_linear(std::uint64_t batch, std::uint64_t out, std::uint64_t in, std::uint64_t blades,
                         bool baseline) {
  std::uint64_t elements = batch * out * blades + batch * in * blades + blades * out * in;
  if (baseline) elements += blades * blades * out * in;
  return make_cost(linear_ops(batch, out, in, blades, baseline).flops(), kBytesPerElement * elements);
}

CostEstimate cost_conv(std::uint64_t batch, std::uint64_t out_channels, std::uint64_t in_channels,
                       std::uint64_t out_positions, std::uint64_t kernel_taps, std::uint64_t blades,
                       std::uint64_t groups, std::uint64_t in_positions) {
  const std::uint64_t in_group = in_channels / groups;
  const std::uint64_t flops = 2 * blades * blades * batch * out_channels * in_group * out_positions * kernel_taps;
  const std::uint64_t elements = batch * in_channels * in_positions * blades +
                                 batch * out_channels * out_positions * blades +
                                 out_channels * in_group * kernel_taps * blades;
  return make_cost(flops, kBytesPerElement * elements);
}

CostEstimate cost_conv(const ConvShape& s) {
  return cost_conv(s.batch, s.out_channels, s.in_channels, s.out_positions(), s.kernel_taps(), s.in_blades,
                   s.groups, s.in_positions());
}

namespace {

std::uint64_t g3_bytes(const ConvShape& s, std::uint64_t weight_elements) {
  const std::uint64_t elements = s.batch * s.in_channels * s.in_positions() * kG3VectorBlades +
                                 s.batch * s.out_channels * s.out_positions() * kG3VectorBlades +
                                 weight_elements;
  return kBytesPerElement * elements;
}

}  // namespace

CostEstimate cost_g3_conv(const ConvShape& s) {
  const std::uint64_t flops =
      2 * kG3PairsPerTap * s.batch * s.out_channels * s.in_group() * s.out_positions() * s.kernel_taps();
  return make_cost(flops, g3_bytes(s, s.out_channels * s.in_group() * s.kernel_taps() * kG3WeightBlades));
}

CostEstimate cost_g3_conv_transpose(const ConvShape& s) {
  const std::uint64_t flops =
      2 * kG3PairsPerTap * s.batch * s.in_channels * s.out_group() * s.in_positions() * s.kernel_taps();
  return make_cost(flops, g3_bytes(s, s.in_channels * s.out_group() * s.kernel_taps() * kG3WeightBlades));
}

CostEstimate cost_activation(std::uint64_t elements, std::uint64_t blades, Activation variant,
                             std::uint64_t channels) {
  const std::uint64_t groups = blades > 0 ? elements / blades : 0;
  // gating multiplies + sigmoid per vector
  std::uint64_t flops = elements + kSigmoidFlops * groups;
  std::uint64_t bytes = kBytesPerElement * 2 * elements;
  switch (variant) {
    case Activation::kSum:
      flops += (blades - 1) * groups;
      break;
    case Activation::kMean:
      flops += blades * groups;  // N-1 adds and one division
      break;
    case Activation::kLinear:
      flops += 2 * blades * groups;  // N multiplies, N-1 adds, bias add
      bytes += kBytesPerElement * channels * (blades + 1);
      break;
  }
  return make_cost(flops, bytes);
}

}  // namespace clifford::perf
