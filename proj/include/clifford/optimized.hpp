#pragma once

// Optimized backend: the geometric products are evaluated inside the layer
// loop nest instead of through an expanded real kernel.
//
// For every output multivector the N*N blade-pair products w_s * x_t are
// accumulated in independent streams over the reduction axis and only
// combined through the sign table (plus bias) at the end. The SIMD path
// keeps the same N*N sums in 8-lane registers: lane j of stream r holds
// sum w_{j^r} x_j, which lands on output blade r.

#include <cstdint>
#include <functional>
#include <span>

#include "clifford/layers.hpp"
#include "clifford/tensor.hpp"

namespace clifford::opt {

struct BackendConfig {
  /// 8-lane single precision path; falls back to scalar when unavailable.
  bool simd = true;
  /// Batch-loop unroll factor: 1, 2, 4 or 8.
  int unroll = 1;
  /// 8-lane transposed g3 convolution (unit stride along W only). Off by default; the bench enables it with simd.
  bool vectorize_g3_transpose = false;

  static BackendConfig scalar(int unroll = 1) { return {false, unroll, false}; }
};

/// Throws std::invalid_argument for an unsupported unroll factor.
void validate(const BackendConfig& cfg);

/// True when the library was built with the 8-lane kernels.
bool simd_available();

/// Number of independent multiply-accumulate streams in the linear inner
/// loop for blade count n.
constexpr int linear_accumulator_streams(int blades) { return blades * blades; }

Tensor linear(const LinearParams& p, const Tensor& x, const BackendConfig& cfg = {});

Tensor conv1d(const ConvParams& p, const Tensor& x, const BackendConfig& cfg = {});
Tensor conv2d(const ConvParams& p, const Tensor& x, const BackendConfig& cfg = {});
Tensor conv3d(const ConvParams& p, const Tensor& x, const BackendConfig& cfg = {});

Tensor g3_conv2d(const G3ConvParams& p, const Tensor& x, const BackendConfig& cfg = {});
Tensor g3_conv_transpose2d(const G3ConvParams& p, const Tensor& x, const BackendConfig& cfg = {});

Tensor sum_vsilu(const Tensor& x, const BackendConfig& cfg = {});
Tensor mean_vsilu(const Tensor& x, const BackendConfig& cfg = {});
Tensor linear_vsilu(const GateParams& p, const Tensor& x, const BackendConfig& cfg = {});

struct TuneResult {
  int unroll = 1;
  double median_ns = 0.0;
};

/// Candidate with the lowest median runtime; ties go to the smaller factor.
/// Throws std::invalid_argument on an empty list.
BackendConfig select_fastest(std::span<const TuneResult> results, BackendConfig base = {});

/// Times `run` for every candidate unroll factor (median of `reps` after
/// `warmup` untimed calls) and returns the fastest configuration.
/// `clock` returns monotonic nanoseconds.
BackendConfig autotune(const std::function<void(const BackendConfig&)>& run,
                       std::span<const int> candidates, BackendConfig base = {}, int reps = 5,
                       int warmup = 1,
                       const std::function<std::int64_t()>& clock = {});

}  // namespace clifford::opt
