#pragma once

// Parameter types and shape rules shared by the reference and optimized
// backends.

#include <array>
#include <cmath>
#include <cstddef>

#include "clifford/algebra.hpp"
#include "clifford/tensor.hpp"

namespace clifford {

/// y[b,o] = bias[o] + sum_i weight[o,i] * x[b,i] (geometric product).
struct LinearParams {
  Tensor weight;  // (O, I, N)
  Tensor bias;    // (O, N)
  Signature sig;
};

/// Stride, padding and dilation per spatial axis (unused trailing axes are
/// ignored), plus channel groups.
struct ConvGeometry {
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> padding{0, 0, 0};
  std::array<std::size_t, 3> dilation{1, 1, 1};
  std::size_t groups = 1;

  static ConvGeometry uniform(std::size_t stride, std::size_t padding, std::size_t dilation,
                              std::size_t groups = 1);
};

/// Clifford convolution over 1 to 3 spatial axes.
struct ConvParams {
  Tensor weight;  // (CO, CI/G, K..., N)
  Tensor bias;    // (CO, N)
  Signature sig;
  ConvGeometry geom;
};

/// Convolution of G3 vector fields (3 coefficients per entry) with weights
/// in the even subalgebra of Cl(-1,-1,-1): (w0, w12, w13, w23).
/// Forward:    weight (CO, CI/G, KH, KW, 4), input (B, CI, H, W, 3).
/// Transposed: weight (CI, CO/G, KH, KW, 4), input (B, CI, H, W, 3); the
/// exact adjoint of the forward convolution with the same weight tensor.
struct G3ConvParams {
  Tensor weight;
  Tensor bias;  // (C_out, 3)
  ConvGeometry geom;
};

/// Per-channel gate of the linear VSiLU: gate = sigmoid(sum_j w[c,j] x_j + b[c]).
struct GateParams {
  Tensor weight;  // (C, 3)
  Tensor bias;    // (C)
};

inline constexpr std::size_t kG3VectorBlades = 3;
inline constexpr std::size_t kG3WeightBlades = 4;

/// Blade masks of the even-grade weight components and of the vector
/// components, in storage order.
inline constexpr std::array<unsigned, 4> kG3EvenBlades{0b000, 0b011, 0b101, 0b110};
inline constexpr std::array<unsigned, 3> kG3VectorBladeMasks{0b001, 0b010, 0b100};
inline constexpr std::array<int, 3> kG3Metric{-1, -1, -1};

/// Logistic sigmoid. Both backends evaluate it through this one definition.
inline float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

/// floor((L + 2P - Di(K-1) - 1) / S) + 1; throws std::invalid_argument when
/// the result would be < 1.
std::size_t conv_output_extent(std::size_t length, std::size_t kernel, std::size_t stride,
                               std::size_t padding, std::size_t dilation);
/// (L-1)S - 2P + Di(K-1) + 1; throws std::invalid_argument when < 1.
std::size_t conv_transpose_output_extent(std::size_t length, std::size_t kernel,
                                         std::size_t stride, std::size_t padding,
                                         std::size_t dilation);

/// Resolved shapes of a convolution, spatial axes padded to three with
/// extent-1 leading axes so every kernel can walk (D, H, W).
struct ConvShape {
  std::size_t batch = 0;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t groups = 1;
  std::size_t in_blades = 0;
  std::size_t weight_blades = 0;
  std::size_t spatial_rank = 0;
  std::array<std::size_t, 3> in{1, 1, 1};
  std::array<std::size_t, 3> out{1, 1, 1};
  std::array<std::size_t, 3> kernel{1, 1, 1};
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> padding{0, 0, 0};
  std::array<std::size_t, 3> dilation{1, 1, 1};

  std::size_t in_group() const { return in_channels / groups; }
  std::size_t out_group() const { return out_channels / groups; }
  std::size_t in_positions() const { return in[0] * in[1] * in[2]; }
  std::size_t out_positions() const { return out[0] * out[1] * out[2]; }
  std::size_t kernel_taps() const { return kernel[0] * kernel[1] * kernel[2]; }
  /// (B, CO, out..., blades)
  Shape output_shape(std::size_t blades) const;
};

void check_linear(const LinearParams& p, const Tensor& x);
ConvShape resolve_conv(const ConvParams& p, const Tensor& x, std::size_t spatial_rank);
ConvShape resolve_g3_conv(const G3ConvParams& p, const Tensor& x);
ConvShape resolve_g3_conv_transpose(const G3ConvParams& p, const Tensor& x);
void check_vector_field(const Tensor& x);
void check_gate(const GateParams& p, const Tensor& x);

}  // namespace clifford
