#pragma once

// Baseline backend: the Clifford kernel trick.
//
// Multivector weights are expanded into a real block matrix (N x N blocks,
// block (r, t) = sign(s, t) * W[..., s] with s = r ^ t), inputs are permuted
// so blades become part of the real channel axis, a plain real
// matmul/convolution runs, and the result is permuted back. The real kernels
// here are straightforward loop nests; this backend is the correctness
// oracle and the timing baseline for the optimized one.

#include "clifford/algebra.hpp"
#include "clifford/layers.hpp"
#include "clifford/tensor.hpp"

namespace clifford::ref {

/// (O, I, N) weights -> (N*O, N*I) real kernel; row r*O+o, column t*I+i.
Tensor clifford_kernel(const Tensor& weight, const MultTable& table);

/// (CO, CI/G, K..., N) weights -> (G*N*(CO/G), N*(CI/G), K...) real
/// grouped-conv kernel. Real output channel (g*N + r)*(CO/G) + c, real input
/// channel (within the group) t*(CI/G) + c'.
Tensor clifford_conv_kernel(const Tensor& weight, const MultTable& table, std::size_t groups);

/// (C, C'/G, KH, KW, 4) even-grade weights -> (G*3*(C/G), 3*(C'/G), KH, KW)
/// real kernel of the grade-1 projected product.
Tensor g3_conv_kernel(const Tensor& weight, std::size_t groups);

Tensor linear(const LinearParams& p, const Tensor& x);

Tensor conv1d(const ConvParams& p, const Tensor& x);
Tensor conv2d(const ConvParams& p, const Tensor& x);
Tensor conv3d(const ConvParams& p, const Tensor& x);

Tensor g3_conv2d(const G3ConvParams& p, const Tensor& x);
Tensor g3_conv_transpose2d(const G3ConvParams& p, const Tensor& x);

/// out[..., k] = x[..., k] * sigmoid(sum_j x[..., j])
Tensor sum_vsilu(const Tensor& x);
/// out[..., k] = x[..., k] * sigmoid(mean_j x[..., j])
Tensor mean_vsilu(const Tensor& x);
/// out[b, c, ..., k] = x[b, c, ..., k] * sigmoid(sum_j w[c, j] x[b, c, ..., j] + bias[c])
Tensor linear_vsilu(const GateParams& p, const Tensor& x);

}  // namespace clifford::ref
