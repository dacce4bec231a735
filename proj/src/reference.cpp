#include "clifford/reference.hpp"

#include <stdexcept>

namespace clifford::ref {

namespace {

// Real grouped convolution over a (D, H, W) frame. Input (B, G*gin, D, H, W),
// kernel (G*gout, gin, KD, KH, KW), bias (G*gout), output (B, G*gout, OD, OH, OW).
struct RealConv {
  std::size_t batch, groups, group_in, group_out;
  std::array<std::size_t, 3> in, out, kernel, stride, padding, dilation;
};

RealConv real_frame(const ConvShape& s, std::size_t in_blades, std::size_t out_blades) {
  return {s.batch,  s.groups,   in_blades * s.in_group(), out_blades * s.out_group(),
          s.in,     s.out,      s.kernel,
          s.stride, s.padding,  s.dilation};
}

// Out-of-range taps read zero padding.
void real_conv(const RealConv& c, const float* x, const float* k, const float* bias, float* y) {
  const std::size_t cin = c.groups * c.group_in;
  const std::size_t cout = c.groups * c.group_out;
  const std::size_t in_pos = c.in[0] * c.in[1] * c.in[2];
  const std::size_t taps = c.kernel[0] * c.kernel[1] * c.kernel[2];
  for (std::size_t b = 0; b < c.batch; ++b) {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      const std::size_t g = oc / c.group_out;
      for (std::size_t od = 0; od < c.out[0]; ++od) {
        for (std::size_t oh = 0; oh < c.out[1]; ++oh) {
          for (std::size_t ow = 0; ow < c.out[2]; ++ow) {
            float acc = bias[oc];
            for (std::size_t ic = 0; ic < c.group_in; ++ic) {
              const float* xc = x + (b * cin + g * c.group_in + ic) * in_pos;
              const float* kc = k + (oc * c.group_in + ic) * taps;
              for (std::size_t kd = 0; kd < c.kernel[0]; ++kd) {
                const long long id = static_cast<long long>(od * c.stride[0] + kd * c.dilation[0]) -
                                     static_cast<long long>(c.padding[0]);
                if (id < 0 || id >= static_cast<long long>(c.in[0])) continue;
                for (std::size_t kh = 0; kh < c.kernel[1]; ++kh) {
                  const long long ih = static_cast<long long>(oh * c.stride[1] + kh * c.dilation[1]) -
                                       static_cast<long long>(c.padding[1]);
                  if (ih < 0 || ih >= static_cast<long long>(c.in[1])) continue;
                  for (std::size_t kw = 0; kw < c.kernel[2]; ++kw) {
                    const long long iw = static_cast<long long>(ow * c.stride[2] + kw * c.dilation[2]) -
                                         static_cast<long long>(c.padding[2]);
                    if (iw < 0 || iw >= static_cast<long long>(c.in[2])) continue;
                    acc += kc[(kd * c.kernel[1] + kh) * c.kernel[2] + kw] *
                           xc[(static_cast<std::size_t>(id) * c.in[1] + static_cast<std::size_t>(ih)) * c.in[2] +
                              static_cast<std::size_t>(iw)];
                  }
                }
              }
            }
            y[((b * cout + oc) * c.out[0] + od) * c.out[1] * c.out[2] + oh * c.out[2] + ow] = acc;
          }
        }
      }
    }
  }
}

// Adjoint of real_conv with the same kernel: input (B, G*gout, D, H, W) is
// scattered into output (B, G*gin, OD, OH, OW); positions falling outside
// the output are cropped.
void real_conv_transpose(const RealConv& c, const float* x, const float* k, const float* bias,
                         float* y) {
  const std::size_t cin = c.groups * c.group_out;
  const std::size_t cout = c.groups * c.group_in;
  const std::size_t in_pos = c.in[0] * c.in[1] * c.in[2];
  const std::size_t out_pos = c.out[0] * c.out[1] * c.out[2];
  const std::size_t taps = c.kernel[0] * c.kernel[1] * c.kernel[2];
  for (std::size_t b = 0; b < c.batch; ++b) {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      for (std::size_t p = 0; p < out_pos; ++p) y[(b * cout + oc) * out_pos + p] = bias[oc];
    }
    for (std::size_t ic = 0; ic < cin; ++ic) {
      const std::size_t g = ic / c.group_out;
      for (std::size_t id = 0; id < c.in[0]; ++id) {
        for (std::size_t ih = 0; ih < c.in[1]; ++ih) {
          for (std::size_t iw = 0; iw < c.in[2]; ++iw) {
            const float v = x[(b * cin + ic) * in_pos + (id * c.in[1] + ih) * c.in[2] + iw];
            for (std::size_t oc = 0; oc < c.group_in; ++oc) {
              const float* kc = k + (ic * c.group_in + oc) * taps;
              float* yc = y + (b * cout + g * c.group_in + oc) * out_pos;
              for (std::size_t kd = 0; kd < c.kernel[0]; ++kd) {
                const long long od = static_cast<long long>(id * c.stride[0] + kd * c.dilation[0]) -
                                     static_cast<long long>(c.padding[0]);
                if (od < 0 || od >= static_cast<long long>(c.out[0])) continue;
                for (std::size_t kh = 0; kh < c.kernel[1]; ++kh) {
                  const long long oh = static_cast<long long>(ih * c.stride[1] + kh * c.dilation[1]) -
                                       static_cast<long long>(c.padding[1]);
                  if (oh < 0 || oh >= static_cast<long long>(c.out[1])) continue;
                  for (std::size_t kw = 0; kw < c.kernel[2]; ++kw) {
                    const long long ow = static_cast<long long>(iw * c.stride[2] + kw * c.dilation[2]) -
                                         static_cast<long long>(c.padding[2]);
                    if (ow < 0 || ow >= static_cast<long long>(c.out[2])) continue;
                    yc[(static_cast<std::size_t>(od) * c.out[1] + static_cast<std::size_t>(oh)) * c.out[2] +
                       static_cast<std::size_t>(ow)] += kc[(kd * c.kernel[1] + kh) * c.kernel[2] + kw] * v;
                  }
                }
              }
            }
          }
        }
      }
    }
  }
}

// (B, C, spatial..., blades) -> (B, G*blades*(C/G), positions), blade-major
// within each group.
Tensor to_real_channels(const Tensor& x, std::size_t batch, std::size_t channels,
                        std::size_t groups, std::size_t positions, std::size_t blades) {
  return x.reshape({batch, groups, channels / groups, positions, blades})
      .permute({0, 1, 4, 2, 3})
      .reshape({batch, channels * blades, positions});
}

// Inverse of to_real_channels into the final layer output shape.
Tensor from_real_channels(const Tensor& y, std::size_t batch, std::size_t channels,
                          std::size_t groups, std::size_t positions, std::size_t blades,
                          Shape out_shape) {
  return y.reshape({batch, groups, blades, channels / groups, positions})
      .permute({0, 1, 3, 4, 2})
      .materialize()
      .reshape(std::move(out_shape));
}

// (C, blades) bias -> real bias matching the real channel order.
Tensor real_bias(const Tensor& bias, std::size_t groups, std::size_t blades) {
  const std::size_t channels = bias.extent(0);
  return bias.reshape({groups, channels / groups, blades}).permute({0, 2, 1}).flatten();
}

Tensor conv_nd(const ConvParams& p, const Tensor& x, std::size_t rank) {
  const ConvShape s = resolve_conv(p, x, rank);
  const auto n = static_cast<std::size_t>(p.sig.blades());
  const MultTable table(p.sig);
  const Tensor kernel = clifford_conv_kernel(p.weight, table, s.groups);
  const Tensor input = to_real_channels(x, s.batch, s.in_channels, s.groups, s.in_positions(), n);
  const Tensor bias = real_bias(p.bias, s.groups, n);
  Tensor out = Tensor::zeros({s.batch, s.out_channels * n, s.out_positions()});
  real_conv(real_frame(s, n, n), input.data(), kernel.data(), bias.data(), out.data());
  return from_real_channels(out, s.batch, s.out_channels, s.groups, s.out_positions(), n,
                            s.output_shape(n));
}

}  // namespace

Tensor clifford_kernel(const Tensor& weight, const MultTable& table) {
  if (weight.rank() != 3 || weight.extent(2) != static_cast<std::size_t>(table.blades())) {
    throw std::invalid_argument("clifford_kernel needs (O, I, N) weights, got " +
                                shape_string(weight.shape()));
  }
  const std::size_t o_dim = weight.extent(0);
  const std::size_t i_dim = weight.extent(1);
  const auto n = static_cast<std::size_t>(table.blades());
  Tensor kernel = Tensor::zeros({n * o_dim, n * i_dim});
  float* k = kernel.data();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t s = r ^ t;
      const auto sign = static_cast<float>(table.sign(static_cast<int>(s), static_cast<int>(t)));
      for (std::size_t o = 0; o < o_dim; ++o) {
        for (std::size_t i = 0; i < i_dim; ++i) {
          k[(r * o_dim + o) * n * i_dim + t * i_dim + i] = sign * weight.at({o, i, s});
        }
      }
    }
  }
  return kernel;
}

Tensor clifford_conv_kernel(const Tensor& weight, const MultTable& table, std::size_t groups) {
  const auto n = static_cast<std::size_t>(table.blades());
  if (weight.rank() < 4 || weight.extent(weight.rank() - 1) != n) {
    throw std::invalid_argument("clifford_conv_kernel needs (CO, CI/G, K..., N) weights, got " +
                                shape_string(weight.shape()));
  }
  const std::size_t co = weight.extent(0);
  const std::size_t cig = weight.extent(1);
  const std::size_t cog = co / groups;
  std::size_t taps = 1;
  Shape shape{co * n, cig * n};
  for (std::size_t a = 2; a + 1 < weight.rank(); ++a) {
    taps *= weight.extent(a);
    shape.push_back(weight.extent(a));
  }
  const Tensor w = weight.reshape({co, cig, taps, n});
  const std::span<const float> wv = w.values();
  Tensor kernel = Tensor::zeros(shape);
  float* k = kernel.data();
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t t = 0; t < n; ++t) {
        const std::size_t s = r ^ t;
        const auto sign = static_cast<float>(table.sign(static_cast<int>(s), static_cast<int>(t)));
        for (std::size_t c = 0; c < cog; ++c) {
          const std::size_t row = (g * n + r) * cog + c;
          for (std::size_t ci = 0; ci < cig; ++ci) {
            const std::size_t col = t * cig + ci;
            for (std::size_t tap = 0; tap < taps; ++tap) {
              k[(row * n * cig + col) * taps + tap] =
                  sign * wv[((g * cog + c) * cig + ci) * taps * n + tap * n + s];
            }
          }
        }
      }
    }
  }
  return kernel;
}

Tensor g3_conv_kernel(const Tensor& weight, std::size_t groups) {
  if (weight.rank() != 5 || weight.extent(4) != kG3WeightBlades) {
    throw std::invalid_argument("g3_conv_kernel needs (C, C'/G, KH, KW, 4) weights, got " +
                                shape_string(weight.shape()));
  }
  constexpr std::size_t nv = kG3VectorBlades;
  const std::size_t rows = weight.extent(0);
  const std::size_t cols = weight.extent(1);
  const std::size_t rows_g = rows / groups;
  const std::size_t taps = weight.extent(2) * weight.extent(3);
  const Signature sig(kG3Metric);
  // Coefficient of w_s in block (r, t): the grade-1 part of e_s e_t on e_r.
  std::array<std::array<std::array<float, kG3WeightBlades>, nv>, nv> coef{};
  for (std::size_t r = 0; r < nv; ++r) {
    for (std::size_t t = 0; t < nv; ++t) {
      for (std::size_t s = 0; s < kG3WeightBlades; ++s) {
        const auto prod = blade_product(BladeIndex{kG3EvenBlades[s]},
                                        BladeIndex{kG3VectorBladeMasks[t]}, sig);
        if (prod.result.bits == kG3VectorBladeMasks[r]) coef[r][t][s] = static_cast<float>(prod.sign);
      }
    }
  }
  const Tensor w = weight.reshape({rows, cols, taps, kG3WeightBlades});
  const std::span<const float> wv = w.values();
  Tensor kernel = Tensor::zeros({rows * nv, cols * nv, weight.extent(2), weight.extent(3)});
  float* k = kernel.data();
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t r = 0; r < nv; ++r) {
      for (std::size_t c = 0; c < rows_g; ++c) {
        const std::size_t row = (g * nv + r) * rows_g + c;
        for (std::size_t t = 0; t < nv; ++t) {
          for (std::size_t ci = 0; ci < cols; ++ci) {
            const std::size_t col = t * cols + ci;
            for (std::size_t tap = 0; tap < taps; ++tap) {
              const float* ws = &wv[(((g * rows_g + c) * cols + ci) * taps + tap) * kG3WeightBlades];
              float v = 0.0f;
              for (std::size_t s = 0; s < kG3WeightBlades; ++s) v += coef[r][t][s] * ws[s];
              k[(row * nv * cols + col) * taps + tap] = v;
            }
          }
        }
      }
    }
  }
  return kernel;
}

Tensor linear(const LinearParams& p, const Tensor& x) {
  check_linear(p, x);
  const MultTable table(p.sig);
  const std::size_t batch = x.extent(0);
  const std::size_t in = x.extent(1);
  const std::size_t out = p.weight.extent(0);
  const auto n = static_cast<std::size_t>(p.sig.blades());

  const Tensor kernel = clifford_kernel(p.weight, table);  // (N*O, N*I)
  const Tensor bias = p.bias.permute({1, 0}).flatten();    // (N*O)
  const Tensor input = x.permute({0, 2, 1}).reshape({batch, n * in});
  Tensor y = Tensor::zeros({batch, n * out});

  const float* k = kernel.data();
  const float* bv = bias.data();
  const float* xv = input.data();
  float* yv = y.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t row = 0; row < n * out; ++row) {
      float acc = 0.0f;
      for (std::size_t col = 0; col < n * in; ++col) acc += k[row * n * in + col] * xv[b * n * in + col];
      yv[b * n * out + row] = acc + bv[row];
    }
  }
  return y.reshape({batch, n, out}).permute({0, 2, 1}).materialize();
}

Tensor conv1d(const ConvParams& p, const Tensor& x) { return conv_nd(p, x, 1); }
Tensor conv2d(const ConvParams& p, const Tensor& x) { return conv_nd(p, x, 2); }
Tensor conv3d(const ConvParams& p, const Tensor& x) { return conv_nd(p, x, 3); }

Tensor g3_conv2d(const G3ConvParams& p, const Tensor& x) {
  const ConvShape s = resolve_g3_conv(p, x);
  constexpr std::size_t nv = kG3VectorBlades;
  const Tensor kernel = g3_conv_kernel(p.weight, s.groups);
  const Tensor input = to_real_channels(x, s.batch, s.in_channels, s.groups, s.in_positions(), nv);
  const Tensor bias = real_bias(p.bias, s.groups, nv);
  Tensor out = Tensor::zeros({s.batch, s.out_channels * nv, s.out_positions()});
  real_conv(real_frame(s, nv, nv), input.data(), kernel.data(), bias.data(), out.data());
  return from_real_channels(out, s.batch, s.out_channels, s.groups, s.out_positions(), nv,
                            s.output_shape(nv));
}

Tensor g3_conv_transpose2d(const G3ConvParams& p, const Tensor& x) {
  const ConvShape s = resolve_g3_conv_transpose(p, x);
  constexpr std::size_t nv = kG3VectorBlades;
  // Same real kernel as the forward convolution whose output channels are
  // this layer's input channels.
  const Tensor kernel = g3_conv_kernel(p.weight, s.groups);
  const Tensor input = to_real_channels(x, s.batch, s.in_channels, s.groups, s.in_positions(), nv);
  const Tensor bias = real_bias(p.bias, s.groups, nv);
  Tensor out = Tensor::zeros({s.batch, s.out_channels * nv, s.out_positions()});
  // In the adjoint frame the roles of the extents swap: the forward "input"
  // is this layer's output.
  RealConv frame = real_frame(s, nv, nv);
  frame.group_in = nv * s.out_group();
  frame.group_out = nv * s.in_group();
  real_conv_transpose(frame, input.data(), kernel.data(), bias.data(), out.data());
  return from_real_channels(out, s.batch, s.out_channels, s.groups, s.out_positions(), nv,
                            s.output_shape(nv));
}

namespace {

// Gate tensor (..., 1) from an aggregate tensor, then broadcast multiply.
Tensor apply_gate(const Tensor& x, const Tensor& aggregate) {
  const std::size_t vectors = x.size() / kG3VectorBlades;
  Tensor gate = Tensor::zeros({vectors});
  const float* a = aggregate.data();
  float* g = gate.data();
  for (std::size_t v = 0; v < vectors; ++v) g[v] = sigmoid(a[v]);
  Tensor out = Tensor::zeros(x.shape());
  const float* xv = x.data();
  float* o = out.data();
  for (std::size_t v = 0; v < vectors; ++v) {
    for (std::size_t k = 0; k < kG3VectorBlades; ++k) {
      o[v * kG3VectorBlades + k] = xv[v * kG3VectorBlades + k] * g[v];
    }
  }
  return out;
}

Tensor blade_sum(const Tensor& x) {
  const std::size_t vectors = x.size() / kG3VectorBlades;
  Tensor sum = Tensor::zeros({vectors});
  const float* xv = x.data();
  float* s = sum.data();
  for (std::size_t v = 0; v < vectors; ++v) {
    float acc = 0.0f;
    for (std::size_t k = 0; k < kG3VectorBlades; ++k) acc += xv[v * kG3VectorBlades + k];
    s[v] = acc;
  }
  return sum;
}

}  // namespace

Tensor sum_vsilu(const Tensor& x) {
  check_vector_field(x);
  const Tensor input = x.materialize();
  return apply_gate(input, blade_sum(input));
}

Tensor mean_vsilu(const Tensor& x) {
  check_vector_field(x);
  const Tensor input = x.materialize();
  Tensor mean = blade_sum(input);
  for (float& v : mean.values()) v /= static_cast<float>(kG3VectorBlades);
  return apply_gate(input, mean);
}

Tensor linear_vsilu(const GateParams& p, const Tensor& x) {
  check_gate(p, x);
  const Tensor input = x.materialize();
  const std::size_t batch = input.extent(0);
  const std::size_t channels = input.extent(1);
  std::size_t positions = 1;
  for (std::size_t a = 2; a + 1 < input.rank(); ++a) positions *= input.extent(a);
  const Tensor weight = p.weight.materialize();
  const Tensor gate_bias = p.bias.materialize();
  const float* w = weight.data();
  const float* wb = gate_bias.data();
  // Depthwise 1x...x3 convolution producing one gate pre-activation per vector.
  Tensor pre = Tensor::zeros({batch * channels * positions});
  const float* xv = input.data();
  float* a = pre.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t q = 0; q < positions; ++q) {
        const std::size_t v = (b * channels + c) * positions + q;
        float acc = 0.0f;
        for (std::size_t j = 0; j < kG3VectorBlades; ++j) {
          acc += w[c * kG3VectorBlades + j] * xv[v * kG3VectorBlades + j];
        }
        a[v] = acc + wb[c];
      }
    }
  }
  return apply_gate(input, pre);
}

}  // namespace clifford::ref
