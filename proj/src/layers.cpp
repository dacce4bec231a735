#include "clifford/layers.hpp"

#include <stdexcept>
#include <string>

namespace clifford {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

void expect_rank(const Tensor& t, std::size_t rank, const char* name) {
  if (t.rank() != rank) {
    fail(std::string(name) + " must have rank " + std::to_string(rank) + ", got shape " +
         shape_string(t.shape()));
  }
}

void check_geometry(const ConvGeometry& g, std::size_t rank) {
  if (g.groups == 0) fail("groups must be >= 1");
  for (std::size_t a = 0; a < rank; ++a) {
    if (g.stride[a] == 0) fail("stride must be >= 1");
    if (g.dilation[a] == 0) fail("dilation must be >= 1");
  }
}

// Copies per-axis geometry into the trailing slots of the (D, H, W) frame.
void place_geometry(ConvShape& s, const ConvGeometry& g, std::size_t rank) {
  const std::size_t lead = 3 - rank;
  for (std::size_t a = 0; a < rank; ++a) {
    s.stride[lead + a] = g.stride[a];
    s.padding[lead + a] = g.padding[a];
    s.dilation[lead + a] = g.dilation[a];
  }
  s.groups = g.groups;
  s.spatial_rank = rank;
}

}  // namespace

ConvGeometry ConvGeometry::uniform(std::size_t stride, std::size_t padding, std::size_t dilation,
                                   std::size_t groups) {
  ConvGeometry g;
  g.stride.fill(stride);
  g.padding.fill(padding);
  g.dilation.fill(dilation);
  g.groups = groups;
  return g;
}

std::size_t conv_output_extent(std::size_t length, std::size_t kernel, std::size_t stride,
                               std::size_t padding, std::size_t dilation) {
  if (kernel == 0 || stride == 0 || dilation == 0) fail("kernel, stride and dilation must be >= 1");
  const long long span = static_cast<long long>(dilation) * static_cast<long long>(kernel - 1) + 1;
  const long long padded = static_cast<long long>(length) + 2 * static_cast<long long>(padding);
  if (padded < span) {
    fail("convolution output extent would be < 1 (length " + std::to_string(length) +
         ", kernel " + std::to_string(kernel) + ", padding " + std::to_string(padding) +
         ", dilation " + std::to_string(dilation) + ")");
  }
  return static_cast<std::size_t>((padded - span) / static_cast<long long>(stride) + 1);
}

std::size_t conv_transpose_output_extent(std::size_t length, std::size_t kernel,
                                         std::size_t stride, std::size_t padding,
                                         std::size_t dilation) {
  if (length == 0 || kernel == 0 || stride == 0 || dilation == 0) {
    fail("length, kernel, stride and dilation must be >= 1");
  }
  const long long out = static_cast<long long>((length - 1) * stride) -
                        2 * static_cast<long long>(padding) +
                        static_cast<long long>(dilation * (kernel - 1)) + 1;
  if (out < 1) fail("transposed convolution output extent would be < 1");
  return static_cast<std::size_t>(out);
}

Shape ConvShape::output_shape(std::size_t blades) const {
  Shape shape{batch, out_channels};
  for (std::size_t a = 3 - spatial_rank; a < 3; ++a) shape.push_back(out[a]);
  shape.push_back(blades);
  return shape;
}

void check_linear(const LinearParams& p, const Tensor& x) {
  const auto n = static_cast<std::size_t>(p.sig.blades());
  expect_rank(p.weight, 3, "linear weight");
  expect_rank(p.bias, 2, "linear bias");
  expect_rank(x, 3, "linear input");
  if (p.weight.extent(2) != n || p.bias.extent(1) != n || x.extent(2) != n) {
    fail("linear layer over " + p.sig.to_string() + " needs blade axis " + std::to_string(n) +
         "; got weight " + shape_string(p.weight.shape()) + ", bias " +
         shape_string(p.bias.shape()) + ", input " + shape_string(x.shape()));
  }
  if (p.bias.extent(0) != p.weight.extent(0)) fail("linear bias rows must match weight rows");
  if (x.extent(1) != p.weight.extent(1)) {
    fail("linear input features " + std::to_string(x.extent(1)) + " != weight columns " +
         std::to_string(p.weight.extent(1)));
  }
}

ConvShape resolve_conv(const ConvParams& p, const Tensor& x, std::size_t rank) {
  const auto n = static_cast<std::size_t>(p.sig.blades());
  expect_rank(x, rank + 3, "convolution input");
  expect_rank(p.weight, rank + 3, "convolution weight");
  expect_rank(p.bias, 2, "convolution bias");
  check_geometry(p.geom, rank);
  if (x.extent(rank + 2) != n || p.weight.extent(rank + 2) != n || p.bias.extent(1) != n) {
    fail("convolution over " + p.sig.to_string() + " needs blade axis " + std::to_string(n));
  }
  ConvShape s;
  place_geometry(s, p.geom, rank);
  s.batch = x.extent(0);
  s.in_channels = x.extent(1);
  s.out_channels = p.weight.extent(0);
  s.in_blades = n;
  s.weight_blades = n;
  if (s.in_channels % s.groups || s.out_channels % s.groups) {
    fail("channels (" + std::to_string(s.in_channels) + " in, " +
         std::to_string(s.out_channels) + " out) not divisible by groups " +
         std::to_string(s.groups));
  }
  if (p.weight.extent(1) != s.in_group()) {
    fail("convolution weight expects " + std::to_string(p.weight.extent(1)) +
         " input channels per group, input provides " + std::to_string(s.in_group()));
  }
  if (p.bias.extent(0) != s.out_channels) fail("convolution bias must have one row per output channel");
  const std::size_t lead = 3 - rank;
  for (std::size_t a = 0; a < rank; ++a) {
    s.in[lead + a] = x.extent(2 + a);
    s.kernel[lead + a] = p.weight.extent(2 + a);
    s.out[lead + a] = conv_output_extent(s.in[lead + a], s.kernel[lead + a], s.stride[lead + a],
                                         s.padding[lead + a], s.dilation[lead + a]);
  }
  return s;
}

namespace {

ConvShape resolve_g3_common(const G3ConvParams& p, const Tensor& x) {
  expect_rank(x, 5, "g3 convolution input");
  expect_rank(p.weight, 5, "g3 convolution weight");
  expect_rank(p.bias, 2, "g3 convolution bias");
  check_geometry(p.geom, 2);
  if (x.extent(4) != kG3VectorBlades) {
    fail("g3 convolution input needs blade axis 3, got " + shape_string(x.shape()));
  }
  if (p.weight.extent(4) != kG3WeightBlades) {
    fail("g3 convolution weight needs 4 even-grade coefficients, got " +
         shape_string(p.weight.shape()));
  }
  if (p.bias.extent(1) != kG3VectorBlades) fail("g3 convolution bias needs blade axis 3");
  ConvShape s;
  place_geometry(s, p.geom, 2);
  s.batch = x.extent(0);
  s.in_channels = x.extent(1);
  s.in_blades = kG3VectorBlades;
  s.weight_blades = kG3WeightBlades;
  s.in[1] = x.extent(2);
  s.in[2] = x.extent(3);
  s.kernel[1] = p.weight.extent(2);
  s.kernel[2] = p.weight.extent(3);
  return s;
}

void check_groups(const ConvShape& s) {
  if (s.in_channels % s.groups || s.out_channels % s.groups) {
    fail("channels (" + std::to_string(s.in_channels) + " in, " +
         std::to_string(s.out_channels) + " out) not divisible by groups " +
         std::to_string(s.groups));
  }
}

}  // namespace

ConvShape resolve_g3_conv(const G3ConvParams& p, const Tensor& x) {
  ConvShape s = resolve_g3_common(p, x);
  s.out_channels = p.weight.extent(0);
  check_groups(s);
  if (p.weight.extent(1) != s.in_group()) {
    fail("g3 convolution weight expects " + std::to_string(p.weight.extent(1)) +
         " input channels per group, input provides " + std::to_string(s.in_group()));
  }
  if (p.bias.extent(0) != s.out_channels) fail("g3 convolution bias must have one row per output channel");
  for (std::size_t a = 1; a < 3; ++a) {
    s.out[a] = conv_output_extent(s.in[a], s.kernel[a], s.stride[a], s.padding[a], s.dilation[a]);
  }
  return s;
}

ConvShape resolve_g3_conv_transpose(const G3ConvParams& p, const Tensor& x) {
  ConvShape s = resolve_g3_common(p, x);
  if (p.weight.extent(0) != s.in_channels) {
    fail("transposed g3 weight expects " + std::to_string(p.weight.extent(0)) +
         " input channels, input provides " + std::to_string(s.in_channels));
  }
  s.out_channels = p.weight.extent(1) * s.groups;
  check_groups(s);
  if (p.bias.extent(0) != s.out_channels) {
    fail("transposed g3 bias must have one row per output channel");
  }
  for (std::size_t a = 1; a < 3; ++a) {
    s.out[a] = conv_transpose_output_extent(s.in[a], s.kernel[a], s.stride[a], s.padding[a],
                                            s.dilation[a]);
  }
  return s;
}

void check_vector_field(const Tensor& x) {
  if (x.rank() < 1 || x.extent(x.rank() - 1) != kG3VectorBlades) {
    fail("vector activation needs blade axis 3, got " + shape_string(x.shape()));
  }
}

void check_gate(const GateParams& p, const Tensor& x) {
  check_vector_field(x);
  if (x.rank() < 3) fail("linear VSiLU input must be (B, C, ..., 3), got " + shape_string(x.shape()));
  expect_rank(p.weight, 2, "gate weight");
  expect_rank(p.bias, 1, "gate bias");
  if (p.weight.extent(1) != kG3VectorBlades) fail("gate weight must be (C, 3)");
  if (p.weight.extent(0) != x.extent(1) || p.bias.extent(0) != x.extent(1)) {
    fail("gate parameters for " + std::to_string(p.weight.extent(0)) +
         " channels, input has " + std::to_string(x.extent(1)));
  }
}

}  // namespace clifford
