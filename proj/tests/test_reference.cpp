#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "cases.hpp"
#include "clifford/memory.hpp"
#include "clifford/reference.hpp"
#include "oracles.hpp"

using namespace clifford;

namespace {

Tensor conv_by_rank(const ConvParams& p, const Tensor& x, std::size_t rank) {
  switch (rank) {
    case 1: return ref::conv1d(p, x);
    case 2: return ref::conv2d(p, x);
    default: return ref::conv3d(p, x);
  }
}

double dot(const Tensor& a, const Tensor& b) {
  const Tensor ca = a.materialize(), cb = b.materialize();
  REQUIRE(ca.size() == cb.size());
  double s = 0;
  for (std::size_t k = 0; k < ca.size(); ++k) s += static_cast<double>(ca.values()[k]) * cb.values()[k];
  return s;
}

}  // namespace

TEST_CASE("clifford kernel for the complex algebra") {
  const Tensor w = Tensor::from_values({1, 1, 2}, {0.75f, -1.5f});
  const Tensor k = ref::clifford_kernel(w, build_mult_table(Signature::complex()));
  REQUIRE(k.shape() == Shape{2, 2});
  CHECK(k.at({0, 0}) == 0.75f);
  CHECK(k.at({0, 1}) == 1.5f);  // -w1
  CHECK(k.at({1, 0}) == -1.5f);
  CHECK(k.at({1, 1}) == 0.75f);

  const Tensor zero = ref::clifford_kernel(Tensor::zeros({3, 2, 4}), build_mult_table(Signature{1, 1}));
  for (float v : zero.values()) CHECK(v == 0.0f);
}

TEST_CASE("clifford kernel block structure for every signature") {
  std::mt19937_64 rng(21);
  for (const Signature& sig : cases::all_signatures()) {
    const std::size_t n = static_cast<std::size_t>(sig.blades()), O = 3, I = 2;
    const Tensor w = cases::random_tensor({O, I, n}, rng);
    const Tensor k = ref::clifford_kernel(w, build_mult_table(sig));
    REQUIRE(k.shape() == Shape{n * O, n * I});
    const auto g = cases::metric_of(sig);
    for (unsigned r = 0; r < n; ++r)
      for (unsigned t = 0; t < n; ++t) {
        const auto p = oracle::blade_product(r ^ t, t, g);
        REQUIRE(p.mask == r);
        for (std::size_t o = 0; o < O; ++o)
          for (std::size_t i = 0; i < I; ++i)
            CHECK(k.at({r * O + o, t * I + i}) == static_cast<float>(p.sign) * w.at({o, i, r ^ t}));
      }
  }
}

TEST_CASE("kernel applied to unit vectors reproduces the product for g = (+1, +1)") {
  const Signature sig{1, 1};
  const MultTable table = build_mult_table(sig);
  const Tensor w = Tensor::from_values({1, 1, 4}, {1, 2, 3, 4});
  const Tensor k = ref::clifford_kernel(w, table);
  for (int t = 0; t < 4; ++t) {
    Multivector unit(sig);
    unit[t] = 1;
    const Multivector p = mv_product(Multivector(sig, {1, 2, 3, 4}), unit, table);
    for (std::size_t r = 0; r < 4; ++r) CHECK(k.at({r, static_cast<std::size_t>(t)}) == p[static_cast<int>(r)]);
  }
}

TEST_CASE("kernel expansion allocates N times the weights") {
  const Signature sig = Signature::negative(3);
  const Tensor w = Tensor::zeros({5, 3, 8});
  const auto before = memory::snapshot();
  const Tensor k = ref::clifford_kernel(w, build_mult_table(sig));
  const auto used = memory::snapshot() - before;
  CHECK(used.buffers == 1);
  CHECK(used.floats == 8 * (5 * 3 * 8));
}

TEST_CASE("reference linear worked example") {
  const LinearParams p{Tensor::from_values({1, 1, 2}, {2, 3}), Tensor::from_values({1, 2}, {1, 1}),
                       Signature::complex()};
  const Tensor y = ref::linear(p, Tensor::from_values({1, 1, 2}, {4, 5}));
  REQUIRE(y.shape() == Shape{1, 1, 2});
  CHECK(y.values()[0] == -6.0f);
  CHECK(y.values()[1] == 23.0f);
}

TEST_CASE("reference linear with zero input returns the bias") {
  std::mt19937_64 rng(1);
  const Signature sig{-1, 1, -1};
  const LinearParams p{cases::random_tensor({3, 4, 8}, rng), cases::random_tensor({3, 8}, rng), sig};
  const Tensor y = ref::linear(p, Tensor::zeros({2, 4, 8}));
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t o = 0; o < 3; ++o)
      for (std::size_t k = 0; k < 8; ++k) CHECK(y.at({b, o, k}) == p.bias.at({o, k}));
}

TEST_CASE("reference linear shape errors") {
  const LinearParams p{Tensor::zeros({2, 3, 4}), Tensor::zeros({2, 4}), Signature{1, 1}};
  CHECK_THROWS_AS(ref::linear(p, Tensor::zeros({1, 2, 4})), std::invalid_argument);
  CHECK_THROWS_AS(ref::linear(p, Tensor::zeros({1, 3, 2})), std::invalid_argument);
  const LinearParams bad{Tensor::zeros({2, 3, 4}), Tensor::zeros({3, 4}), Signature{1, 1}};
  CHECK_THROWS_AS(ref::linear(bad, Tensor::zeros({1, 3, 4})), std::invalid_argument);
}

TEST_CASE("reference linear equals the direct product loop") {
  std::mt19937_64 rng(2);
  for (const Signature& sig : cases::all_signatures()) {
    CAPTURE(sig.to_string());
    const auto g = cases::metric_of(sig);
    for (int trial = 0; trial < 100; ++trial) {
      const cases::LinearCase c = cases::random_linear(rng, sig);
      const auto expect = oracle::linear_direct(oracle::to_values<double>(c.params.weight),
                                                oracle::to_values<double>(c.params.bias),
                                                oracle::to_values<double>(c.x), c.batch, c.out, c.in, g);
      CHECK(oracle::rel_error(ref::linear(c.params, c.x), expect) <= 1e-5);
    }
  }
}

TEST_CASE("complex-algebra linear equals complex arithmetic") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const cases::LinearCase c = cases::random_linear(rng, Signature::complex());
    const Tensor y = ref::linear(c.params, c.x);
    std::vector<double> expect;
    for (std::size_t b = 0; b < c.batch; ++b)
      for (std::size_t o = 0; o < c.out; ++o) {
        std::complex<double> acc(c.params.bias.at({o, 0}), c.params.bias.at({o, 1}));
        for (std::size_t i = 0; i < c.in; ++i)
          acc += std::complex<double>(c.params.weight.at({o, i, 0}), c.params.weight.at({o, i, 1})) *
                 std::complex<double>(c.x.at({b, i, 0}), c.x.at({b, i, 1}));
        expect.push_back(acc.real());
        expect.push_back(acc.imag());
      }
    CHECK(oracle::rel_error(y, expect) <= 1e-5);
  }
}

TEST_CASE("reference conv1d all-ones example") {
  const ConvParams p{Tensor::from_values({1, 1, 2, 2}, {1, 1, 1, 1}), Tensor::zeros({1, 2}), Signature::complex(),
                     {}};
  const Tensor y = ref::conv1d(p, Tensor::from_values({1, 1, 3, 2}, {1, 1, 1, 1, 1, 1}));
  REQUIRE(y.shape() == Shape{1, 1, 2, 2});
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(y.at({0, 0, l, 0}) == 0.0f);
    CHECK(y.at({0, 0, l, 1}) == 4.0f);
  }
}

TEST_CASE("identity kernel adds the bias") {
  std::mt19937_64 rng(6);
  const Signature sig{1, -1};
  Tensor w = Tensor::zeros({3, 3, 1, 1, 4});
  for (std::size_t c = 0; c < 3; ++c) w.values()[(c * 3 + c) * 4] = 1.0f;
  const ConvParams p{w, cases::random_tensor({3, 4}, rng), sig, {}};
  const Tensor x = cases::random_tensor({2, 3, 4, 5, 4}, rng);
  const Tensor y = ref::conv2d(p, x);
  REQUIRE(y.shape() == x.shape());
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t h = 0; h < 4; ++h)
        for (std::size_t v = 0; v < 5; ++v)
          for (std::size_t k = 0; k < 4; ++k)
            CHECK(y.at({b, c, h, v, k}) == doctest::Approx(x.at({b, c, h, v, k}) + p.bias.at({c, k})).epsilon(1e-6));
}

TEST_CASE("empty batch gives an empty output") {
  const ConvParams p{Tensor::zeros({2, 1, 3, 2}), Tensor::zeros({2, 2}), Signature::complex(), {}};
  const Tensor y = ref::conv1d(p, Tensor::zeros({0, 1, 5, 2}));
  CHECK(y.shape() == Shape{0, 2, 3, 2});
}

TEST_CASE("conv argument errors") {
  const Signature sig = Signature::complex();
  const ConvParams p{Tensor::zeros({2, 1, 3, 2}), Tensor::zeros({2, 2}), sig, {}};
  CHECK_THROWS_AS(ref::conv1d(p, Tensor::zeros({1, 1, 2, 2})), std::invalid_argument);  // output extent 0
  CHECK_THROWS_AS(ref::conv1d(p, Tensor::zeros({1, 2, 5, 2})), std::invalid_argument);  // channel mismatch
  ConvParams grouped = p;
  grouped.geom.groups = 2;
  grouped.weight = Tensor::zeros({3, 1, 3, 2});
  grouped.bias = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(ref::conv1d(grouped, Tensor::zeros({1, 2, 5, 2})), std::invalid_argument);  // CO % G
  ConvParams strideless = p;
  strideless.geom.stride[0] = 0;
  CHECK_THROWS_AS(ref::conv1d(strideless, Tensor::zeros({1, 1, 5, 2})), std::invalid_argument);
}

TEST_CASE("reference convolutions equal direct summation") {
  std::mt19937_64 rng(8);
  for (std::size_t rank = 1; rank <= 3; ++rank)
    for (int trial = 0; trial < 30; ++trial) {
      const Signature sig = cases::random_signature(rng, static_cast<int>(rank));
      const cases::ConvCase c = cases::random_conv(rng, rank, static_cast<std::size_t>(sig.blades()));
      CAPTURE(rank);
      CAPTURE(trial);
      const Tensor y = conv_by_rank(cases::conv_params(c, sig), c.x, rank);
      CHECK(oracle::rel_error(y, cases::conv_oracle(c, sig)) <= 1e-4);
    }
}

TEST_CASE("g3 scalar weights act as the identity") {
  std::mt19937_64 rng(10);
  Tensor w = Tensor::zeros({2, 2, 1, 1, 4});
  w.values()[0] = 1.0f;
  w.values()[(1 * 2 + 1) * 4] = 1.0f;
  const G3ConvParams p{w, Tensor::zeros({2, 3}), {}};
  const Tensor x = cases::random_tensor({2, 2, 3, 4, 3}, rng);
  for (const Tensor& y : {ref::g3_conv2d(p, x), ref::g3_conv_transpose2d(p, x)}) {
    REQUIRE(y.shape() == x.shape());
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(y.values()[k] == x.values()[k]);
  }
}

TEST_CASE("g3 single tap is the grade-1 part of the product") {
  // (w0 + w12 e1e2 + w13 e1e3 + w23 e2e3)(x1 e1 + x2 e2 + x3 e3) with e_i^2 = -1
  const float w0 = 0.5f, w12 = 2.0f, w13 = -1.0f, w23 = 3.0f, x1 = 1.5f, x2 = -0.5f, x3 = 0.25f;
  const G3ConvParams p{Tensor::from_values({1, 1, 1, 1, 4}, {w0, w12, w13, w23}), Tensor::zeros({1, 3}), {}};
  const Tensor y = ref::g3_conv2d(p, Tensor::from_values({1, 1, 1, 1, 3}, {x1, x2, x3}));
  // full product through the word oracle, projected on e1, e2, e3
  std::vector<double> w(8, 0.0), x(8, 0.0);
  w[0] = w0, w[3] = w12, w[5] = w13, w[6] = w23;
  x[1] = x1, x[2] = x2, x[4] = x3;
  const auto full = oracle::product(w, x, oracle::kG3Metric);
  CHECK(y.values()[0] == doctest::Approx(full[1]));
  CHECK(y.values()[1] == doctest::Approx(full[2]));
  CHECK(y.values()[2] == doctest::Approx(full[4]));
  // e12 e1 = -e1 e1 e2 = e2: the w12 x1 term lands on e2 with + sign
  CHECK(full[2] == doctest::Approx(w0 * x2 + w12 * x1 - w23 * x3));
}

TEST_CASE("degenerate transpose equals the forward conv of the reversed weight") {
  std::mt19937_64 rng(12);
  const Tensor w = cases::random_tensor({3, 2, 1, 1, 4}, rng);  // transposed: (CI=3, CO=2)
  Tensor fw = Tensor::zeros({2, 3, 1, 1, 4});                   // forward: (CO=2, CI=3)
  for (std::size_t ci = 0; ci < 3; ++ci)
    for (std::size_t co = 0; co < 2; ++co)
      for (std::size_t k = 0; k < 4; ++k)
        fw.values()[(co * 3 + ci) * 4 + k] = (k == 0 ? 1.0f : -1.0f) * w.at({ci, co, 0, 0, k});
  const Tensor bias = cases::random_tensor({2, 3}, rng);
  const Tensor x = cases::random_tensor({2, 3, 4, 3, 3}, rng);
  const Tensor a = ref::g3_conv_transpose2d({w, bias, {}}, x);
  const Tensor b = ref::g3_conv2d({fw, bias, {}}, x);
  REQUIRE(a.shape() == b.shape());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.values()[k] == doctest::Approx(b.values()[k]).epsilon(1e-5));
}

TEST_CASE("g3 convolutions equal the direct oracles") {
  std::mt19937_64 rng(14);
  for (bool transposed : {false, true})
    for (int trial = 0; trial < 60; ++trial) {
      const cases::ConvCase c = cases::random_g3(rng, transposed);
      CAPTURE(transposed);
      CAPTURE(trial);
      const G3ConvParams p = cases::g3_params(c);
      const Tensor y = transposed ? ref::g3_conv_transpose2d(p, c.x) : ref::g3_conv2d(p, c.x);
      CHECK(oracle::rel_error(y, cases::g3_oracle(c, transposed)) <= 1e-4);
    }
}

TEST_CASE("g3 transposed conv is the adjoint of the forward conv") {
  std::mt19937_64 rng(16);
  int checked = 0;
  while (checked < 40) {
    cases::ConvCase c = cases::random_g3(rng, false);
    const auto& d = c.dims;
    bool exact = true;
    for (int a = 1; a < 3; ++a)
      exact = exact && (d.in[a] + 2 * d.padding[a] - d.dilation[a] * (d.kernel[a] - 1) - 1) % d.stride[a] == 0;
    if (!exact) continue;  // the transpose only recovers L when no positions were floored away
    ++checked;
    const G3ConvParams fwd{c.weight, Tensor::zeros({d.out_channels, 3}), c.geom};
    const G3ConvParams bwd{c.weight, Tensor::zeros({d.in_channels, 3}), c.geom};
    const Tensor y = ref::g3_conv2d(fwd, c.x);
    const Tensor v = cases::random_tensor(y.shape(), rng);
    const Tensor xt = ref::g3_conv_transpose2d(bwd, v);
    REQUIRE(xt.shape() == c.x.shape());
    const double lhs = dot(y, v), rhs = dot(c.x, xt);
    CHECK(std::abs(lhs - rhs) <= 1e-3 * std::max({std::abs(lhs), std::abs(rhs), 1.0}));
  }
}

TEST_CASE("g3 blade extent is checked") {
  const G3ConvParams p{Tensor::zeros({1, 1, 1, 1, 4}), Tensor::zeros({1, 3}), {}};
  CHECK_THROWS_AS(ref::g3_conv2d(p, Tensor::zeros({1, 1, 2, 2, 4})), std::invalid_argument);
  CHECK_THROWS_AS(ref::g3_conv_transpose2d(p, Tensor::zeros({1, 1, 2, 2, 2})), std::invalid_argument);
}

TEST_CASE("vsilu examples") {
  const Tensor x = Tensor::from_values({1, 3}, {1, 2, 3});
  const Tensor y = ref::sum_vsilu(x);
  CHECK(y.values()[0] == doctest::Approx(0.9975274).epsilon(1e-6));
  CHECK(y.values()[1] == doctest::Approx(1.9950548).epsilon(1e-6));
  CHECK(y.values()[2] == doctest::Approx(2.9925821).epsilon(1e-6));

  for (const Tensor& z : {ref::sum_vsilu(Tensor::zeros({2, 4, 3})), ref::mean_vsilu(Tensor::zeros({2, 4, 3}))})
    for (float v : z.values()) CHECK(v == 0.0f);

  const float v = 0.7f;
  const Tensor m = ref::mean_vsilu(Tensor::from_values({1, 3}, {v, v, v}));
  const double gate = 1.0 / (1.0 + std::exp(-static_cast<double>(v)));
  for (float o : m.values()) CHECK(o == doctest::Approx(v * gate).epsilon(1e-6));
  const Tensor s = ref::sum_vsilu(Tensor::from_values({1, 3}, {v / 3, v / 3, v / 3}));
  for (float o : s.values()) CHECK(o == doctest::Approx(v / 3 * gate).epsilon(1e-6));
}

TEST_CASE("vsilu equals the oracle") {
  std::mt19937_64 rng(18);
  const Tensor x = cases::random_tensor({4, 5, 6, 3}, rng);
  const auto xs = oracle::to_values<double>(x);
  CHECK(oracle::rel_error(ref::sum_vsilu(x), oracle::vsilu(xs, 3, oracle::Gate::kSum)) <= 1e-6);
  CHECK(oracle::rel_error(ref::mean_vsilu(x), oracle::vsilu(xs, 3, oracle::Gate::kMean)) <= 1e-6);
  const GateParams gp{cases::random_tensor({5, 3}, rng), cases::random_tensor({5}, rng)};
  CHECK(oracle::rel_error(ref::linear_vsilu(gp, x),
                          oracle::linear_vsilu(xs, oracle::to_values<double>(gp.weight),
                                               oracle::to_values<double>(gp.bias), 4, 5)) <= 1e-6);
}

TEST_CASE("vsilu shape errors") {
  CHECK_THROWS_AS(ref::sum_vsilu(Tensor::zeros({2, 4})), std::invalid_argument);
  CHECK_THROWS_AS(ref::mean_vsilu(Tensor::zeros({2, 8})), std::invalid_argument);
  const GateParams gp{Tensor::zeros({5, 3}), Tensor::zeros({5})};
  CHECK_THROWS_AS(ref::linear_vsilu(gp, Tensor::zeros({2, 4, 3})), std::invalid_argument);
}
