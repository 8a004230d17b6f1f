#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "egocf/errors.hpp"
#include "egocf/numkit/adam.hpp"
#include "egocf/numkit/checkpoint.hpp"
#include "egocf/numkit/grad_check.hpp"
#include "egocf/numkit/ops.hpp"
#include "egocf/numkit/param_store.hpp"
#include "egocf/numkit/rng.hpp"
#include "egocf/numkit/tensor.hpp"

namespace egocf::numkit {
namespace {

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Triple loop, no library calls.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor c({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("egocf_numkit_" + name);
}

TEST(Tensor, RejectsMismatchedValueCount) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor({0, 2}), DimensionError);
}

TEST(Matmul, IdentityCase) {
  const auto a = Tensor::matrix({{1, 2}, {3, 4}});
  EXPECT_EQ(matmul(a, Tensor::matrix({{1, 0}, {0, 1}})), a);
}

TEST(Matmul, HandArithmetic) {
  const auto c = matmul(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::matrix({{1}, {1}}));
  EXPECT_EQ(c, Tensor::matrix({{3}, {7}}));
}

TEST(Matmul, ZeroAnnihilates) {
  Rng rng(1);
  const auto b = random_tensor(rng, {3, 5});
  EXPECT_EQ(matmul(Tensor({4, 3}), b), Tensor({4, 5}));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
  try {
    matmul(Tensor({2, 3}), Tensor({4, 5}));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4x5]"), std::string::npos) << msg;
  }
}

TEST(Matmul, MatchesNaiveLoopOnRandomShapes) {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + rng.index(6), k = 1 + rng.index(6), n = 1 + rng.index(6);
    const auto a = random_tensor(rng, {m, k});
    const auto b = random_tensor(rng, {k, n});
    const auto c = matmul(a, b);
    const auto ref = naive_matmul(a, b);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-12);
    EXPECT_EQ(matmul_transpose_a(transpose(a), b).shape(), c.shape());
    EXPECT_EQ(matmul_transpose_b(a, transpose(b)).shape(), c.shape());
  }
}

TEST(Matmul, BackwardRuleMatchesFiniteDifferences) {
  Rng rng(11);
  ParamStore p;
  p.add("a", random_tensor(rng, {3, 4}));
  p.add("b", random_tensor(rng, {4, 2}));
  const auto w = random_tensor(rng, {3, 2});
  auto loss = [&](const ParamStore& s) { return dot(matmul(s.value("a"), s.value("b")), w); };
  const auto g = matmul_backward(p.value("a"), p.value("b"), w);
  p.grad("a") = g.da;
  p.grad("b") = g.db;
  EXPECT_LE(grad_check(loss, p).max_rel_error, 1e-8);
}

TEST(Softmax, UniformInput) {
  const auto y = softmax(std::vector<double>{0, 0, 0});
  for (double v : y) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LogInputsGiveProportions) {
  const auto y = softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)});
  EXPECT_NEAR(y[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(y[2], 1.0 / 2.0, 1e-15);
}

TEST(Softmax, ShiftInvarianceAndUnitSumProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-30.0, 30.0);
    const double c = rng.uniform(-500.0, 500.0);
    std::vector<double> shifted = x;
    for (auto& v : shifted) v += c;
    const auto y = softmax(x), ys = softmax(shifted);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(y[i], 0.0);
      EXPECT_NEAR(y[i], ys[i], 1e-12);
      sum += y[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Softmax, AlongEitherAxis) {
  const auto x = Tensor::matrix({{1, 2, 3}, {4, 5, 9}});
  const auto rows = softmax(x, 1);
  const auto cols = softmax(x, 0);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(rows.at(r, 0) + rows.at(r, 1) + rows.at(r, 2), 1.0, 1e-12);
  }
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(cols.at(0, c) + cols.at(1, c), 1.0, 1e-12);
  EXPECT_THROW(softmax(x, 2), DimensionError);
}

TEST(Softmax, LargeInputsStayFinite) {
  const auto y = softmax(std::vector<double>{1000.0, 1001.0});
  EXPECT_TRUE(std::isfinite(y[0]) && std::isfinite(y[1]));
  EXPECT_NEAR(y[1], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
}

TEST(CrossEntropy, UniformOverFour) {
  const std::vector<double> p(4, 0.25);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(cross_entropy(p, k), std::log(4.0), 1e-15);
}

TEST(CrossEntropy, PerfectPredictionIsZero) {
  const std::vector<double> p{0, 1, 0};
  EXPECT_EQ(cross_entropy(p, p), 0.0);
}

TEST(CrossEntropy, HandArithmetic) {
  EXPECT_NEAR(cross_entropy(std::vector<double>{0.5, 0.25, 0.25},
                            std::vector<double>{1, 0, 0}),
              0.6931471805599453, 1e-15);
}

TEST(CrossEntropy, ClampsZeroProbability) {
  EXPECT_NEAR(cross_entropy(std::vector<double>{1, 0}, std::size_t{1}), -std::log(kLogClamp),
              1e-9);
}

TEST(CrossEntropy, LengthMismatchThrows) {
  EXPECT_THROW(cross_entropy(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0, 0}),
               DimensionError);
}

TEST(CrossEntropy, NonNegativeProperty) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(2 + rng.index(8));
    for (auto& v : x) v = rng.uniform(-5, 5);
    const auto p = softmax(x);
    EXPECT_GE(cross_entropy(p, rng.index(p.size())), 0.0);
  }
}

TEST(Cosine, SelfSimilarityIsOne) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(1 + rng.index(6));
    for (auto& v : p) v = rng.uniform(0.1, 2.0);
    EXPECT_NEAR(cosine_similarity(p, p), 1.0, 1e-15);
  }
}

TEST(Cosine, OrthogonalAndHandCase) {
  EXPECT_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{3, 4}, std::vector<double>{4, 3}), 0.96,
              1e-15);
}

TEST(Cosine, ZeroNormThrows) {
  EXPECT_THROW(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 0}),
               DegenerateInputError);
}

TEST(Cosine, SymmetricAndScaleInvariantProperty) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    std::vector<double> p(n), q(n), ap(n), bq(n);
    const double a = rng.uniform(0.01, 100.0), b = rng.uniform(0.01, 100.0);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform(-1, 1);
      q[i] = rng.uniform(-1, 1);
      ap[i] = a * p[i];
      bq[i] = b * q[i];
    }
    const double s = cosine_similarity(p, q);
    EXPECT_NEAR(s, cosine_similarity(q, p), 1e-15);
    EXPECT_NEAR(s, cosine_similarity(ap, bq), 1e-12);
    EXPECT_LE(std::abs(s), 1.0 + 1e-15);
  }
}

TEST(Cosine, GradientMatchesFiniteDifferences) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    ParamStore ps;
    ps.add("p", random_tensor(rng, {5}));
    ps.add("q", random_tensor(rng, {5}));
    auto loss = [](const ParamStore& s) {
      return cosine_similarity(s.value("p").values(), s.value("q").values());
    };
    const auto g = cosine_similarity_grad(ps.value("p").values(), ps.value("q").values());
    ps.grad("p") = Tensor({5}, g.d_p);
    ps.grad("q") = Tensor({5}, g.d_q);
    EXPECT_LE(grad_check(loss, ps).max_rel_error, 1e-6);
  }
}

TEST(Attention, SingleKeyReturnsItsValue) {
  Rng rng(19);
  const auto q = random_tensor(rng, {4, 3});
  const auto k = random_tensor(rng, {1, 3});
  const auto v = random_tensor(rng, {1, 3});
  const auto out = attention(q, k, v).output;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(out.at(r, c), v.at(0, c), 1e-15);
}

TEST(Attention, IdenticalKeysAverageValues) {
  const auto q = Tensor::matrix({{1, -2}, {0.5, 3}});
  const auto k = Tensor::matrix({{0.3, 0.7}, {0.3, 0.7}, {0.3, 0.7}});
  const auto v = Tensor::matrix({{1, 2}, {3, 4}, {5, 9}});
  const auto out = attention(q, k, v).output;
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(out.at(r, 0), 3.0, 1e-14);
    EXPECT_NEAR(out.at(r, 1), 5.0, 1e-14);
  }
}

TEST(Attention, TwoQueriesThreeKeysDirectEvaluation) {
  const auto q = Tensor::matrix({{1, 0}, {0, 2}});
  const auto k = Tensor::matrix({{1, 1}, {0, 1}, {2, 0}});
  const auto v = Tensor::matrix({{1, 0}, {0, 1}, {1, 1}});
  const auto out = attention(q, k, v).output;
  const double s = std::sqrt(2.0);
  // Row 0 scores: 1, 0, 2; row 1 scores: 2, 2, 0 (all divided by sqrt(2)).
  const double a0 = std::exp(1 / s), a1 = std::exp(0 / s), a2 = std::exp(2 / s);
  const double z0 = a0 + a1 + a2;
  EXPECT_NEAR(out.at(0, 0), (a0 + a2) / z0, 1e-14);
  EXPECT_NEAR(out.at(0, 1), (a1 + a2) / z0, 1e-14);
  const double b0 = std::exp(2 / s), b1 = std::exp(2 / s), b2 = std::exp(0 / s);
  const double z1 = b0 + b1 + b2;
  EXPECT_NEAR(out.at(1, 0), (b0 + b2) / z1, 1e-14);
  EXPECT_NEAR(out.at(1, 1), (b1 + b2) / z1, 1e-14);
}

TEST(Attention, DimensionMismatchThrows) {
  EXPECT_THROW(attention(Tensor({2, 3}), Tensor({2, 4}), Tensor({2, 4})), DimensionError);
  EXPECT_THROW(attention(Tensor({2, 3}), Tensor({2, 3}), Tensor({3, 3})), DimensionError);
}

TEST(Attention, RowsAreConvexCombinationsProperty) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t a = 1 + rng.index(5), b = 1 + rng.index(5), d = 1 + rng.index(5);
    const auto v = random_tensor(rng, {b, d}, -3, 3);
    const auto out =
        attention(random_tensor(rng, {a, d}, -3, 3), random_tensor(rng, {b, d}, -3, 3), v)
            .output;
    for (std::size_t c = 0; c < d; ++c) {
      double lo = v.at(0, c), hi = v.at(0, c);
      for (std::size_t r = 1; r < b; ++r) {
        lo = std::min(lo, v.at(r, c));
        hi = std::max(hi, v.at(r, c));
      }
      for (std::size_t r = 0; r < a; ++r) {
        EXPECT_GE(out.at(r, c), lo - 1e-12);
        EXPECT_LE(out.at(r, c), hi + 1e-12);
      }
    }
  }
}

TEST(Attention, BackwardMatchesFiniteDifferences) {
  Rng rng(29);
  ParamStore p;
  p.add("q", random_tensor(rng, {3, 4}));
  p.add("k", random_tensor(rng, {5, 4}));
  p.add("v", random_tensor(rng, {5, 4}));
  const auto w = random_tensor(rng, {3, 4});
  auto loss = [&](const ParamStore& s) {
    return dot(attention(s.value("q"), s.value("k"), s.value("v")).output, w);
  };
  const auto fwd = attention(p.value("q"), p.value("k"), p.value("v"));
  const auto g = attention_backward(p.value("q"), p.value("k"), p.value("v"), fwd.weights, w);
  p.grad("q") = g.d_queries;
  p.grad("k") = g.d_keys;
  p.grad("v") = g.d_values;
  EXPECT_LE(grad_check(loss, p).max_rel_error, 1e-4);
}

TEST(Gelu, BackwardMatchesFiniteDifferences) {
  Rng rng(31);
  ParamStore p;
  p.add("x", random_tensor(rng, {4, 6}, -3, 3));
  const auto w = random_tensor(rng, {4, 6});
  auto loss = [&](const ParamStore& s) { return dot(gelu(s.value("x")), w); };
  p.grad("x") = gelu_backward(p.value("x"), w);
  EXPECT_LE(grad_check(loss, p).max_rel_error, 1e-4);
}

TEST(LayerNorm, BackwardMatchesFiniteDifferences) {
  Rng rng(37);
  ParamStore p;
  p.add("x", random_tensor(rng, {3, 8}, -2, 2));
  p.add("g", random_tensor(rng, {8}, 0.5, 1.5));
  p.add("b", random_tensor(rng, {8}));
  const auto w = random_tensor(rng, {3, 8});
  auto loss = [&](const ParamStore& s) {
    return dot(layer_norm(s.value("x"), s.value("g"), s.value("b")).output, w);
  };
  const auto fwd = layer_norm(p.value("x"), p.value("g"), p.value("b"));
  const auto g = layer_norm_backward(fwd, p.value("g"), w);
  p.grad("x") = g.d_x;
  p.grad("g") = g.d_gain;
  p.grad("b") = g.d_bias;
  EXPECT_LE(grad_check(loss, p).max_rel_error, 1e-4);
}

TEST(SoftmaxCrossEntropy, ChainedGradientMatchesFiniteDifferences) {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    ParamStore p;
    p.add("z", random_tensor(rng, {6}, -2, 2));
    const std::size_t label = rng.index(6);
    auto loss = [&](const ParamStore& s) {
      return cross_entropy(softmax(s.value("z").values()), label);
    };
    const auto y = softmax(p.value("z").values());
    p.grad("z") = Tensor({6}, softmax_backward(y, cross_entropy_grad(y, label)));
    EXPECT_LE(grad_check(loss, p).max_rel_error, 1e-6);
  }
}

TEST(ParamStore, DuplicateNameThrows) {
  ParamStore p;
  p.add("w", Tensor({2}));
  EXPECT_THROW(p.add("w", Tensor({2})), ConsistencyError);
}

TEST(ParamStore, GradShapesFollowParameters) {
  ParamStore p;
  p.add("b", Tensor({3}));
  p.add("a", Tensor({2, 2}));
  p.zero_grads();
  EXPECT_EQ(p.grad("a").shape(), (Shape{2, 2}));
  EXPECT_EQ(p.grad("b").shape(), (Shape{3}));
  EXPECT_EQ(p.names(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(p.parameter_count(), 7u);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParamStore p;
  p.add("w", Tensor::vector({0.3, -1.2}));
  p.zero_grads();
  AdamState s;
  adam_step(p, s, {});
  EXPECT_EQ(p.value("w"), Tensor::vector({0.3, -1.2}));
  EXPECT_EQ(s.t, 1);
}

TEST(Adam, FirstStepClosedForm) {
  ParamStore p;
  p.add("w", Tensor::vector({2.0}));
  p.grad("w") = Tensor::vector({0.5});
  AdamState s;
  AdamConfig c;
  c.lr = 1e-3;
  adam_step(p, s, c);
  // m_hat = g, v_hat = g^2, so the step is -lr * g / (|g| + eps).
  EXPECT_NEAR(p.value("w")[0] - 2.0, -1e-3 * 0.5 / (0.5 + 1e-8), 1e-15);
}

TEST(Adam, TwoIdenticalStepsMomentRecursion) {
  ParamStore p;
  p.add("w", Tensor::vector({1.0}));
  AdamState s;
  AdamConfig c;
  const double g = -0.25;
  for (int i = 0; i < 2; ++i) {
    p.grad("w") = Tensor::vector({g});
    adam_step(p, s, c);
  }
  EXPECT_EQ(s.t, 2);
  const double m = s.m.at("w")[0], v = s.v.at("w")[0];
  EXPECT_NEAR(m / (1 - c.beta1 * c.beta1), g, 1e-15);
  EXPECT_NEAR(v / (1 - c.beta2 * c.beta2), g * g, 1e-15);
  EXPECT_GE(v, 0.0);
}

TEST(Adam, CoupledWeightDecayEntersGradient) {
  ParamStore p;
  p.add("w", Tensor::vector({3.0}));
  p.zero_grads();
  AdamState s;
  AdamConfig c;
  c.weight_decay = 0.1;
  adam_step(p, s, c);
  // Effective gradient 0.3 > 0, so the first step moves down by ~lr.
  EXPECT_NEAR(p.value("w")[0], 3.0 - c.lr * 0.3 / (0.3 + c.eps), 1e-15);
}

TEST(Adam, MissingGradientThrows) {
  ParamStore p;
  p.add("a", Tensor({2}));
  p.add("b", Tensor({2}));
  p.grad("a");
  AdamState s;
  EXPECT_THROW(adam_step(p, s, {}), ConsistencyError);
  EXPECT_EQ(s.t, 0);
}

TEST(GradCheck, QuadraticLoss) {
  Rng rng(43);
  ParamStore p;
  p.add("x", random_tensor(rng, {10}));
  auto loss = [](const ParamStore& s) {
    double v = 0.0;
    for (double x : s.value("x").values()) v += 0.5 * x * x;
    return v;
  };
  p.grad("x") = p.value("x");
  GradCheckOptions o;
  o.eps = 1e-5;
  EXPECT_LE(grad_check(loss, p, o).max_rel_error, 1e-8);
}

TEST(GradCheck, LinearLoss) {
  Rng rng(47);
  ParamStore p;
  p.add("x", random_tensor(rng, {10}));
  const auto c = random_tensor(rng, {10});
  auto loss = [&](const ParamStore& s) { return dot(c, s.value("x")); };
  p.grad("x") = c;
  EXPECT_LE(grad_check(loss, p).max_rel_error, 1e-9);
}

TEST(GradCheck, DetectsWrongGradient) {
  ParamStore p;
  p.add("x", Tensor::vector({1.0, 2.0}));
  auto loss = [](const ParamStore& s) { return s.value("x")[0] * s.value("x")[1]; };
  p.grad("x") = Tensor::vector({2.0, 2.0});
  const auto r = grad_check(loss, p);
  EXPECT_GT(r.max_rel_error, 0.1);
  EXPECT_EQ(r.worst_param, "x");
  EXPECT_EQ(r.worst_index, 1u);
}

TEST(GradCheck, NonFiniteLossThrows) {
  ParamStore p;
  p.add("x", Tensor::vector({1.0}));
  p.grad("x") = Tensor::vector({0.0});
  auto loss = [](const ParamStore&) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(grad_check(loss, p), NumericError);
}

TEST(GradCheck, RestoresParametersExactly) {
  Rng rng(53);
  ParamStore p;
  p.add("x", random_tensor(rng, {7}));
  const Tensor before = p.value("x");
  p.grad("x") = Tensor({7});
  GradCheckOptions o;
  o.stencil = Stencil::kCentral4;
  grad_check([](const ParamStore& s) { return std::sin(s.value("x")[3]); }, p, o);
  EXPECT_EQ(p.value("x"), before);
}

TEST(GradCheck, SamplesAtMostConfiguredCoordinates) {
  ParamStore p;
  p.add("x", Tensor({1000}));
  p.grad("x") = Tensor({1000});
  GradCheckOptions o;
  o.max_coords_per_tensor = 16;
  auto loss = [](const ParamStore&) { return 0.0; };
  EXPECT_EQ(grad_check(loss, p, o).coords_checked, 16u);
  o.full_sweep = true;
  EXPECT_EQ(grad_check(loss, p, o).coords_checked, 1000u);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(59);
  TensorArchive a;
  a.tensors.emplace("b", random_tensor(rng, {3, 4}, -1e300, 1e300));
  a.tensors.emplace("a", Tensor::vector({0.1, -0.0, 5e-324, 1.0 / 3.0}));
  a.meta = {{"note", "x"}, {"n", 3}};
  const auto path = temp_path("roundtrip.bin");
  write_archive(path, a);
  const auto b = read_archive(path);
  ASSERT_EQ(b.tensors.size(), 2u);
  for (const auto& [name, t] : a.tensors) {
    const auto& u = b.tensors.at(name);
    ASSERT_EQ(u.shape(), t.shape());
    EXPECT_EQ(std::memcmp(u.data(), t.data(), t.size() * sizeof(double)), 0) << name;
  }
  EXPECT_EQ(b.meta, a.meta);
  std::filesystem::remove(path);
}

TEST(Checkpoint, IdenticalContentsGiveIdenticalBytes) {
  TensorArchive a;
  a.tensors.emplace("z", Tensor::vector({1, 2}));
  a.tensors.emplace("y", Tensor::vector({3}));
  const auto p1 = temp_path("same1.bin"), p2 = temp_path("same2.bin");
  write_archive(p1, a);
  write_archive(p2, a);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  EXPECT_EQ(s1, s2);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST(Checkpoint, TruncatedBlobIsFormatError) {
  TensorArchive a;
  a.tensors.emplace("w", Tensor({4, 4}, 1.0));
  const auto path = temp_path("trunc.bin");
  write_archive(path, a);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
  try {
    read_archive(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("128"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Checkpoint, TrailingBytesAndWrongVersionRejected) {
  TensorArchive a;
  a.tensors.emplace("w", Tensor({2}, 1.0));
  const auto path = temp_path("trail.bin");
  write_archive(path, a);
  { std::ofstream(path, std::ios::app | std::ios::binary) << "xx"; }
  EXPECT_THROW(read_archive(path), FormatError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << R"({"format_version":99,"blob_bytes":0,"meta":{},"tensors":[]})" << '\n';
  }
  EXPECT_THROW(read_archive(path), FormatError);
  std::filesystem::remove(path);
  EXPECT_THROW(read_archive(path), FormatError);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, IndexAndUniformRanges) {
  Rng rng(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  for (int c : counts) EXPECT_NEAR(c, 1000, 150);
}

TEST(Rng, DerivedSeedsDependOnPath) {
  EXPECT_EQ(Rng::derive_seed(1, {2, 3}), Rng::derive_seed(1, {2, 3}));
  EXPECT_NE(Rng::derive_seed(1, {2, 3}), Rng::derive_seed(1, {3, 2}));
  EXPECT_NE(Rng::derive_seed(1, {2}), Rng::derive_seed(2, {2}));
  EXPECT_NE(Rng::derive_seed(1, {2}), Rng::derive_seed(1, {2, 0}));
}

}  // namespace
}  // namespace egocf::numkit
