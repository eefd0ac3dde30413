// Copyright 2026 The svsmlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "svsm/errors.hpp"
#include "svsm/tensor/checkpoint.hpp"
#include "svsm/tensor/flop_counter.hpp"
#include "svsm/tensor/grad_check.hpp"
#include "svsm/tensor/kernels.hpp"
#include "svsm/tensor/nn.hpp"
#include "svsm/tensor/optim.hpp"
#include "svsm/util/random.hpp"

namespace svsm {
namespace {

using D = double;

TEST(Tensor, RejectsZeroExtent) { EXPECT_THROW(Tensor<D>({2, 0}), DimensionError); }

TEST(Tensor, DataLengthMatchesShape) {
  Tensor<float> t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.dim(-1), 4u);
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>(3)), DimensionError);
}

TEST(Attention, UniformLogitsAverageValues) {
  Tape<D> tape(false);
  auto q = tape.constant(random_tensor({1, 3, 8}, 1));
  Tensor<D> krow = random_tensor({1, 1, 8}, 2);
  Tensor<D> k({1, 4, 8});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t c = 0; c < 8; ++c) k[i * 8 + c] = krow[c];
  Tensor<D> v = random_tensor({1, 4, 8}, 3);
  auto out = nn::attention_block(q, tape.constant(k), tape.constant(v), 2).value();
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 8; ++c) {
      double mean = 0;
      for (std::size_t j = 0; j < 4; ++j) mean += v[j * 8 + c];
      EXPECT_NEAR(out[r * 8 + c], mean / 4, 1e-12);
    }
  }
}

TEST(Attention, SingleKeyBroadcastsValue) {
  Tape<D> tape(false);
  auto v = random_tensor({2, 1, 8}, 5);
  auto out = nn::attention_block(tape.constant(random_tensor({2, 5, 8}, 3)), tape.constant(random_tensor({2, 1, 8}, 4)),
                                 tape.constant(v), 4)
                 .value();
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t r = 0; r < 5; ++r)
      for (std::size_t c = 0; c < 8; ++c) EXPECT_DOUBLE_EQ(out[(b * 5 + r) * 8 + c], v[b * 8 + c]);
}

TEST(Attention, OutputsStayInValueEnvelope) {
  Tape<D> tape(false);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto v = random_tensor({1, 6, 8}, seed + 100);
    auto out = nn::attention_block(tape.constant(random_tensor({1, 4, 8}, seed, 3.0)),
                                   tape.constant(random_tensor({1, 6, 8}, seed + 50, 3.0)), tape.constant(v), 2)
                   .value();
    for (std::size_t c = 0; c < 8; ++c) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t j = 0; j < 6; ++j) {
        lo = std::min(lo, v[j * 8 + c]);
        hi = std::max(hi, v[j * 8 + c]);
      }
      for (std::size_t r = 0; r < 4; ++r) {
        EXPECT_GE(out[r * 8 + c], lo - 1e-12);
        EXPECT_LE(out[r * 8 + c], hi + 1e-12);
      }
    }
  }
}

TEST(Attention, ErrorsOnBadShapes) {
  Tape<D> tape(false);
  auto x = tape.constant(random_tensor({1, 3, 8}, 1));
  EXPECT_THROW(nn::attention_block(x, x, x, 3), ConfigError);
  auto y = tape.constant(random_tensor({1, 3, 6}, 1));
  EXPECT_THROW(nn::attention_block(x, y, y, 2), DimensionError);
}

TEST(Kernels, FloatExpWithinFewUlp) {
  std::vector<float> x;
  for (float v = -87.0f; v <= 88.0f; v += 0.0137f) x.push_back(v);
  x.push_back(0.0f);
  auto y = x;
  kernels::exp_inplace(y.data(), y.size());
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ref = std::exp(double(x[i]));
    worst = std::max(worst, std::abs(y[i] - ref) / ref);
  }
  EXPECT_LT(worst, 5e-7);
  EXPECT_EQ(y.back(), 1.0f);
  float tiny = -1e4f;
  kernels::exp_inplace(&tiny, 1);
  EXPECT_LT(tiny, 1e-37f);
}

TEST(Kernels, NarrowProductMatchesReference) {
  Rng rng(4);
  for (auto [m, k, n] : {std::array<std::size_t, 3>{3, 40, 8}, {5, 128, 1}, {2, 64, 15}, {4, 8, 8}}) {
    std::vector<double> a(m * k), b(k * n), c(m * n, 1.0);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    kernels::gemm_nn(a.data(), b.data(), c.data(), m, k, n, true);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double ref = 1.0;
        for (std::size_t p = 0; p < k; ++p) ref += a[i * k + p] * b[p * n + j];
        EXPECT_NEAR(c[i * n + j], ref, 1e-12);
      }
  }
}

TEST(Mlp, ZeroWeightsGiveZero) {
  Tape<D> tape(false);
  auto x = tape.constant(random_tensor({4, 6}, 1));
  nn::MlpWeights<D> w{tape.constant(Tensor<D>({6, 24})), tape.constant(Tensor<D>({24})),
                      tape.constant(Tensor<D>({24, 6})), tape.constant(Tensor<D>({6}))};
  auto out = nn::mlp_block(x, w).value();
  for (double o : out.data()) EXPECT_EQ(o, 0.0);
}

TEST(Mlp, ScalarIdentityIsGelu) {
  Tape<D> tape(false);
  auto xin = random_tensor({5, 1}, 2);
  nn::MlpWeights<D> w{tape.constant(Tensor<D>({1, 1}, 1.0)), tape.constant(Tensor<D>({1})),
                      tape.constant(Tensor<D>({1, 1}, 1.0)), tape.constant(Tensor<D>({1}))};
  auto out = nn::mlp_block(tape.constant(xin), w).value();
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(out[i], ops::gelu_value(xin[i]));
}

TEST(LayerNorm, ConstantRowMapsToBias) {
  Tape<D> tape(false);
  auto out = ops::layer_norm(tape.constant(Tensor<D>({2, 4}, 3.5)), tape.constant(Tensor<D>({4}, 1.0)),
                             tape.constant(Tensor<D>({4})))
                 .value();
  for (double o : out.data()) EXPECT_EQ(o, 0.0);
  auto single = ops::layer_norm(tape.constant(Tensor<D>({3, 1}, 2.0)), tape.constant(Tensor<D>({1}, 1.0)),
                                tape.constant(Tensor<D>({1}, 0.25)))
                    .value();
  for (double o : single.data()) EXPECT_EQ(o, 0.25);
}

TEST(LayerNorm, StandardizedRowUnchanged) {
  Tape<D> tape(false);
  Tensor<D> x({1, 4}, std::vector<D>{-1.0, -1.0, 1.0, 1.0});
  auto out = ops::layer_norm(tape.constant(x), tape.constant(Tensor<D>({4}, 1.0)), tape.constant(Tensor<D>({4})))
                 .value();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out[i], x[i], 1e-5);
}

TEST(Residual, Scaling) {
  Tape<D> tape(false);
  auto x = random_tensor({3, 4}, 1);
  auto ones = Tensor<D>({3, 4}, 1.0);
  auto plain = ops::residual_add(tape.constant(x), tape.constant(ones), 1).value();
  auto quarter = ops::residual_add(tape.constant(x), tape.constant(ones), 4).value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_DOUBLE_EQ(plain[i], x[i] + 1.0);
    EXPECT_DOUBLE_EQ(quarter[i], x[i] + 0.5);
  }
}

// Final-layer activation RMS of a pre-LN MLP stack with unit-variance init.
double stack_rms(std::size_t depth, bool scaled) {
  Tape<D> tape(false);
  const std::size_t n = 32, d = 16;
  auto x = tape.constant(random_tensor({n, d}, 7));
  auto gain = tape.constant(Tensor<D>({d}, 1.0));
  auto zero_d = tape.constant(Tensor<D>({d}));
  auto zero_h = tape.constant(Tensor<D>({4 * d}));
  for (std::size_t l = 0; l < depth; ++l) {
    nn::MlpWeights<D> w{tape.constant(random_tensor({d, 4 * d}, 100 + l, 1.0 / std::sqrt(double(d)))), zero_h,
                        tape.constant(random_tensor({4 * d, d}, 500 + l, 1.0 / std::sqrt(4.0 * d))), zero_d};
    auto f = nn::mlp_block(ops::layer_norm(x, gain, zero_d), w);
    x = scaled ? ops::residual_add(x, f, depth) : ops::add(x, f);
  }
  double ss = 0;
  for (double v : x.value().data()) ss += v * v;
  return std::sqrt(ss / double(n * d));
}

TEST(Residual, InitRmsBoundedAcrossDepth) {
  std::vector<double> rms;
  for (std::size_t depth : {2, 8, 32}) rms.push_back(stack_rms(depth, true));
  const double ratio = *std::max_element(rms.begin(), rms.end()) / *std::min_element(rms.begin(), rms.end());
  EXPECT_LT(ratio, 2.0);
  EXPECT_GT(stack_rms(32, false) / stack_rms(2, false), 2.0);
}

TEST(Tape, SumGradientIsOnes) {
  Tensor<D> x = random_tensor({3, 4}, 1);
  x.set_requires_grad(true);
  Tape<D> tape;
  auto xv = tape.input(x);
  auto g = tape.backward(ops::sum(xv));
  for (double v : g.of(xv).data()) EXPECT_EQ(v, 1.0);
}

TEST(Tape, HalfSquaredNormGradientIsX) {
  Tensor<D> x = random_tensor({5}, 2);
  x.set_requires_grad(true);
  Tape<D> tape;
  auto xv = tape.input(x);
  auto g = tape.backward(ops::scale(ops::sum(ops::mul(xv, xv)), 0.5));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(g.of(xv)[i], x[i]);
  ASSERT_NE(g.find(x), nullptr);
}

TEST(Tape, SecondBackwardIsUsageError) {
  Tensor<D> x = random_tensor({2}, 3);
  x.set_requires_grad(true);
  Tape<D> tape;
  auto loss = ops::sum(tape.input(x));
  tape.backward(loss);
  EXPECT_TRUE(tape.consumed());
  EXPECT_THROW(tape.backward(loss), UsageError);
}

TEST(Tape, NonScalarLossRejected) {
  Tensor<D> x = random_tensor({2}, 3);
  x.set_requires_grad(true);
  Tape<D> tape;
  auto xv = tape.input(x);
  EXPECT_THROW(tape.backward(ops::gelu(xv)), Error);
}

TEST(Tape, SharedInputAccumulates) {
  Tensor<D> x({1}, 3.0);
  x.set_requires_grad(true);
  Tape<D> tape;
  auto a = tape.input(x);
  auto b = tape.input(x);
  auto g = tape.backward(ops::sum(ops::mul(a, b)));
  EXPECT_DOUBLE_EQ(g.of(a)[0], 6.0);
}

class RegisteredOps : public ::testing::TestWithParam<std::string> {};

TEST_P(RegisteredOps, MatchesFiniteDifferences) {
  for (std::uint64_t seed : {0, 1, 2}) {
    auto rep = grad_check(GetParam(), seed);
    EXPECT_TRUE(rep.passed(1e-5)) << GetParam() << " seed " << seed << " rel " << rep.max_rel_error;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, RegisteredOps, ::testing::ValuesIn(registered_grad_checks()),
                         [](const auto& info) { return info.param; });

TEST(GradCheck, UnknownOpIsUsageError) { EXPECT_THROW(grad_check("no_such_op"), UsageError); }

TEST(GradCheck, DetectsWrongGradient) {
  // A deliberately broken backward rule must be caught.
  auto broken = [](Tape<D>& tape, std::span<const Var<D>> v) {
    Tensor<D> y = v[0].value();
    for (auto& e : y.storage()) e = e * e;
    auto out = tape.record(std::move(y), {v[0]}, [x = v[0]](Tape<D>& t, const Tensor<D>& g) {
      auto& gx = t.grad(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * x.value()[i];  // should be 2x
    });
    return ops::sum(out);
  };
  Tensor<D> x = random_tensor({4}, 9);
  x.set_requires_grad(true);
  EXPECT_GT(grad_check(broken, {x}).max_rel_error, 0.1);
}

TEST(AdamW, ZeroGradientZeroDecayIsFixedPoint) {
  Tensor<D> p = random_tensor({3}, 1);
  const Tensor<D> before = p;
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW<D> opt(cfg, {{&p, "w", false}});
  Tensor<D> g({3});
  for (int i = 0; i < 5; ++i) opt.step({&g}, 0.1);
  EXPECT_TRUE(bit_equal(p, before));
}

TEST(AdamW, SingleStepOracle) {
  AdamWConfig cfg;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.95;
  cfg.weight_decay = 0.05;
  Tensor<D> decayed({1}, 1.0), exempt({1}, 1.0);
  AdamW<D> opt(cfg, {{&decayed, "w", false}, {&exempt, "ln.gain", true}});
  Tensor<D> g({1}, 1.0);
  opt.step({&g, &g}, 0.1);
  // m̂ = v̂ = 1 after bias correction, so the Adam term is 1/(1+eps).
  const double adam = 1.0 / (1.0 + cfg.eps);
  EXPECT_NEAR(decayed[0], 1.0 - 0.1 * 0.05 - 0.1 * adam, 1e-15);
  EXPECT_NEAR(decayed[0], 0.895, 1e-8);
  EXPECT_NEAR(exempt[0], 1.0 - 0.1 * adam, 1e-15);
  EXPECT_EQ(opt.step_count(), 1u);
}

TEST(AdamW, MissingGradientIsUsageError) {
  Tensor<D> p({2}), q({2});
  p.set_requires_grad(true);
  q.set_requires_grad(true);
  AdamW<D> opt(AdamWConfig{}, {{&p, "p", false}, {&q, "q", false}});
  Tape<D> tape;
  auto g = tape.backward(ops::sum(tape.input(p)));
  EXPECT_THROW(opt.step(g, 0.1), UsageError);
}

TEST(Schedule, WarmupAndCosine) {
  EXPECT_EQ(lr_at_step(0, 4e-4, 100, 1000), 0.0);
  EXPECT_DOUBLE_EQ(lr_at_step(50, 4e-4, 100, 1000), 2e-4);
  EXPECT_DOUBLE_EQ(lr_at_step(100, 4e-4, 100, 1000), 4e-4);
  EXPECT_NEAR(lr_at_step(1000, 4e-4, 100, 1000), 0.0, 1e-20);
  EXPECT_NEAR(lr_at_step(550, 4e-4, 100, 1000), 2e-4, 1e-15);
  EXPECT_THROW(lr_at_step(0, 4e-4, 2000, 1000), ConfigError);
}

TEST(Checkpoint, RoundTripAndPrecisionConversion) {
  auto dir = std::filesystem::temp_directory_path() / "svsm_ckpt_test";
  std::filesystem::create_directories(dir);
  std::vector<NamedTensor<float>> saved{{"enc.w", random_tensor({3, 5}, 1).cast<float>()},
                                        {"enc.b", random_tensor({5}, 2).cast<float>()}};
  save_checkpoint(dir / "a.ckpt", saved);
  auto loaded = load_checkpoint<float>(dir / "a.ckpt");
  ASSERT_EQ(loaded.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(loaded[i].name, saved[i].name);
    EXPECT_TRUE(bit_equal(loaded[i].tensor, saved[i].tensor));
  }
  auto widened = load_checkpoint<double>(dir / "a.ckpt");
  EXPECT_EQ(widened[0].tensor[3], static_cast<double>(saved[0].tensor[3]));

  {
    std::fstream f(dir / "a.ckpt", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(load_checkpoint<float>(dir / "a.ckpt"), FormatError);
  std::filesystem::resize_file(dir / "a.ckpt", 20);
  EXPECT_THROW(load_checkpoint<float>(dir / "a.ckpt"), FormatError);
  std::filesystem::remove_all(dir);
}

TEST(FlopCounter, CountsMatrixProducts) {
  Tape<D> tape(false);
  FlopCounter counter;
  ops::linear(tape.constant(random_tensor({2, 3, 4}, 1)), tape.constant(random_tensor({4, 5}, 2)),
              tape.constant(random_tensor({5}, 3)));
  EXPECT_EQ(counter.flops(), 2u * 6 * 5 * 4);
  {
    FlopCountPause pause;
    ops::matmul(tape.constant(random_tensor({2, 4}, 1)), tape.constant(random_tensor({4, 5}, 2)));
  }
  EXPECT_EQ(counter.flops(), 2u * 6 * 5 * 4);
}

TEST(Determinism, RepeatedForwardIsBitIdentical) {
  auto run = [] {
    Tape<float> tape(false);
    auto x = tape.constant(random_tensor({2, 7, 16}, 4).cast<float>());
    return nn::attention_block(x, x, x, 4).value();
  };
  EXPECT_TRUE(bit_equal(run(), run()));
}

}  // namespace
}  // namespace svsm
