// Copyright 2026 The INADE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "inade/inade_core.hpp"
#include "test_support.hpp"

namespace inade {
namespace {

using test::make_pair;

DistributionParams params(int classes, std::int64_t channels, double a, double b) {
  return {torch::full({classes, channels}, a, torch::kFloat64), torch::full({classes, channels}, b, torch::kFloat64),
          torch::full({classes, channels}, a, torch::kFloat64), torch::full({classes, channels}, b, torch::kFloat64),
          0};
}

TEST(NoiseBank, ShapeAndDeterminism) {
  Rng r1(5), r2(5);
  const auto a = sample_noise_bank(3, 64, r1);
  const auto b = sample_noise_bank(3, 64, r2);
  EXPECT_EQ(a.gamma.sizes(), (std::vector<std::int64_t>{3, 64}));
  EXPECT_EQ(a.beta.sizes(), (std::vector<std::int64_t>{3, 64}));
  EXPECT_FALSE(a.remapped);
  EXPECT_TRUE(a.gamma.equal(b.gamma));
  EXPECT_TRUE(a.beta.equal(b.beta));
  EXPECT_FALSE(a.gamma.equal(a.beta));
}

TEST(NoiseBank, StandardNormalMoments) {
  const auto bank = sample_noise_bank_from_seed(1000, 100, 11);
  for (const auto& m : {bank.gamma, bank.beta}) {
    EXPECT_NEAR(m.mean().item<double>(), 0.0, 0.02);
    const auto sd = m.std().item<double>();
    EXPECT_GE(sd, 0.98);
    EXPECT_LE(sd, 1.02);
  }
}

TEST(NoiseBank, RedrawTouchesOnlySelectedRows) {
  auto bank = sample_noise_bank_from_seed(4, 8, 1);
  const auto before = bank;
  Rng rng(2);
  const std::int32_t rows[] = {3};
  redraw_rows(bank, rows, rng);
  for (int l = 0; l < 4; ++l) {
    EXPECT_EQ(bank.gamma[l].equal(before.gamma[l]), l != 2);
    EXPECT_EQ(bank.beta[l].equal(before.beta[l]), l != 2);
  }
  const std::int32_t bad[] = {5};
  EXPECT_INADE_ERROR(redraw_rows(bank, bad, rng), kLabelOutOfRange);
}

TEST(TransformNoise, IdentityZeroAndRowIndependence) {
  auto bank = sample_noise_bank_from_seed(3, 5, 3);
  const LayerTransform id{torch::eye(5), torch::eye(5), 0};
  const auto out = transform_noise(id, bank);
  EXPECT_TRUE(out.gamma.equal(bank.gamma));
  EXPECT_TRUE(out.beta.equal(bank.beta));
  const LayerTransform zero{torch::zeros({5, 7}), torch::zeros({5, 7}), 0};
  EXPECT_EQ(transform_noise(zero, bank).gamma.abs().sum().item<float>(), 0.0F);

  const LayerTransform f{torch::randn({5, 7}), torch::randn({5, 7}), 0};
  const auto base = transform_noise(f, bank);
  auto bumped = bank;
  bumped.gamma = bank.gamma.clone();
  bumped.gamma[1] += 1.0;
  const auto moved = transform_noise(f, bumped);
  EXPECT_TRUE(moved.gamma[0].equal(base.gamma[0]));
  EXPECT_FALSE(moved.gamma[1].equal(base.gamma[1]));
  EXPECT_TRUE(moved.gamma[2].equal(base.gamma[2]));
  EXPECT_TRUE(moved.beta.equal(base.beta));
}

TEST(TransformNoise, ShapeMismatch) {
  const auto bank = sample_noise_bank_from_seed(2, 4, 0);
  const LayerTransform f{torch::zeros({5, 3}), torch::zeros({5, 3}), 0};
  EXPECT_INADE_ERROR(transform_noise(f, bank), kShapeMismatch);
}

TEST(ModulateInstances, DirectSubstitution) {
  DistributionParams d{torch::tensor({{2.0, 0.0}}), torch::tensor({{1.0, -1.0}}), torch::tensor({{2.0, 0.0}}),
                       torch::tensor({{1.0, -1.0}}), 0};
  const auto n = torch::tensor({{0.5, 3.0}});
  const auto m = modulate_instances(d, torch::tensor({1}, torch::kInt64), n, n);
  EXPECT_TRUE(m.gamma.equal(torch::tensor({{2.0, -1.0}})));
}

TEST(ModulateInstances, ZeroScaleGivesClassMean) {
  auto d = params(3, 4, 0.0, 0.0);
  d.b_gamma = torch::arange(12, torch::kFloat64).reshape({3, 4});
  const auto g = torch::tensor({3, 1, 3}, torch::kInt64);
  const auto n = torch::randn({3, 4}, torch::kFloat64);
  const auto m = modulate_instances(d, g, n, n);
  EXPECT_TRUE(m.gamma[0].equal(d.b_gamma[2]));
  EXPECT_TRUE(m.gamma[1].equal(d.b_gamma[0]));
  EXPECT_TRUE(m.gamma[2].equal(d.b_gamma[2]));
}

TEST(ModulateInstances, Errors) {
  const auto d = params(2, 4, 1.0, 0.0);
  const auto n = torch::zeros({1, 4}, torch::kFloat64);
  EXPECT_INADE_ERROR(modulate_instances(d, torch::tensor({3}, torch::kInt64), n, n), kClassOutOfRange);
  EXPECT_INADE_ERROR(modulate_instances(d, torch::tensor({1}, torch::kInt64), torch::zeros({1, 3}), torch::zeros({1, 3})),
                     kShapeMismatch);
}

// Monte Carlo distribution law: mean b, std |a| * ||column k of F||.
TEST(ModulateInstances, DistributionLaw) {
  const std::int64_t c0 = 16, ci = 6, draws = 20000;
  torch::manual_seed(0);
  const auto f = torch::randn({c0, ci}, torch::kFloat64) * 0.3;
  auto d = params(2, ci, 0.0, 0.0);
  d.a_gamma = torch::tensor({{1.5, -0.5, 2.0, 1.0, 0.7, -1.2}, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0}}, torch::kFloat64);
  d.b_gamma = torch::tensor({{0.3, -1.0, 2.0, 0.0, 0.5, 1.0}, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}}, torch::kFloat64);
  auto bank = sample_noise_bank_from_seed(draws, c0, 7);
  bank.gamma = bank.gamma.to(torch::kFloat64);
  bank.beta = bank.beta.to(torch::kFloat64);
  const LayerTransform t{f, f, 0};
  const auto n_hat = transform_noise(t, bank);
  const auto g = torch::ones({draws}, torch::kInt64);
  const auto m = modulate_instances(d, g, n_hat.gamma, n_hat.beta);
  const auto sd_expected = d.a_gamma[0].abs() * f.norm(2, {0});
  const auto se = sd_expected / std::sqrt(static_cast<double>(draws));
  const auto mean = m.gamma.mean(0);
  const auto sd = m.gamma.std(0);
  for (std::int64_t k = 0; k < ci; ++k) {
    EXPECT_NEAR(mean[k].item<double>(), d.b_gamma[0][k].item<double>(), 4.0 * se[k].item<double>());
    EXPECT_NEAR(sd[k].item<double>(), sd_expected[k].item<double>(), 0.02 * sd_expected[k].item<double>());
  }
}

// Two instances of one class share a law but not a sample.
TEST(ModulateInstances, SameClassInstancesShareLaw) {
  const std::int64_t draws = 20000, c = 4;
  auto d = params(1, c, 1.7, 0.4);
  auto n1 = torch::randn({draws, c}, torch::kFloat64);
  auto n2 = torch::randn({draws, c}, torch::kFloat64);
  const auto m1 = modulate_instances(d, torch::ones({draws}, torch::kInt64), n1, n1).gamma;
  const auto m2 = modulate_instances(d, torch::ones({draws}, torch::kInt64), n2, n2).gamma;
  EXPECT_LT((m1.mean(0) - m2.mean(0)).abs().max().item<double>(), 4.0 * 1.7 * std::sqrt(2.0 / draws));
  EXPECT_LT((m1.std(0) / m2.std(0) - 1.0).abs().max().item<double>(), 0.03);
  EXPECT_FALSE(m1.equal(m2));
}

TEST(ScatterIgs, SmallCase) {
  const auto rows = torch::tensor({{7.0F}, {9.0F}});
  const auto inst = torch::tensor({{1, 2}, {2, 1}}, torch::kInt64);
  EXPECT_TRUE(scatter_igs(rows, inst).equal(torch::tensor({{{7.0F, 9.0F}, {9.0F, 7.0F}}})));
}

TEST(ScatterIgs, UniformMapIsConstant) {
  const auto rows = torch::tensor({{1.0F, 2.0F, 3.0F}});
  const auto out = scatter_igs(rows, torch::ones({5, 4}, torch::kInt64));
  for (int k = 0; k < 3; ++k) EXPECT_TRUE(out[k].eq(static_cast<float>(k + 1)).all().item<bool>());
}

TEST(ScatterIgs, MatchesLookupLoop) {
  std::mt19937 gen(8);
  const auto rows = torch::randn({4, 3});
  auto inst = torch::empty({8, 8}, torch::kInt64);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) inst[r][c] = 1 + static_cast<std::int64_t>(gen() % 4);
  const auto out = scatter_igs(rows, inst);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c)
      for (int k = 0; k < 3; ++k)
        EXPECT_EQ(out[k][r][c].item<float>(), rows[inst[r][c].item<std::int64_t>() - 1][k].item<float>());
  EXPECT_INADE_ERROR(scatter_igs(rows, torch::full({2, 2}, 5, torch::kInt64)), kLabelOutOfRange);
}

TEST(InadeNormalize, HandExamples) {
  auto x = torch::tensor({1.0, 3.0}, torch::kFloat64).reshape({2, 1, 1, 1});
  auto rm = torch::zeros({1}, torch::kFloat64), rv = torch::ones({1}, torch::kFloat64);
  NormSettings tiny{1e-12, 0.1};
  auto y = inade_normalize(x, torch::ones_like(x), torch::zeros_like(x), rm, rv, true, tiny);
  EXPECT_NEAR(y[0].item<double>(), -1.0, 1e-9);
  EXPECT_NEAR(y[1].item<double>(), 1.0, 1e-9);
  y = inade_normalize(x, torch::full_like(x, 2.0), torch::full_like(x, 3.0), rm, rv, true, tiny);
  EXPECT_NEAR(y[0].item<double>(), 1.0, 1e-9);
  EXPECT_NEAR(y[1].item<double>(), 5.0, 1e-9);
}

TEST(InadeNormalize, ConstantChannelYieldsBeta) {
  auto x = torch::full({3, 2, 4, 4}, 5.0, torch::kFloat64);
  auto rm = torch::zeros({2}, torch::kFloat64), rv = torch::ones({2}, torch::kFloat64);
  const auto beta = torch::randn({3, 2, 4, 4}, torch::kFloat64);
  const auto y = inade_normalize(x, torch::randn_like(x), beta, rm, rv, true, {});
  EXPECT_LT(test::max_abs_diff(y, beta), 1e-9);
}

TEST(InadeNormalize, RunningStatisticsAndEvalMode) {
  auto x = torch::randn({4, 3, 5, 5}, torch::kFloat64) * 2.0 + 1.0;
  auto rm = torch::zeros({3}, torch::kFloat64), rv = torch::ones({3}, torch::kFloat64);
  const auto ones = torch::ones_like(x), zeros = torch::zeros_like(x);
  inade_normalize(x, ones, zeros, rm, rv, true, {});
  const auto mu = x.mean({0, 2, 3});
  const auto var_unbiased = x.var({0, 2, 3}, /*unbiased=*/true);
  EXPECT_LT(test::max_abs_diff(rm, 0.1 * mu), 1e-12);
  EXPECT_LT(test::max_abs_diff(rv, 0.9 + 0.1 * var_unbiased), 1e-12);
  const auto y = inade_normalize(x, ones, zeros, rm, rv, false, {});
  const auto expected = (x - rm.view({1, 3, 1, 1})) / (rv.view({1, 3, 1, 1}) + 1e-5).sqrt();
  EXPECT_LT(test::max_abs_diff(y, expected), 1e-12);
  EXPECT_INADE_ERROR(inade_normalize(x, ones.narrow(0, 0, 2), zeros, rm, rv, true, {}), kShapeMismatch);
}

struct LayerFixture {
  LabelPair pair = make_pair({{1, 1, 2, 2}, {1, 1, 2, 2}, {1, 1, 2, 2}, {1, 1, 2, 2}},
                             {{1, 1, 2, 2}, {1, 1, 2, 2}, {1, 1, 2, 2}, {1, 1, 2, 2}}, 2);
  InadeNorm norm{InadeNorm(3, 2, 5, 0)};
  NoiseBank bank = sample_noise_bank_from_seed(2, 5, 4);
};

TEST(InadeLayer, ShapeDeterminismAndComponentChain) {
  LayerFixture fx;
  torch::NoGradGuard ng;
  fx.norm->a_gamma.normal_();
  fx.norm->b_beta.normal_();
  Conditioning cond({fx.pair}, {fx.bank});
  const auto x = torch::randn({1, 3, 4, 4});
  fx.norm->eval();
  const auto y1 = fx.norm->forward(x, cond);
  const auto y2 = fx.norm->forward(x, cond);
  EXPECT_EQ(y1.sizes(), x.sizes());
  EXPECT_TRUE(y1.equal(y2));

  // Hand-chained components.
  const auto inst = resize_nearest(fx.pair.inst().grid(), 4, 4).to_tensor();
  const auto n_hat = transform_noise(fx.norm->transform(), fx.bank);
  const auto mod = modulate_instances(fx.norm->distribution(), fx.pair.instance_class_tensor(), n_hat.gamma, n_hat.beta);
  const auto gf = scatter_igs(mod.gamma, inst).unsqueeze(0);
  const auto bf = scatter_igs(mod.beta, inst).unsqueeze(0);
  const auto xhat = (x - fx.norm->running_mean.view({1, 3, 1, 1})) / (fx.norm->running_var.view({1, 3, 1, 1}) + 1e-5).sqrt();
  EXPECT_LT(test::max_abs_diff(y1, gf * xhat + bf), 1e-6);
}

// Redrawing one instance's rows changes the modulation only inside that instance, at every resolution.
TEST(InadeLayer, ModulationLocality) {
  const auto pair = test::stripes(16, 16, {1, 2, 1}, 2);
  InadeNorm norm(6, 2, 8, 0);
  {
    torch::NoGradGuard ng;
    norm->a_gamma.normal_();
    norm->a_beta.normal_();
  }
  const auto bank = sample_noise_bank_from_seed(3, 8, 1);
  for (std::int32_t l = 1; l <= 3; ++l) {
    auto other = bank;
    Rng rng(100 + static_cast<std::uint64_t>(l));
    const std::int32_t rows[] = {l};
    redraw_rows(other, rows, rng);
    for (std::int64_t res : {2, 4, 8, 16}) {
      Conditioning c1({pair}, {bank}), c2({pair}, {other});
      const auto [g1, b1] = modulation_fields(c1, norm->distribution(), norm->transform(), res, res);
      const auto [g2, b2] = modulation_fields(c2, norm->distribution(), norm->transform(), res, res);
      const auto region = c1.instance_map(0, res, res).eq(l);
      const auto outside = region.logical_not().unsqueeze(0).unsqueeze(0).expand_as(g1);
      EXPECT_TRUE(g1.masked_select(outside).equal(g2.masked_select(outside)));
      EXPECT_TRUE(b1.masked_select(outside).equal(b2.masked_select(outside)));
      if (region.any().item<bool>()) {
        EXPECT_FALSE(g1.equal(g2));
      }
      // Spatial constancy within each instance.
      for (std::int32_t k = 1; k <= 3; ++k) {
        const auto m = c1.instance_map(0, res, res).eq(k);
        if (!m.any().item<bool>()) continue;
        for (std::int64_t ch = 0; ch < 6; ++ch) {
          const auto vals = g1[0][ch].masked_select(m);
          EXPECT_TRUE(vals.eq(vals[0]).all().item<bool>());
        }
      }
    }
  }
}

TEST(InadeLayer, RaggedBatch) {
  const auto p1 = test::stripes(8, 8, {1, 2}, 2);
  const auto p2 = test::stripes(8, 8, {2, 1, 2, 1}, 2);
  InadeNorm norm(4, 2, 5, 0);
  Conditioning cond({p1, p2}, {sample_noise_bank_from_seed(2, 5, 1), sample_noise_bank_from_seed(4, 5, 2)});
  const auto y = norm->forward(torch::randn({2, 4, 8, 8}), cond);
  EXPECT_EQ(y.sizes(), (std::vector<std::int64_t>{2, 4, 8, 8}));
  EXPECT_INADE_ERROR(Conditioning({p1}, {sample_noise_bank_from_seed(3, 5, 1)}), kShapeMismatch);
}

TEST(LayerTransformInit, UnitColumns) {
  for (auto [c0, ci] : {std::pair<std::int64_t, std::int64_t>{64, 32}, {64, 256}, {8, 8}}) {
    const auto f = init_layer_transform(c0, ci);
    EXPECT_LT((f.norm(2, {0}) - 1.0).abs().max().item<float>(), 1e-5F);
  }
}

// Central differences in double precision against autograd for a, b, f and the bank.
TEST(InadeLayer, GradientCheck) {
  const auto pair = test::stripes(4, 4, {1, 2}, 2);
  auto opts = torch::TensorOptions().dtype(torch::kFloat64);
  torch::manual_seed(3);
  auto a_g = torch::randn({2, 3}, opts).requires_grad_();
  auto b_g = torch::randn({2, 3}, opts).requires_grad_();
  auto a_b = torch::randn({2, 3}, opts).requires_grad_();
  auto b_b = torch::randn({2, 3}, opts).requires_grad_();
  auto f_g = torch::randn({5, 3}, opts).requires_grad_();
  auto f_b = torch::randn({5, 3}, opts).requires_grad_();
  auto n_g = torch::randn({2, 5}, opts).requires_grad_();
  auto n_b = torch::randn({2, 5}, opts).requires_grad_();
  const auto x = torch::randn({2, 3, 4, 4}, opts);
  const auto w = torch::randn({2, 3, 4, 4}, opts);
  std::vector<torch::Tensor*> leaves{&a_g, &b_g, &a_b, &b_b, &f_g, &f_b, &n_g, &n_b};

  auto objective = [&]() {
    NoiseBank bank{n_g, n_b, 0, false};
    Conditioning cond({pair, pair}, {bank, bank});
    auto rm = torch::zeros({3}, opts), rv = torch::ones({3}, opts);
    const auto y = inade_layer_forward(x, cond, {a_g, b_g, a_b, b_b, 0}, {f_g, f_b, 0}, rm, rv, true, {});
    return (y * w).sum();
  };
  objective().backward();
  for (auto* leaf : leaves) {
    const auto analytic = leaf->grad().clone();
    auto numeric = torch::zeros_like(analytic);
    torch::NoGradGuard ng;
    auto flat = leaf->view({-1});
    for (std::int64_t i = 0; i < flat.numel(); ++i) {
      const double h = 1e-6;
      const double v = flat[i].item<double>();
      flat[i] = v + h;
      const double up = objective().item<double>();
      flat[i] = v - h;
      const double down = objective().item<double>();
      flat[i] = v;
      numeric.view({-1})[i] = (up - down) / (2 * h);
    }
    const double rel = (analytic - numeric).norm().item<double>() / std::max(1e-12, numeric.norm().item<double>());
    EXPECT_LT(rel, 1e-3);
  }
}

}  // namespace
}  // namespace inade
