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

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "inade/noise_remapping.hpp"
#include "test_support.hpp"

namespace inade {
namespace {

// Direct transcription of the masked-window definition.
torch::Tensor partial_conv_oracle(const torch::Tensor& x, const torch::Tensor& inst, const torch::Tensor& w,
                                  const torch::Tensor& bias) {
  const auto B = x.size(0), C = x.size(1), H = x.size(2), W = x.size(3);
  const auto O = w.size(0), kh = w.size(2), kw = w.size(3);
  auto out = torch::zeros({B, O, H, W}, torch::kFloat64);
  auto xa = x.accessor<double, 4>();
  auto ia = inst.accessor<std::int64_t, 3>();
  auto wa = w.accessor<double, 4>();
  auto oa = out.accessor<double, 4>();
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t r = 0; r < H; ++r)
      for (std::int64_t c = 0; c < W; ++c) {
        const auto l = ia[b][r][c];
        std::int64_t valid = 0;
        for (std::int64_t i = 0; i < kh; ++i)
          for (std::int64_t j = 0; j < kw; ++j) {
            const auto rr = r + i - kh / 2, cc = c + j - kw / 2;
            if (rr >= 0 && rr < H && cc >= 0 && cc < W && ia[b][rr][cc] == l) ++valid;
          }
        const double scale = static_cast<double>(kh * kw) / static_cast<double>(valid);
        for (std::int64_t o = 0; o < O; ++o) {
          double acc = 0;
          for (std::int64_t k = 0; k < C; ++k)
            for (std::int64_t i = 0; i < kh; ++i)
              for (std::int64_t j = 0; j < kw; ++j) {
                const auto rr = r + i - kh / 2, cc = c + j - kw / 2;
                if (rr >= 0 && rr < H && cc >= 0 && cc < W && ia[b][rr][cc] == l) acc += wa[o][k][i][j] * xa[b][k][rr][cc];
              }
          oa[b][o][r][c] = acc * scale + bias[o].item<double>();
        }
      }
  return out;
}

torch::Tensor random_inst(std::int64_t b, std::int64_t h, std::int64_t w, int labels, std::uint32_t seed) {
  std::mt19937 gen(seed);
  auto t = torch::empty({b, h, w}, torch::kInt64);
  auto a = t.accessor<std::int64_t, 3>();
  // Blocky maps so windows see both same- and foreign-instance pixels.
  for (std::int64_t i = 0; i < b; ++i)
    for (std::int64_t r = 0; r < h; ++r)
      for (std::int64_t c = 0; c < w; ++c) a[i][r][c] = 1 + static_cast<std::int64_t>(((r / 2) * 7 + (c / 3) * 3 + gen() % 2) % labels);
  return t;
}

TEST(PartialConv, FullWindow) {
  const auto x = torch::full({1, 1, 1, 3}, 5.0, torch::kFloat64);
  const auto w = torch::ones({1, 1, 1, 3}, torch::kFloat64);
  const auto inst = torch::ones({1, 1, 3}, torch::kInt64);
  const auto y = instance_partial_conv(x, inst, w, torch::zeros({1}, torch::kFloat64));
  EXPECT_DOUBLE_EQ(y[0][0][0][1].item<double>(), 15.0);
  EXPECT_DOUBLE_EQ(y[0][0][0][0].item<double>(), 15.0);  // edge: (5 + 5) * 3 / 2
  EXPECT_DOUBLE_EQ(y[0][0][0][2].item<double>(), 15.0);
}

TEST(PartialConv, ForeignNeighbourIsIgnored) {
  auto x = torch::tensor({1.0, 2.0, 3.0}, torch::kFloat64).view({1, 1, 1, 3});
  const auto w = torch::ones({1, 1, 1, 3}, torch::kFloat64);
  const auto inst = torch::tensor({1, 1, 2}, torch::kInt64).view({1, 1, 3});
  const auto y1 = instance_partial_conv(x, inst, w, torch::zeros({1}, torch::kFloat64));
  x[0][0][0][2] = 100.0;
  const auto y2 = instance_partial_conv(x, inst, w, torch::zeros({1}, torch::kFloat64));
  EXPECT_DOUBLE_EQ(y1[0][0][0][1].item<double>(), 4.5);
  EXPECT_TRUE(y1[0][0][0].narrow(0, 0, 2).equal(y2[0][0][0].narrow(0, 0, 2)));
}

TEST(PartialConv, MatchesWindowOracle) {
  torch::manual_seed(1);
  for (std::int64_t k : {1, 3, 5}) {
    const auto x = torch::randn({2, 3, 7, 9}, torch::kFloat64);
    const auto w = torch::randn({4, 3, k, k}, torch::kFloat64);
    const auto bias = torch::randn({4}, torch::kFloat64);
    const auto inst = random_inst(2, 7, 9, 4, static_cast<std::uint32_t>(k));
    const auto y = instance_partial_conv(x, inst, w, bias);
    EXPECT_LT(test::max_abs_diff(y, partial_conv_oracle(x, inst, w, bias)), 1e-10) << "kernel " << k;
  }
}

TEST(PartialConv, Errors) {
  const auto x = torch::zeros({1, 2, 4, 4});
  EXPECT_INADE_ERROR(instance_partial_conv(x, torch::ones({1, 4, 4}, torch::kInt64), torch::zeros({1, 2, 2, 2}),
                                           torch::zeros({1})),
                     kShapeMismatch);
  EXPECT_INADE_ERROR(instance_partial_conv(x, torch::ones({1, 4, 5}, torch::kInt64), torch::zeros({1, 2, 3, 3}),
                                           torch::zeros({1})),
                     kShapeMismatch);
  EXPECT_INADE_ERROR(instance_partial_conv(x, torch::ones({1, 4, 4}, torch::kInt64), torch::zeros({1, 3, 3, 3}),
                                           torch::zeros({1})),
                     kShapeMismatch);
}

TEST(MaskedResample, UniformConstant) {
  const auto x = torch::full({1, 2, 4, 6}, 3.0);
  const auto inst = torch::ones({1, 4, 6}, torch::kInt64);
  const auto [xd, id] = masked_downsample(x, inst);
  EXPECT_EQ(xd.sizes(), (std::vector<std::int64_t>{1, 2, 2, 3}));
  EXPECT_TRUE(xd.eq(3.0).all().item<bool>());
  EXPECT_TRUE(id.eq(1).all().item<bool>());
  const auto xu = masked_upsample(xd, id, inst);
  EXPECT_TRUE(xu.equal(x));
}

TEST(MaskedResample, WindowAveragesCentreInstance) {
  // Window [[4, 9], [1, 6]] with instances [[1, 2], [2, 1]]; centre pixel (1, 1) is instance 1.
  const auto x = torch::tensor({4.0, 9.0, 1.0, 6.0}).view({1, 1, 2, 2});
  const auto inst = torch::tensor({1, 2, 2, 1}, torch::kInt64).view({1, 2, 2});
  const auto [xd, id] = masked_downsample(x, inst);
  EXPECT_FLOAT_EQ(xd.item<float>(), 5.0F);
  EXPECT_EQ(id.item<std::int64_t>(), 1);
  EXPECT_INADE_ERROR(masked_downsample(torch::zeros({1, 1, 3, 2}), torch::ones({1, 3, 2}, torch::kInt64)),
                     kShapeMismatch);
}

TEST(MaskedResample, DownsampleMatchesLoop) {
  const auto x = torch::randn({2, 3, 8, 6}, torch::kFloat64);
  const auto inst = random_inst(2, 8, 6, 3, 5);
  const auto [xd, id] = masked_downsample(x, inst);
  for (std::int64_t b = 0; b < 2; ++b)
    for (std::int64_t r = 0; r < 4; ++r)
      for (std::int64_t c = 0; c < 3; ++c) {
        const auto centre = inst[b][2 * r + 1][2 * c + 1].item<std::int64_t>();
        EXPECT_EQ(id[b][r][c].item<std::int64_t>(), centre);
        for (std::int64_t k = 0; k < 3; ++k) {
          double sum = 0;
          int n = 0;
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
              if (inst[b][2 * r + i][2 * c + j].item<std::int64_t>() == centre) {
                sum += x[b][k][2 * r + i][2 * c + j].item<double>();
                ++n;
              }
          EXPECT_NEAR(xd[b][k][r][c].item<double>(), sum / n, 1e-12);
        }
      }
}

TEST(MaskedResample, UpsampleZeroesForeignParents) {
  const auto coarse = torch::tensor({7.0F}).view({1, 1, 1, 1});
  const auto coarse_inst = torch::ones({1, 1, 1}, torch::kInt64);
  const auto fine_inst = torch::tensor({1, 2, 1, 1}, torch::kInt64).view({1, 2, 2});
  const auto up = masked_upsample(coarse, coarse_inst, fine_inst);
  EXPECT_TRUE(up.view({4}).equal(torch::tensor({7.0F, 0.0F, 7.0F, 7.0F})));
}

TEST(InstancePool, Examples) {
  const auto inst = InstanceMap::from_grid(LabelGrid::from_rows({{1, 1, 2}}));
  const auto pooled = instance_average_pool(torch::tensor({{2.0, 4.0, 9.0}}, torch::kFloat64), inst);
  EXPECT_DOUBLE_EQ(pooled[0].item<double>(), 3.0);
  EXPECT_DOUBLE_EQ(pooled[1].item<double>(), 9.0);
}

TEST(InstancePool, MatchesLoop) {
  std::mt19937 gen(3);
  LabelGrid g(9, 11);
  for (auto& v : g.values) v = 1 + static_cast<std::int32_t>(gen() % 5);
  for (int l = 1; l <= 5; ++l) g.values[static_cast<std::size_t>(l)] = l;
  const auto inst = InstanceMap::from_grid(g);
  const auto map = torch::randn({9, 11}, torch::kFloat64);
  const auto pooled = instance_average_pool(map, inst);
  for (int l = 1; l <= 5; ++l) {
    double s = 0;
    int n = 0;
    for (std::int64_t r = 0; r < 9; ++r)
      for (std::int64_t c = 0; c < 11; ++c)
        if (g.at(r, c) == l) s += map[r][c].item<double>(), ++n;
    EXPECT_NEAR(pooled[l - 1].item<double>(), s / n, 1e-9);
  }
}

TEST(PerturbationSetTest, ScaleFromLogVariance) {
  const auto inst = InstanceMap::from_grid(LabelGrid::from_rows({{1, 2, 3}}));
  PerturbationMaps maps;
  maps.s_gamma = torch::tensor({0.0, 2.0 * std::log(2.0), 1.0}, torch::kFloat64).view({1, 1, 3});
  maps.s_beta = maps.s_gamma.clone();
  maps.b_gamma = torch::tensor({0.5, -1.0, 2.0}, torch::kFloat64).view({1, 1, 3});
  maps.b_beta = maps.b_gamma.clone();
  const auto ps = build_perturbation_set(maps, 0, inst);
  const auto a = ps.scale_gamma();
  EXPECT_NEAR(a[0].item<double>(), 1.0, 1e-15);
  EXPECT_NEAR(a[1].item<double>(), 2.0, 1e-15);
  EXPECT_LT(a[0].item<double>(), a[2].item<double>());
  EXPECT_LT(a[2].item<double>(), a[1].item<double>());
  EXPECT_TRUE(ps.shift_beta.equal(torch::tensor({0.5, -1.0, 2.0}, torch::kFloat64)));
}

TEST(RemapNoise, IdentityAndShift) {
  const auto bank = sample_noise_bank_from_seed(3, 6, 2);
  const auto same = remap_noise(bank, PerturbationSet::identity(3));
  EXPECT_TRUE(same.remapped);
  EXPECT_TRUE(same.gamma.equal(bank.gamma));
  EXPECT_TRUE(same.beta.equal(bank.beta));
  const auto one = torch::ones({3});
  const auto shifted = remap_noise(bank, PerturbationSet::from_scale_shift(one, one * 5, one, one * 0));
  EXPECT_LT(test::max_abs_diff(shifted.gamma, bank.gamma + 5), 1e-6);
  EXPECT_TRUE(shifted.beta.equal(bank.beta));
  EXPECT_INADE_ERROR(remap_noise(bank, PerturbationSet::identity(2)), kShapeMismatch);
}

TEST(RemapNoise, RemappedLaw) {
  const std::int64_t rows = 1000, channels = 100;
  const auto bank = sample_noise_bank_from_seed(rows, channels, 13);
  const auto ps = PerturbationSet::from_scale_shift(torch::full({rows}, 2.0), torch::full({rows}, 1.0),
                                                    torch::full({rows}, 0.5), torch::full({rows}, -3.0));
  const auto out = remap_noise(bank, ps);
  EXPECT_NEAR(out.gamma.mean().item<double>(), 1.0, 0.03);
  EXPECT_NEAR(out.gamma.std().item<double>(), 2.0, 0.04);
  EXPECT_NEAR(out.beta.mean().item<double>(), -3.0, 0.03);
  EXPECT_NEAR(out.beta.std().item<double>(), 0.5, 0.01);
}

TEST(KlLoss, ClosedForm) {
  auto kl = [](double b, double a) {
    const auto one = torch::ones({1}, torch::kFloat64);
    return kl_loss(PerturbationSet::from_scale_shift(one * a, one * b, one * a, one * b)).item<double>();
  };
  EXPECT_NEAR(kl(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(kl(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(kl(0, 2), 0.5 * (4 - 1 - std::log(4.0)), 1e-12);
}

TEST(KlLoss, MeanOverInstancesAndBranches) {
  const auto ps = PerturbationSet::from_scale_shift(torch::tensor({1.0, 2.0}, torch::kFloat64),
                                                    torch::tensor({0.0, 1.0}, torch::kFloat64),
                                                    torch::tensor({1.0, 1.0}, torch::kFloat64),
                                                    torch::tensor({1.0, 0.0}, torch::kFloat64));
  auto term = [](double a, double b) { return 0.5 * (a * a + b * b - 1 - std::log(a * a)); };
  const double expected = 0.5 * ((term(1, 0) + term(2, 1)) / 2 + (term(1, 1) + term(1, 0)) / 2);
  EXPECT_NEAR(kl_loss(ps).item<double>(), expected, 1e-12);
}

TEST(KlLoss, NonNegativeWithEqualityAtIdentity) {
  torch::manual_seed(4);
  for (int i = 0; i < 50; ++i) {
    PerturbationSet ps{torch::randn({4}, torch::kFloat64), torch::randn({4}, torch::kFloat64),
                       torch::randn({4}, torch::kFloat64), torch::randn({4}, torch::kFloat64)};
    EXPECT_GT(kl_loss(ps).item<double>(), 0.0);
  }
  EXPECT_EQ(kl_loss(PerturbationSet::identity(5, torch::kFloat64)).item<double>(), 0.0);
}

EncoderConfig small_encoder() {
  EncoderConfig c;
  c.widths = {4, 6};
  c.depth = 2;
  return c;
}

TEST(Encoder, OutputShape) {
  RemappingEncoder enc(small_encoder());
  const auto pair = test::stripes(8, 12, {1, 2, 1}, 2);
  const auto maps = encode_reference(enc, torch::rand({1, 3, 8, 12}) * 2 - 1, {pair});
  for (const auto& m : {maps.s_gamma, maps.b_gamma, maps.s_beta, maps.b_beta})
    EXPECT_EQ(m.sizes(), (std::vector<std::int64_t>{1, 8, 12}));
  EXPECT_INADE_ERROR(encode_reference(enc, torch::zeros({1, 3, 8, 8}), {pair}), kShapeMismatch);
}

// Metamorphic suite: perturbing pixels outside instance l leaves l's perturbation entries fixed.
TEST(Encoder, NonContamination) {
  RemappingEncoder enc(small_encoder());
  torch::NoGradGuard ng;
  std::mt19937 gen(17);
  for (int image = 0; image < 3; ++image) {
    LabelGrid g(16, 16, 1);
    for (int s = 0; s < 3; ++s) {
      const auto r0 = gen() % 12, c0 = gen() % 12;
      for (auto r = r0; r < r0 + 4; ++r)
        for (auto c = c0; c < c0 + 4; ++c) g.at(r, c) = s + 2;
    }
    std::set<std::int32_t> used(g.values.begin(), g.values.end());
    std::map<std::int32_t, std::int32_t> rank;
    for (auto l : used) rank[l] = static_cast<std::int32_t>(rank.size()) + 1;
    for (auto& v : g.values) v = rank[v];
    const auto pair = degenerate_instances(SemanticMask(g, static_cast<int>(used.size())));
    const auto ref = torch::rand({1, 3, 16, 16}) * 2 - 1;
    const auto base = build_perturbation_sets(encode_reference(enc, ref, {pair}), {pair})[0];
    for (int trial = 0; trial < 4; ++trial)
      for (std::int32_t l = 1; l <= pair.num_instances(); ++l) {
        const auto outside = instance_region(pair.inst(), l).logical_not().view({1, 1, 16, 16});
        const auto changed = torch::where(outside, torch::rand({1, 3, 16, 16}) * 2 - 1, ref);
        const auto ps = build_perturbation_sets(encode_reference(enc, changed, {pair}), {pair})[0];
        for (const auto& [x, y] : {std::pair{base.log_var_gamma, ps.log_var_gamma}, {base.shift_gamma, ps.shift_gamma},
                                   {base.log_var_beta, ps.log_var_beta}, {base.shift_beta, ps.shift_beta}})
          EXPECT_LT(std::abs(x[l - 1].item<double>() - y[l - 1].item<double>()), 1e-6);
      }
  }
}

// Gradients of a scalar of the pooled set with respect to encoder weights and the reference.
TEST(Encoder, GradientCheck) {
  torch::manual_seed(2);
  RemappingEncoder enc(small_encoder());
  enc->to(torch::kFloat64);
  const auto pair = test::stripes(4, 4, {1, 2}, 2);
  auto ref = torch::randn({1, 3, 4, 4}, torch::kFloat64).requires_grad_();
  auto objective = [&]() {
    const auto ps = build_perturbation_sets(encode_reference(enc, ref, {pair}), {pair})[0];
    const auto bank = NoiseBank{torch::ones({2, 3}, torch::kFloat64), torch::ones({2, 3}, torch::kFloat64), 0, false};
    const auto out = remap_noise(bank, ps);
    return out.gamma.sum() * 0.7 + (out.beta * out.beta).sum() + kl_loss(ps);
  };
  objective().backward();
  std::vector<torch::Tensor> leaves{ref};
  for (const auto& p : enc->parameters()) leaves.push_back(p);
  for (auto& leaf : leaves) {
    ASSERT_TRUE(leaf.grad().defined());
    const auto analytic = leaf.grad().clone();
    auto numeric = torch::zeros_like(analytic);
    torch::NoGradGuard ng;
    auto flat = leaf.view({-1});
    const auto n = std::min<std::int64_t>(flat.numel(), 12);
    for (std::int64_t i = 0; i < n; ++i) {
      const double h = 1e-6, v = flat[i].item<double>();
      flat[i] = v + h;
      const double up = objective().item<double>();
      flat[i] = v - h;
      const double down = objective().item<double>();
      flat[i] = v;
      numeric.view({-1})[i] = (up - down) / (2 * h);
    }
    const auto a = analytic.view({-1}).narrow(0, 0, n), m = numeric.view({-1}).narrow(0, 0, n);
    const double rel = (a - m).norm().item<double>() / std::max(1e-8, m.norm().item<double>());
    EXPECT_LT(rel, 1e-3);
  }
}

}  // namespace
}  // namespace inade
