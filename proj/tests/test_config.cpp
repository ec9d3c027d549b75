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

#include <fstream>

#include "inade/config.hpp"
#include "test_support.hpp"

namespace inade {
namespace {

TEST(Config, DefaultsFollowTrainingRecipe) {
  const RunConfig c;
  EXPECT_EQ(c.train.lr_g, 1e-4);
  EXPECT_EQ(c.train.lr_d, 4e-4);
  EXPECT_EQ(c.train.adam_beta1, 0.0);
  EXPECT_EQ(c.train.adam_beta2, 0.9);
  EXPECT_EQ(c.train.epochs, 200);
  EXPECT_EQ(c.train.decay_start, 100);
  EXPECT_EQ(c.train.batch_size, 8);
  EXPECT_EQ(c.train.loss.lambda_fm, 10.0);
  EXPECT_EQ(c.train.loss.lambda_perc, 10.0);
  EXPECT_EQ(c.train.loss.lambda_kl, 0.05);
  EXPECT_EQ(c.train.model.noise_channels, 64);
  EXPECT_EQ(c.eval.groups, 10);
  EXPECT_EQ(c.eval.resamples, 3);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.train.lr_g = 2e-4;
  c.train.model.encoder.widths = {8, 16};
  c.train.model.encoder.depth = 2;
  c.data.styles[1].hue = 0.1;
  c.eval.seed = 99;
  const auto back = parse_run_config(to_json(c).dump());
  EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const auto c = parse_run_config(R"({"train": {"batch_size": 4, "model": {"base_width": 8}}})");
  EXPECT_EQ(c.train.batch_size, 4);
  EXPECT_EQ(c.train.model.base_width, 8);
  EXPECT_EQ(c.train.lr_g, 1e-4);
  EXPECT_EQ(c.data.num_samples, 2000);
}

TEST(Config, UnknownKeysAndWrongTypesRejected) {
  EXPECT_INADE_ERROR(parse_run_config(R"({"trian": {}})"), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config(R"({"train": {"lr": 1}})"), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config(R"({"train": {"model": {"widht": 1}}})"), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config(R"({"train": {"batch_size": "eight"}})"), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config(R"({"train": {"batch_size": 2.5}})"), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config("{not json"), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config("[1, 2]"), kConfigInvalid);
}

TEST(Config, SemanticValidation) {
  EXPECT_INADE_ERROR(parse_run_config(R"({"train": {"lr_g": 0}})").validate(), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config(R"({"train": {"decay_start": 300}})").validate(), kConfigInvalid);
  EXPECT_INADE_ERROR(parse_run_config(R"({"eval": {"resamples": 1}})").validate(), kConfigInvalid);
  // Data and model must agree on resolution and classes.
  EXPECT_INADE_ERROR(parse_run_config(R"({"data": {"num_classes": 3, "styles": [{}, {}, {}]}})").validate(),
                     kConfigInvalid);
  EXPECT_NO_THROW(
      parse_run_config(R"({"data": {"num_classes": 3, "styles": [{}, {}, {}]}, "train": {"model": {"num_classes": 3}}})")
          .validate());
}

TEST(Config, DottedOverrides) {
  RunConfig c;
  apply_override(c, "train.lr_g", "0.0002");
  apply_override(c, "train.model.encoder.widths", "[4, 8]");
  apply_override(c, "eval.seed", "17");
  EXPECT_EQ(c.train.lr_g, 0.0002);
  EXPECT_EQ(c.train.model.encoder.widths, (std::vector<std::int64_t>{4, 8}));
  EXPECT_EQ(c.eval.seed, 17U);
  EXPECT_INADE_ERROR(apply_override(c, "train.bogus", "1"), kConfigInvalid);
  EXPECT_INADE_ERROR(apply_override(c, "train..lr_g", "1"), kConfigInvalid);
  EXPECT_INADE_ERROR(apply_override(c, "train.lr_g", "fast"), kConfigInvalid);
}

TEST(Config, LoadFromFile) {
  const auto dir = test::scratch_dir("config_file");
  std::ofstream(dir / "run.json") << R"({"eval": {"groups": 4}})";
  EXPECT_EQ(load_run_config((dir / "run.json").string()).eval.groups, 4);
  EXPECT_INADE_ERROR(load_run_config((dir / "missing.json").string()), kFileNotFound);
}

}  // namespace
}  // namespace inade
