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

#include "inade/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "inade/error.hpp"

namespace inade {

using nlohmann::json;

void TrainConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kConfigInvalid, what); };
  check(lr_g > 0 && lr_d > 0, "learning rates must be positive");
  check(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1, "Adam betas must lie in [0, 1)");
  check(epochs >= 1 && decay_start >= 0 && decay_start <= epochs, "need 0 <= decay_start <= epochs, epochs >= 1");
  check(batch_size >= 1, "batch_size must be positive");
  check(max_steps >= 0 && log_every >= 1 && checkpoint_every >= 0, "invalid step counters");
  loss.validate();
  model.validate();
  check(loss.fm_start <= model.disc_layers, "fm_start exceeds the discriminator depth");
}

void EvalConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kConfigInvalid, what); };
  check(groups >= 2 && pairs >= 1, "need groups >= 2 and pairs >= 1");
  check(resamples >= 2, "resamples must be at least 2");
  check(num_images >= 1 && fid_images >= 2, "need num_images >= 1 and fid_images >= 2");
}

void RunConfig::validate() const {
  data.validate();
  train.validate();
  eval.validate();
  require(data.height == train.model.height && data.width == train.model.width, ErrorCode::kConfigInvalid,
          "data and model resolutions differ");
  require(data.num_classes == train.model.num_classes, ErrorCode::kConfigInvalid,
          "data and model class counts differ");
}

json to_json(const ShapesConfig& c) {
  json styles = json::array();
  for (const auto& s : c.styles)
    styles.push_back({{"hue", s.hue}, {"hue_spread", s.hue_spread}, {"saturation", s.saturation}, {"value", s.value}});
  return {{"height", c.height},         {"width", c.width},           {"num_classes", c.num_classes},
          {"min_shapes", c.min_shapes}, {"max_shapes", c.max_shapes}, {"min_extent", c.min_extent},
          {"max_extent", c.max_extent}, {"min_visible", c.min_visible}, {"num_samples", c.num_samples},
          {"seed", c.seed},             {"styles", styles}};
}

json to_json(const ModelConfig& c) {
  return {{"height", c.height},
          {"width", c.width},
          {"num_classes", c.num_classes},
          {"noise_channels", c.noise_channels},
          {"latent_dim", c.latent_dim},
          {"base_width", c.base_width},
          {"max_width", c.max_width},
          {"spectral_norm", c.spectral_norm},
          {"slope", c.slope},
          {"norm", {{"eps", c.norm.eps}, {"momentum", c.norm.momentum}}},
          {"encoder",
           {{"widths", c.encoder.widths},
            {"depth", c.encoder.depth},
            {"kernel", c.encoder.kernel},
            {"slope", c.encoder.slope},
            {"in_channels", c.encoder.in_channels}}},
          {"disc_base_width", c.disc_base_width},
          {"disc_layers", c.disc_layers},
          {"num_discriminators", c.num_discriminators},
          {"disc_max_width", c.disc_max_width},
          {"init_seed", c.init_seed}};
}

json to_json(const LossWeights& c) {
  return {{"lambda_fm", c.lambda_fm},
          {"lambda_perc", c.lambda_perc},
          {"lambda_kl", c.lambda_kl},
          {"fm_start", c.fm_start},
          {"perc_start", c.perc_start}};
}

json to_json(const TrainConfig& c) {
  return {{"lr_g", c.lr_g},
          {"lr_d", c.lr_d},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"epochs", c.epochs},
          {"decay_start", c.decay_start},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"max_steps", c.max_steps},
          {"log_every", c.log_every},
          {"checkpoint_every", c.checkpoint_every},
          {"extractor_seed", c.extractor_seed},
          {"loss", to_json(c.loss)},
          {"model", to_json(c.model)}};
}

json to_json(const EvalConfig& c) {
  return {{"groups", c.groups},         {"pairs", c.pairs},       {"resamples", c.resamples},
          {"num_images", c.num_images}, {"fid_images", c.fid_images}, {"seed", c.seed},
          {"embedder_seed", c.embedder_seed}};
}

json to_json(const RunConfig& c) {
  return {{"data", to_json(c.data)}, {"train", to_json(c.train)}, {"eval", to_json(c.eval)}};
}

namespace {

/// Consumes keys of one JSON object; finish() rejects whatever is left.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j.is_object(), ErrorCode::kConfigInvalid, where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        require(it->is_boolean(), ErrorCode::kConfigInvalid, child(key) + " must be a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        require(it->is_number_integer(), ErrorCode::kConfigInvalid, child(key) + " must be an integer");
        if constexpr (std::is_unsigned_v<T>)
          require(it->is_number_unsigned(), ErrorCode::kConfigInvalid, child(key) + " must be non-negative");
      } else if constexpr (std::is_floating_point_v<T>) {
        require(it->is_number(), ErrorCode::kConfigInvalid, child(key) + " must be a number");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::kConfigInvalid, child(key) + ": " + e.what());
    }
  }

  template <typename Fn>
  void object(const char* key, Fn&& fn) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it != j_.end()) fn(*it, child(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(seen_.count(it.key()) > 0, ErrorCode::kConfigInvalid, "unknown config key " + child(it.key()));
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void merge_styles(const json& j, const std::string& path, std::vector<ClassStyle>& styles) {
  require(j.is_array(), ErrorCode::kConfigInvalid, path + " must be an array");
  std::vector<ClassStyle> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ClassStyle s;
    Reader r(j[i], path + "[" + std::to_string(i) + "]");
    r.get("hue", s.hue);
    r.get("hue_spread", s.hue_spread);
    r.get("saturation", s.saturation);
    r.get("value", s.value);
    r.finish();
    out.push_back(s);
  }
  styles = std::move(out);
}

void merge_model(const json& j, const std::string& path, ModelConfig& c) {
  Reader r(j, path);
  r.get("height", c.height);
  r.get("width", c.width);
  r.get("num_classes", c.num_classes);
  r.get("noise_channels", c.noise_channels);
  r.get("latent_dim", c.latent_dim);
  r.get("base_width", c.base_width);
  r.get("max_width", c.max_width);
  r.get("spectral_norm", c.spectral_norm);
  r.get("slope", c.slope);
  r.object("norm", [&](const json& n, const std::string& p) {
    Reader nr(n, p);
    nr.get("eps", c.norm.eps);
    nr.get("momentum", c.norm.momentum);
    nr.finish();
  });
  r.object("encoder", [&](const json& e, const std::string& p) {
    Reader er(e, p);
    er.get("widths", c.encoder.widths);
    er.get("depth", c.encoder.depth);
    er.get("kernel", c.encoder.kernel);
    er.get("slope", c.encoder.slope);
    er.get("in_channels", c.encoder.in_channels);
    er.finish();
  });
  r.get("disc_base_width", c.disc_base_width);
  r.get("disc_layers", c.disc_layers);
  r.get("num_discriminators", c.num_discriminators);
  r.get("disc_max_width", c.disc_max_width);
  r.get("init_seed", c.init_seed);
  r.finish();
}

void merge_shapes(const json& j, const std::string& path, ShapesConfig& c) {
  Reader r(j, path);
  r.get("height", c.height);
  r.get("width", c.width);
  r.get("num_classes", c.num_classes);
  r.get("min_shapes", c.min_shapes);
  r.get("max_shapes", c.max_shapes);
  r.get("min_extent", c.min_extent);
  r.get("max_extent", c.max_extent);
  r.get("min_visible", c.min_visible);
  r.get("num_samples", c.num_samples);
  r.get("seed", c.seed);
  r.object("styles", [&](const json& s, const std::string& p) { merge_styles(s, p, c.styles); });
  r.finish();
}

void merge_train(const json& j, const std::string& path, TrainConfig& c) {
  Reader r(j, path);
  r.get("lr_g", c.lr_g);
  r.get("lr_d", c.lr_d);
  r.get("adam_beta1", c.adam_beta1);
  r.get("adam_beta2", c.adam_beta2);
  r.get("epochs", c.epochs);
  r.get("decay_start", c.decay_start);
  r.get("batch_size", c.batch_size);
  r.get("seed", c.seed);
  r.get("max_steps", c.max_steps);
  r.get("log_every", c.log_every);
  r.get("checkpoint_every", c.checkpoint_every);
  r.get("extractor_seed", c.extractor_seed);
  r.object("loss", [&](const json& l, const std::string& p) {
    Reader lr(l, p);
    lr.get("lambda_fm", c.loss.lambda_fm);
    lr.get("lambda_perc", c.loss.lambda_perc);
    lr.get("lambda_kl", c.loss.lambda_kl);
    lr.get("fm_start", c.loss.fm_start);
    lr.get("perc_start", c.loss.perc_start);
    lr.finish();
  });
  r.object("model", [&](const json& m, const std::string& p) { merge_model(m, p, c.model); });
  r.finish();
}

void merge_eval(const json& j, const std::string& path, EvalConfig& c) {
  Reader r(j, path);
  r.get("groups", c.groups);
  r.get("pairs", c.pairs);
  r.get("resamples", c.resamples);
  r.get("num_images", c.num_images);
  r.get("fid_images", c.fid_images);
  r.get("seed", c.seed);
  r.get("embedder_seed", c.embedder_seed);
  r.finish();
}

}  // namespace

void merge_json(const json& j, ShapesConfig& c) { merge_shapes(j, "data", c); }
void merge_json(const json& j, ModelConfig& c) { merge_model(j, "model", c); }
void merge_json(const json& j, TrainConfig& c) { merge_train(j, "train", c); }
void merge_json(const json& j, EvalConfig& c) { merge_eval(j, "eval", c); }

void merge_json(const json& j, RunConfig& c) {
  Reader r(j, "");
  r.object("data", [&](const json& d, const std::string& p) { merge_shapes(d, p, c.data); });
  r.object("train", [&](const json& t, const std::string& p) { merge_train(t, p, c.train); });
  r.object("eval", [&](const json& e, const std::string& p) { merge_eval(e, p, c.eval); });
  r.finish();
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  merge_json(j, c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kFileNotFound, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void apply_override(RunConfig& c, const std::string& dotted_key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;
  }
  json patch = v;
  std::string rest = dotted_key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
    parts.push_back(rest.substr(0, pos));
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    require(!it->empty(), ErrorCode::kConfigInvalid, "malformed override key " + dotted_key);
    patch = json{{*it, patch}};
  }
  merge_json(patch, c);
}

}  // namespace inade
