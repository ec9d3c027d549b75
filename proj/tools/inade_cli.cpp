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

// Command-line front end; talks to the library only through the C API.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "inade/inade.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInternal = 1;

struct Failure {
  int exit_code;
  std::string error;
  std::string message;
};

int exit_code_for(inade_status s) {
  switch (s) {
    case INADE_ERR_CONFIG_INVALID:
    case INADE_ERR_INDEX_OUT_OF_RANGE:
    case INADE_ERR_LABEL_OUT_OF_RANGE:
    case INADE_ERR_EPOCH_OUT_OF_RANGE:
    case INADE_ERR_INVALID_ARGUMENT:
      return kExitConfig;
    case INADE_ERR_NON_FINITE_LOSS:
      return kExitNumeric;
    case INADE_ERR_INTERNAL:
      return kExitInternal;
    default:
      return kExitData;
  }
}

void check(inade_status s) {
  if (s != INADE_OK) throw Failure{exit_code_for(s), inade_status_name(s), inade_last_error()};
}

[[noreturn]] void config_error(const std::string& message) { throw Failure{kExitConfig, "ConfigInvalid", message}; }

std::string take_string(char* s) {
  std::string out(s);
  inade_string_free(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kExitConfig, "FileNotFound", "cannot open " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Failure{kExitData, "FileNotFound", "cannot write " + path.string()};
  out << text << '\n';
}

/// Config file plus --set overrides, resolved and validated by the library.
std::string resolve_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  const std::string text = config_path.empty() ? "" : read_file(config_path);
  std::vector<const char*> ptrs;
  for (const auto& o : overrides) ptrs.push_back(o.c_str());
  char* out = nullptr;
  check(inade_config_resolve(config_path.empty() ? nullptr : text.c_str(), ptrs.data(), ptrs.size(), &out));
  return take_string(out);
}

void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) config_error(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force) config_error("output directory " + dir.string() + " is not empty (use --force)");
  }
  fs::create_directories(dir);
}

struct DatasetHandle {
  inade_dataset* p = nullptr;
  ~DatasetHandle() { inade_dataset_free(p); }
};
struct ModelHandle {
  inade_model* p = nullptr;
  ~ModelHandle() { inade_model_free(p); }
};
struct TrainerHandle {
  inade_trainer* p = nullptr;
  ~TrainerHandle() { inade_trainer_free(p); }
};

struct ImageSize {
  int64_t height = 0;
  int64_t width = 0;
  size_t bytes() const { return static_cast<size_t>(height * width * 3); }
};

ImageSize model_size(const inade_model* m) {
  ImageSize s;
  check(inade_model_image_size(m, &s.height, &s.width));
  return s;
}

void write_png(const fs::path& path, const std::vector<uint8_t>& rgb, const ImageSize& size) {
  check(inade_write_png(path.string().c_str(), rgb.data(), size.height, size.width));
}

void write_sheet(const std::vector<fs::path>& tiles, int cols, const fs::path& out) {
  std::vector<std::string> names;
  for (const auto& t : tiles) names.push_back(t.string());
  std::vector<const char*> ptrs;
  for (const auto& n : names) ptrs.push_back(n.c_str());
  check(inade_contact_sheet(ptrs.data(), ptrs.size(), cols, out.string().c_str()));
}

std::string padded(std::int64_t v, int width) {
  std::string s = std::to_string(v);
  return std::string(static_cast<size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

/// Prior samples for the first `count` layouts of `data`, written as a contact sheet.
void prior_sheet(const fs::path& checkpoint, inade_dataset* data, size_t count, const fs::path& dir,
                 const fs::path& sheet) {
  ModelHandle model;
  check(inade_model_load(checkpoint.string().c_str(), &model.p));
  const auto size = model_size(model.p);
  size_t n = 0;
  check(inade_dataset_info(data, &n, nullptr, nullptr, nullptr));
  fs::create_directories(dir);
  std::vector<fs::path> tiles;
  for (size_t i = 0; i < std::min(count, n); ++i) {
    std::vector<uint8_t> rgb(size.bytes());
    check(inade_model_sample(model.p, data, i, INADE_SAMPLE_PRIOR, nullptr, 0, nullptr, 0, i, rgb.data(), rgb.size()));
    tiles.push_back(dir / ("prior_i" + padded(static_cast<std::int64_t>(i), 4) + ".png"));
    write_png(tiles.back(), rgb, size);
  }
  write_sheet(tiles, 4, sheet);
}

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  bool force = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  if (with_config) {
    cmd->add_option("--config", c.config, "JSON run config")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.overrides, "Override a config key, e.g. --set train.lr_g=2e-4");
  }
  cmd->add_option("--out", c.out, "Output directory (must be empty unless --force)")->required();
  cmd->add_flag("--force", c.force, "Allow a non-empty output directory");
}

int cmd_dataset(const Common& c) {
  const auto resolved = resolve_config(c.config, c.overrides);
  prepare_output_dir(c.out, c.force);
  DatasetHandle data;
  check(inade_dataset_generate(resolved.c_str(), &data.p));
  check(inade_dataset_save(data.p, c.out.c_str()));
  write_file(fs::path(c.out) / "resolved_config.json", resolved);
  size_t n = 0;
  check(inade_dataset_info(data.p, &n, nullptr, nullptr, nullptr));
  std::cout << json{{"command", "dataset"}, {"samples", n}, {"out", c.out}}.dump() << '\n';
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string resume;
};

int cmd_train(const Common& c, const TrainArgs& a) {
  const auto resolved = resolve_config(c.config, c.overrides);
  const auto cfg = json::parse(resolved);
  DatasetHandle data;
  check(inade_dataset_load(a.data.c_str(), &data.p));
  prepare_output_dir(c.out, c.force);
  const fs::path out(c.out);
  write_file(out / "resolved_config.json", resolved);

  TrainerHandle trainer;
  check(inade_trainer_create(resolved.c_str(), data.p, &trainer.p));
  if (!a.resume.empty()) check(inade_trainer_load(trainer.p, a.resume.c_str()));

  const auto log_every = cfg["train"]["log_every"].get<std::int64_t>();
  const auto ckpt_every = cfg["train"]["checkpoint_every"].get<std::int64_t>();
  std::ofstream log(out / "log.jsonl", std::ios::app);
  struct Sink {
    std::ofstream* log;
    std::int64_t every;
  } sink{&log, log_every};
  auto on_step = [](const char* line, void* user) {
    auto* s = static_cast<Sink*>(user);
    *s->log << line << '\n';
    const auto step = json::parse(line)["step"].get<std::int64_t>();
    if (step % s->every == 0) std::cout << line << std::endl;
  };

  std::int64_t step = 0, total = 0;
  check(inade_trainer_progress(trainer.p, &step, &total));
  while (step < total) {
    const auto chunk = ckpt_every > 0 ? std::min(total - step, ckpt_every - step % ckpt_every) : total - step;
    check(inade_trainer_run(trainer.p, chunk, on_step, &sink));
    check(inade_trainer_progress(trainer.p, &step, &total));
    log.flush();
    if (ckpt_every > 0 && step % ckpt_every == 0 && step < total) {
      const auto name = "ckpt_" + padded(step, 7);
      check(inade_trainer_save(trainer.p, (out / (name + ".inade")).string().c_str()));
      prior_sheet(out / (name + ".inade"), data.p, 8, out / (name + "_samples"), out / (name + "_samples.png"));
    }
  }
  check(inade_trainer_save(trainer.p, (out / "final.inade").string().c_str()));
  prior_sheet(out / "final.inade", data.p, 8, out / "final_samples", out / "final_samples.png");
  std::cout << json{{"command", "train"}, {"steps", step}, {"checkpoint", (out / "final.inade").string()}}.dump()
            << '\n';
  return 0;
}

struct SampleArgs {
  std::string checkpoint;
  std::string data;
  std::vector<size_t> indices{0};
  std::string mode = "prior";
  std::vector<std::uint64_t> seeds{0};
  std::vector<int32_t> guided;
  std::string reference_data;
  long long reference_index = -1;
};

int cmd_sample(const Common& c, const SampleArgs& a) {
  ModelHandle model;
  check(inade_model_load(a.checkpoint.c_str(), &model.p));
  DatasetHandle layouts, refs;
  check(inade_dataset_load(a.data.c_str(), &layouts.p));
  inade_dataset* ref = layouts.p;
  if (!a.reference_data.empty()) {
    check(inade_dataset_load(a.reference_data.c_str(), &refs.p));
    ref = refs.p;
  }
  const inade_sample_mode mode = a.mode == "prior"       ? INADE_SAMPLE_PRIOR
                                 : a.mode == "reference" ? INADE_SAMPLE_REFERENCE
                                                         : INADE_SAMPLE_MIXED;
  prepare_output_dir(c.out, c.force);
  const fs::path out(c.out);
  const auto size = model_size(model.p);
  std::vector<std::string> files;
  for (auto index : a.indices)
    for (auto seed : a.seeds) {
      std::vector<uint8_t> rgb(size.bytes());
      const size_t ref_index = a.reference_index >= 0 ? static_cast<size_t>(a.reference_index) : index;
      check(inade_model_sample(model.p, layouts.p, index, mode, ref, ref_index, a.guided.data(), a.guided.size(),
                               seed, rgb.data(), rgb.size()));
      const auto name = a.mode + "_i" + padded(static_cast<std::int64_t>(index), 4) + "_s" + std::to_string(seed) + ".png";
      write_png(out / name, rgb, size);
      files.push_back(name);
    }
  json resolved{{"command", "sample"},       {"checkpoint", a.checkpoint}, {"data", a.data},
                {"indices", a.indices},      {"mode", a.mode},             {"seeds", a.seeds},
                {"guided", a.guided},        {"reference_data", a.reference_data.empty() ? a.data : a.reference_data},
                {"reference_index", a.reference_index}};
  write_file(out / "resolved_config.json", resolved.dump(2));
  std::cout << json{{"command", "sample"}, {"files", files}}.dump() << '\n';
  return 0;
}

struct ResampleArgs {
  std::string checkpoint;
  std::string data;
  size_t index = 0;
  int32_t instance = 1;
  int variants = 4;
  std::uint64_t seed = 0;
};

/// Row seed of variant k >= 1; variant 0 is the unmodified prior sample.
std::uint64_t variant_row_seed(std::uint64_t seed, int k) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k));
}

int cmd_resample(const Common& c, const ResampleArgs& a) {
  ModelHandle model;
  check(inade_model_load(a.checkpoint.c_str(), &model.p));
  DatasetHandle layouts;
  check(inade_dataset_load(a.data.c_str(), &layouts.p));
  prepare_output_dir(c.out, c.force);
  const fs::path out(c.out);
  const auto size = model_size(model.p);
  std::vector<fs::path> tiles;
  for (int k = 0; k < a.variants; ++k) {
    std::vector<uint8_t> rgb(size.bytes());
    if (k == 0)
      check(inade_model_sample(model.p, layouts.p, a.index, INADE_SAMPLE_PRIOR, nullptr, 0, nullptr, 0, a.seed,
                               rgb.data(), rgb.size()));
    else
      check(inade_model_resample(model.p, layouts.p, a.index, a.instance, a.seed, variant_row_seed(a.seed, k),
                                 rgb.data(), rgb.size()));
    tiles.push_back(out / ("variant_" + padded(k, 2) + ".png"));
    write_png(tiles.back(), rgb, size);
  }
  write_sheet(tiles, a.variants, out / "row.png");
  json resolved{{"command", "resample"}, {"checkpoint", a.checkpoint}, {"data", a.data}, {"index", a.index},
                {"instance", a.instance},   {"variants", a.variants},     {"seed", a.seed}};
  write_file(out / "resolved_config.json", resolved.dump(2));
  std::cout << json{{"command", "resample"}, {"variants", a.variants}, {"out", c.out}}.dump() << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string metrics = "overall,instance,class,fid";
  bool sheet = false;
};

int cmd_eval(const Common& c, const EvalArgs& a) {
  const auto resolved = resolve_config(c.config, c.overrides);
  ModelHandle model;
  check(inade_model_load(a.checkpoint.c_str(), &model.p));
  DatasetHandle data;
  check(inade_dataset_load(a.data.c_str(), &data.p));
  prepare_output_dir(c.out, c.force);
  const fs::path out(c.out);
  write_file(out / "resolved_config.json", resolved);
  char* report = nullptr;
  check(inade_model_evaluate(model.p, data.p, resolved.c_str(), a.metrics.c_str(), &report));
  const auto text = take_string(report);
  write_file(out / "report.json", text);
  if (a.sheet) prior_sheet(a.checkpoint, data.p, 16, out / "samples", out / "samples.png");
  auto summary = json::parse(text);
  summary.erase("per_instance");
  summary.erase("per_class");
  std::cout << summary.dump() << '\n';
  return 0;
}

struct GridArgs {
  std::string images;
  std::string out;
  int cols = 4;
  bool force = false;
};

int cmd_grid(const GridArgs& a) {
  if (!fs::is_directory(a.images)) throw Failure{kExitData, "FileNotFound", a.images + " is not a directory"};
  if (fs::exists(a.out) && !a.force) config_error(a.out + " exists (use --force)");
  std::vector<fs::path> tiles;
  for (const auto& e : fs::directory_iterator(a.images))
    if (e.is_regular_file() && e.path().extension() == ".png" && fs::absolute(e.path()) != fs::absolute(a.out))
      tiles.push_back(e.path());
  std::sort(tiles.begin(), tiles.end());
  if (tiles.empty()) throw Failure{kExitData, "FileNotFound", "no .png images in " + a.images};
  write_sheet(tiles, a.cols, a.out);
  std::cout << json{{"command", "grid"}, {"tiles", tiles.size()}, {"out", a.out}}.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance-aware diverse semantic image synthesis"};
  app.require_subcommand(1);

  Common dataset_c, train_c, sample_c, resample_c, eval_c;
  TrainArgs train_a;
  SampleArgs sample_a;
  ResampleArgs resample_a;
  EvalArgs eval_a;
  GridArgs grid_a;

  auto* dataset = app.add_subcommand("dataset", "Generate and save a synthetic shapes dataset");
  add_common(dataset, dataset_c, true);

  auto* train = app.add_subcommand("train", "Train from a saved dataset");
  add_common(train, train_c, true);
  train->add_option("--data", train_a.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--resume", train_a.resume, "Checkpoint to resume from")->check(CLI::ExistingFile);

  auto* sample = app.add_subcommand("sample", "Synthesize images for dataset layouts");
  add_common(sample, sample_c, false);
  sample->add_option("--checkpoint", sample_a.checkpoint)->required()->check(CLI::ExistingFile);
  sample->add_option("--data", sample_a.data, "Dataset providing the label pairs")->required()->check(CLI::ExistingDirectory);
  sample->add_option("--index", sample_a.indices, "Sample indices")->delimiter(',');
  sample->add_option("--mode", sample_a.mode)->check(CLI::IsMember({"prior", "reference", "mixed"}));
  sample->add_option("--seeds", sample_a.seeds)->delimiter(',');
  sample->add_option("--guided", sample_a.guided, "Instances using reference style (mixed mode)")->delimiter(',');
  sample->add_option("--reference-data", sample_a.reference_data, "Dataset holding the reference (default --data)")
      ->check(CLI::ExistingDirectory);
  sample->add_option("--reference-index", sample_a.reference_index, "Reference sample (default: same index)");

  auto* resample = app.add_subcommand("resample", "Redraw the noise of one instance; variant 0 is the base sample");
  add_common(resample, resample_c, false);
  resample->add_option("--checkpoint", resample_a.checkpoint)->required()->check(CLI::ExistingFile);
  resample->add_option("--data", resample_a.data)->required()->check(CLI::ExistingDirectory);
  resample->add_option("--index", resample_a.index);
  resample->add_option("--instance", resample_a.instance)->required();
  resample->add_option("--variants", resample_a.variants)->check(CLI::PositiveNumber);
  resample->add_option("--seed", resample_a.seed);

  auto* eval = app.add_subcommand("eval", "Diversity and FID report for a checkpoint");
  add_common(eval, eval_c, true);
  eval->add_option("--checkpoint", eval_a.checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", eval_a.data)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--metrics", eval_a.metrics, "Comma-separated: overall,instance,class,fid");
  eval->add_flag("--sheet", eval_a.sheet, "Also write a contact sheet of prior samples");

  auto* grid = app.add_subcommand("grid", "Tile the PNG images of a directory into one sheet");
  grid->add_option("--images", grid_a.images)->required();
  grid->add_option("--out", grid_a.out, "Output PNG")->required();
  grid->add_option("--cols", grid_a.cols)->check(CLI::PositiveNumber);
  grid->add_flag("--force", grid_a.force);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "ConfigInvalid"}, {"message", e.what()}, {"exit_code", kExitConfig}}.dump() << '\n';
    return kExitConfig;
  }

  try {
    if (*dataset) return cmd_dataset(dataset_c);
    if (*train) return cmd_train(train_c, train_a);
    if (*sample) return cmd_sample(sample_c, sample_a);
    if (*resample) return cmd_resample(resample_c, resample_a);
    if (*eval) return cmd_eval(eval_c, eval_a);
    if (*grid) return cmd_grid(grid_a);
  } catch (const Failure& f) {
    std::cerr << json{{"error", f.error}, {"message", f.message}, {"exit_code", f.exit_code}}.dump() << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}, {"exit_code", kExitInternal}}.dump() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
