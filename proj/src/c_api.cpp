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

#include "inade/inade.h"

#include <cstring>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <c10/util/Exception.h>
#include <torch/torch.h>

#include "inade/config.hpp"
#include "inade/data.hpp"
#include "inade/engine.hpp"
#include "inade/error.hpp"
#include "inade/evaluation.hpp"
#include "inade/image_io.hpp"

struct inade_dataset {
  std::shared_ptr<inade::Dataset> data;
};

struct inade_trainer {
  std::unique_ptr<inade::Trainer> trainer;
};

struct inade_model {
  inade::LoadedModels loaded;
};

namespace {

thread_local std::string g_last_error;

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Fn>
inade_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return INADE_OK;
  } catch (const inade::Error& e) {
    g_last_error = e.what();
    return static_cast<inade_status>(static_cast<int>(e.code()) + 1);
  } catch (const ArgumentError& e) {
    g_last_error = std::string("InvalidArgument: ") + e.what();
    return INADE_ERR_INVALID_ARGUMENT;
  } catch (const c10::Error& e) {
    g_last_error = std::string("Internal: ") + e.what_without_backtrace();
    return INADE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return INADE_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw ArgumentError(std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

inade::RunConfig run_config(const char* json) {
  return json == nullptr ? inade::RunConfig{} : inade::parse_run_config(json);
}

const inade::Sample& sample_at(const inade_dataset* d, size_t index) {
  need(d, "dataset");
  inade::require(index < d->data->samples.size(), inade::ErrorCode::kIndexOutOfRange,
                 "sample " + std::to_string(index) + " does not exist");
  return d->data->samples[index];
}

void copy_image(const torch::Tensor& image, uint8_t* rgb, size_t capacity) {
  need(rgb, "rgb");
  const auto img = inade::tensor_to_rgb8(image);
  if (capacity < img.pixels.size()) throw ArgumentError("output buffer too small");
  std::memcpy(rgb, img.pixels.data(), img.pixels.size());
}

}  // namespace

extern "C" {

const char* inade_last_error(void) { return g_last_error.c_str(); }

const char* inade_status_name(inade_status status) {
  switch (status) {
    case INADE_OK: return "Ok";
    case INADE_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case INADE_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const int code = static_cast<int>(status) - 1;
  if (code >= 0 && code <= static_cast<int>(inade::ErrorCode::kNonFiniteLoss))
    return inade::error_code_name(static_cast<inade::ErrorCode>(code)).data();
  return "Unknown";
}

void inade_string_free(char* s) { std::free(s); }

inade_status inade_config_resolve(const char* config_json, const char* const* overrides, size_t num_overrides,
                                  char** out_json) {
  return guarded([&] {
    need(out_json, "out_json");
    if (num_overrides > 0) need(overrides, "overrides");
    auto cfg = run_config(config_json);
    for (size_t i = 0; i < num_overrides; ++i) {
      need(overrides[i], "override");
      const std::string kv = overrides[i];
      const auto eq = kv.find('=');
      inade::require(eq != std::string::npos && eq > 0, inade::ErrorCode::kConfigInvalid,
                     "override '" + kv + "' is not key=value");
      inade::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    *out_json = dup_string(inade::to_json(cfg).dump(2));
  });
}

inade_status inade_dataset_generate(const char* run_config_json, inade_dataset** out) {
  return guarded([&] {
    need(out, "out");
    const auto cfg = run_config(run_config_json);
    *out = new inade_dataset{std::make_shared<inade::Dataset>(inade::generate_shapes(cfg.data))};
  });
}

inade_status inade_dataset_load(const char* dir, inade_dataset** out) {
  return guarded([&] {
    need(dir, "dir");
    need(out, "out");
    *out = new inade_dataset{std::make_shared<inade::Dataset>(inade::load_dataset(dir))};
  });
}

inade_status inade_dataset_save(const inade_dataset* dataset, const char* dir) {
  return guarded([&] {
    need(dataset, "dataset");
    need(dir, "dir");
    inade::save_dataset(*dataset->data, dir);
  });
}

inade_status inade_dataset_info(const inade_dataset* dataset, size_t* num_samples, int64_t* height, int64_t* width,
                                int* num_classes) {
  return guarded([&] {
    need(dataset, "dataset");
    if (num_samples) *num_samples = dataset->data->samples.size();
    if (height) *height = dataset->data->height;
    if (width) *width = dataset->data->width;
    if (num_classes) *num_classes = dataset->data->num_classes;
  });
}

inade_status inade_dataset_num_instances(const inade_dataset* dataset, size_t index, int* out) {
  return guarded([&] {
    need(out, "out");
    *out = sample_at(dataset, index).pair.num_instances();
  });
}

inade_status inade_dataset_image(const inade_dataset* dataset, size_t index, uint8_t* rgb, size_t capacity) {
  return guarded([&] { copy_image(sample_at(dataset, index).image, rgb, capacity); });
}

void inade_dataset_free(inade_dataset* dataset) { delete dataset; }

inade_status inade_trainer_create(const char* run_config_json, const inade_dataset* dataset, inade_trainer** out) {
  return guarded([&] {
    need(dataset, "dataset");
    need(out, "out");
    const auto cfg = run_config(run_config_json);
    *out = new inade_trainer{std::make_unique<inade::Trainer>(cfg.train, dataset->data)};
  });
}

inade_status inade_trainer_step(inade_trainer* trainer, char** out_json) {
  return guarded([&] {
    need(trainer, "trainer");
    const auto losses = trainer->trainer->step();
    if (out_json) *out_json = dup_string(losses.to_json().dump());
  });
}

inade_status inade_trainer_run(inade_trainer* trainer, int64_t steps, inade_log_fn log, void* user) {
  return guarded([&] {
    need(trainer, "trainer");
    if (steps < 0) throw ArgumentError("steps must be non-negative");
    auto& t = *trainer->trainer;
    const auto n = steps == 0 ? t.total_steps() - t.global_step() : steps;
    t.run(n, [&](const inade::StepLosses& l) {
      if (log) log(l.to_json().dump().c_str(), user);
    });
  });
}

inade_status inade_trainer_progress(const inade_trainer* trainer, int64_t* step, int64_t* total_steps) {
  return guarded([&] {
    need(trainer, "trainer");
    if (step) *step = trainer->trainer->global_step();
    if (total_steps) *total_steps = trainer->trainer->total_steps();
  });
}

inade_status inade_trainer_save(const inade_trainer* trainer, const char* path) {
  return guarded([&] {
    need(trainer, "trainer");
    need(path, "path");
    trainer->trainer->save(path);
  });
}

inade_status inade_trainer_load(inade_trainer* trainer, const char* path) {
  return guarded([&] {
    need(trainer, "trainer");
    need(path, "path");
    trainer->trainer->load(path);
  });
}

void inade_trainer_free(inade_trainer* trainer) { delete trainer; }

inade_status inade_model_load(const char* checkpoint, inade_model** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    *out = new inade_model{inade::load_models(checkpoint)};
  });
}

inade_status inade_model_config(const inade_model* model, char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(out_json, "out_json");
    *out_json = dup_string(inade::to_json(model->loaded.config).dump(2));
  });
}

inade_status inade_model_image_size(const inade_model* model, int64_t* height, int64_t* width) {
  return guarded([&] {
    need(model, "model");
    if (height) *height = model->loaded.config.model.height;
    if (width) *width = model->loaded.config.model.width;
  });
}

inade_status inade_model_sample(inade_model* model, const inade_dataset* layouts, size_t index,
                                inade_sample_mode mode, const inade_dataset* reference, size_t reference_index,
                                const int32_t* guided, size_t num_guided, uint64_t seed, uint8_t* rgb,
                                size_t capacity) {
  return guarded([&] {
    need(model, "model");
    auto& m = model->loaded.models;
    const auto& pair = sample_at(layouts, index).pair;
    torch::Tensor image;
    switch (mode) {
      case INADE_SAMPLE_PRIOR:
        image = inade::sample_prior(m.generator, pair, seed);
        break;
      case INADE_SAMPLE_REFERENCE:
        image = inade::sample_reference(m.generator, m.encoder, pair, sample_at(reference, reference_index), seed);
        break;
      case INADE_SAMPLE_MIXED: {
        if (num_guided > 0) need(guided, "guided");
        const std::vector<std::int32_t> rows(guided, guided + num_guided);
        image = inade::sample_mixed(m.generator, m.encoder, pair, sample_at(reference, reference_index), rows, seed);
        break;
      }
      default:
        throw ArgumentError("unknown sample mode");
    }
    copy_image(image, rgb, capacity);
  });
}

inade_status inade_model_resample(inade_model* model, const inade_dataset* layouts, size_t index, int32_t instance,
                                  uint64_t base_seed, uint64_t row_seed, uint8_t* rgb, size_t capacity) {
  return guarded([&] {
    need(model, "model");
    const auto& pair = sample_at(layouts, index).pair;
    copy_image(inade::resample_instance(model->loaded.models.generator, pair, base_seed, instance, row_seed), rgb,
               capacity);
  });
}

inade_status inade_model_evaluate(inade_model* model, const inade_dataset* dataset, const char* run_config_json,
                                  const char* metrics, char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(dataset, "dataset");
    need(out_json, "out_json");
    const auto cfg = run_config(run_config_json);
    std::vector<std::string> list;
    std::stringstream ss(metrics ? metrics : "overall,instance,class,fid");
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) list.push_back(item);
    inade::require(!list.empty(), inade::ErrorCode::kConfigInvalid, "no metrics requested");
    const auto report = inade::evaluation_report(model->loaded.models.generator, *dataset->data, cfg.eval, list);
    *out_json = dup_string(report.dump(2));
  });
}

void inade_model_free(inade_model* model) { delete model; }

inade_status inade_write_png(const char* path, const uint8_t* rgb, int64_t height, int64_t width) {
  return guarded([&] {
    need(path, "path");
    need(rgb, "rgb");
    if (height <= 0 || width <= 0) throw ArgumentError("image size must be positive");
    inade::Rgb8Image img{height, width, std::vector<uint8_t>(rgb, rgb + height * width * 3)};
    inade::write_png_rgb8(path, img);
  });
}

inade_status inade_contact_sheet(const char* const* paths, size_t num_paths, int cols, const char* out_path) {
  return guarded([&] {
    need(paths, "paths");
    need(out_path, "out_path");
    if (num_paths == 0 || cols <= 0) throw ArgumentError("need at least one image and a positive column count");
    std::vector<inade::Rgb8Image> tiles;
    for (size_t i = 0; i < num_paths; ++i) {
      need(paths[i], "path");
      tiles.push_back(inade::read_png_rgb8(paths[i]));
    }
    inade::write_png_rgb8(out_path, inade::contact_sheet(tiles, cols));
  });
}

}  // extern "C"
