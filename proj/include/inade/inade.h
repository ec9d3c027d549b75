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

#ifndef INADE_INADE_H_
#define INADE_INADE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(INADE_BUILDING_LIBRARY)
#define INADE_API __attribute__((visibility("default")))
#else
#define INADE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum inade_status {
  INADE_OK = 0,
  INADE_ERR_DIMENSION_MISMATCH = 1,
  INADE_ERR_SHAPE_MISMATCH = 2,
  INADE_ERR_INCONSISTENT_INSTANCE = 3,
  INADE_ERR_EMPTY_INSTANCE_LABEL = 4,
  INADE_ERR_LABEL_OUT_OF_RANGE = 5,
  INADE_ERR_CLASS_OUT_OF_RANGE = 6,
  INADE_ERR_INDEX_OUT_OF_RANGE = 7,
  INADE_ERR_NO_INSTANCES = 8,
  INADE_ERR_DEGENERATE_SET = 9,
  INADE_ERR_CONFIG_INVALID = 10,
  INADE_ERR_CORRUPT_FILE = 11,
  INADE_ERR_SCHEMA_MISMATCH = 12,
  INADE_ERR_FILE_NOT_FOUND = 13,
  INADE_ERR_PAIR_MISMATCH = 14,
  INADE_ERR_EPOCH_OUT_OF_RANGE = 15,
  INADE_ERR_NON_FINITE_LOSS = 16,
  INADE_ERR_INVALID_ARGUMENT = 98,
  INADE_ERR_INTERNAL = 99
} inade_status;

typedef enum inade_sample_mode {
  INADE_SAMPLE_PRIOR = 0,
  INADE_SAMPLE_REFERENCE = 1,
  INADE_SAMPLE_MIXED = 2
} inade_sample_mode;

typedef struct inade_dataset inade_dataset;
typedef struct inade_trainer inade_trainer;
typedef struct inade_model inade_model;

/* Receives one JSON training record per step. */
typedef void (*inade_log_fn)(const char* json_line, void* user);

/* Message of the last failure on the calling thread ("" if none). */
INADE_API const char* inade_last_error(void);
/* Stable identifier such as "ConfigInvalid". */
INADE_API const char* inade_status_name(inade_status status);
/* Frees strings returned through char** out-parameters. */
INADE_API void inade_string_free(char* s);

/* Resolves a run config: defaults <- config_json (may be NULL) <- "a.b=value"
   overrides. Unknown keys fail with INADE_ERR_CONFIG_INVALID. */
INADE_API inade_status inade_config_resolve(const char* config_json, const char* const* overrides,
                                            size_t num_overrides, char** out_json);

/* Datasets. generate reads the "data" section of a run config. */
INADE_API inade_status inade_dataset_generate(const char* run_config_json, inade_dataset** out);
INADE_API inade_status inade_dataset_load(const char* dir, inade_dataset** out);
INADE_API inade_status inade_dataset_save(const inade_dataset* dataset, const char* dir);
INADE_API inade_status inade_dataset_info(const inade_dataset* dataset, size_t* num_samples, int64_t* height,
                                          int64_t* width, int* num_classes);
INADE_API inade_status inade_dataset_num_instances(const inade_dataset* dataset, size_t index, int* out);
/* Copies the 8-bit RGB image of a sample (height * width * 3 bytes). */
INADE_API inade_status inade_dataset_image(const inade_dataset* dataset, size_t index, uint8_t* rgb,
                                           size_t capacity);
INADE_API void inade_dataset_free(inade_dataset* dataset);

/* Training. The trainer keeps its own copy of the dataset. */
INADE_API inade_status inade_trainer_create(const char* run_config_json, const inade_dataset* dataset,
                                            inade_trainer** out);
INADE_API inade_status inade_trainer_step(inade_trainer* trainer, char** out_json);
/* Runs up to `steps` steps (0 = until the schedule ends). */
INADE_API inade_status inade_trainer_run(inade_trainer* trainer, int64_t steps, inade_log_fn log, void* user);
INADE_API inade_status inade_trainer_progress(const inade_trainer* trainer, int64_t* step, int64_t* total_steps);
INADE_API inade_status inade_trainer_save(const inade_trainer* trainer, const char* path);
INADE_API inade_status inade_trainer_load(inade_trainer* trainer, const char* path);
INADE_API void inade_trainer_free(inade_trainer* trainer);

/* Inference from a checkpoint. Images are height * width * 3 bytes. */
INADE_API inade_status inade_model_load(const char* checkpoint, inade_model** out);
INADE_API inade_status inade_model_config(const inade_model* model, char** out_json);
INADE_API inade_status inade_model_image_size(const inade_model* model, int64_t* height, int64_t* width);
/* reference/reference_index are ignored for PRIOR; guided is used by MIXED only. */
INADE_API inade_status inade_model_sample(inade_model* model, const inade_dataset* layouts, size_t index,
                                          inade_sample_mode mode, const inade_dataset* reference,
                                          size_t reference_index, const int32_t* guided, size_t num_guided,
                                          uint64_t seed, uint8_t* rgb, size_t capacity);
/* Prior sample of base_seed with instance row redrawn from row_seed. */
INADE_API inade_status inade_model_resample(inade_model* model, const inade_dataset* layouts, size_t index,
                                            int32_t instance, uint64_t base_seed, uint64_t row_seed, uint8_t* rgb,
                                            size_t capacity);
/* metrics: comma-separated subset of overall,instance,class,fid (NULL = all). */
INADE_API inade_status inade_model_evaluate(inade_model* model, const inade_dataset* dataset,
                                            const char* run_config_json, const char* metrics, char** out_json);
INADE_API void inade_model_free(inade_model* model);

/* Image files. */
INADE_API inade_status inade_write_png(const char* path, const uint8_t* rgb, int64_t height, int64_t width);
INADE_API inade_status inade_contact_sheet(const char* const* paths, size_t num_paths, int cols,
                                           const char* out_path);

#ifdef __cplusplus
}
#endif

#endif  // INADE_INADE_H_
