// Copyright 2026 The depthseg Authors. All Rights Reserved.
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
/* C interface to the depthseg library. Every function returns a ds_status;
 * on failure ds_last_error() describes the problem. Handles are opaque and
 * must be released with the matching *_free function. */
#ifndef DEPTHSEG_DEPTHSEG_H_
#define DEPTHSEG_DEPTHSEG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DS_API __declspec(dllexport)
#else
#define DS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ds_status {
  DS_OK = 0,
  DS_ERR_INTERNAL = 1,
  DS_ERR_CONFIG = 2,
  DS_ERR_DATA = 3,
  DS_ERR_DIVERGED = 4
} ds_status;

/* Message of the last failure on the calling thread ("" if none). */
DS_API const char* ds_last_error(void);
DS_API const char* ds_version(void);

/* ---- Run configuration ------------------------------------------------- */

typedef struct ds_config ds_config;

DS_API ds_status ds_config_new(ds_config** out);
/* Reads a key = value file. Every loss.* key must be present. */
DS_API ds_status ds_config_load(const char* path, ds_config** out);
/* Config a checkpoint was trained with (for resuming). */
DS_API ds_status ds_config_from_checkpoint(const char* checkpoint, ds_config** out);
DS_API void ds_config_free(ds_config* cfg);
DS_API ds_status ds_config_set(ds_config* cfg, const char* key, const char* value);
/* Copies the value into buf, truncating to buf_len - 1 characters plus the
 * terminator; *needed receives the full length including the terminator.
 * buf may be NULL to query the length. */
DS_API ds_status ds_config_get(const ds_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed);
DS_API ds_status ds_config_apply_ablation(ds_config* cfg, const char* name);
DS_API ds_status ds_config_save(const ds_config* cfg, const char* path);

/* Names of the ablation variants in table order; index >= count gives NULL. */
DS_API size_t ds_ablation_count(void);
DS_API const char* ds_ablation_name(size_t index);

/* ---- Synthetic data ---------------------------------------------------- */

typedef struct ds_synth_options {
  int64_t height;
  int64_t width;
  int32_t num_classes;
  double d_min;
  double d_max;
  double noise;
} ds_synth_options;

DS_API void ds_synth_options_default(ds_synth_options* opts);
/* Writes train and val splits plus the manifest under root. */
DS_API ds_status ds_gen_synthetic(const char* root, uint64_t seed, int64_t train_count, int64_t val_count,
                                  const ds_synth_options* opts);

/* ---- Training ---------------------------------------------------------- */

typedef struct ds_step_record {
  int64_t step;
  double lr;
  double l_depth;
  double l_seg;
  double l_gen_adv;
  double l_critic;
  double gp;
  double l_total;
  double critic_grad_norm;
} ds_step_record;

typedef void (*ds_step_callback)(const ds_step_record* record, void* user);

typedef struct ds_train_options {
  const char* data_root;
  const char* out_dir;      /* NULL or "" keeps the run in memory */
  const char* resume_from;  /* checkpoint path or NULL */
  int64_t stop_at;          /* < 0: run to train.total_steps */
  ds_step_callback on_step; /* may be NULL */
  void* user;
} ds_train_options;

typedef struct ds_train_result {
  int64_t final_step;
  double wall_seconds;
  char final_checkpoint[4096];
  char digest[32];
} ds_train_result;

DS_API ds_status ds_train(const ds_config* cfg, const ds_train_options* opts, ds_train_result* result);

/* ---- Evaluation -------------------------------------------------------- */

/* Metrics a model does not predict are NaN. */
typedef struct ds_eval_result {
  int64_t images;
  double abs_rel, sq_rel, rmse, rmse_log, delta1, delta2, delta3;
  double miou, pixel_acc;
} ds_eval_result;

/* report_path may be NULL; otherwise the record file is written there and
 * the formatted table next to it with a .table extension. */
DS_API ds_status ds_evaluate(const char* checkpoint, const char* data_root, const char* split,
                             const char* report_path, ds_eval_result* result);

/* Trains every ablation variant of cfg for "steps" generator steps
 * (steps < 0 keeps train.total_steps) and writes ablation.table and
 * ablation.records under out_dir. */
DS_API ds_status ds_ablate(const ds_config* cfg, const char* data_root, const char* out_dir, int64_t steps,
                           ds_step_callback on_step, void* user);

/* Prediction PNGs and composites for up to "limit" samples of a split
 * (0 = all), plus loss_curve.png when log_records is not NULL. */
DS_API ds_status ds_export(const char* checkpoint, const char* data_root, const char* split, int64_t limit,
                           const char* out_dir, const char* log_records, int64_t* written);

/* ---- Inference --------------------------------------------------------- */

typedef struct ds_model ds_model;

typedef struct ds_model_info {
  int64_t height;
  int64_t width;
  int32_t num_classes;
  int32_t has_depth;
  int32_t has_seg;
  double d_min;
  double d_max;
  int64_t params;
  int64_t step;
} ds_model_info;

DS_API ds_status ds_model_load(const char* checkpoint, ds_model** out);
DS_API void ds_model_free(ds_model* model);
DS_API ds_status ds_model_info_get(const ds_model* model, ds_model_info* info);
/* rgb: height x width x 3 floats in [0, 1]. depth_m receives meters and
 * labels class ids; either output may be NULL. Sizes must match the model. */
DS_API ds_status ds_model_predict(ds_model* model, const float* rgb, int64_t height, int64_t width, float* depth_m,
                                  int32_t* labels);

#ifdef __cplusplus
}
#endif

#endif  /* DEPTHSEG_DEPTHSEG_H_ */
