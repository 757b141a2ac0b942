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
#include "depthseg/depthseg.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>

#include "depthseg/errors.hpp"
#include "depthseg/experiments.hpp"
#include "depthseg/io.hpp"
#include "depthseg/training.hpp"

struct ds_config {
  depthseg::RunConfig cfg;
};

struct ds_model {
  depthseg::MultiTaskNet net{nullptr};
  depthseg::CheckpointInfo info;
};

namespace {

thread_local std::string g_last_error;

ds_status fail(ds_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
ds_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return DS_OK;
  } catch (const depthseg::ConfigError& e) {
    return fail(DS_ERR_CONFIG, e.what());
  } catch (const depthseg::DataError& e) {
    return fail(DS_ERR_DATA, e.what());
  } catch (const depthseg::DivergenceError& e) {
    return fail(DS_ERR_DIVERGED, e.what());
  } catch (const c10::Error& e) {
    return fail(DS_ERR_INTERNAL, e.what_without_backtrace());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(DS_ERR_DATA, e.what());
  } catch (const std::exception& e) {
    return fail(DS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DS_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw depthseg::ConfigError(std::string(what) + " must not be null");
}

std::string str(const char* s) { return s ? s : ""; }

ds_step_record to_record(const depthseg::LogEntry& e) {
  return {e.step, e.lr, e.loss.l_depth, e.loss.l_seg, e.loss.l_gen_adv, e.loss.l_critic, e.loss.gp, e.loss.l_total,
          e.loss.critic_grad_norm};
}

void copy_string(char* dst, size_t cap, const std::string& src) {
  if (src.size() + 1 > cap) throw depthseg::DataError("path too long for result buffer: " + src);
  std::memcpy(dst, src.c_str(), src.size() + 1);
}

void fill_eval(const depthseg::EvalReport& r, ds_eval_result* out) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto& d = r.depth;
  const bool hd = r.has_depth, hs = r.has_seg;
  *out = {r.images,
          hd ? d.abs_rel : nan,
          hd ? d.sq_rel : nan,
          hd ? d.rmse : nan,
          hd ? d.rmse_log : nan,
          hd ? d.delta1 : nan,
          hd ? d.delta2 : nan,
          hd ? d.delta3 : nan,
          hs ? r.seg.miou : nan,
          hs ? r.seg.pixel_acc : nan};
}

const std::vector<depthseg::Sample>& split_of(const depthseg::Dataset& data, const std::string& split) {
  if (split == "train") return data.train;
  if (split == "val") return data.val;
  throw depthseg::ConfigError("unknown split '" + split + "' (expected train or val)");
}

}  // namespace

extern "C" {

const char* ds_last_error(void) { return g_last_error.c_str(); }

const char* ds_version(void) { return "1.0.0"; }

ds_status ds_config_new(ds_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ds_config();
  });
}

ds_status ds_config_load(const char* path, ds_config** out) {
  return guarded([&] {
    require(path && out, "path and out");
    auto cfg = depthseg::RunConfig::from_key_values(depthseg::read_key_values(path), true);
    *out = new ds_config{cfg};
  });
}

ds_status ds_config_from_checkpoint(const char* checkpoint, ds_config** out) {
  return guarded([&] {
    require(checkpoint && out, "checkpoint and out");
    *out = new ds_config{depthseg::read_checkpoint_info(checkpoint).config};
  });
}

void ds_config_free(ds_config* cfg) { delete cfg; }

ds_status ds_config_set(ds_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "cfg, key and value");
    depthseg::RunConfig copy = cfg->cfg;
    copy.apply({{key, value}});
    cfg->cfg = copy;
  });
}

ds_status ds_config_get(const ds_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed) {
  return guarded([&] {
    require(cfg && key, "cfg and key");
    const auto kv = cfg->cfg.to_key_values();
    auto it = kv.find(key);
    if (it == kv.end()) throw depthseg::ConfigError(std::string("unknown config key '") + key + "'");
    if (needed) *needed = it->second.size() + 1;
    if (buf && buf_len > 0) {
      const size_t n = std::min(buf_len - 1, it->second.size());
      std::memcpy(buf, it->second.data(), n);
      buf[n] = '\0';
    }
  });
}

ds_status ds_config_apply_ablation(ds_config* cfg, const char* name) {
  return guarded([&] {
    require(cfg && name, "cfg and name");
    depthseg::apply_ablation(cfg->cfg, name);
  });
}

ds_status ds_config_save(const ds_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "cfg and path");
    depthseg::write_key_values(path, cfg->cfg.to_key_values());
  });
}

size_t ds_ablation_count(void) { return depthseg::ablation_names().size(); }

const char* ds_ablation_name(size_t index) {
  const auto& names = depthseg::ablation_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

void ds_synth_options_default(ds_synth_options* opts) {
  if (!opts) return;
  const depthseg::SyntheticSpec spec;
  *opts = {spec.height, spec.width, spec.num_classes, spec.range.d_min, spec.range.d_max, spec.noise};
}

ds_status ds_gen_synthetic(const char* root, uint64_t seed, int64_t train_count, int64_t val_count,
                           const ds_synth_options* opts) {
  return guarded([&] {
    require(root, "root");
    if (train_count < 0 || val_count < 0) throw depthseg::ConfigError("sample counts must be >= 0");
    depthseg::SyntheticSpec spec;
    if (opts) {
      spec.height = opts->height;
      spec.width = opts->width;
      spec.num_classes = opts->num_classes;
      spec.range = {opts->d_min, opts->d_max};
      spec.noise = opts->noise;
    }
    spec.validate();
    depthseg::gen_synthetic(root, "train", seed, train_count, spec);
    depthseg::gen_synthetic(root, "val", seed, val_count, spec);
    depthseg::synthetic_manifest(spec, {"train", "val"}).save(root);
  });
}

ds_status ds_train(const ds_config* cfg, const ds_train_options* opts, ds_train_result* result) {
  return guarded([&] {
    require(cfg && opts && opts->data_root, "cfg, opts and data_root");
    const auto data = depthseg::load_training_data(opts->data_root, cfg->cfg.train.center_crop);
    depthseg::FitOptions fit;
    fit.out_dir = str(opts->out_dir);
    fit.resume_from = str(opts->resume_from);
    if (opts->stop_at >= 0) fit.stop_at = opts->stop_at;
    if (opts->on_step) {
      fit.on_step = [cb = opts->on_step, user = opts->user](const depthseg::LogEntry& e) {
        const ds_step_record r = to_record(e);
        cb(&r, user);
      };
    }
    const auto report = depthseg::fit(cfg->cfg, data, fit);
    if (result) {
      result->final_step = report.final_step;
      result->wall_seconds = report.wall_seconds;
      copy_string(result->final_checkpoint, sizeof(result->final_checkpoint), report.final_checkpoint);
      copy_string(result->digest, sizeof(result->digest), report.digest);
    }
  });
}

ds_status ds_evaluate(const char* checkpoint, const char* data_root, const char* split, const char* report_path,
                      ds_eval_result* result) {
  return guarded([&] {
    require(checkpoint && data_root, "checkpoint and data_root");
    depthseg::CheckpointInfo info;
    auto net = depthseg::load_network(checkpoint, &info);
    const auto data = depthseg::load_training_data(data_root, info.config.train.center_crop);
    const auto& samples = split_of(data, split ? split : "val");
    const auto report = depthseg::evaluate(net, samples, data.manifest, info.config.train.depth_space,
                                           info.config.train.eval_batch_size);
    if (report_path && *report_path) {
      const auto parent = std::filesystem::path(report_path).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      depthseg::write_eval_report(report_path, report);
    }
    if (result) fill_eval(report, result);
  });
}

ds_status ds_ablate(const ds_config* cfg, const char* data_root, const char* out_dir, int64_t steps,
                    ds_step_callback on_step, void* user) {
  return guarded([&] {
    require(cfg && data_root && out_dir, "cfg, data_root and out_dir");
    depthseg::RunConfig base = cfg->cfg;
    if (steps >= 0) base.train.total_steps = steps;
    base.validate();
    const auto data = depthseg::load_training_data(data_root, base.train.center_crop);
    std::function<void(const std::string&, const depthseg::LogEntry&)> cb;
    if (on_step) {
      cb = [on_step, user](const std::string&, const depthseg::LogEntry& e) {
        const ds_step_record r = to_record(e);
        on_step(&r, user);
      };
    }
    const auto rows = depthseg::run_ablation(base, data, out_dir, depthseg::ablation_names(), cb);
    depthseg::write_ablation(out_dir, rows);
  });
}

ds_status ds_export(const char* checkpoint, const char* data_root, const char* split, int64_t limit,
                    const char* out_dir, const char* log_records, int64_t* written) {
  return guarded([&] {
    require(checkpoint && data_root && out_dir, "checkpoint, data_root and out_dir");
    depthseg::CheckpointInfo info;
    auto net = depthseg::load_network(checkpoint, &info);
    const auto data = depthseg::load_training_data(data_root, info.config.train.center_crop);
    depthseg::ExportOptions options;
    options.split = split ? split : "val";
    options.limit = limit;
    options.batch_size = info.config.train.eval_batch_size;
    const int64_t n = depthseg::export_predictions(net, info, data, out_dir, options);
    if (log_records && *log_records) {
      const auto log = depthseg::read_log_records(log_records);
      depthseg::write_rgb_png((std::filesystem::path(out_dir) / "loss_curve.png").string(),
                              depthseg::plot_loss_curves(log));
    }
    if (written) *written = n;
  });
}

ds_status ds_model_load(const char* checkpoint, ds_model** out) {
  return guarded([&] {
    require(checkpoint && out, "checkpoint and out");
    auto model = std::make_unique<ds_model>();
    model->net = depthseg::load_network(checkpoint, &model->info);
    *out = model.release();
  });
}

void ds_model_free(ds_model* model) { delete model; }

ds_status ds_model_info_get(const ds_model* model, ds_model_info* info) {
  return guarded([&] {
    require(model && info, "model and info");
    const auto& cfg = model->net->cfg;
    const auto& m = model->info.manifest;
    *info = {cfg.image_height,
             cfg.image_width,
             static_cast<int32_t>(cfg.num_classes),
             cfg.tasks != depthseg::Tasks::SegOnly,
             cfg.tasks != depthseg::Tasks::DepthOnly,
             m.range.d_min,
             m.range.d_max,
             depthseg::count_params(*model->net),
             model->info.step};
  });
}

ds_status ds_model_predict(ds_model* model, const float* rgb, int64_t height, int64_t width, float* depth_m,
                           int32_t* labels) {
  return guarded([&] {
    require(model && rgb, "model and rgb");
    const auto& cfg = model->net->cfg;
    if (height != cfg.image_height || width != cfg.image_width) {
      throw depthseg::DataError("image is " + std::to_string(height) + "x" + std::to_string(width) +
                                ", model expects " + std::to_string(cfg.image_height) + "x" +
                                std::to_string(cfg.image_width));
    }
    depthseg::Sample sample;
    sample.image = depthseg::Image(height, width);
    std::memcpy(sample.image.rgb.data(), rgb, sizeof(float) * static_cast<size_t>(height * width * 3));
    for (float v : sample.image.rgb) {
      if (!std::isfinite(v)) throw depthseg::DataError("image contains non-finite values");
    }
    sample.depth = depthseg::DepthMap(height, width);
    sample.labels = depthseg::Grid<int32_t>(height, width, model->info.manifest.ignore_id);
    const auto preds = depthseg::predict_samples(model->net, {sample}, model->info.manifest,
                                                 model->info.config.train.depth_space, 1);
    const auto& p = preds.front();
    if (depth_m) {
      if (!p.depth) throw depthseg::ConfigError("model has no depth head");
      for (size_t i = 0; i < p.depth->values.data.size(); ++i) depth_m[i] = static_cast<float>(p.depth->values.data[i]);
    }
    if (labels) {
      if (!p.labels) throw depthseg::ConfigError("model has no segmentation head");
      std::memcpy(labels, p.labels->data.data(), sizeof(int32_t) * p.labels->data.size());
    }
  });
}

}  // extern "C"
