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
// depthseg command-line driver: gen-data, train, eval, ablate, export.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "depthseg/depthseg.h"

namespace fs = std::filesystem;

namespace {

// Raised to unwind with a status after a C API call fails.
struct Failure {
  ds_status status;
};

void check(ds_status status) {
  if (status != DS_OK) {
    std::cerr << "error: " << ds_last_error() << "\n";
    throw Failure{status};
  }
}

void config_error(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  throw Failure{DS_ERR_CONFIG};
}

std::string out_root() {
  const char* env = std::getenv("DEPTHSEG_OUT_ROOT");
  return env && *env ? env : "runs";
}

std::string default_out(const std::string& out, const std::string& name) {
  return out.empty() ? (fs::path(out_root()) / name).string() : out;
}

void print_file(const fs::path& path) {
  std::ifstream in(path);
  std::cout << in.rdbuf();
}

class Config {
 public:
  Config() = default;
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  ~Config() { ds_config_free(cfg_); }

  void load(const std::string& path) { replace([&](ds_config** out) { return ds_config_load(path.c_str(), out); }); }
  void from_checkpoint(const std::string& path) {
    replace([&](ds_config** out) { return ds_config_from_checkpoint(path.c_str(), out); });
  }
  void defaults() { replace([](ds_config** out) { return ds_config_new(out); }); }
  void set(const std::string& key, const std::string& value) { check(ds_config_set(cfg_, key.c_str(), value.c_str())); }
  void set_overrides(const std::vector<std::string>& overrides) {
    for (const auto& item : overrides) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) config_error("--set expects key=value, got '" + item + "'");
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    }
  }
  std::string get(const std::string& key) const {
    size_t needed = 0;
    check(ds_config_get(cfg_, key.c_str(), nullptr, 0, &needed));
    std::string value(needed, '\0');
    check(ds_config_get(cfg_, key.c_str(), value.data(), value.size(), &needed));
    value.resize(needed - 1);
    return value;
  }
  ds_config* get() { return cfg_; }

 private:
  template <typename F>
  void replace(F&& make) {
    ds_config* next = nullptr;
    check(make(&next));
    ds_config_free(cfg_);
    cfg_ = next;
  }
  ds_config* cfg_ = nullptr;
};

struct Progress {
  int64_t total = 0;
  int64_t every = 50;
  bool quiet = false;
};

void print_step(const ds_step_record* r, void* user) {
  const auto* p = static_cast<const Progress*>(user);
  if (p->quiet || (r->step % p->every != 0 && r->step != p->total)) return;
  std::fprintf(stderr, "step %lld/%lld lr=%.3g total=%.4f depth=%.4f seg=%.4f adv=%.4f critic=%.4f gp=%.4f |grad|=%.3f\n",
               static_cast<long long>(r->step), static_cast<long long>(p->total), r->lr, r->l_total, r->l_depth,
               r->l_seg, r->l_gen_adv, r->l_critic, r->gp, r->critic_grad_norm);
}

bool non_empty_dir(const fs::path& p) { return fs::is_directory(p) && !fs::is_empty(p); }

// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::string out;
  uint64_t seed = 0;
  int64_t count = 500;
  int64_t val_count = 100;
  int64_t size = 64;
  int classes = 5;
  double dmin = 0.1;
  double dmax = 60.0;
  double noise = 0.01;
  bool force = false;
};

void gen_data(const GenDataArgs& a) {
  const fs::path out = default_out(a.out, "data");
  if (non_empty_dir(out)) {
    if (!a.force) config_error("output directory " + out.string() + " is not empty (use --force to regenerate)");
    if (!fs::exists(out / "manifest.cfg")) {
      config_error("refusing to overwrite " + out.string() + ": it does not look like a dataset");
    }
    for (const char* entry : {"train", "val", "manifest.cfg"}) fs::remove_all(out / entry);
  }
  ds_synth_options opts;
  ds_synth_options_default(&opts);
  opts.height = opts.width = a.size;
  opts.num_classes = a.classes;
  opts.d_min = a.dmin;
  opts.d_max = a.dmax;
  opts.noise = a.noise;
  check(ds_gen_synthetic(out.string().c_str(), a.seed, a.count, a.val_count, &opts));
  std::cout << (out / "manifest.cfg").string() << "\n";
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string out;
  std::string resume;
  std::string ablation;
  std::vector<std::string> overrides;
  int64_t steps = -1;
  int64_t stop_at = -1;
  int64_t seed = -1;
  bool quiet = false;
};

void train(const TrainArgs& a) {
  Config cfg;
  if (!a.config.empty()) {
    cfg.load(a.config);
  } else if (!a.resume.empty()) {
    cfg.from_checkpoint(a.resume);
  } else {
    cfg.defaults();
  }
  if (!a.ablation.empty()) check(ds_config_apply_ablation(cfg.get(), a.ablation.c_str()));
  cfg.set_overrides(a.overrides);
  if (a.steps >= 0) cfg.set("train.total_steps", std::to_string(a.steps));
  if (a.seed >= 0) cfg.set("train.seed", std::to_string(a.seed));

  const std::string out = default_out(a.out, "train");
  Progress progress{std::stoll(cfg.get("train.total_steps")), 50, a.quiet};
  ds_train_options opts{a.data.c_str(), out.c_str(), a.resume.empty() ? nullptr : a.resume.c_str(), a.stop_at,
                        print_step, &progress};
  ds_train_result result{};
  check(ds_train(cfg.get(), &opts, &result));
  std::cout << "run: " << out << "\n"
            << "steps: " << result.final_step << "\n"
            << "checkpoint: " << result.final_checkpoint << "\n"
            << "digest: " << result.digest << "\n";
  std::fprintf(stdout, "wall: %.1f s\n", result.wall_seconds);
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "val";
  std::string out;
};

void print_eval(const ds_eval_result& r) {
  std::printf(
      "images = %lld\nabs_rel = %.6g\nsq_rel = %.6g\nrmse = %.6g\nrmse_log = %.6g\ndelta1 = %.6g\ndelta2 = %.6g\n"
      "delta3 = %.6g\nmiou = %.6g\npixel_acc = %.6g\n",
      static_cast<long long>(r.images), r.abs_rel, r.sq_rel, r.rmse, r.rmse_log, r.delta1, r.delta2, r.delta3, r.miou,
      r.pixel_acc);
}

void eval(const EvalArgs& a) {
  ds_eval_result result{};
  check(ds_evaluate(a.checkpoint.c_str(), a.data.c_str(), a.split.c_str(), a.out.empty() ? nullptr : a.out.c_str(),
                    &result));
  if (a.out.empty()) {
    print_eval(result);
    return;
  }
  fs::path table(a.out);
  table.replace_extension(".table");
  print_file(table);
  std::cout << "report: " << a.out << "\n";
}

struct AblateArgs {
  std::string config;
  std::string data;
  std::string out;
  std::vector<std::string> overrides;
  int64_t steps = -1;
  bool quiet = false;
};

void ablate(const AblateArgs& a) {
  Config cfg;
  if (a.config.empty()) cfg.defaults(); else cfg.load(a.config);
  cfg.set_overrides(a.overrides);
  const std::string out = default_out(a.out, "ablation");
  Progress progress{a.steps >= 0 ? a.steps : std::stoll(cfg.get("train.total_steps")), 100, a.quiet};
  check(ds_ablate(cfg.get(), a.data.c_str(), out.c_str(), a.steps, print_step, &progress));
  print_file(fs::path(out) / "ablation.table");
}

struct ExportArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string split = "val";
  std::string log;
  int64_t limit = 8;
};

void export_cmd(const ExportArgs& a) {
  std::string log = a.log;
  if (log.empty()) {
    // Checkpoints live in <run>/checkpoints/; pick up the run's log when present.
    const fs::path guess = fs::path(a.checkpoint).parent_path().parent_path() / "log.records";
    if (fs::exists(guess)) log = guess.string();
  }
  const std::string out = default_out(a.out, "export");
  int64_t written = 0;
  check(ds_export(a.checkpoint.c_str(), a.data.c_str(), a.split.c_str(), a.limit, out.c_str(),
                  log.empty() ? nullptr : log.c_str(), &written));
  std::cout << "exported " << written << " samples to " << out << "\n";
  if (!log.empty()) std::cout << "loss curve: " << (fs::path(out) / "loss_curve.png").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint depth estimation and semantic segmentation with adversarial training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ds_version()));

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset (train and val splits)");
  gen_cmd->add_option("--out", gen.out, "Dataset directory (default $DEPTHSEG_OUT_ROOT/data)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--count", gen.count, "Training scenes")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--val-count", gen.val_count, "Validation scenes")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--size", gen.size, "Image side in pixels")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--classes", gen.classes, "Number of classes (2-8)");
  gen_cmd->add_option("--dmin", gen.dmin, "Minimum depth in meters");
  gen_cmd->add_option("--dmax", gen.dmax, "Maximum depth in meters (at most 65.535)");
  gen_cmd->add_option("--noise", gen.noise, "Image noise standard deviation");
  gen_cmd->add_flag("--force", gen.force, "Regenerate into an existing dataset directory");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", tr.config, "key = value config file");
  train_cmd->add_option("--data", tr.data, "Dataset directory")->required();
  train_cmd->add_option("--out", tr.out, "Run directory (default $DEPTHSEG_OUT_ROOT/train)");
  train_cmd->add_option("--set", tr.overrides, "Config override key=value (repeatable)");
  train_cmd->add_option("--steps", tr.steps, "Override train.total_steps");
  train_cmd->add_option("--seed", tr.seed, "Override train.seed");
  train_cmd->add_option("--ablation", tr.ablation, "Apply an ablation variant");
  train_cmd->add_option("--resume", tr.resume, "Continue from a checkpoint");
  train_cmd->add_option("--stop-at", tr.stop_at, "Stop after this many steps (checkpoint written)");
  train_cmd->add_flag("--quiet", tr.quiet, "No per-step progress");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset directory")->required();
  eval_cmd->add_option("--split", ev.split, "train or val");
  eval_cmd->add_option("--out", ev.out, "Report file (a .table file is written next to it)");

  AblateArgs ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate every ablation variant");
  ablate_cmd->add_option("--config", ab.config, "Base config file");
  ablate_cmd->add_option("--data", ab.data, "Dataset directory")->required();
  ablate_cmd->add_option("--out", ab.out, "Output directory (default $DEPTHSEG_OUT_ROOT/ablation)");
  ablate_cmd->add_option("--steps", ab.steps, "Generator steps per variant");
  ablate_cmd->add_option("--set", ab.overrides, "Config override key=value (repeatable)");
  ablate_cmd->add_flag("--quiet", ab.quiet, "No per-step progress");

  ExportArgs ex;
  auto* export_sub = app.add_subcommand("export", "Write prediction images and a loss-curve plot");
  export_sub->add_option("--checkpoint", ex.checkpoint, "Checkpoint file")->required();
  export_sub->add_option("--data", ex.data, "Dataset directory")->required();
  export_sub->add_option("--out", ex.out, "Output directory (default $DEPTHSEG_OUT_ROOT/export)");
  export_sub->add_option("--split", ex.split, "train or val");
  export_sub->add_option("--limit", ex.limit, "Samples to export (0 = all)")->check(CLI::NonNegativeNumber);
  export_sub->add_option("--log", ex.log, "log.records for the loss curve (default: the checkpoint's run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : DS_ERR_CONFIG;
  }

  try {
    if (*gen_cmd) gen_data(gen);
    else if (*train_cmd) train(tr);
    else if (*eval_cmd) eval(ev);
    else if (*ablate_cmd) ablate(ab);
    else if (*export_sub) export_cmd(ex);
  } catch (const Failure& f) {
    return f.status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return DS_ERR_INTERNAL;
  }
  return 0;
}
