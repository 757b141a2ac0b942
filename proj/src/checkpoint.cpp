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
#include <cstdio>
#include <filesystem>

#include "depthseg/errors.hpp"
#include "depthseg/training.hpp"

namespace fs = std::filesystem;

namespace depthseg {

namespace {

constexpr int kCheckpointVersion = 1;

// Manifest fields that must agree between a checkpoint and the data it is used with.
const char* const kDataKeys[] = {"num_classes", "ignore_id", "d_min", "d_max", "mean", "std", "height", "width"};

KeyValues with_prefix(const std::string& prefix, const KeyValues& kv) {
  KeyValues out;
  for (const auto& [k, v] : kv) out[prefix + k] = v;
  return out;
}

KeyValues strip_prefix(const std::string& prefix, const KeyValues& kv) {
  KeyValues out;
  for (const auto& [k, v] : kv) {
    if (k.compare(0, prefix.size(), prefix) == 0) out[k.substr(prefix.size())] = v;
  }
  return out;
}

torch::serialize::InputArchive open_archive(const std::string& path) {
  if (!fs::is_regular_file(path)) throw DataError("checkpoint not found: " + path);
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path);
  } catch (const c10::Error& e) {
    throw DataError("cannot read checkpoint " + path + ": " + e.what_without_backtrace());
  }
  return archive;
}

KeyValues read_manifest(torch::serialize::InputArchive& archive, const std::string& path) {
  c10::IValue value;
  if (!archive.try_read("manifest", value) || !value.isString()) {
    throw DataError("checkpoint " + path + " has no manifest record");
  }
  return parse_key_values(value.toStringRef(), path);
}

CheckpointInfo info_from_manifest(const KeyValues& kv, const std::string& path) {
  auto it = kv.find("format_version");
  if (it == kv.end() || it->second != std::to_string(kCheckpointVersion)) {
    throw DataError("checkpoint " + path + ": unsupported format version");
  }
  CheckpointInfo info;
  try {
    info.config = RunConfig::from_key_values(strip_prefix("config.", kv));
    KeyValues data = strip_prefix("data.", kv);
    data["format_version"] = "1";
    info.manifest = DatasetManifest::from_key_values(data, "");
    info.step = parse_int("step", kv.at("step"));
  } catch (const std::out_of_range&) {
    throw DataError("checkpoint " + path + ": manifest record incomplete");
  } catch (const ConfigError& e) {
    throw DataError("checkpoint " + path + ": " + e.what());
  }
  info.metrics = strip_prefix("metric.", kv);
  return info;
}

}  // namespace

void Trainer::save_checkpoint(const std::string& path, const KeyValues& metrics) const {
  KeyValues manifest = with_prefix("config.", cfg_.to_key_values());
  KeyValues data = manifest_.to_key_values();
  data.erase("format_version");
  for (const auto& [k, v] : with_prefix("data.", data)) manifest[k] = v;
  for (const auto& [k, v] : with_prefix("metric.", metrics)) manifest[k] = v;
  manifest["format_version"] = std::to_string(kCheckpointVersion);
  manifest["step"] = std::to_string(step_);
  manifest["seed"] = std::to_string(cfg_.train.seed);
  manifest["parameter_digest"] = parameter_digest(*net_);

  torch::serialize::OutputArchive archive;
  archive.write("manifest", c10::IValue(format_key_values(manifest)));
  torch::serialize::OutputArchive generator;
  net_->save(generator);
  archive.write("generator", generator);
  torch::serialize::OutputArchive gen_opt;
  gen_opt_->save(gen_opt);
  archive.write("optimizer.generator", gen_opt);
  for (size_t i = 0; i < critics_.size(); ++i) {
    torch::serialize::OutputArchive critic;
    critics_[i]->save(critic);
    archive.write("critic" + std::to_string(i), critic);
  }
  if (critic_opt_) {
    torch::serialize::OutputArchive critic_opt;
    critic_opt_->save(critic_opt);
    archive.write("optimizer.critic", critic_opt);
  }
  // Write-then-rename keeps the previous checkpoint intact if writing fails.
  const std::string tmp = path + ".tmp";
  archive.save_to(tmp);
  fs::rename(tmp, path);
}

void Trainer::load_checkpoint(const std::string& path) {
  auto archive = open_archive(path);
  const KeyValues kv = read_manifest(archive, path);
  const CheckpointInfo info = info_from_manifest(kv, path);
  const KeyValues stored = info.config.to_key_values(), current = cfg_.to_key_values();
  std::string diff;
  for (const auto& [k, v] : current) {
    auto it = stored.find(k);
    if (it == stored.end() || it->second != v) diff += (diff.empty() ? "" : ", ") + k;
  }
  if (!diff.empty()) throw ConfigError("checkpoint " + path + " was written with a different config: " + diff);
  const KeyValues data = info.manifest.to_key_values(), ours = manifest_.to_key_values();
  for (const char* key : kDataKeys) {
    if (data.at(key) != ours.at(key)) {
      throw ConfigError("checkpoint " + path + " does not match the dataset (" + key + ")");
    }
  }
  try {
    torch::serialize::InputArchive generator;
    archive.read("generator", generator);
    net_->load(generator);
    torch::serialize::InputArchive gen_opt;
    archive.read("optimizer.generator", gen_opt);
    gen_opt_->load(gen_opt);
    for (size_t i = 0; i < critics_.size(); ++i) {
      torch::serialize::InputArchive critic;
      archive.read("critic" + std::to_string(i), critic);
      critics_[i]->load(critic);
    }
    if (critic_opt_) {
      torch::serialize::InputArchive critic_opt;
      archive.read("optimizer.critic", critic_opt);
      critic_opt_->load(critic_opt);
    }
  } catch (const c10::Error& e) {
    throw DataError("checkpoint " + path + ": " + e.what_without_backtrace());
  }
  step_ = info.step;
}

CheckpointInfo read_checkpoint_info(const std::string& path) {
  auto archive = open_archive(path);
  return info_from_manifest(read_manifest(archive, path), path);
}

MultiTaskNet load_network(const std::string& path, CheckpointInfo* info_out) {
  auto archive = open_archive(path);
  const CheckpointInfo info = info_from_manifest(read_manifest(archive, path), path);
  auto gen = at::detail::createCPUGenerator(0);
  torch::Generator g(gen);
  MultiTaskNet net = build_network(resolve_net_config(info.config, info.manifest), g);
  try {
    torch::serialize::InputArchive generator;
    archive.read("generator", generator);
    net->load(generator);
  } catch (const c10::Error& e) {
    throw DataError("checkpoint " + path + ": " + e.what_without_backtrace());
  }
  net->eval();
  if (info_out) *info_out = info;
  return net;
}

std::string parameter_digest(const torch::nn::Module& module) {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& item : module.named_parameters(true)) {
    mix(item.key().data(), item.key().size());
    auto t = item.value().detach().contiguous();
    mix(t.data_ptr(), static_cast<size_t>(t.numel()) * t.element_size());
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace depthseg
