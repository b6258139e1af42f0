// Copyright 2026 The SPGCL Authors
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


#include "spgcl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "spgcl/error.hpp"

namespace spgcl {

using nlohmann::json;

namespace {

/// Reads keys out of one JSON object and rejects whatever was not read.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorCode::kInvalidConfig, where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "config key " + dotted(key) + " has the wrong type");
    }
  }

  /// Nested object, or nullptr when absent.
  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  [[nodiscard]] std::string dotted(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw Error(ErrorCode::kInvalidConfig, "unknown config key: " + dotted(key));
    }
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

SbmSpec parse_sbm(const json& j) {
  SbmSpec s;
  StrictObject o(j, "dataset.sbm");
  o.read("blocks", s.blocks);
  o.read("p_intra", s.p_intra);
  o.read("p_inter", s.p_inter);
  o.read("feature_dim", s.feature_dim);
  o.read("feature_signal", s.feature_signal);
  o.read("train_fraction", s.train_fraction);
  o.read("val_fraction", s.val_fraction);
  o.read("seed", s.seed);
  o.finish();
  return s;
}

json sbm_to_json(const SbmSpec& s) {
  return {{"blocks", s.blocks},
          {"p_intra", s.p_intra},
          {"p_inter", s.p_inter},
          {"feature_dim", s.feature_dim},
          {"feature_signal", s.feature_signal},
          {"train_fraction", s.train_fraction},
          {"val_fraction", s.val_fraction},
          {"seed", s.seed}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset_path.empty() == !sbm.has_value()) {
    throw Error(ErrorCode::kInvalidConfig, "exactly one of dataset.path and dataset.sbm is required");
  }
  if (sbm) sbm->validate();
  train.validate();
  for (double r : robustness_ratios) {
    if (!(r >= 0.0 && r < 0.5)) {
      throw Error(ErrorCode::kInvalidConfig, "robustness ratios must lie in [0, 0.5)");
    }
  }
  if (grid_p.empty() || grid_q.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "pq_grid lists must be nonempty");
  }
  if (gradcheck.coords == 0 || !(gradcheck.h > 0.0) || !(gradcheck.tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "gradcheck needs coords >= 1, h > 0, tolerance > 0");
  }
}

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  StrictObject top(root, "");

  bool have_dataset = false;
  if (const json* d = top.child("dataset")) {
    StrictObject o(*d, "dataset");
    o.read("path", cfg.dataset_path);
    if (const json* s = o.child("sbm")) cfg.sbm = parse_sbm(*s);
    o.finish();
    have_dataset = !cfg.dataset_path.empty() || cfg.sbm.has_value();
  }
  if (!have_dataset) cfg.sbm = SbmSpec{};

  TrainConfig& t = cfg.train;
  if (const json* j = top.child("train")) {
    StrictObject o(*j, "train");
    o.read("epochs", t.epochs);
    o.read("lr", t.lr);
    o.read("weight_decay", t.weight_decay);
    o.read("patience", t.patience);
    o.read("runs", t.runs);
    o.read("view_refresh", t.view_refresh);
    o.read("hidden", t.hidden);
    o.read("layers", t.layers);
    o.read("dropout", t.dropout);
    o.read("seed", t.seed);
    o.finish();
  }
  if (const json* j = top.child("plan")) {
    StrictObject o(*j, "plan");
    PerturbationPlan& p = t.plan;
    o.read("p", p.p);
    o.read("q", p.q);
    o.read("alpha", p.alpha);
    std::string mode(mode_name(p.mode));
    o.read("mode", mode);
    p.mode = parse_mode(mode);
    o.read("rank", p.svd.rank);
    o.read("oversampling", p.svd.oversampling);
    o.read("power_iters", p.svd.power_iters);
    o.read("node_noise_scale", p.node_noise_scale);
    o.finish();
  }
  if (const json* j = top.child("loss")) {
    StrictObject o(*j, "loss");
    LossWeights& w = t.loss_weights;
    o.read("beta", w.beta);
    o.read("gamma", w.gamma);
    o.read("tau", w.tau);
    o.read("normalize_consistency", w.normalize_consistency);
    o.read("symmetric_infonce", w.symmetric_infonce);
    o.finish();
  }
  top.read("out", cfg.out_dir);
  if (const json* j = top.child("robustness")) {
    StrictObject o(*j, "robustness");
    o.read("ratios", cfg.robustness_ratios);
    o.finish();
  }
  if (const json* j = top.child("pq_grid")) {
    StrictObject o(*j, "pq_grid");
    o.read("p", cfg.grid_p);
    o.read("q", cfg.grid_q);
    o.finish();
  }
  if (const json* j = top.child("gradcheck")) {
    StrictObject o(*j, "gradcheck");
    o.read("seed", cfg.gradcheck.seed);
    o.read("coords", cfg.gradcheck.coords);
    o.read("h", cfg.gradcheck.h);
    o.read("tolerance", cfg.gradcheck.tolerance);
    o.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

std::string apply_overrides(std::string_view json_text, const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(json_text.empty() ? std::string_view("{}") : json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  for (const std::string& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kInvalidConfig, "override must look like key=value: " + item);
    }
    const std::string key = item.substr(0, eq);
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (value.is_discarded()) value = raw;

    json* node = &root;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (part.empty()) throw Error(ErrorCode::kInvalidConfig, "malformed override key: " + key);
      if (!node->is_object()) {
        throw Error(ErrorCode::kInvalidConfig, "override path crosses a non-object: " + key);
      }
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      if (node->is_null()) *node = json::object();
      start = dot + 1;
    }
  }
  return root.dump();
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::string text = "{}";
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config(apply_overrides(text, overrides));
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  const TrainConfig& t = cfg.train;
  const PerturbationPlan& p = t.plan;
  const LossWeights& w = t.loss_weights;
  json dataset = json::object();
  if (cfg.sbm) {
    dataset["sbm"] = sbm_to_json(*cfg.sbm);
  } else {
    dataset["path"] = cfg.dataset_path;
  }
  const json root = {
      {"dataset", dataset},
      {"train",
       {{"epochs", t.epochs},
        {"lr", t.lr},
        {"weight_decay", t.weight_decay},
        {"patience", t.patience},
        {"runs", t.runs},
        {"view_refresh", t.view_refresh},
        {"hidden", t.hidden},
        {"layers", t.layers},
        {"dropout", t.dropout},
        {"seed", t.seed}}},
      {"plan",
       {{"p", p.p},
        {"q", p.q},
        {"alpha", p.alpha},
        {"mode", std::string(mode_name(p.mode))},
        {"rank", p.svd.rank},
        {"oversampling", p.svd.oversampling},
        {"power_iters", p.svd.power_iters},
        {"node_noise_scale", p.node_noise_scale}}},
      {"loss",
       {{"beta", w.beta},
        {"gamma", w.gamma},
        {"tau", w.tau},
        {"normalize_consistency", w.normalize_consistency},
        {"symmetric_infonce", w.symmetric_infonce}}},
      {"out", cfg.out_dir},
      {"robustness", {{"ratios", cfg.robustness_ratios}}},
      {"pq_grid", {{"p", cfg.grid_p}, {"q", cfg.grid_q}}},
      {"gradcheck",
       {{"seed", cfg.gradcheck.seed},
        {"coords", cfg.gradcheck.coords},
        {"h", cfg.gradcheck.h},
        {"tolerance", cfg.gradcheck.tolerance}}},
  };
  return root.dump(indent);
}

std::string config_digest(const ExperimentConfig& cfg) {
  // The output directory does not change results.
  ExperimentConfig copy = cfg;
  copy.out_dir.clear();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(copy)) h = (h ^ c) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TrainConfig plain_gcn_config(const TrainConfig& cfg) {
  TrainConfig out = cfg;
  out.loss_weights.beta = 0.0;
  out.loss_weights.gamma = 0.0;
  out.plan.mode = PerturbationMode::kEdgeOnly;
  out.plan.p = 0.0;
  out.plan.q = 0.0;
  return out;
}

}  // namespace spgcl
