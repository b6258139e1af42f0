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


#include "spgcl/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spgcl/checkpoint.hpp"
#include "spgcl/error.hpp"

#ifndef SPGCL_GIT_HASH
#define SPGCL_GIT_HASH "unknown"
#endif

namespace spgcl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& file, const std::string& text) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + file.string());
}

json losses_json(const LossBreakdown& l) {
  return {{"task", l.task}, {"infonce", l.infonce}, {"consistency", l.consistency}, {"total", l.total}};
}

json runs_json(const MultiRunResult& r) {
  json runs = json::array();
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const RunResult& run = r.runs[i];
    runs.push_back({{"run", i},
                    {"seed", run.seed},
                    {"test_acc", run.test_acc},
                    {"best_val_acc", run.best_val_acc},
                    {"best_epoch", run.best_epoch},
                    {"epochs_run", run.epochs_run},
                    {"final_losses", losses_json(run.final_losses)}});
  }
  return runs;
}

/// method,mean_test_acc,std_test_acc,acc_run0,... header suffix.
std::string acc_columns(std::size_t runs) {
  std::string s = "mean_test_acc,std_test_acc";
  for (std::size_t r = 0; r < runs; ++r) s += ",acc_run" + std::to_string(r);
  return s;
}

std::string acc_values(const MultiRunResult& r) {
  std::string s = num(r.mean_test_acc) + "," + num(r.std_test_acc);
  for (const auto& run : r.runs) s += "," + num(run.test_acc);
  return s;
}

}  // namespace

DatasetBundle load_bundle(const ExperimentConfig& cfg) {
  if (cfg.sbm) return generate_sbm(*cfg.sbm);
  return load_dataset(cfg.dataset_path);
}

std::size_t thread_cap() {
  const char* env = std::getenv("SPGCL_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  std::size_t value = 0;
  const auto res = std::from_chars(env, env + std::char_traits<char>::length(env), value);
  if (res.ec != std::errc{} || value == 0) return 1;
  return value;
}

std::string_view build_git_hash() { return SPGCL_GIT_HASH; }

std::string csv_metadata(const ExperimentConfig& cfg) {
  return "# git_hash=" + std::string(build_git_hash()) + " config_digest=" + config_digest(cfg) +
         " seed=" + std::to_string(cfg.train.seed) + "\n";
}

MultiRunResult cmd_train(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const DatasetBundle bundle = load_bundle(cfg);
  MultiRunResult result = fit_runs(bundle, cfg.train, thread_cap());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path out = cfg.out_dir;
  ExperimentConfig recorded = cfg;  // results do not depend on where they are written
  recorded.out_dir.clear();
  const json metrics = {{"schema_version", kMetricsSchemaVersion},
                        {"command", "train"},
                        {"git_hash", std::string(build_git_hash())},
                        {"config_digest", config_digest(cfg)},
                        {"config", json::parse(config_to_json(recorded))},
                        {"dataset", bundle.name},
                        {"runs", runs_json(result)},
                        {"mean_test_acc", result.mean_test_acc},
                        {"std_test_acc", result.std_test_acc},
                        {"best_run", result.best_run},
                        {"wall_time_s", wall}};
  write_text(out / "metrics.json", metrics.dump(2) + "\n");

  std::string curve = csv_metadata(cfg) + "run,epoch,task,infonce,consistency,total,val_acc\n";
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    for (const EpochRecord& e : result.runs[r].curve) {
      curve += std::to_string(r) + "," + std::to_string(e.epoch) + "," + num(e.losses.task) + "," +
               num(e.losses.infonce) + "," + num(e.losses.consistency) + "," +
               num(e.losses.total) + "," + num(e.val_acc) + "\n";
    }
  }
  write_text(out / "loss_curve.csv", curve);

  const Matrix& emb = result.runs[result.best_run].embeddings;
  std::string e = csv_metadata(cfg) + "node,label";
  for (std::size_t c = 0; c < emb.cols(); ++c) e += ",z" + std::to_string(c);
  e += "\n";
  for (std::size_t v = 0; v < emb.rows(); ++v) {
    e += std::to_string(v) + "," + std::to_string(bundle.labels.labels[v]);
    for (double x : emb.row(v)) e += "," + num(x);
    e += "\n";
  }
  write_text(out / "embeddings.csv", e);

  const RunResult& best = result.runs[result.best_run];
  save_checkpoint(out / "best_params.ckpt", best.best_params, {best.seed, best.best_epoch});
  return result;
}

std::vector<ModeRow> cmd_ablate(const ExperimentConfig& cfg) {
  const DatasetBundle bundle = load_bundle(cfg);
  std::vector<ModeRow> rows;
  for (PerturbationMode mode : kAllModes) {
    TrainConfig t = cfg.train;
    t.plan.mode = mode;
    rows.push_back({std::string(mode_name(mode)), fit_runs(bundle, t, thread_cap())});
  }
  std::string csv = csv_metadata(cfg) + "method," + acc_columns(cfg.train.runs) + "\n";
  for (const auto& row : rows) csv += row.method + "," + acc_values(row.result) + "\n";
  write_text(fs::path(cfg.out_dir) / "ablation.csv", csv);
  return rows;
}

std::vector<RobustnessRow> cmd_robustness(const ExperimentConfig& cfg) {
  const DatasetBundle clean = load_bundle(cfg);
  const TrainConfig gcn = plain_gcn_config(cfg.train);
  std::vector<RobustnessRow> rows;
  for (std::size_t ri = 0; ri < cfg.robustness_ratios.size(); ++ri) {
    const double ratio = cfg.robustness_ratios[ri];
    RobustnessRow spgcl_row{ratio, "spgcl", {}};
    RobustnessRow gcn_row{ratio, "gcn", {}};
    for (std::size_t r = 0; r < cfg.train.runs; ++r) {
      // One corrupted instance per seed, shared by both methods.
      SeededRng rng = SeededRng::derive(cfg.train.seed + r, StreamPurpose::kCorruption);
      DatasetBundle noisy = clean;
      noisy.graph = inject_noise(clean.graph, ratio, rng);
      spgcl_row.result.runs.push_back(fit(noisy, cfg.train, r));
      gcn_row.result.runs.push_back(fit(noisy, gcn, r));
    }
    summarize(spgcl_row.result);
    summarize(gcn_row.result);
    rows.push_back(std::move(spgcl_row));
    rows.push_back(std::move(gcn_row));
  }
  std::string csv = csv_metadata(cfg) + "ratio,method," + acc_columns(cfg.train.runs) + "\n";
  for (const auto& row : rows) {
    csv += num(row.ratio) + "," + row.method + "," + acc_values(row.result) + "\n";
  }
  write_text(fs::path(cfg.out_dir) / "robustness.csv", csv);
  return rows;
}

std::vector<GridCell> cmd_pq_grid(const ExperimentConfig& cfg) {
  const DatasetBundle bundle = load_bundle(cfg);
  std::vector<GridCell> cells;
  for (double p : cfg.grid_p) {
    for (double q : cfg.grid_q) {
      TrainConfig t = cfg.train;
      t.plan.p = p;
      t.plan.q = q;
      cells.push_back({p, q, fit_runs(bundle, t, thread_cap())});
    }
  }
  std::string csv = csv_metadata(cfg) + "p,q," + acc_columns(cfg.train.runs) + "\n";
  for (const auto& c : cells) csv += num(c.p) + "," + num(c.q) + "," + acc_values(c.result) + "\n";
  write_text(fs::path(cfg.out_dir) / "pq_grid.csv", csv);
  return cells;
}

GradcheckReport cmd_gradcheck(const ExperimentConfig& cfg) {
  GradcheckReport report = run_gradcheck(cfg.gradcheck);
  write_text(fs::path(cfg.out_dir) / "gradcheck.txt", report.format());
  return report;
}

PerturbedView cmd_augment(const ExperimentConfig& cfg) {
  const DatasetBundle bundle = load_bundle(cfg);
  PerturbationPlan plan = cfg.train.plan;
  plan.seed = SeededRng::derive_seed(cfg.train.seed, StreamPurpose::kEdgeDrop, 0);
  ViewResult view = make_view(bundle.graph, bundle.features, plan);

  DatasetBundle out;
  out.name = bundle.name + "-augmented";
  out.graph = view.view.graph;
  out.features = view.features ? *view.features : bundle.features;
  out.labels = bundle.labels;
  save_dataset(out, cfg.out_dir, /*always_write_weights=*/true);

  const json summary = {{"schema_version", kMetricsSchemaVersion},
                        {"command", "augment"},
                        {"git_hash", std::string(build_git_hash())},
                        {"config_digest", config_digest(cfg)},
                        {"mode", std::string(mode_name(plan.mode))},
                        {"original_edges", bundle.graph.n_edges()},
                        {"removed_edges", view.view.removed.size()},
                        {"added_edges", view.view.added.size()},
                        {"view_edges", view.view.graph.n_edges()}};
  write_text(fs::path(cfg.out_dir) / "augment.json", summary.dump(2) + "\n");
  return std::move(view.view);
}

double read_metrics_mean(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, file.string() + ": " + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"] != kMetricsSchemaVersion) {
    throw Error(ErrorCode::kParseError, file.string() + ": unsupported metrics schema_version");
  }
  return j.at("mean_test_acc").get<double>();
}

}  // namespace spgcl
