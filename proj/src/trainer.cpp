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


#include "spgcl/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>

#include "spgcl/error.hpp"

namespace spgcl {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error(ErrorCode::kInvalidConfig, "lr must be >= 0");
  if (!(weight_decay >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "weight_decay must be >= 0");
  if (runs == 0) throw Error(ErrorCode::kInvalidConfig, "runs must be >= 1");
  if (view_refresh == 0) throw Error(ErrorCode::kInvalidConfig, "view_refresh must be >= 1");
  if (patience == 0) throw Error(ErrorCode::kInvalidConfig, "patience must be >= 1");
  if (layers == 0) throw Error(ErrorCode::kInvalidConfig, "layers must be >= 1");
  if (hidden == 0) throw Error(ErrorCode::kInvalidConfig, "hidden must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "dropout must lie in [0, 1)");
  }
  plan.validate();
  loss_weights.validate();
}

TrainState TrainState::fresh(GcnParams params) {
  TrainState s;
  for (const auto& w : params.weights) {
    s.adam_m.emplace_back(w.rows(), w.cols());
    s.adam_v.emplace_back(w.rows(), w.cols());
  }
  s.best_params = params;
  s.params = std::move(params);
  return s;
}

TrainingData TrainingData::prepare(const DatasetBundle& bundle) {
  TrainingData d;
  d.bundle = &bundle;
  d.norm_adj = std::make_shared<const SparseMatrix>(normalize_adjacency(bundle.graph));
  return d;
}

LossBreakdown train_step(TrainState& state, const TrainingData& data, const PerturbedView* view,
                         const FeatureMatrix* x_view, const TrainConfig& cfg) {
  const DatasetBundle& b = *data.bundle;
  const bool contrastive = cfg.uses_view();
  if (contrastive && view == nullptr) {
    throw Error(ErrorCode::kInvalidConfig, "contrastive loss requires a perturbed view");
  }
  if (view != nullptr && view->graph.n_nodes() != b.graph.n_nodes()) {
    throw Error(ErrorCode::kDimensionMismatch, "view node count differs from the graph");
  }

  ad::Tape tape;
  const BoundParams bound = bind_params(tape, state.params);
  SeededRng dropout_rng = SeededRng::derive(cfg.seed, StreamPurpose::kDropout, state.step);
  EncoderOptions opts;
  opts.dropout = cfg.dropout;
  opts.dropout_rng = cfg.dropout > 0.0 ? &dropout_rng : nullptr;

  const ad::Var x = tape.constant(b.features);
  const ad::Var projected = project_input(tape, bound, x, opts);
  const LayerEmbeddings raw = propagate(tape, bound, data.norm_adj, projected, opts);

  LossBreakdown out;
  const ad::Var task = task_loss(tape, raw.final_layer(), b.labels);
  ad::Var infonce{};
  ad::Var consistency{};
  if (contrastive) {
    const auto view_adj = std::make_shared<const SparseMatrix>(normalize_adjacency(view->graph));
    // Same features and no dropout: the input projection is shared.
    ad::Var pert_projected = projected;
    if (x_view != nullptr || cfg.dropout > 0.0) {
      const ad::Var xv = x_view != nullptr ? tape.constant(*x_view) : x;
      pert_projected = project_input(tape, bound, xv, opts);
    }
    const LayerEmbeddings pert = propagate(tape, bound, view_adj, pert_projected, opts);
    infonce = infonce_loss(tape, pert, raw, cfg.loss_weights);
    consistency = consistency_loss(tape, pert.final_layer(), raw.final_layer(),
                                   cfg.loss_weights.normalize_consistency);
    out.infonce = tape.scalar(infonce);
    out.consistency = tape.scalar(consistency);
  }
  const ad::Var total = total_loss(tape, task, infonce, consistency, cfg.loss_weights);
  out.task = tape.scalar(task);
  out.total = tape.scalar(total);

  tape.backward(total);
  const std::vector<Matrix> grads = param_grads(tape, bound);

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(kAdamBeta1, t);
  const double bias2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t l = 0; l < grads.size(); ++l) {
    auto& w = state.params.weights[l].values();
    auto& m = state.adam_m[l].values();
    auto& v = state.adam_v[l].values();
    const auto& g = grads[l].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      w[i] -= cfg.lr * (m_hat / (std::sqrt(v_hat) + kAdamEps) + cfg.weight_decay * w[i]);
    }
  }
  for (const auto& w : state.params.weights) {
    if (!w.all_finite()) throw Error(ErrorCode::kNonFiniteValue, "weights diverged");
  }
  return out;
}

double accuracy_from_logits(const Matrix& logits, const LabelSet& labels,
                            std::span<const NodeId> mask) {
  if (mask.empty()) throw Error(ErrorCode::kEmptyMask, "evaluation mask is empty");
  std::size_t correct = 0;
  for (NodeId v : mask) {
    const auto row = logits.row(v);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels.labels[v]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

double evaluate(const GcnParams& params, const TrainingData& data, std::span<const NodeId> mask) {
  if (mask.empty()) throw Error(ErrorCode::kEmptyMask, "evaluation mask is empty");
  const Matrix logits = predict_logits(params, *data.norm_adj, data.bundle->features);
  return accuracy_from_logits(logits, data.bundle->labels, mask);
}

RunResult fit(const DatasetBundle& bundle, const TrainConfig& cfg, std::size_t run_index) {
  cfg.validate();
  if (bundle.labels.val.empty() || bundle.labels.test.empty()) {
    throw Error(ErrorCode::kEmptyMask, "validation and test masks must be nonempty");
  }
  const TrainingData data = TrainingData::prepare(bundle);
  const std::uint64_t run_seed = cfg.seed + run_index;
  TrainConfig run_cfg = cfg;
  run_cfg.seed = run_seed;

  std::vector<std::size_t> dims{bundle.features.cols()};
  for (std::size_t l = 0; l + 1 < cfg.layers; ++l) dims.push_back(cfg.hidden);
  dims.push_back(bundle.labels.num_classes);
  SeededRng init_rng = SeededRng::derive(run_seed, StreamPurpose::kWeightInit);
  TrainState state = TrainState::fresh(init_params(dims, init_rng));

  RunResult result;
  result.seed = run_seed;
  std::optional<ViewResult> view;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.uses_view() && (!view || epoch % cfg.view_refresh == 0)) {
      PerturbationPlan plan = cfg.plan;
      plan.seed = SeededRng::derive_seed(run_seed, StreamPurpose::kEdgeDrop, epoch);
      view = make_view(bundle.graph, bundle.features, plan);
    }
    const PerturbedView* pv = view ? &view->view : nullptr;
    const FeatureMatrix* xv = view && view->features ? &*view->features : nullptr;
    const LossBreakdown losses = train_step(state, data, pv, xv, run_cfg);
    state.epoch = epoch + 1;

    const double val_acc = evaluate(state.params, data, bundle.labels.val);
    result.curve.push_back({epoch, losses, val_acc});
    result.final_losses = losses;
    if (val_acc > state.best_val_acc) {
      state.best_val_acc = val_acc;
      state.best_epoch = epoch;
      state.best_params = state.params;
    } else if (epoch - state.best_epoch >= cfg.patience) {
      break;
    }
  }

  result.epochs_run = state.epoch;
  result.best_epoch = state.best_epoch;
  result.best_val_acc = state.best_val_acc < 0.0 ? evaluate(state.best_params, data, bundle.labels.val)
                                                  : state.best_val_acc;
  result.test_acc = evaluate(state.best_params, data, bundle.labels.test);
  result.embeddings = predict_logits(state.best_params, *data.norm_adj, bundle.features);
  result.best_params = std::move(state.best_params);
  return result;
}

void summarize(MultiRunResult& result) {
  const auto n = static_cast<double>(result.runs.size());
  double sum = 0.0;
  for (const auto& r : result.runs) sum += r.test_acc;
  result.mean_test_acc = n > 0 ? sum / n : 0.0;
  double sq = 0.0;
  for (const auto& r : result.runs) sq += (r.test_acc - result.mean_test_acc) * (r.test_acc - result.mean_test_acc);
  result.std_test_acc = n > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  result.best_run = 0;
  for (std::size_t i = 1; i < result.runs.size(); ++i) {
    if (result.runs[i].test_acc > result.runs[result.best_run].test_acc) result.best_run = i;
  }
}

MultiRunResult fit_runs(const DatasetBundle& bundle, const TrainConfig& cfg, std::size_t threads) {
  cfg.validate();
  MultiRunResult out;
  out.runs.resize(cfg.runs);
  threads = std::clamp<std::size_t>(threads, 1, cfg.runs);
  if (threads == 1) {
    for (std::size_t r = 0; r < cfg.runs; ++r) out.runs[r] = fit(bundle, cfg, r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < cfg.runs; r = next++) {
          try {
            out.runs[r] = fit(bundle, cfg, r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }
  summarize(out);
  return out;
}

}  // namespace spgcl
