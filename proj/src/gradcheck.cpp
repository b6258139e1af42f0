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


#include "spgcl/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "spgcl/dataset.hpp"
#include "spgcl/encoder.hpp"
#include "spgcl/error.hpp"
#include "spgcl/losses.hpp"
#include "spgcl/perturbation.hpp"
#include "spgcl/rng.hpp"

namespace spgcl {

namespace {

struct Evaluation {
  double loss = 0.0;
  std::vector<bool> relu_pattern;
};

std::vector<bool> relu_pattern(const ad::Tape& tape) {
  std::vector<bool> bits;
  for (std::size_t i = 0; i < tape.size(); ++i) {
    const ad::Var v{i};
    if (tape.op_name(v) != "relu") continue;
    // The ReLU input is what decides the kink; its output is > 0 exactly
    // where the input is.
    for (double x : tape.value(v).values()) bits.push_back(x > 0.0);
  }
  return bits;
}

Evaluation evaluate_at(const LossBuilder& build, const std::vector<Matrix>& inputs) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  vars.reserve(inputs.size());
  for (const auto& m : inputs) vars.push_back(tape.constant(m));
  const ad::Var loss = build(tape, vars);
  return {tape.scalar(loss), relu_pattern(tape)};
}

// FNV-1a; std::hash is not stable across standard libraries.
std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, SeededRng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.values()) x = scale * rng.normal();
  return m;
}

}  // namespace

bool GradcheckReport::passed() const noexcept {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

std::string GradcheckReport::format() const {
  std::ostringstream os;
  char line[256];
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-22s coords=%-3zu skipped=%-3zu max_rel_err=%.3e  %s\n",
                  c.name.c_str(), c.coords_checked, c.coords_skipped, c.max_rel_error,
                  c.passed() ? "PASS" : "FAIL");
    os << line;
    for (const auto& f : c.failures) {
      std::snprintf(line, sizeof line,
                    "    input=%zu index=%zu analytic=%.10e numeric=%.10e rel_err=%.3e\n", f.input,
                    f.index, f.analytic, f.numeric, f.rel_error);
      os << line;
    }
  }
  std::snprintf(line, sizeof line, "%s (%.2f s)\n", passed() ? "gradcheck PASSED" : "gradcheck FAILED",
                seconds);
  os << line;
  return os.str();
}

CheckResult check_gradient(const std::string& name, const LossBuilder& build,
                           const std::vector<Matrix>& inputs, const GradcheckConfig& cfg) {
  CheckResult result;
  result.name = name;

  ad::Tape tape;
  if (!cfg.fault_op.empty()) tape.inject_gradient_fault(cfg.fault_op, cfg.fault_factor);
  std::vector<ad::Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.parameter(m));
  const ad::Var loss = build(tape, vars);
  tape.backward(loss);
  std::vector<Matrix> grads;
  for (auto v : vars) grads.push_back(tape.grad(v));
  const std::vector<bool> base_pattern = relu_pattern(tape);

  // Flat coordinate space over all inputs.
  std::vector<std::size_t> offsets{0};
  for (const auto& m : inputs) offsets.push_back(offsets.back() + m.size());
  const std::size_t total = offsets.back();
  SeededRng rng = SeededRng::derive(cfg.seed, StreamPurpose::kGradcheck, name_hash(name));
  const auto candidates = rng.sample_without_replacement(total, std::min(total, 4 * cfg.coords));

  std::vector<Matrix> work = inputs;
  for (std::uint64_t flat : candidates) {
    if (result.coords_checked >= cfg.coords) break;
    const auto k = static_cast<std::size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), flat) - offsets.begin() - 1);
    const std::size_t idx = flat - offsets[k];
    double& x = work[k].values()[idx];
    const double orig = x;
    x = orig + cfg.h;
    const Evaluation plus = evaluate_at(build, work);
    x = orig - cfg.h;
    const Evaluation minus = evaluate_at(build, work);
    x = orig;
    if (plus.relu_pattern != base_pattern || minus.relu_pattern != base_pattern) {
      ++result.coords_skipped;
      continue;
    }
    const double numeric = (plus.loss - minus.loss) / (2.0 * cfg.h);
    const double analytic = grads[k].values()[idx];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), cfg.denom_floor});
    const double rel = std::abs(analytic - numeric) / denom;
    result.max_rel_error = std::max(result.max_rel_error, rel);
    ++result.coords_checked;
    if (!(rel <= cfg.tolerance)) result.failures.push_back({k, idx, analytic, numeric, rel});
  }
  return result;
}

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  GradcheckReport report;
  SeededRng rng = SeededRng::derive(cfg.seed, StreamPurpose::kGradcheck);

  // Primitives: each output is contracted with a fixed random matrix so the
  // check exercises the full Jacobian-vector product.
  const auto project = [](ad::Tape& t, ad::Var y, const Matrix& r) { return ad::inner(t, y, r); };

  {
    const Matrix r = random_matrix(4, 5, rng);
    report.checks.push_back(check_gradient(
        "matmul",
        [&](ad::Tape& t, const auto& v) { return project(t, ad::matmul(t, v[0], v[1]), r); },
        {random_matrix(4, 3, rng), random_matrix(3, 5, rng)}, cfg));
  }

  SbmSpec spec;
  spec.blocks = {5, 5};
  spec.p_intra = 0.8;
  spec.p_inter = 0.1;
  spec.feature_dim = 6;
  spec.train_fraction = 0.4;
  spec.val_fraction = 0.2;
  spec.seed = SeededRng::derive_seed(cfg.seed, StreamPurpose::kSbm);
  const DatasetBundle sbm = generate_sbm(spec);
  const auto norm = std::make_shared<const SparseMatrix>(normalize_adjacency(sbm.graph));
  const std::size_t n = sbm.graph.n_nodes();

  {
    const Matrix r = random_matrix(n, 3, rng);
    report.checks.push_back(check_gradient(
        "spmm", [&](ad::Tape& t, const auto& v) { return project(t, ad::spmm(t, norm, v[0]), r); },
        {random_matrix(n, 3, rng)}, cfg));
  }
  {
    const Matrix r = random_matrix(6, 4, rng);
    report.checks.push_back(check_gradient(
        "relu", [&](ad::Tape& t, const auto& v) { return project(t, ad::relu(t, v[0]), r); },
        {random_matrix(6, 4, rng)}, cfg));
  }
  {
    const Matrix r = random_matrix(5, 4, rng);
    report.checks.push_back(check_gradient(
        "row_normalize",
        [&](ad::Tape& t, const auto& v) { return project(t, ad::row_normalize(t, v[0]), r); },
        {random_matrix(5, 4, rng)}, cfg));
  }
  {
    const Matrix r = random_matrix(3, 4, rng);
    report.checks.push_back(check_gradient(
        "add",
        [&](ad::Tape& t, const auto& v) { return project(t, ad::add(t, v[0], v[1]), r); },
        {random_matrix(3, 4, rng), random_matrix(3, 4, rng)}, cfg));
    report.checks.push_back(check_gradient(
        "scale", [&](ad::Tape& t, const auto& v) { return project(t, ad::scale(t, v[0], -1.7), r); },
        {random_matrix(3, 4, rng)}, cfg));
  }
  {
    const Matrix r = random_matrix(6, 5, rng);
    const std::uint64_t mask_seed = rng.next_u64();
    report.checks.push_back(check_gradient(
        "dropout",
        [&](ad::Tape& t, const auto& v) {
          SeededRng mask_rng(mask_seed);  // same mask at every evaluation
          return project(t, ad::dropout(t, v[0], 0.3, mask_rng), r);
        },
        {random_matrix(6, 5, rng)}, cfg));
  }
  report.checks.push_back(check_gradient(
      "frobenius_sq", [](ad::Tape& t, const auto& v) { return ad::frobenius_sq(t, v[0]); },
      {random_matrix(4, 4, rng)}, cfg));
  {
    std::vector<int> labels(8);
    for (int& y : labels) y = static_cast<int>(rng.below(3));
    const std::vector<NodeId> nodes{0, 2, 3, 5, 7};
    report.checks.push_back(check_gradient(
        "cross_entropy",
        [&](ad::Tape& t, const auto& v) { return ad::cross_entropy(t, v[0], labels, nodes); },
        {random_matrix(8, 3, rng, 2.0)}, cfg));
  }
  report.checks.push_back(check_gradient(
      "info_nce", [](ad::Tape& t, const auto& v) { return ad::info_nce(t, v[0], v[1], 0.5); },
      {random_matrix(6, 4, rng, 0.5), random_matrix(6, 4, rng, 0.5)}, cfg));
  report.checks.push_back(check_gradient(
      "gram_gap", [](ad::Tape& t, const auto& v) { return ad::gram_gap(t, v[0], v[1]); },
      {random_matrix(6, 3, rng), random_matrix(6, 3, rng)}, cfg));

  // Composed objectives on a two-layer GCN over the SBM and one perturbed view.
  PerturbationPlan plan;
  plan.p = 0.1;
  plan.q = 0.1;
  plan.svd.rank = 4;
  plan.seed = SeededRng::derive_seed(cfg.seed, StreamPurpose::kEdgeDrop);
  const ViewResult view = make_view(sbm.graph, sbm.features, plan);
  const auto view_norm = std::make_shared<const SparseMatrix>(normalize_adjacency(view.view.graph));
  SeededRng init_rng = SeededRng::derive(cfg.seed, StreamPurpose::kWeightInit);
  const GcnParams params = init_params({spec.feature_dim, 8, 2}, init_rng);

  LossWeights weights;
  const auto views = [&](ad::Tape& t, const std::vector<ad::Var>& w) {
    const BoundParams bound{w};
    const ad::Var x = t.constant(sbm.features);
    const ad::Var projected = project_input(t, bound, x);
    return std::pair{propagate(t, bound, norm, projected),
                     propagate(t, bound, view_norm, projected)};
  };
  report.checks.push_back(check_gradient(
      "task_loss",
      [&](ad::Tape& t, const auto& w) { return task_loss(t, views(t, w).first.final_layer(), sbm.labels); },
      params.weights, cfg));
  report.checks.push_back(check_gradient(
      "infonce_loss",
      [&](ad::Tape& t, const auto& w) {
        const auto [raw, pert] = views(t, w);
        return infonce_loss(t, pert, raw, weights);
      },
      params.weights, cfg));
  report.checks.push_back(check_gradient(
      "consistency_loss",
      [&](ad::Tape& t, const auto& w) {
        const auto [raw, pert] = views(t, w);
        return consistency_loss(t, pert.final_layer(), raw.final_layer());
      },
      params.weights, cfg));
  report.checks.push_back(check_gradient(
      "total_loss",
      [&](ad::Tape& t, const auto& w) {
        const auto [raw, pert] = views(t, w);
        const ad::Var task = task_loss(t, raw.final_layer(), sbm.labels);
        const ad::Var inf = infonce_loss(t, pert, raw, weights);
        const ad::Var cons = consistency_loss(t, pert.final_layer(), raw.final_layer());
        return total_loss(t, task, inf, cons, weights);
      },
      params.weights, cfg));

  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace spgcl
