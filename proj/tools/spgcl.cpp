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


// spgcl: command-line entry point for training, ablations, robustness and
// p/q sweeps, gradient checking and view export.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spgcl/error.hpp"
#include "spgcl/experiment.hpp"

namespace {

int fail(const std::string& code, const std::string& message) {
  const nlohmann::json record = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << record.dump() << "\n";
  return 1;
}

void print_mode_rows(const std::string& label, const spgcl::MultiRunResult& r) {
  std::printf("%-16s mean=%.4f std=%.4f\n", label.c_str(), r.mean_test_acc, r.std_test_acc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-perturbation graph contrastive learning"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", overrides, "Override a config key, e.g. train.lr=0.005")
        ->allow_extra_args(false);
    cmd->add_option("--out", out_dir, "Output directory (overrides the config)");
  };
  auto* train = app.add_subcommand("train", "Train over `runs` seeds; write metrics and curves");
  auto* ablate = app.add_subcommand("ablate", "Compare all perturbation modes with shared seeds");
  auto* robust = app.add_subcommand("robustness", "Accuracy under random edge removal, SPGCL vs GCN");
  auto* grid = app.add_subcommand("pq-grid", "Accuracy over the p x q grid");
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  auto* augment = app.add_subcommand("augment", "Write one perturbed view as a dataset");
  for (auto* cmd : {train, ablate, robust, grid, gradcheck, augment}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what());
  }

  try {
    spgcl::ExperimentConfig cfg = spgcl::load_config(config_path, overrides);
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    if (train->parsed()) {
      const auto r = spgcl::cmd_train(cfg);
      for (std::size_t i = 0; i < r.runs.size(); ++i) {
        std::printf("run %zu seed=%llu test_acc=%.4f best_epoch=%zu\n", i,
                    static_cast<unsigned long long>(r.runs[i].seed), r.runs[i].test_acc,
                    r.runs[i].best_epoch);
      }
      std::printf("mean_test_acc=%.4f std=%.4f -> %s\n", r.mean_test_acc, r.std_test_acc,
                  cfg.out_dir.c_str());
    } else if (ablate->parsed()) {
      for (const auto& row : spgcl::cmd_ablate(cfg)) print_mode_rows(row.method, row.result);
    } else if (robust->parsed()) {
      for (const auto& row : spgcl::cmd_robustness(cfg)) {
        print_mode_rows(row.method + "@" + std::to_string(row.ratio), row.result);
      }
    } else if (grid->parsed()) {
      for (const auto& c : spgcl::cmd_pq_grid(cfg)) {
        std::printf("p=%-8g q=%-8g mean=%.4f\n", c.p, c.q, c.result.mean_test_acc);
      }
    } else if (gradcheck->parsed()) {
      const auto report = spgcl::cmd_gradcheck(cfg);
      std::fputs(report.format().c_str(), stdout);
      return report.passed() ? 0 : 2;
    } else if (augment->parsed()) {
      const auto view = spgcl::cmd_augment(cfg);
      std::printf("view edges=%zu removed=%zu added=%zu -> %s\n", view.graph.n_edges(),
                  view.removed.size(), view.added.size(), cfg.out_dir.c_str());
    }
  } catch (const spgcl::Error& e) {
    return fail(std::string(spgcl::error_code_name(e.code())), e.what());
  } catch (const std::exception& e) {
    return fail("InternalError", e.what());
  }
  return 0;
}
