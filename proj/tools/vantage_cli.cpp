// SPDX-License-Identifier: Apache-2.0
//
// vantage command-line runner:
//   simulate --config scenario.json --out DIR     synthetic dataset
//   run      --config run.json --out DIR          full pipeline
//   ablate   --suite suite.json --out DIR         batch of pipeline runs
//   evaluate --est est.tum --ref ref.tum          ATE / drift of a trajectory

#include <exception>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "vantage/eval/pipeline.hpp"
#include "vantage/io/format.hpp"
#include "vantage/io/tum.hpp"
#include "vantage/sim/dataset_io.hpp"

namespace {

constexpr int kExitConfigError = 1;
constexpr int kExitIoError = 2;
constexpr int kExitPipelineError = 3;

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const auto config = vantage::sim::load_scenario(config_path);
  const auto dataset = vantage::sim::generate_dataset(config);
  vantage::sim::save_dataset(dataset, out_dir);
  std::cout << "dataset written to " << out_dir << " ("
            << dataset.ground_truth.size() << " poses, " << dataset.odometry.size()
            << " odometry increments)\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  auto config = vantage::eval::load_run_config(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  const auto result = vantage::eval::run_pipeline(config);
  const auto& r = result.report;
  if (!r.failure_stage.empty()) {
    std::cerr << "pipeline failed at " << r.failure_stage << "\n";
    return kExitPipelineError;
  }
  std::cout << "ate_rmse_m=" << vantage::io::g9(r.ate_rmse_m)
            << " drift_pct=" << vantage::io::g9(r.drift_pct)
            << " length_m=" << vantage::io::g9(r.trajectory_length_m)
            << " loops=" << r.loops_accepted << "/" << r.loop_candidates;
  if (r.reconstruction_rmse_m) {
    std::cout << " recon_rmse_m=" << vantage::io::g9(*r.reconstruction_rmse_m);
  }
  std::cout << " runtime_s=" << vantage::io::g9(r.runtime_s) << "\n";
  return 0;
}

int cmd_ablate(const std::string& suite_path, const std::string& out_dir) {
  const auto runs = vantage::eval::load_ablation_suite(suite_path);
  const auto rows = vantage::eval::run_ablation(runs, out_dir);
  for (const auto& row : rows) {
    std::cout << row.scenario << ": ate_rmse_m=" << vantage::io::g9(row.ate_rmse_m)
              << " drift_pct=" << vantage::io::g9(row.drift_pct) << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& est_path, const std::string& ref_path) {
  const auto est = vantage::io::load_tum(est_path);
  const auto ref = vantage::io::load_tum(ref_path);
  const auto aligned = vantage::eval::align_trajectories(est, ref);
  const double rmse = vantage::eval::ate_rmse(aligned.aligned_estimate, ref);
  const double length = ref.path_length();
  std::cout << "ate_rmse_m=" << vantage::io::g9(rmse)
            << " drift_pct=" << vantage::io::g9(vantage::eval::drift_percent(rmse, length))
            << " length_m=" << vantage::io::g9(length) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-camera visual-inertial SLAM estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite_path, est_path, ref_path;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset");
  simulate->add_option("--config", config_path, "scenario.json")->required();
  simulate->add_option("--out", out_dir, "output directory")->required();

  auto* run = app.add_subcommand("run", "Run the full pipeline");
  run->add_option("--config", config_path, "run.json")->required();
  run->add_option("--out", out_dir, "output directory");

  auto* ablate = app.add_subcommand("ablate", "Run an ablation suite");
  ablate->add_option("--suite", suite_path, "suite.json")->required();
  ablate->add_option("--out", out_dir, "output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score an estimate against a reference");
  evaluate->add_option("--est", est_path, "estimated trajectory (TUM)")->required();
  evaluate->add_option("--ref", ref_path, "reference trajectory (TUM)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (ablate->parsed()) return cmd_ablate(suite_path, out_dir);
    if (evaluate->parsed()) return cmd_evaluate(est_path, ref_path);
  } catch (const vantage::sim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const vantage::io::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipelineError;
  }
  return 0;
}
