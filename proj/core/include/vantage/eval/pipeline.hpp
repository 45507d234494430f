// SPDX-License-Identifier: Apache-2.0
//
// Scenario runner: simkit -> per-camera frontends -> fixed-lag backend ->
// loop closure -> robust pose-graph optimization -> free-space mapping,
// with metric reports and artifact files.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vantage/backend/smoother.hpp"
#include "vantage/eval/metrics.hpp"
#include "vantage/loop/loopclosure.hpp"
#include "vantage/mapping/mesh.hpp"
#include "vantage/rpgo/rpgo.hpp"
#include "vantage/sim/simulator.hpp"

namespace vantage::eval {

struct RunConfig {
  sim::ScenarioConfig scenario;
  std::vector<int> cameras = {0};
  bool use_external_odometry = true;
  std::optional<loop::LoopMode> loop_mode;  // nullopt: no loop closure stage
  bool gnc = true;
  std::string output_dir;  // empty: no artifacts written

  double horizon_s = 10.0;
  int max_tracks_per_frame = 120;
  double keyframe_min_interval_s = 0.2;
  int mapping_frame_stride = 2;
  double mapping_voxel_m = 0.2;
  double mapping_truncation_m = 0.4;

  void validate() const;
};

RunConfig run_config_from_json_string(const std::string& text);
std::string run_config_to_json_string(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

struct LoopCandidateRecord {
  backend::StateId query_state = 0;
  backend::StateId match_state = 0;
  std::string mode;
  bool accepted = false;
  double rotation_error_deg = std::numeric_limits<double>::quiet_NaN();
  // Direction angle (deg) for scale-less / rotation-only, meters for PnP.
  double translation_error = std::numeric_limits<double>::quiet_NaN();
  int num_inliers = 0;
  bool is_injected = false;
  int num_2d2d = 0;
  int num_2d3d = 0;
};

struct MetricsReport {
  double ate_rmse_m = 0.0;  // final estimate (RPGO when loops run, else VIO)
  double drift_pct = 0.0;
  double trajectory_length_m = 0.0;
  double vio_ate_rmse_m = 0.0;
  double vio_drift_pct = 0.0;
  std::optional<double> rpgo_ate_rmse_m;
  std::optional<double> rpgo_drift_pct;
  int loop_candidates = 0;
  int loops_accepted = 0;
  std::optional<double> reconstruction_rmse_m;
  double runtime_s = 0.0;        // stdout only, never serialized
  std::string failure_stage;     // empty on success
};

struct PipelineResult {
  MetricsReport report;
  Trajectory vio_trajectory;
  std::optional<Trajectory> rpgo_trajectory;
  std::vector<LoopCandidateRecord> loop_records;
  std::vector<double> loop_edge_weights;
  std::vector<backend::KeyframeDiagnostics> diagnostics;
};

/// Runs the full pipeline for one configuration. Deterministic given the
/// scenario seed. Stage failures are recorded in the report (failure_stage)
/// rather than thrown; artifacts produced before the failure are kept.
PipelineResult run_pipeline(const RunConfig& config);

struct MappingOptions {
  double voxel_m = 0.2;
  double truncation_m = 0.4;
  int frame_stride = 2;
  std::vector<int> cameras = {0, 1, 2, 3};
  double free_space_factor = 0.9;
};

struct MappingResult {
  mapping::Mesh mesh;
  double rmse_m = 0.0;  // versus the world ground plane z = 0
  std::vector<Vector3d> free_space;
};

/// Ground-plane reconstruction from the dataset's ground-point observations
/// using the given body-pose source (ground truth or any estimate).
/// nullopt when no surface was observed.
std::optional<MappingResult> build_ground_map(const sim::Dataset& dataset,
                                              const Trajectory& body_poses,
                                              const MappingOptions& options = {});

struct AblationRun {
  std::string name;
  RunConfig config;
};

struct AblationRow {
  std::string scenario;
  int cameras = 0;
  bool wheel = false;
  std::string loop_mode;
  double ate_rmse_m = 0.0;
  double drift_pct = 0.0;
};

std::vector<AblationRun> load_ablation_suite(const std::string& path);
std::vector<AblationRow> run_ablation(const std::vector<AblationRun>& runs,
                                      const std::string& output_dir);

}  // namespace vantage::eval
