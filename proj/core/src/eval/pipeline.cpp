// SPDX-License-Identifier: Apache-2.0

#include "vantage/eval/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vantage/frontend/frontend.hpp"
#include "vantage/io/format.hpp"
#include "vantage/io/tum.hpp"
#include "vantage/mapping/homography.hpp"
#include "vantage/sim/dataset_io.hpp"

namespace vantage::eval {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  scenario.validate();
  if (cameras.empty()) throw sim::ConfigError("RunConfig: camera subset must be non-empty");
  for (int c : cameras) {
    if (c < 0 || c > 3) throw sim::ConfigError("RunConfig: camera id out of range");
  }
  if (horizon_s <= 0) throw sim::ConfigError("RunConfig: horizon must be > 0");
}

RunConfig run_config_from_json_string(const std::string& text) {
  const auto j = ordered_json::parse(text);
  RunConfig c;
  if (j.contains("scenario")) {
    c.scenario = sim::scenario_from_json_string(j.at("scenario").dump());
  }
  if (j.contains("cameras")) c.cameras = j.at("cameras").get<std::vector<int>>();
  c.use_external_odometry = j.value("use_external_odometry", c.use_external_odometry);
  const std::string mode = j.value("loop_mode", std::string("none"));
  c.loop_mode = mode == "none" ? std::nullopt
                               : std::optional<loop::LoopMode>(loop::loop_mode_from_string(mode));
  c.gnc = j.value("gnc", c.gnc);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.horizon_s = j.value("horizon_s", c.horizon_s);
  c.max_tracks_per_frame = j.value("max_tracks_per_frame", c.max_tracks_per_frame);
  c.keyframe_min_interval_s = j.value("keyframe_min_interval_s", c.keyframe_min_interval_s);
  c.mapping_frame_stride = j.value("mapping_frame_stride", c.mapping_frame_stride);
  c.mapping_voxel_m = j.value("mapping_voxel_m", c.mapping_voxel_m);
  c.mapping_truncation_m = j.value("mapping_truncation_m", c.mapping_truncation_m);
  c.validate();
  return c;
}

std::string run_config_to_json_string(const RunConfig& c) {
  ordered_json j;
  j["scenario"] = ordered_json::parse(sim::scenario_to_json_string(c.scenario));
  j["cameras"] = c.cameras;
  j["use_external_odometry"] = c.use_external_odometry;
  j["loop_mode"] = c.loop_mode ? to_string(*c.loop_mode) : "none";
  j["gnc"] = c.gnc;
  j["output_dir"] = c.output_dir;
  j["horizon_s"] = c.horizon_s;
  j["max_tracks_per_frame"] = c.max_tracks_per_frame;
  j["keyframe_min_interval_s"] = c.keyframe_min_interval_s;
  j["mapping_frame_stride"] = c.mapping_frame_stride;
  j["mapping_voxel_m"] = c.mapping_voxel_m;
  j["mapping_truncation_m"] = c.mapping_truncation_m;
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sim::ConfigError("cannot open run config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json_string(ss.str());
}

namespace {

using FrameIndex = std::map<double, std::vector<frontend::TrackPixel>>;

FrameIndex index_frames(const sim::Dataset& ds, int camera_id) {
  FrameIndex index;
  for (const sim::TrackObservation& obs : ds.tracks.at(camera_id)) {
    index[obs.timestamp].push_back({obs.track_id, obs.pixel});
  }
  return index;
}

struct KeyframeRecord {
  backend::StateId state = 0;
  double timestamp = 0.0;
  std::map<std::int64_t, Vector3d> loop_camera_landmarks;  // window snapshot
};

struct VioRun {
  Trajectory trajectory;
  std::vector<KeyframeRecord> keyframes;
  std::vector<backend::RelativePoseMeasurement> keyframe_odometry;
  std::vector<backend::KeyframeDiagnostics> diagnostics;
};

VioRun run_vio(const sim::Dataset& ds, const RunConfig& config) {
  frontend::FrontendParams fe_params;
  fe_params.keyframes.min_interval_s = config.keyframe_min_interval_s;
  fe_params.max_tracks_per_frame = config.max_tracks_per_frame;

  std::vector<frontend::CameraFrontend> frontends;
  std::vector<FrameIndex> frames;
  for (int cam : config.cameras) {
    frontends.emplace_back(cam, ds.rig.at(cam), fe_params);
    frames.push_back(index_frames(ds, cam));
  }

  backend::SmootherParams sp;
  sp.horizon_s = config.horizon_s;
  sp.use_odometry_factors = config.use_external_odometry;
  sp.pixel_sigma_px = std::max(0.25, ds.config.pixel_noise_sigma_px);
  sp.odometry_noise = {ds.config.odometry_sigma_rot_rad, ds.config.odometry_sigma_trans_m};
  sp.first_pose_prior = ds.ground_truth.front().pose;
  backend::FixedLagSmoother smoother(ds.rig, sp);

  const int loop_cam = config.cameras.front();
  VioRun run;
  backend::StateId next_state = 0;

  for (double t : ds.frame_timestamps) {
    bool vote = false;
    for (size_t k = 0; k < frontends.size(); ++k) {
      const auto it = frames[k].find(t);
      frontends[k].observe(t, it == frames[k].end() ? std::vector<frontend::TrackPixel>{}
                                                    : it->second);
      vote = frontends[k].votes_keyframe() || vote;
    }
    if (!vote) continue;

    const backend::StateId state = next_state++;
    std::vector<frontend::FrontendOutput> outputs;
    outputs.reserve(frontends.size());
    for (auto& fe : frontends) outputs.push_back(fe.emit_keyframe(state));

    KeyframeRecord record;
    record.state = state;
    record.timestamp = t;

    const frontend::FrontendOutput* loop_out = nullptr;
    for (const auto& out : outputs) {
      if (out.camera_id == loop_cam) loop_out = &out;
    }

    smoother.add_keyframe(state, t, outputs, ds.odometry);

    if (loop_out) {
      const auto& landmarks = smoother.window_values().landmarks;
      for (const frontend::TrackPixel& track : loop_out->inlier_tracks) {
        const auto hit = landmarks.find(backend::make_landmark_id(loop_cam, track.track_id));
        if (hit != landmarks.end()) record.loop_camera_landmarks[track.track_id] = hit->second;
      }
    }
    run.keyframes.push_back(std::move(record));
  }

  run.trajectory = smoother.trajectory();
  run.keyframe_odometry = smoother.keyframe_odometry();
  run.diagnostics = smoother.diagnostics();
  return run;
}

struct LoopStage {
  std::vector<LoopCandidateRecord> records;
  std::vector<backend::RelativePoseMeasurement> edges;
};

LoopStage run_loop_closure(const sim::Dataset& ds, const RunConfig& config, const VioRun& vio) {
  LoopStage stage;
  loop::LoopParams params;
  params.loop_camera_id = config.cameras.front();

  std::vector<loop::KeyframeContext> contexts;
  for (const KeyframeRecord& kf : vio.keyframes) {
    loop::KeyframeContext ctx;
    ctx.state = kf.state;
    ctx.timestamp = kf.timestamp;
    ctx.gt_pose = ds.ground_truth.at(kf.timestamp);
    ctx.vio_pose = vio.trajectory.at(kf.timestamp);
    ctx.landmark_estimates = kf.loop_camera_landmarks;
    contexts.push_back(std::move(ctx));
  }
  const auto candidates = loop::detect_candidates(ds, contexts, params);

  std::map<backend::StateId, size_t> by_state;
  for (size_t k = 0; k < contexts.size(); ++k) by_state[contexts[k].state] = k;

  const CameraModel& cam = ds.rig.at(params.loop_camera_id);
  for (const loop::LoopCandidate& c : candidates) {
    LoopCandidateRecord record;
    record.query_state = c.query_state;
    record.match_state = c.match_state;
    record.mode = to_string(*config.loop_mode);
    record.is_injected = c.is_injected_false_positive;
    record.num_2d2d = static_cast<int>(c.correspondences_2d2d.size());
    record.num_2d3d = static_cast<int>(c.correspondences_2d3d.size());

    const Pose& match_estimate = contexts[by_state.at(c.match_state)].vio_pose;
    const auto result = loop::compute_loop_pose(c, *config.loop_mode, cam, match_estimate, params);
    if (result) {
      record.accepted = true;
      record.num_inliers = result->num_inliers;

      // Errors against the ground-truth relative transform.
      const Pose gt_rel = between(contexts[by_state.at(c.match_state)].gt_pose,
                                  contexts[by_state.at(c.query_state)].gt_pose);
      const auto& m = result->measurement;
      record.rotation_error_deg =
          m.transform.rotation().angular_distance(gt_rel.rotation()) * 180.0 / M_PI;
      if (m.kind == backend::MeasurementKind::kLoopFull) {
        record.translation_error =
            (m.transform.translation() - gt_rel.translation()).norm();
      } else {
        const Matrix3d r_body = m.transform.rotation().matrix();
        const Vector3d offset =
            (Matrix3d::Identity() - r_body) * cam.T_body_camera.translation();
        const Vector3d measured_dir = (m.transform.translation() - offset).normalized();
        const Vector3d gt_dir_raw = gt_rel.translation() -
                                    (Matrix3d::Identity() - gt_rel.rotation().matrix()) *
                                        cam.T_body_camera.translation();
        if (gt_dir_raw.norm() > 1e-9) {
          const Vector3d gt_dir = gt_dir_raw.normalized();
          record.translation_error =
              std::acos(std::clamp(measured_dir.dot(gt_dir), -1.0, 1.0)) * 180.0 / M_PI;
        }
      }
      stage.edges.push_back(result->measurement);
    }
    stage.records.push_back(std::move(record));
  }
  return stage;
}

void write_loop_csv(const std::vector<LoopCandidateRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot write loop log: " + path);
  out << "query_kf,match_kf,mode,accepted,rot_err_deg,trans_err,num_inliers,is_injected\n";
  for (const auto& r : records) {
    out << r.query_state << ',' << r.match_state << ',' << r.mode << ',' << (r.accepted ? 1 : 0)
        << ',' << io::g9(r.rotation_error_deg) << ',' << io::g9(r.translation_error) << ','
        << r.num_inliers << ',' << (r.is_injected ? 1 : 0) << '\n';
  }
}

void write_diagnostics_csv(const std::vector<backend::KeyframeDiagnostics>& diags,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot write diagnostics: " + path);
  out << "timestamp,num_factors_per_camera,cost,iterations\n";
  for (const auto& d : diags) {
    out << io::g9(d.timestamp) << ',';
    bool first = true;
    for (const auto& [cam, count] : d.factors_per_camera) {
      if (!first) out << ';';
      out << cam << ':' << count;
      first = false;
    }
    out << ',' << io::g9(d.cost) << ',' << d.iterations << '\n';
  }
}

void write_metrics_json(const MetricsReport& report, const std::string& path) {
  ordered_json j;
  j["ate_rmse_m"] = report.ate_rmse_m;
  j["drift_pct"] = report.drift_pct;
  j["trajectory_length_m"] = report.trajectory_length_m;
  j["vio"] = {{"ate_rmse_m", report.vio_ate_rmse_m}, {"drift_pct", report.vio_drift_pct}};
  if (report.rpgo_ate_rmse_m) {
    j["rpgo"] = {{"ate_rmse_m", *report.rpgo_ate_rmse_m}, {"drift_pct", *report.rpgo_drift_pct}};
  }
  j["loop_candidates"] = report.loop_candidates;
  j["loops_accepted"] = report.loops_accepted;
  if (report.reconstruction_rmse_m) {
    j["reconstruction"] = {{"rmse_m", *report.reconstruction_rmse_m}};
  }
  if (!report.failure_stage.empty()) j["failure_stage"] = report.failure_stage;
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot write metrics: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

std::optional<MappingResult> build_ground_map(const sim::Dataset& dataset,
                                              const Trajectory& body_poses,
                                              const MappingOptions& options) {
  mapping::TsdfGrid grid(options.voxel_m, options.truncation_m);

  std::map<int, mapping::GroundHomography> homographies;
  for (int cam : options.cameras) {
    homographies.emplace(cam, mapping::compute_ground_homography(dataset.rig.at(cam), 30.0));
  }

  // Ground observations grouped per (frame, camera), in time order.
  std::map<std::pair<double, int>, std::vector<Vector2d>> masks;
  for (const sim::GroundPointObservation& g : dataset.ground_points) {
    if (!homographies.count(g.camera_id)) continue;
    const auto pixel =
        project_landmark(dataset.rig.at(g.camera_id), dataset.ground_truth.at(g.timestamp),
                         g.point_world);
    if (!pixel) continue;
    masks[{g.timestamp, g.camera_id}].push_back(*pixel);
  }

  const double t_min = body_poses.front().timestamp;
  const double t_max = body_poses.back().timestamp;
  int frame_counter = -1;
  double last_time = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [key, pixels] : masks) {
    const auto& [t, cam_id] = key;
    if (t != last_time) {
      last_time = t;
      ++frame_counter;
    }
    if (frame_counter % options.frame_stride != 0) continue;
    if (t < t_min || t > t_max) continue;
    const Pose body = body_poses.at(t);
    const auto back = mapping::backproject_mask(pixels, homographies.at(cam_id), body);
    if (back.points_world.empty()) continue;
    const Vector3d origin = body * dataset.rig.at(cam_id).T_body_camera.translation();
    grid.integrate(origin, back.points_world);
  }

  MappingResult result;
  result.mesh = mapping::extract_mesh(grid);
  if (result.mesh.empty()) return std::nullopt;
  result.rmse_m =
      mapping::reconstruction_error(result.mesh, mapping::GroundTruthSurface::plane_z(0.0));
  result.free_space = grid.free_space_centers(options.free_space_factor);
  return result;
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();

  PipelineResult result;
  MetricsReport& report = result.report;
  const bool write = !config.output_dir.empty();
  if (write) fs::create_directories(config.output_dir);
  const fs::path out_dir(config.output_dir);

  std::string stage = "simulate";
  try {
    const sim::Dataset ds = sim::generate_dataset(config.scenario);
    report.trajectory_length_m = ds.ground_truth.path_length();

    stage = "vio";
    const VioRun vio = run_vio(ds, config);
    result.vio_trajectory = vio.trajectory;
    result.diagnostics = vio.diagnostics;
    if (write) {
      io::save_tum(vio.trajectory, (out_dir / "est_vio.tum").string());
      write_diagnostics_csv(vio.diagnostics, (out_dir / "vio_diagnostics.csv").string());
    }

    {
      const auto aligned = align_trajectories(vio.trajectory, ds.ground_truth);
      report.vio_ate_rmse_m = ate_rmse(aligned.aligned_estimate, ds.ground_truth);
      report.vio_drift_pct = drift_percent(report.vio_ate_rmse_m, report.trajectory_length_m);
    }
    report.ate_rmse_m = report.vio_ate_rmse_m;
    report.drift_pct = report.vio_drift_pct;

    Trajectory final_trajectory = vio.trajectory;
    if (config.loop_mode) {
      stage = "loopclosure";
      LoopStage loops = run_loop_closure(ds, config, vio);
      result.loop_records = loops.records;
      report.loop_candidates = static_cast<int>(loops.records.size());
      report.loops_accepted = static_cast<int>(loops.edges.size());
      if (write) write_loop_csv(loops.records, (out_dir / "lc_errors.csv").string());

      stage = "rpgo";
      rpgo::PoseGraph graph;
      std::map<backend::StateId, double> stamps;
      for (const KeyframeRecord& kf : vio.keyframes) {
        graph.nodes[kf.state] = vio.trajectory.at(kf.timestamp);
        stamps[kf.state] = kf.timestamp;
      }
      for (const auto& odo : vio.keyframe_odometry) {
        backend::RelativePoseMeasurement edge = odo;
        edge.transform = between(graph.nodes.at(edge.i), graph.nodes.at(edge.j));
        graph.odometry_edges.push_back(edge);
      }
      graph.loop_edges = loops.edges;
      graph.anchor_first_node();

      const rpgo::PgoResult pgo = rpgo::pgo_optimize(graph, config.gnc);
      result.loop_edge_weights = pgo.loop_edge_weights;
      result.rpgo_trajectory = rpgo::pgo_trajectory(pgo, stamps);
      final_trajectory = *result.rpgo_trajectory;
      if (write) {
        io::save_tum(*result.rpgo_trajectory, (out_dir / "est_rpgo.tum").string());
        std::ofstream wout(out_dir / "loop_edge_weights.csv");
        wout << "match_kf,query_kf,weight\n";
        for (size_t k = 0; k < graph.loop_edges.size(); ++k) {
          wout << graph.loop_edges[k].i << ',' << graph.loop_edges[k].j << ','
               << io::g9(pgo.loop_edge_weights[k]) << '\n';
        }
      }

      const auto aligned = align_trajectories(*result.rpgo_trajectory, ds.ground_truth);
      report.rpgo_ate_rmse_m = ate_rmse(aligned.aligned_estimate, ds.ground_truth);
      report.rpgo_drift_pct =
          drift_percent(*report.rpgo_ate_rmse_m, report.trajectory_length_m);
      report.ate_rmse_m = *report.rpgo_ate_rmse_m;
      report.drift_pct = *report.rpgo_drift_pct;
    }

    stage = "mapping";
    MappingOptions mopt;
    mopt.voxel_m = config.mapping_voxel_m;
    mopt.truncation_m = config.mapping_truncation_m;
    mopt.frame_stride = config.mapping_frame_stride;
    mopt.cameras = config.cameras;
    const auto map = build_ground_map(ds, final_trajectory, mopt);
    if (map) {
      report.reconstruction_rmse_m = map->rmse_m;
      if (write) {
        mapping::save_obj(map->mesh, (out_dir / "mesh.obj").string());
        mapping::save_free_space_csv(map->free_space, (out_dir / "freespace.csv").string());
        std::ofstream rout(out_dir / "reconstruction.json");
        rout << "{\"rmse_m\": " << io::g9(map->rmse_m) << "}\n";
      }
    }
  } catch (const std::exception& e) {
    report.failure_stage = stage + ": " + e.what();
  }

  report.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (write) write_metrics_json(report, (out_dir / "metrics.json").string());
  return result;
}

std::vector<AblationRun> load_ablation_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sim::ConfigError("cannot open ablation suite: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = ordered_json::parse(ss.str());
  std::vector<AblationRun> runs;
  for (const auto& entry : j.at("runs")) {
    AblationRun run;
    run.config = run_config_from_json_string(entry.dump());
    run.name = entry.value("name", to_string(run.config.scenario.shape) + "-seed" +
                                       std::to_string(run.config.scenario.seed));
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<AblationRow> run_ablation(const std::vector<AblationRun>& runs,
                                      const std::string& output_dir) {
  fs::create_directories(output_dir);
  std::vector<AblationRow> rows;
  for (const AblationRun& run : runs) {
    RunConfig config = run.config;
    if (config.output_dir.empty()) {
      config.output_dir = (fs::path(output_dir) / run.name).string();
    }
    const PipelineResult result = run_pipeline(config);
    AblationRow row;
    row.scenario = run.name;
    row.cameras = static_cast<int>(config.cameras.size());
    row.wheel = config.use_external_odometry;
    row.loop_mode = config.loop_mode ? to_string(*config.loop_mode) : "none";
    row.ate_rmse_m = result.report.ate_rmse_m;
    row.drift_pct = result.report.drift_pct;
    rows.push_back(std::move(row));
  }

  std::ofstream out(fs::path(output_dir) / "ablation_table.csv");
  if (!out) throw io::IoError("cannot write ablation table");
  out << "scenario,cameras,wheel,loop_mode,ate_rmse_m,drift_pct\n";
  for (const AblationRow& row : rows) {
    out << row.scenario << ',' << row.cameras << ',' << (row.wheel ? 1 : 0) << ','
        << row.loop_mode << ',' << io::g9(row.ate_rmse_m) << ',' << io::g9(row.drift_pct)
        << '\n';
  }
  return rows;
}

}  // namespace vantage::eval
