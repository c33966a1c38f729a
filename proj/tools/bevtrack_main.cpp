#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "bevtrack/errors.hpp"
#include "bevtrack/heatmap.hpp"
#include "bevtrack/io.hpp"
#include "bevtrack/pipeline.hpp"
#include "bevtrack/plot.hpp"
#include "bevtrack/sim.hpp"
#include "bevtrack/tracker.hpp"
#include "bevtrack/version.hpp"

namespace {

using namespace bevtrack;

/// Output directory: BEVTRACK_OUT_DIR overrides the --out flag, which
/// overrides an out_dir from the config.
std::filesystem::path resolve_out_dir(const std::string& flag_value,
                                      const std::string& config_value = {}) {
  if (const char* env = std::getenv("BEVTRACK_OUT_DIR"); env && *env) return env;
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  throw ConfigError("no output directory: pass --out or set BEVTRACK_OUT_DIR");
}

io::DetectionFrames simulate_detections(const sim::Scenario& scenario,
                                        const sim::NoiseModel& noise) {
  io::DetectionFrames detections;
  for (int frame = 0; frame < scenario.duration; ++frame) {
    detections[frame] = sim::observe_frame(scenario, frame, noise);
  }
  return detections;
}

const geometry::CameraModel& pick_camera(
    const std::vector<geometry::CameraModel>& cameras, int camera_id,
    bool camera_given) {
  if (camera_given) {
    for (const auto& camera : cameras) {
      if (camera.id == camera_id) return camera;
    }
    throw ConfigError("no camera with id " + std::to_string(camera_id) +
                      " in calibration file");
  }
  if (cameras.size() != 1) {
    throw ConfigError("calibration file has " + std::to_string(cameras.size()) +
                      " cameras; pass --camera ID");
  }
  return cameras.front();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Multi-camera ground-plane pedestrian tracking toolkit"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  // --- simulate ---------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate",
      "Generate a scenario: writes calibration.json, gt.jsonl, detections.jsonl");
  std::string simulate_config, simulate_out;
  simulate->add_option("--config", simulate_config, "Scenario config JSON file")
      ->required();
  simulate->add_option("--out", simulate_out,
                       "Output directory (BEVTRACK_OUT_DIR overrides)");
  simulate->callback([&] {
    const sim::ScenarioConfig config = io::read_scenario_config(simulate_config);
    const std::filesystem::path dir = resolve_out_dir(simulate_out);
    std::filesystem::create_directories(dir);
    const sim::Scenario scenario = sim::build_scenario(config);
    io::write_calibration(dir / "calibration.json", scenario.rig.cameras);
    io::write_ground_truth(dir / "gt.jsonl", scenario);
    io::write_detections(dir / "detections.jsonl",
                         simulate_detections(scenario, config.noise));
    std::cout << "wrote calibration.json, gt.jsonl, detections.jsonl to "
              << dir.string() << "\n";
  });

  // --- track ------------------------------------------------------------
  auto* track = app.add_subcommand(
      "track",
      "Associate detections into tracks (keeps detections with score strictly "
      "greater than det_threshold)");
  std::string track_detections, track_config, track_out;
  track->add_option("--detections", track_detections, "Detections JSONL file")
      ->required();
  track->add_option("--config", track_config,
                    "Tracker config JSON file (defaults apply when omitted)");
  track->add_option("--out", track_out, "Output tracks CSV file")->required();
  track->callback([&] {
    const assoc::TrackerConfig config = track_config.empty()
                                            ? assoc::TrackerConfig{}
                                            : io::read_tracker_config(track_config);
    const io::DetectionFrames frames = io::read_detections(track_detections);
    assoc::Tracker tracker(config);
    std::vector<assoc::TrackRow> rows;
    for (const auto& [frame, detections] : frames) {
      for (const auto& row : tracker.step(frame, detections)) rows.push_back(row);
    }
    io::write_tracks_csv(track_out, rows);
    std::cout << "wrote " << rows.size() << " track rows to " << track_out << "\n";
  });

  // --- evaluate ---------------------------------------------------------
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score tracks against ground truth; prints a one-line TSV");
  std::string eval_gt, eval_tracks, eval_detections, eval_out;
  double eval_det_r = 0.5, eval_track_r = 1.0;
  evaluate->add_option("--gt", eval_gt, "Ground-truth JSONL file")->required();
  evaluate->add_option("--tracks", eval_tracks, "Tracks CSV file")->required();
  evaluate->add_option(
      "--detections", eval_detections,
      "Detections JSONL file scoring the detection metrics (defaults to the "
      "track positions)");
  evaluate->add_option("--det-r", eval_det_r,
                       "Detection match radius in meters (default 0.5)");
  evaluate->add_option("--track-r", eval_track_r,
                       "Tracking match radius in meters (default 1.0)");
  evaluate->add_option("--out", eval_out, "Metrics JSON output file");
  evaluate->callback([&] {
    if (!(eval_det_r > 0.0) || !(eval_track_r > 0.0)) {
      throw ConfigError("match radii must be positive");
    }
    const metrics::FrameMap gt = io::read_ground_truth(eval_gt);
    const metrics::FrameMap tracks =
        io::tracks_to_frames(io::read_tracks_csv(eval_tracks));
    const metrics::FrameMap detections =
        eval_detections.empty()
            ? tracks
            : io::detections_to_frames(io::read_detections(eval_detections));
    metrics::MetricsReport report;
    report.detection = metrics::detection_metrics(gt, detections, eval_det_r);
    report.tracking = metrics::clear_mot(gt, tracks, eval_track_r);
    if (!eval_out.empty()) io::write_metrics_json(eval_out, report);
    std::cout << io::metrics_tsv_header() << io::metrics_tsv(report);
  });

  // --- project ----------------------------------------------------------
  auto* project = app.add_subcommand(
      "project", "Project an image pixel to the ground plane (prints \"x y\")");
  std::string project_calib;
  std::vector<double> project_uv;
  int project_camera = 0;
  bool project_reortho = false;
  project->add_option("--calib", project_calib, "Calibration JSON file")
      ->required();
  project->add_option("--uv", project_uv, "Pixel coordinates u,v")
      ->required()
      ->delimiter(',')
      ->expected(2);
  auto* camera_opt =
      project->add_option("--camera", project_camera,
                          "Camera id (required with multi-camera calibration)");
  project->add_flag("--reorthonormalize", project_reortho,
                    "Snap a slightly off rotation to the nearest rotation");
  project->callback([&] {
    const auto cameras = io::read_calibration(project_calib, project_reortho);
    const auto& camera =
        pick_camera(cameras, project_camera, camera_opt->count() > 0);
    const Eigen::Vector2d ground = geometry::project_image_to_ground(
        camera, Eigen::Vector2d(project_uv[0], project_uv[1]));
    std::printf("%.6f %.6f\n", ground.x(), ground.y());
  });

  // --- plot -------------------------------------------------------------
  auto* plot = app.add_subcommand("plot", "Render SVG/PGM views of the data");
  plot->require_subcommand(1);

  auto* plot_tracks = plot->add_subcommand(
      "tracks", "SVG of track polylines over the ground plane");
  std::string pt_tracks, pt_gt, pt_out;
  plot_tracks->add_option("--tracks", pt_tracks, "Tracks CSV file")->required();
  plot_tracks->add_option("--gt", pt_gt,
                          "Ground-truth JSONL file drawn underneath in gray");
  plot_tracks->add_option("--out", pt_out, "Output SVG file")->required();
  plot_tracks->callback([&] {
    const metrics::FrameMap tracks =
        io::tracks_to_frames(io::read_tracks_csv(pt_tracks));
    const metrics::FrameMap gt =
        pt_gt.empty() ? metrics::FrameMap{} : io::read_ground_truth(pt_gt);
    io::write_text_file(pt_out, plot::tracks_svg(tracks, gt));
    std::cout << "wrote " << pt_out << "\n";
  });

  auto* plot_heatmap = plot->add_subcommand(
      "heatmap", "Occupancy map of one frame rendered to PGM or SVG");
  std::string ph_gt, ph_detections, ph_out, ph_format = "pgm";
  int ph_frame = 0, ph_rows = 120, ph_cols = 360;
  double ph_sigma = 1.0, ph_cell = 0.1, ph_origin_x = 0.0, ph_origin_y = 0.0;
  auto* ph_gt_opt =
      plot_heatmap->add_option("--gt", ph_gt, "Ground-truth JSONL file");
  auto* ph_det_opt = plot_heatmap->add_option("--detections", ph_detections,
                                              "Detections JSONL file");
  ph_gt_opt->excludes(ph_det_opt);
  plot_heatmap->add_option("--frame", ph_frame, "Frame index (default 0)");
  plot_heatmap->add_option("--sigma", ph_sigma,
                           "Gaussian spread in cells (default 1.0)");
  plot_heatmap->add_option("--cell", ph_cell, "Cell size in meters (default 0.1)");
  plot_heatmap->add_option("--origin-x", ph_origin_x, "Grid origin x in meters");
  plot_heatmap->add_option("--origin-y", ph_origin_y, "Grid origin y in meters");
  plot_heatmap->add_option("--rows", ph_rows, "Grid rows (default 120)");
  plot_heatmap->add_option("--cols", ph_cols, "Grid cols (default 360)");
  plot_heatmap
      ->add_option("--format", ph_format, "Output format (default pgm)")
      ->check(CLI::IsMember({"pgm", "svg"}));
  plot_heatmap->add_option("--out", ph_out, "Output file")->required();
  plot_heatmap->callback([&] {
    if (ph_gt.empty() == ph_detections.empty()) {
      throw ConfigError("pass exactly one of --gt or --detections");
    }
    std::vector<Eigen::Vector2d> points;
    if (!ph_gt.empty()) {
      const metrics::FrameMap gt = io::read_ground_truth(ph_gt);
      const auto it = gt.find(ph_frame);
      if (it == gt.end()) {
        throw OutOfBoundsError("frame " + std::to_string(ph_frame) +
                               " not present in " + ph_gt);
      }
      for (const auto& p : it->second) points.emplace_back(p.x, p.y);
    } else {
      const io::DetectionFrames frames = io::read_detections(ph_detections);
      const auto it = frames.find(ph_frame);
      if (it == frames.end()) {
        throw OutOfBoundsError("frame " + std::to_string(ph_frame) +
                               " not present in " + ph_detections);
      }
      for (const auto& d : it->second) points.emplace_back(d.x, d.y);
    }
    geometry::GroundGrid grid;
    grid.origin_x = ph_origin_x;
    grid.origin_y = ph_origin_y;
    grid.cell_size = ph_cell;
    grid.rows = ph_rows;
    grid.cols = ph_cols;
    const bev::OccupancyMap map = bev::render_heatmap(points, grid, ph_sigma);
    io::write_text_file(ph_out, ph_format == "pgm" ? plot::heatmap_pgm(map)
                                                   : plot::heatmap_svg(map));
    std::cout << "wrote " << ph_out << "\n";
  });

  // --- run --------------------------------------------------------------
  auto* run = app.add_subcommand(
      "run", "Full pipeline: simulate, track, evaluate, write a manifest");
  std::string run_config, run_out;
  run->add_option("--config", run_config, "Pipeline config JSON file")
      ->required();
  run->add_option("--out", run_out,
                  "Output directory (BEVTRACK_OUT_DIR overrides; falls back to "
                  "out_dir from the config)");
  run->callback([&] {
    const pipeline::PipelineConfig config =
        pipeline::read_pipeline_config(run_config);
    const std::filesystem::path dir = resolve_out_dir(run_out, config.out_dir);
    const pipeline::PipelineResult result = pipeline::run_pipeline(config, dir);
    std::cout << io::metrics_tsv_header() << io::metrics_tsv(result.report);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags/arguments are config errors
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const OutOfBoundsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
