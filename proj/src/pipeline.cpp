#include "bevtrack/pipeline.hpp"

#include <chrono>
#include <json.hpp>
#include <vector>

#include "bevtrack/digest.hpp"
#include "bevtrack/errors.hpp"
#include "bevtrack/io.hpp"
#include "bevtrack/version.hpp"

namespace bevtrack::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

PipelineConfig parse_pipeline_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("pipeline config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("pipeline config: expected a JSON object");
  }
  for (const auto& [key, _] : root.items()) {
    if (key != "scenario" && key != "tracker" && key != "det_radius" &&
        key != "track_radius" && key != "out_dir") {
      throw ConfigError("pipeline config: unknown field \"" + key + "\"");
    }
  }
  if (!root.contains("scenario")) {
    throw ConfigError("pipeline config: missing field \"scenario\"");
  }

  PipelineConfig config;
  config.scenario = io::parse_scenario_config(root["scenario"].dump());
  if (root.contains("tracker")) {
    config.tracker = io::parse_tracker_config(root["tracker"].dump());
  }
  auto radius = [&](const char* key, double fallback) {
    if (!root.contains(key)) return fallback;
    if (!root[key].is_number()) {
      throw ConfigError(std::string("pipeline config: \"") + key +
                        "\" must be a number");
    }
    const double value = root[key].get<double>();
    if (!(value > 0.0)) {
      throw ConfigError(std::string("pipeline config: \"") + key +
                        "\" must be positive");
    }
    return value;
  };
  config.det_radius = radius("det_radius", config.det_radius);
  config.track_radius = radius("track_radius", config.track_radius);
  if (root.contains("out_dir")) {
    if (!root["out_dir"].is_string()) {
      throw ConfigError("pipeline config: \"out_dir\" must be a string");
    }
    config.out_dir = root["out_dir"].get<std::string>();
  }
  return config;
}

PipelineConfig read_pipeline_config(const std::filesystem::path& path) {
  try {
    return parse_pipeline_config(io::read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string pipeline_config_json(const PipelineConfig& config) {
  ordered_json j;
  j["scenario"] = ordered_json::parse(io::scenario_config_json(config.scenario));
  j["tracker"] = ordered_json::parse(io::tracker_config_json(config.tracker));
  j["det_radius"] = config.det_radius;
  j["track_radius"] = config.track_radius;
  return j.dump(2) + "\n";
}

namespace {

metrics::FrameMap ground_truth_map(const sim::Scenario& scenario) {
  metrics::FrameMap gt;
  for (int frame = 0; frame < scenario.duration; ++frame) {
    auto& points = gt[frame];
    for (const auto& p : sim::ground_truth_frame(scenario, frame)) {
      points.push_back({p.id, p.x, p.y});
    }
  }
  return gt;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  const sim::Scenario scenario = sim::build_scenario(config.scenario);
  io::write_calibration(out_dir / "calibration.json", scenario.rig.cameras);
  io::write_ground_truth(out_dir / "gt.jsonl", scenario);

  io::DetectionFrames detections;
  for (int frame = 0; frame < scenario.duration; ++frame) {
    detections[frame] =
        sim::observe_frame(scenario, frame, config.scenario.noise);
  }
  io::write_detections(out_dir / "detections.jsonl", detections);

  assoc::Tracker tracker(config.tracker);
  std::vector<assoc::TrackRow> rows;
  for (const auto& [frame, frame_detections] : detections) {
    for (const auto& row : tracker.step(frame, frame_detections)) {
      rows.push_back(row);
    }
  }
  io::write_tracks_csv(out_dir / "tracks.csv", rows);

  const metrics::FrameMap gt = ground_truth_map(scenario);
  PipelineResult result;
  result.report.detection = metrics::detection_metrics(
      gt, io::detections_to_frames(detections), config.det_radius);
  result.report.tracking =
      metrics::clear_mot(gt, io::tracks_to_frames(rows), config.track_radius);
  io::write_metrics_json(out_dir / "metrics.json", result.report);
  io::write_text_file(out_dir / "metrics.tsv",
                      io::metrics_tsv_header() + io::metrics_tsv(result.report));

  result.coverage = sim::coverage_scan(scenario.rig, sim::default_grid(scenario.rig));
  result.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  ordered_json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kVersion;
  manifest["config_sha256"] = io::sha256_hex(pipeline_config_json(config));
  ordered_json files;
  for (const char* name : {"calibration.json", "gt.jsonl", "detections.jsonl",
                           "tracks.csv", "metrics.json", "metrics.tsv"}) {
    const std::string bytes = io::read_text_file(out_dir / name);
    files[name] = {{"sha256", io::sha256_hex(bytes)}, {"bytes", bytes.size()}};
  }
  manifest["files"] = std::move(files);
  manifest["coverage"] = {{"min_cameras", result.coverage.min_cameras},
                          {"mean_cameras", result.coverage.mean_cameras}};
  manifest["duration_seconds"] = result.duration_seconds;
  io::write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace bevtrack::pipeline
