#pragma once

#include <filesystem>
#include <string>

#include "bevtrack/metrics.hpp"
#include "bevtrack/sim.hpp"
#include "bevtrack/tracker.hpp"

namespace bevtrack::pipeline {

/// End-to-end run: scenario, tracker, and the match radii used to score the
/// result (detection metrics at det_radius, tracking metrics at track_radius).
struct PipelineConfig {
  sim::ScenarioConfig scenario;
  assoc::TrackerConfig tracker;
  double det_radius = 0.5;
  double track_radius = 1.0;
  std::string out_dir;  // optional; CLI flag and environment can override
};

PipelineConfig parse_pipeline_config(const std::string& text);
PipelineConfig read_pipeline_config(const std::filesystem::path& path);
std::string pipeline_config_json(const PipelineConfig& config);

struct PipelineResult {
  metrics::MetricsReport report;
  sim::CoverageStats coverage;
  double duration_seconds = 0.0;
};

/// Runs simulate -> track -> evaluate and writes calibration.json, gt.jsonl,
/// detections.jsonl, tracks.csv, metrics.json, metrics.tsv, and manifest.json
/// into out_dir (created if missing).  Outputs are deterministic functions of
/// the config; manifest.json alone carries wall-clock timing.
PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::filesystem::path& out_dir);

}  // namespace bevtrack::pipeline
