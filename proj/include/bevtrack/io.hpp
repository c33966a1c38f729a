#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bevtrack/detection.hpp"
#include "bevtrack/geometry.hpp"
#include "bevtrack/metrics.hpp"
#include "bevtrack/sim.hpp"
#include "bevtrack/tracker.hpp"

namespace bevtrack::io {

/// Detections per frame, keyed by frame index.
using DetectionFrames = std::map<int, std::vector<DetectionRecord>>;

// Ground truth, one JSON object per line:
//   {"frame": 0, "gt": [{"id": 0, "x": 1.5, "y": 2.0}, ...]}
void write_ground_truth(const std::filesystem::path& path,
                        const sim::Scenario& scenario);
metrics::FrameMap read_ground_truth(const std::filesystem::path& path);

// Detections, one JSON object per line:
//   {"frame": 0, "detections": [{"x": .., "y": .., "score": .., "emb": [..]}]}
void write_detections(const std::filesystem::path& path,
                      const DetectionFrames& frames);
DetectionFrames read_detections(const std::filesystem::path& path);

/// Detection positions as metric frame points (ids are per-frame indices),
/// for scoring detections against ground truth.
metrics::FrameMap detections_to_frames(const DetectionFrames& frames);

// Track output, CSV with header "frame,track_id,x,y,score"; positions and
// scores carry six decimals.
void write_tracks_csv(const std::filesystem::path& path,
                      const std::vector<assoc::TrackRow>& rows);
std::vector<assoc::TrackRow> read_tracks_csv(const std::filesystem::path& path);
metrics::FrameMap tracks_to_frames(const std::vector<assoc::TrackRow>& rows);

// Camera calibration, a JSON array of
//   {"id": 0, "K": [9, row-major], "R": [9, row-major], "t": [3],
//    "width": 1920, "height": 1080}.
// K must describe a zero-skew pinhole ([fx 0 cx; 0 fy cy; 0 0 1]).  With
// reorthonormalize set, a slightly off rotation is snapped to the nearest
// rotation matrix instead of being rejected.
void write_calibration(const std::filesystem::path& path,
                       const std::vector<geometry::CameraModel>& cameras);
std::vector<geometry::CameraModel> read_calibration(
    const std::filesystem::path& path, bool reorthonormalize = false);

// Config files.  Unknown fields are rejected so typos cannot silently fall
// back to defaults.
sim::ScenarioConfig parse_scenario_config(const std::string& text);
sim::ScenarioConfig read_scenario_config(const std::filesystem::path& path);
assoc::TrackerConfig parse_tracker_config(const std::string& text);
assoc::TrackerConfig read_tracker_config(const std::filesystem::path& path);

std::string scenario_config_json(const sim::ScenarioConfig& config);
std::string tracker_config_json(const assoc::TrackerConfig& config);

std::string preset_name(sim::RigPreset preset);
sim::RigPreset parse_preset(const std::string& name);

// Metrics report: pretty JSON (fractions) and a one-line TSV (percentages
// with one decimal, then integer counts).
std::string metrics_json(const metrics::MetricsReport& report);
void write_metrics_json(const std::filesystem::path& path,
                        const metrics::MetricsReport& report);
std::string metrics_tsv_header();
std::string metrics_tsv(const metrics::MetricsReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace bevtrack::io
