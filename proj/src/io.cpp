#include "bevtrack/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bevtrack/errors.hpp"

namespace bevtrack::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string format_fixed6(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string format_percent1(double fraction) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.1f", fraction * 100.0);
  return buffer;
}

[[noreturn]] void malformed(const std::filesystem::path& path, int line,
                            const std::string& what) {
  throw IoError(path.string() + ":" + std::to_string(line) + ": " + what);
}

json parse_line(const std::filesystem::path& path, int line_number,
                const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    malformed(path, line_number, std::string("invalid JSON: ") + e.what());
  }
}

/// Config-file field access with unknown-key rejection.
class StrictObject {
 public:
  StrictObject(const json& j, std::string context)
      : json_(j), context_(std::move(context)) {
    if (!j.is_object()) {
      throw ConfigError(context_ + ": expected a JSON object");
    }
  }

  ~StrictObject() = default;

  bool has(const char* key) {
    seen_.push_back(key);
    return json_.contains(key);
  }

  const json& get(const char* key) {
    if (!json_.contains(key)) {
      throw ConfigError(context_ + ": missing field \"" + key + "\"");
    }
    seen_.push_back(key);
    return json_.at(key);
  }

  double number(const char* key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number()) {
      throw ConfigError(context_ + ": \"" + key + "\" must be a number");
    }
    return v.get<double>();
  }

  int integer(const char* key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer()) {
      throw ConfigError(context_ + ": \"" + key + "\" must be an integer");
    }
    return v.get<int>();
  }

  std::uint64_t seed(const char* key) {
    const json& v = get(key);
    if (!v.is_number_integer() ||
        (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(context_ + ": \"" + key +
                        "\" must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const char* key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_string()) {
      throw ConfigError(context_ + ": \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
  }

  const json* object(const char* key) {
    if (!has(key)) return nullptr;
    return &get(key);
  }

  void finish() {
    for (const auto& [key, _] : json_.items()) {
      bool known = false;
      for (const auto& s : seen_) {
        if (key == s) {
          known = true;
          break;
        }
      }
      if (!known) {
        throw ConfigError(context_ + ": unknown field \"" + key + "\"");
      }
    }
  }

 private:
  const json& json_;
  std::string context_;
  std::vector<std::string> seen_;
};

void check_range(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_ground_truth(const std::filesystem::path& path,
                        const sim::Scenario& scenario) {
  std::ostringstream out;
  for (int frame = 0; frame < scenario.duration; ++frame) {
    ordered_json line;
    line["frame"] = frame;
    ordered_json people = ordered_json::array();
    for (const auto& gt : sim::ground_truth_frame(scenario, frame)) {
      people.push_back({{"id", gt.id}, {"x", gt.x}, {"y", gt.y}});
    }
    line["gt"] = std::move(people);
    out << line.dump() << '\n';
  }
  write_text_file(path, out.str());
}

metrics::FrameMap read_ground_truth(const std::filesystem::path& path) {
  metrics::FrameMap frames;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const json j = parse_line(path, line_number, line);
    if (!j.is_object() || !j.contains("frame") || !j.contains("gt") ||
        !j["frame"].is_number_integer() || !j["gt"].is_array()) {
      malformed(path, line_number, "expected {\"frame\": int, \"gt\": [...]}");
    }
    const int frame = j["frame"].get<int>();
    if (frames.count(frame)) {
      malformed(path, line_number, "duplicate frame " + std::to_string(frame));
    }
    auto& points = frames[frame];
    for (const auto& g : j["gt"]) {
      if (!g.is_object() || !g.contains("id") || !g.contains("x") ||
          !g.contains("y") || !g["id"].is_number_integer() ||
          !g["x"].is_number() || !g["y"].is_number()) {
        malformed(path, line_number,
                  "expected {\"id\": int, \"x\": number, \"y\": number}");
      }
      points.push_back(
          {g["id"].get<int>(), g["x"].get<double>(), g["y"].get<double>()});
    }
  }
  return frames;
}

void write_detections(const std::filesystem::path& path,
                      const DetectionFrames& frames) {
  std::ostringstream out;
  for (const auto& [frame, detections] : frames) {
    ordered_json line;
    line["frame"] = frame;
    ordered_json list = ordered_json::array();
    for (const auto& det : detections) {
      ordered_json d;
      d["x"] = det.x;
      d["y"] = det.y;
      d["score"] = det.score;
      ordered_json emb = ordered_json::array();
      for (int i = 0; i < det.embedding.size(); ++i) emb.push_back(det.embedding(i));
      d["emb"] = std::move(emb);
      list.push_back(std::move(d));
    }
    line["detections"] = std::move(list);
    out << line.dump() << '\n';
  }
  write_text_file(path, out.str());
}

DetectionFrames read_detections(const std::filesystem::path& path) {
  DetectionFrames frames;
  std::istringstream in(read_text_file(path));
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const json j = parse_line(path, line_number, line);
    if (!j.is_object() || !j.contains("frame") || !j.contains("detections") ||
        !j["frame"].is_number_integer() || !j["detections"].is_array()) {
      malformed(path, line_number,
                "expected {\"frame\": int, \"detections\": [...]}");
    }
    const int frame = j["frame"].get<int>();
    if (frames.count(frame)) {
      malformed(path, line_number, "duplicate frame " + std::to_string(frame));
    }
    auto& detections = frames[frame];
    for (const auto& d : j["detections"]) {
      if (!d.is_object() || !d.contains("x") || !d.contains("y") ||
          !d.contains("score") || !d.contains("emb") || !d["x"].is_number() ||
          !d["y"].is_number() || !d["score"].is_number() || !d["emb"].is_array() ||
          d["emb"].empty()) {
        malformed(path, line_number,
                  "expected {\"x\", \"y\", \"score\": numbers, \"emb\": [...]}");
      }
      DetectionRecord det;
      det.x = d["x"].get<double>();
      det.y = d["y"].get<double>();
      det.score = d["score"].get<double>();
      det.embedding.resize(static_cast<Eigen::Index>(d["emb"].size()));
      Eigen::Index i = 0;
      for (const auto& v : d["emb"]) {
        if (!v.is_number()) {
          malformed(path, line_number, "embedding entries must be numbers");
        }
        det.embedding(i++) = v.get<double>();
      }
      if (std::abs(det.embedding.norm() - 1.0) > 1e-9) {
        throw ValidationError(path.string() + ":" + std::to_string(line_number) +
                              ": detection embedding is not unit norm");
      }
      detections.push_back(std::move(det));
    }
  }
  return frames;
}

metrics::FrameMap detections_to_frames(const DetectionFrames& frames) {
  metrics::FrameMap out;
  for (const auto& [frame, detections] : frames) {
    auto& points = out[frame];
    int index = 0;
    for (const auto& det : detections) points.push_back({index++, det.x, det.y});
  }
  return out;
}

void write_tracks_csv(const std::filesystem::path& path,
                      const std::vector<assoc::TrackRow>& rows) {
  std::ostringstream out;
  out << "frame,track_id,x,y,score\n";
  for (const auto& row : rows) {
    out << row.frame << ',' << row.track_id << ',' << format_fixed6(row.x) << ','
        << format_fixed6(row.y) << ',' << format_fixed6(row.score) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<assoc::TrackRow> read_tracks_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "frame,track_id,x,y,score") {
    throw IoError(path.string() + ": missing tracks CSV header");
  }
  std::vector<assoc::TrackRow> rows;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    assoc::TrackRow row;
    char extra = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf%c", &row.frame, &row.track_id,
                    &row.x, &row.y, &row.score, &extra) != 5) {
      malformed(path, line_number, "expected frame,track_id,x,y,score");
    }
    rows.push_back(row);
  }
  return rows;
}

metrics::FrameMap tracks_to_frames(const std::vector<assoc::TrackRow>& rows) {
  metrics::FrameMap frames;
  for (const auto& row : rows) {
    frames[row.frame].push_back({row.track_id, row.x, row.y});
  }
  return frames;
}

void write_calibration(const std::filesystem::path& path,
                       const std::vector<geometry::CameraModel>& cameras) {
  ordered_json list = ordered_json::array();
  for (const auto& camera : cameras) {
    ordered_json entry;
    entry["id"] = camera.id;
    const Eigen::Matrix3d k = camera.intrinsics.matrix();
    ordered_json kj = ordered_json::array(), rj = ordered_json::array(),
                 tj = ordered_json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        kj.push_back(k(r, c));
        rj.push_back(camera.extrinsics.rotation(r, c));
      }
      tj.push_back(camera.extrinsics.translation(r));
    }
    entry["K"] = std::move(kj);
    entry["R"] = std::move(rj);
    entry["t"] = std::move(tj);
    entry["width"] = camera.intrinsics.image_width;
    entry["height"] = camera.intrinsics.image_height;
    list.push_back(std::move(entry));
  }
  write_text_file(path, list.dump(2) + "\n");
}

std::vector<geometry::CameraModel> read_calibration(
    const std::filesystem::path& path, bool reorthonormalize) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!root.is_array() || root.empty()) {
    throw ConfigError(path.string() + ": expected a non-empty array of cameras");
  }

  std::vector<geometry::CameraModel> cameras;
  for (const auto& entry : root) {
    StrictObject camera(entry, path.string() + ": camera");
    const int id = camera.integer("id", 0);
    const json& kj = camera.get("K");
    const json& rj = camera.get("R");
    const json& tj = camera.get("t");
    const int width = camera.integer("width", 0);
    const int height = camera.integer("height", 0);
    camera.finish();

    auto numbers = [&](const json& a, std::size_t n, const char* what) {
      if (!a.is_array() || a.size() != n) {
        throw ConfigError(path.string() + ": \"" + what + "\" must be an array of " +
                          std::to_string(n) + " numbers");
      }
      std::vector<double> out;
      for (const auto& v : a) {
        if (!v.is_number()) {
          throw ConfigError(path.string() + ": \"" + what +
                            "\" must contain only numbers");
        }
        out.push_back(v.get<double>());
      }
      return out;
    };

    const auto k = numbers(kj, 9, "K");
    const auto r = numbers(rj, 9, "R");
    const auto t = numbers(tj, 3, "t");
    if (k[1] != 0.0 || k[3] != 0.0 || k[6] != 0.0 || k[7] != 0.0 || k[8] != 1.0) {
      throw ConfigError(path.string() +
                        ": K must be a zero-skew pinhole [fx 0 cx; 0 fy cy; 0 0 1]");
    }

    geometry::CameraIntrinsics intrinsics;
    intrinsics.fx = k[0];
    intrinsics.fy = k[4];
    intrinsics.cx = k[2];
    intrinsics.cy = k[5];
    intrinsics.image_width = width;
    intrinsics.image_height = height;

    geometry::CameraExtrinsics extrinsics;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) {
        extrinsics.rotation(row, col) = r[3 * row + col];
      }
      extrinsics.translation(row) = t[row];
    }
    if (reorthonormalize) {
      extrinsics.rotation = geometry::nearest_rotation(extrinsics.rotation);
    }
    cameras.push_back(geometry::compose_projection(intrinsics, extrinsics, id));
  }
  return cameras;
}

namespace {

sim::ScenarioConfig scenario_config_from_json(const json& root,
                                              const std::string& context) {
  StrictObject top(root, context);
  sim::ScenarioConfig config;
  config.preset = parse_preset(top.string("preset", "wildtrack-like"));
  config.n_pedestrians = top.integer("pedestrians", config.n_pedestrians);
  config.duration = top.integer("duration", config.duration);
  config.noise.seed = top.seed("seed");

  if (const json* motion = top.object("motion")) {
    StrictObject m(*motion, context + ".motion");
    config.motion.speed_min = m.number("speed_min", config.motion.speed_min);
    config.motion.speed_max = m.number("speed_max", config.motion.speed_max);
    m.finish();
  }
  if (const json* noise = top.object("noise")) {
    StrictObject n(*noise, context + ".noise");
    config.noise.p_miss_cam = n.number("p_miss_cam", config.noise.p_miss_cam);
    config.noise.occlusion_gain =
        n.number("occlusion_gain", config.noise.occlusion_gain);
    config.noise.fp_rate = n.number("fp_rate", config.noise.fp_rate);
    config.noise.sigma_loc = n.number("sigma_loc", config.noise.sigma_loc);
    config.noise.sigma_emb = n.number("sigma_emb", config.noise.sigma_emb);
    n.finish();
  }
  top.finish();

  check_range(config.n_pedestrians >= 0, context + ": pedestrians must be >= 0");
  check_range(config.duration > 0, context + ": duration must be positive");
  check_range(config.motion.speed_min > 0.0 &&
                  config.motion.speed_max >= config.motion.speed_min,
              context + ": need 0 < speed_min <= speed_max");
  check_range(config.noise.p_miss_cam >= 0.0 && config.noise.p_miss_cam <= 1.0,
              context + ": p_miss_cam must be in [0, 1]");
  check_range(config.noise.occlusion_gain >= 0.0,
              context + ": occlusion_gain must be >= 0");
  check_range(config.noise.fp_rate >= 0.0, context + ": fp_rate must be >= 0");
  check_range(config.noise.sigma_loc >= 0.0, context + ": sigma_loc must be >= 0");
  check_range(config.noise.sigma_emb >= 0.0, context + ": sigma_emb must be >= 0");
  return config;
}

assoc::TrackerConfig tracker_config_from_json(const json& root,
                                              const std::string& context) {
  StrictObject top(root, context);
  assoc::TrackerConfig config;
  config.lambda = top.number("lambda", config.lambda);
  config.tau1 = top.number("tau1", config.tau1);
  config.tau2 = top.number("tau2", config.tau2);
  config.max_age = top.integer("max_age", config.max_age);
  config.det_threshold = top.number("det_threshold", config.det_threshold);
  config.gate_threshold = top.number("gate_threshold", config.gate_threshold);
  config.ema_alpha = top.number("ema_alpha", config.ema_alpha);
  config.min_hits = top.integer("min_hits", config.min_hits);
  config.noise.initial_pos_std =
      top.number("initial_pos_std", config.noise.initial_pos_std);
  config.noise.initial_vel_std =
      top.number("initial_vel_std", config.noise.initial_vel_std);
  config.noise.process_pos_std =
      top.number("process_pos_std", config.noise.process_pos_std);
  config.noise.process_vel_std =
      top.number("process_vel_std", config.noise.process_vel_std);
  config.noise.measurement_std =
      top.number("measurement_std", config.noise.measurement_std);
  top.finish();

  check_range(config.lambda >= 0.0 && config.lambda <= 1.0,
              context + ": lambda must be in [0, 1]");
  check_range(config.tau1 >= 0.0, context + ": tau1 must be >= 0");
  check_range(config.tau2 >= 0.0, context + ": tau2 must be >= 0");
  check_range(config.max_age >= 0, context + ": max_age must be >= 0");
  check_range(config.det_threshold >= 0.0 && config.det_threshold < 1.0,
              context + ": det_threshold must be in [0, 1)");
  check_range(config.gate_threshold > 0.0, context + ": gate_threshold must be > 0");
  check_range(config.ema_alpha >= 0.0 && config.ema_alpha <= 1.0,
              context + ": ema_alpha must be in [0, 1]");
  check_range(config.min_hits >= 1, context + ": min_hits must be >= 1");
  check_range(config.noise.initial_pos_std > 0.0 &&
                  config.noise.initial_vel_std > 0.0 &&
                  config.noise.process_pos_std > 0.0 &&
                  config.noise.process_vel_std > 0.0 &&
                  config.noise.measurement_std > 0.0,
              context + ": noise standard deviations must be positive");
  return config;
}

json parse_config_text(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(context + ": invalid JSON: " + e.what());
  }
}

}  // namespace

sim::ScenarioConfig parse_scenario_config(const std::string& text) {
  return scenario_config_from_json(parse_config_text(text, "scenario config"),
                                   "scenario config");
}

sim::ScenarioConfig read_scenario_config(const std::filesystem::path& path) {
  return scenario_config_from_json(
      parse_config_text(read_text_file(path), path.string()), path.string());
}

assoc::TrackerConfig parse_tracker_config(const std::string& text) {
  return tracker_config_from_json(parse_config_text(text, "tracker config"),
                                  "tracker config");
}

assoc::TrackerConfig read_tracker_config(const std::filesystem::path& path) {
  return tracker_config_from_json(
      parse_config_text(read_text_file(path), path.string()), path.string());
}

std::string scenario_config_json(const sim::ScenarioConfig& config) {
  ordered_json j;
  j["preset"] = preset_name(config.preset);
  j["pedestrians"] = config.n_pedestrians;
  j["duration"] = config.duration;
  j["seed"] = config.noise.seed;
  j["motion"] = {{"speed_min", config.motion.speed_min},
                 {"speed_max", config.motion.speed_max}};
  j["noise"] = {{"p_miss_cam", config.noise.p_miss_cam},
                {"occlusion_gain", config.noise.occlusion_gain},
                {"fp_rate", config.noise.fp_rate},
                {"sigma_loc", config.noise.sigma_loc},
                {"sigma_emb", config.noise.sigma_emb}};
  return j.dump(2) + "\n";
}

std::string tracker_config_json(const assoc::TrackerConfig& config) {
  ordered_json j;
  j["lambda"] = config.lambda;
  j["tau1"] = config.tau1;
  j["tau2"] = config.tau2;
  j["max_age"] = config.max_age;
  j["det_threshold"] = config.det_threshold;
  j["gate_threshold"] = config.gate_threshold;
  j["ema_alpha"] = config.ema_alpha;
  j["min_hits"] = config.min_hits;
  j["initial_pos_std"] = config.noise.initial_pos_std;
  j["initial_vel_std"] = config.noise.initial_vel_std;
  j["process_pos_std"] = config.noise.process_pos_std;
  j["process_vel_std"] = config.noise.process_vel_std;
  j["measurement_std"] = config.noise.measurement_std;
  return j.dump(2) + "\n";
}

std::string preset_name(sim::RigPreset preset) {
  switch (preset) {
    case sim::RigPreset::kWildtrackLike:
      return "wildtrack-like";
    case sim::RigPreset::kMultiviewxLike:
      return "multiviewx-like";
  }
  throw ConfigError("unknown rig preset");
}

sim::RigPreset parse_preset(const std::string& name) {
  if (name == "wildtrack-like") return sim::RigPreset::kWildtrackLike;
  if (name == "multiviewx-like") return sim::RigPreset::kMultiviewxLike;
  throw ConfigError("unknown preset \"" + name +
                    "\" (expected wildtrack-like or multiviewx-like)");
}

std::string metrics_json(const metrics::MetricsReport& report) {
  ordered_json j;
  j["moda"] = report.detection.moda;
  j["modp"] = report.detection.modp;
  j["precision"] = report.detection.precision;
  j["recall"] = report.detection.recall;
  j["mota"] = report.tracking.mota;
  j["motp"] = report.tracking.motp;
  j["idf1"] = report.tracking.idf1;
  j["mt"] = report.tracking.mt;
  j["ml"] = report.tracking.ml;
  j["idsw"] = report.tracking.idsw;
  j["fp"] = report.tracking.fp;
  j["fn"] = report.tracking.fn;
  j["gt_count"] = report.tracking.gt_count;
  return j.dump(2) + "\n";
}

void write_metrics_json(const std::filesystem::path& path,
                        const metrics::MetricsReport& report) {
  write_text_file(path, metrics_json(report));
}

std::string metrics_tsv_header() {
  return "MODA\tMODP\tPrecision\tRecall\tMOTA\tMOTP\tIDF1\tMT\tML\tIDSW\tFP\tFN\tGT\n";
}

std::string metrics_tsv(const metrics::MetricsReport& report) {
  std::ostringstream out;
  out << format_percent1(report.detection.moda) << '\t'
      << format_percent1(report.detection.modp) << '\t'
      << format_percent1(report.detection.precision) << '\t'
      << format_percent1(report.detection.recall) << '\t'
      << format_percent1(report.tracking.mota) << '\t'
      << format_percent1(report.tracking.motp) << '\t'
      << format_percent1(report.tracking.idf1) << '\t'
      << format_percent1(report.tracking.mt) << '\t'
      << format_percent1(report.tracking.ml) << '\t' << report.tracking.idsw
      << '\t' << report.tracking.fp << '\t' << report.tracking.fn << '\t'
      << report.tracking.gt_count << '\n';
  return out.str();
}

}  // namespace bevtrack::io
