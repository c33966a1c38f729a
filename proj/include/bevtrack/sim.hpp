#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bevtrack/detection.hpp"
#include "bevtrack/geometry.hpp"
#include "bevtrack/rng.hpp"

namespace bevtrack::sim {

/// A set of calibrated cameras observing a rectangular ground area
/// [0, area_x] x [0, area_y] at z = 0.
struct CameraRig {
  std::vector<geometry::CameraModel> cameras;
  double area_x = 0.0;  // meters, world x (grid rows)
  double area_y = 0.0;  // meters, world y (grid columns)
  double fps = 2.0;
};

enum class RigPreset {
  kWildtrackLike,   // 7 cameras around a 12 x 36 m area
  kMultiviewxLike,  // 6 cameras around a 16 x 25 m area
};

struct MotionParams {
  double speed_min = 0.5;  // m/s
  double speed_max = 1.8;  // m/s
};

/// Observation noise.  All randomness in observe_frame derives from `seed`
/// via per-frame substreams, so frames can be produced in any order.
struct NoiseModel {
  double p_miss_cam = 0.0;     // per-camera miss probability
  double occlusion_gain = 0.0; // extra miss probability per occluding pedestrian
  double fp_rate = 0.0;        // Poisson mean of false positives per frame
  double sigma_loc = 0.0;      // position noise, meters
  double sigma_emb = 0.0;      // embedding noise before renormalization
  std::uint64_t seed = 0;
};

/// Everything needed to reproduce a simulated sequence.  The seed inside the
/// noise model is the single entropy source: scenario generation and
/// observation noise both derive named substreams from it.
struct ScenarioConfig {
  RigPreset preset = RigPreset::kWildtrackLike;
  int n_pedestrians = 20;
  int duration = 400;
  MotionParams motion;
  NoiseModel noise;
};

struct Trajectory {
  int id = 0;
  std::vector<Eigen::Vector2d> positions;  // one per frame
};

struct Scenario {
  CameraRig rig;
  int duration = 0;  // frames
  std::vector<Trajectory> pedestrians;
};

struct GroundTruthPoint {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct CoverageStats {
  int min_cameras = 0;     // over grid cell centers
  double mean_cameras = 0.0;
};

/// Fixed camera height and optics shared by the rig presets.
inline constexpr double kCameraHeight = 5.0;      // meters
inline constexpr double kHorizontalFovDeg = 60.0;
inline constexpr int kImageWidth = 1920;
inline constexpr int kImageHeight = 1080;
inline constexpr double kOcclusionRadiusPx = 40.0;

/// Camera looking from `position` toward `target` with the preset optics.
geometry::CameraModel make_perimeter_camera(const Eigen::Vector3d& position,
                                            const Eigen::Vector3d& target, int id);

/// Preset rig: cameras at area corners and edge midpoints, 5 m high, pitched
/// at the area centroid.  Construction verifies that every cell center of
/// the default grid is seen by at least one camera.
CameraRig default_rig(RigPreset preset);

/// Grid covering the rig area, world origin at (0, 0).
geometry::GroundGrid default_grid(const CameraRig& rig, double cell_size = 0.1);

/// Number of cameras whose image contains each cell center of `grid`.
CoverageStats coverage_scan(const CameraRig& rig, const geometry::GroundGrid& grid);

/// Pedestrians on independent waypoint walks: uniform start, uniform
/// waypoint, per-leg speed uniform in [speed_min, speed_max]; a new waypoint
/// and speed are drawn on arrival.  Trajectories are generated sequentially
/// per pedestrian from `rng`, so equal seeds give identical scenarios.
Scenario generate_scenario(const CameraRig& rig, int n_pedestrians, int duration,
                           const MotionParams& motion, Rng& rng);

/// Benchmark scenario: two pedestrians walking straight through each other,
/// swapping positions across the area centroid.
Scenario crossing_scenario(const CameraRig& rig, int duration);

/// Scenario from a config: preset rig plus generate_scenario seeded with the
/// config's "scenario" substream.
Scenario build_scenario(const ScenarioConfig& config);

/// Deterministic unit-norm appearance embedding for a ground-truth identity.
Eigen::VectorXd identity_embedding(std::uint64_t seed, int identity,
                                   int dim = kEmbeddingDim);

/// True pedestrian positions at one frame.
std::vector<GroundTruthPoint> ground_truth_frame(const Scenario& scenario, int frame);

/// Simulated detector output for one frame.  A pedestrian is detected iff at
/// least one camera sees it: the ground point projects inside the camera
/// image with positive depth and an independent Bernoulli miss with
/// probability min(1, p_miss_cam + occlusion_gain * k) does not fire, where
/// k counts other pedestrians projecting within kOcclusionRadiusPx at
/// strictly smaller depth.  Detected pedestrians get Gaussian position noise
/// (sigma_loc), a score in (0.8, 1.0], and their identity embedding with
/// Gaussian noise (sigma_emb) renormalized to unit length.  Poisson(fp_rate)
/// false positives are appended uniformly over the area with random unit
/// embeddings and scores in [0.4, 0.7).
std::vector<DetectionRecord> observe_frame(const Scenario& scenario, int frame,
                                           const NoiseModel& noise);

}  // namespace bevtrack::sim
