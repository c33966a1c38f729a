#include "bevtrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bevtrack/errors.hpp"

namespace bevtrack::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool in_image(const geometry::CameraModel& camera, const Eigen::Vector2d& uv) {
  return uv.x() >= 0.0 && uv.x() < camera.intrinsics.image_width &&
         uv.y() >= 0.0 && uv.y() < camera.intrinsics.image_height;
}

Eigen::Vector2d clamp_to_area(const Eigen::Vector2d& p, double ax, double ay) {
  return {std::clamp(p.x(), 0.0, ax), std::clamp(p.y(), 0.0, ay)};
}

Eigen::VectorXd normalized_or_fallback(Eigen::VectorXd v) {
  const double norm = v.norm();
  if (norm < 1e-12) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

}  // namespace

geometry::CameraModel make_perimeter_camera(const Eigen::Vector3d& position,
                                            const Eigen::Vector3d& target, int id) {
  geometry::CameraIntrinsics intrinsics;
  intrinsics.image_width = kImageWidth;
  intrinsics.image_height = kImageHeight;
  intrinsics.fx = (kImageWidth / 2.0) / std::tan(kHorizontalFovDeg * kPi / 360.0);
  intrinsics.fy = intrinsics.fx;  // square pixels
  intrinsics.cx = kImageWidth / 2.0;
  intrinsics.cy = kImageHeight / 2.0;

  // Right-handed camera basis: x right, y down, z forward.
  const Eigen::Vector3d forward = (target - position).normalized();
  const Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d down = forward.cross(right);

  geometry::CameraExtrinsics extrinsics;
  extrinsics.rotation.row(0) = right;
  extrinsics.rotation.row(1) = down;
  extrinsics.rotation.row(2) = forward;
  extrinsics.translation = -(extrinsics.rotation * position);
  return geometry::compose_projection(intrinsics, extrinsics, id);
}

CameraRig default_rig(RigPreset preset) {
  CameraRig rig;
  std::vector<Eigen::Vector2d> anchors;
  switch (preset) {
    case RigPreset::kWildtrackLike:
      rig.area_x = 12.0;
      rig.area_y = 36.0;
      anchors = {{0.0, 0.0},  {6.0, 0.0},  {12.0, 0.0}, {12.0, 36.0},
                 {6.0, 36.0}, {0.0, 36.0}, {0.0, 18.0}};
      break;
    case RigPreset::kMultiviewxLike:
      rig.area_x = 16.0;
      rig.area_y = 25.0;
      anchors = {{0.0, 0.0},   {8.0, 0.0},  {16.0, 0.0},
                 {16.0, 25.0}, {8.0, 25.0}, {0.0, 25.0}};
      break;
  }
  rig.fps = 2.0;

  const Eigen::Vector3d centroid(rig.area_x / 2.0, rig.area_y / 2.0, 0.0);
  int id = 0;
  for (const auto& a : anchors) {
    rig.cameras.push_back(make_perimeter_camera(
        Eigen::Vector3d(a.x(), a.y(), kCameraHeight), centroid, id++));
  }

  const auto stats = coverage_scan(rig, default_grid(rig));
  if (stats.min_cameras < 1) {
    throw ValidationError("preset rig leaves part of the area unobserved");
  }
  return rig;
}

geometry::GroundGrid default_grid(const CameraRig& rig, double cell_size) {
  geometry::GroundGrid grid;
  grid.origin_x = 0.0;
  grid.origin_y = 0.0;
  grid.cell_size = cell_size;
  grid.rows = static_cast<int>(std::lround(rig.area_x / cell_size));
  grid.cols = static_cast<int>(std::lround(rig.area_y / cell_size));
  return grid;
}

CoverageStats coverage_scan(const CameraRig& rig, const geometry::GroundGrid& grid) {
  geometry::validate(grid);
  CoverageStats stats;
  stats.min_cameras = static_cast<int>(rig.cameras.size());
  double total = 0.0;
  std::vector<long> per_camera(rig.cameras.size(), 0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Eigen::Vector2d center = geometry::grid_to_world(grid, r, c, 0.5, 0.5);
      int count = 0;
      for (std::size_t k = 0; k < rig.cameras.size(); ++k) {
        const auto uv = geometry::try_project_world_to_image(
            rig.cameras[k], Eigen::Vector3d(center.x(), center.y(), 0.0));
        if (uv && in_image(rig.cameras[k], uv->uv)) {
          ++count;
          ++per_camera[k];
        }
      }
      stats.min_cameras = std::min(stats.min_cameras, count);
      total += count;
    }
  }
  stats.mean_cameras = total / (static_cast<double>(grid.rows) * grid.cols);
  for (std::size_t k = 0; k < per_camera.size(); ++k) {
    if (per_camera[k] == 0) {
      throw ValidationError("camera " + std::to_string(k) +
                            " does not observe any cell of the area");
    }
  }
  return stats;
}

Scenario generate_scenario(const CameraRig& rig, int n_pedestrians, int duration,
                           const MotionParams& motion, Rng& rng) {
  if (n_pedestrians < 0 || duration <= 0) {
    throw ValidationError("scenario needs a positive duration");
  }
  if (!(motion.speed_min > 0.0) || motion.speed_max < motion.speed_min) {
    throw ValidationError("speed range must satisfy 0 < speed_min <= speed_max");
  }

  Scenario scenario;
  scenario.rig = rig;
  scenario.duration = duration;
  for (int p = 0; p < n_pedestrians; ++p) {
    Trajectory traj;
    traj.id = p;
    traj.positions.reserve(duration);

    Eigen::Vector2d pos(rng.uniform(0.0, rig.area_x), rng.uniform(0.0, rig.area_y));
    Eigen::Vector2d target(rng.uniform(0.0, rig.area_x), rng.uniform(0.0, rig.area_y));
    double speed = rng.uniform(motion.speed_min, motion.speed_max);
    traj.positions.push_back(pos);

    for (int f = 1; f < duration; ++f) {
      double budget = speed / rig.fps;  // meters available this frame
      while (budget > 0.0) {
        const Eigen::Vector2d to_target = target - pos;
        const double dist = to_target.norm();
        if (dist < 1e-12) {
          target = {rng.uniform(0.0, rig.area_x), rng.uniform(0.0, rig.area_y)};
          speed = rng.uniform(motion.speed_min, motion.speed_max);
          continue;
        }
        if (dist <= budget) {
          pos = target;
          budget -= dist;
          target = {rng.uniform(0.0, rig.area_x), rng.uniform(0.0, rig.area_y)};
          speed = rng.uniform(motion.speed_min, motion.speed_max);
        } else {
          pos += to_target * (budget / dist);
          budget = 0.0;
        }
      }
      pos = clamp_to_area(pos, rig.area_x, rig.area_y);
      traj.positions.push_back(pos);
    }
    scenario.pedestrians.push_back(std::move(traj));
  }
  return scenario;
}

Scenario crossing_scenario(const CameraRig& rig, int duration) {
  if (duration < 2) {
    throw ValidationError("crossing scenario needs at least two frames");
  }
  const double cx = rig.area_x / 2.0;
  const double cy = rig.area_y / 2.0;
  const double half_span = std::min(4.0, cx - 1.0);

  Scenario scenario;
  scenario.rig = rig;
  scenario.duration = duration;
  for (int p = 0; p < 2; ++p) {
    Trajectory traj;
    traj.id = p;
    const double from = p == 0 ? cx - half_span : cx + half_span;
    const double to = p == 0 ? cx + half_span : cx - half_span;
    for (int f = 0; f < duration; ++f) {
      const double t = static_cast<double>(f) / (duration - 1);
      traj.positions.emplace_back(from + (to - from) * t, cy);
    }
    scenario.pedestrians.push_back(std::move(traj));
  }
  return scenario;
}

Scenario build_scenario(const ScenarioConfig& config) {
  Rng rng = Rng(config.noise.seed).substream("scenario");
  return generate_scenario(default_rig(config.preset), config.n_pedestrians,
                           config.duration, config.motion, rng);
}

Eigen::VectorXd identity_embedding(std::uint64_t seed, int identity, int dim) {
  if (dim <= 0) throw ValidationError("embedding dimension must be positive");
  Rng rng = Rng(seed).substream("identity").substream(
      static_cast<std::uint64_t>(identity));
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return normalized_or_fallback(std::move(v));
}

std::vector<GroundTruthPoint> ground_truth_frame(const Scenario& scenario, int frame) {
  if (frame < 0 || frame >= scenario.duration) {
    throw OutOfBoundsError("frame " + std::to_string(frame) +
                           " outside scenario duration");
  }
  std::vector<GroundTruthPoint> gt;
  gt.reserve(scenario.pedestrians.size());
  for (const auto& ped : scenario.pedestrians) {
    const auto& p = ped.positions.at(frame);
    gt.push_back({ped.id, p.x(), p.y()});
  }
  return gt;
}

std::vector<DetectionRecord> observe_frame(const Scenario& scenario, int frame,
                                           const NoiseModel& noise) {
  if (frame < 0 || frame >= scenario.duration) {
    throw OutOfBoundsError("frame " + std::to_string(frame) +
                           " outside scenario duration");
  }
  Rng frame_rng = Rng(noise.seed).substream("observe").substream(
      static_cast<std::uint64_t>(frame));

  const auto& cameras = scenario.rig.cameras;
  const std::size_t n_peds = scenario.pedestrians.size();
  const std::size_t n_cams = cameras.size();

  // Geometric projections for every (pedestrian, camera) pair.
  struct Projected {
    bool has_depth = false;  // positive projective depth
    bool visible = false;    // has_depth and inside the image
    Eigen::Vector2d uv = Eigen::Vector2d::Zero();
    double depth = 0.0;
  };
  std::vector<std::vector<Projected>> proj(n_peds, std::vector<Projected>(n_cams));
  for (std::size_t q = 0; q < n_peds; ++q) {
    const auto& p = scenario.pedestrians[q].positions[frame];
    const Eigen::Vector3d world(p.x(), p.y(), 0.0);
    for (std::size_t c = 0; c < n_cams; ++c) {
      if (const auto image = geometry::try_project_world_to_image(cameras[c], world)) {
        proj[q][c] = {true, in_image(cameras[c], image->uv), image->uv, image->depth};
      }
    }
  }

  std::vector<DetectionRecord> detections;
  for (std::size_t q = 0; q < n_peds; ++q) {
    bool seen = false;
    for (std::size_t c = 0; c < n_cams; ++c) {
      if (!proj[q][c].visible) continue;
      // Occluders: other pedestrians projecting nearby at smaller depth.
      int occluders = 0;
      for (std::size_t o = 0; o < n_peds; ++o) {
        if (o == q || !proj[o][c].has_depth) continue;
        if (proj[o][c].depth < proj[q][c].depth &&
            (proj[o][c].uv - proj[q][c].uv).norm() <= kOcclusionRadiusPx) {
          ++occluders;
        }
      }
      const double p_miss =
          std::min(1.0, noise.p_miss_cam + noise.occlusion_gain * occluders);
      if (!frame_rng.bernoulli(p_miss)) seen = true;
    }
    if (!seen) continue;

    const auto& p = scenario.pedestrians[q].positions[frame];
    DetectionRecord det;
    det.x = p.x() + noise.sigma_loc * frame_rng.normal();
    det.y = p.y() + noise.sigma_loc * frame_rng.normal();
    det.score = 1.0 - 0.2 * frame_rng.uniform();

    Eigen::VectorXd emb =
        identity_embedding(noise.seed, scenario.pedestrians[q].id);
    Eigen::VectorXd emb_noise(emb.size());
    for (int i = 0; i < emb.size(); ++i) emb_noise(i) = frame_rng.normal();
    det.embedding = noise.sigma_emb > 0.0
                        ? normalized_or_fallback(emb + noise.sigma_emb * emb_noise)
                        : std::move(emb);
    detections.push_back(std::move(det));
  }

  const int n_fp = frame_rng.poisson(noise.fp_rate);
  for (int k = 0; k < n_fp; ++k) {
    DetectionRecord det;
    det.x = frame_rng.uniform(0.0, scenario.rig.area_x);
    det.y = frame_rng.uniform(0.0, scenario.rig.area_y);
    Eigen::VectorXd emb(kEmbeddingDim);
    for (int i = 0; i < kEmbeddingDim; ++i) emb(i) = frame_rng.normal();
    det.embedding = normalized_or_fallback(std::move(emb));
    det.score = frame_rng.uniform(0.4, 0.7);
    detections.push_back(std::move(det));
  }
  return detections;
}

}  // namespace bevtrack::sim
