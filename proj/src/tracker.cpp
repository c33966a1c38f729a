#include "bevtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bevtrack/errors.hpp"

namespace bevtrack::assoc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ValidationError("embedding dimensions differ");
  }
  if (a == b) return 0.0;
  const double denom = a.norm() * b.norm();
  if (denom < 1e-12) {
    throw ValidationError("cosine distance of a zero-norm embedding");
  }
  const double cosine = std::clamp(a.dot(b) / denom, -1.0, 1.0);
  return 1.0 - cosine;
}

double fused_cost(double appearance_distance, double mahalanobis_squared,
                  const TrackerConfig& config) {
  if (mahalanobis_squared > config.gate_threshold) return kInf;
  return config.lambda * appearance_distance +
         (1.0 - config.lambda) * mahalanobis_squared;
}

AssociationResult associate_frame(const std::vector<Tracklet>& tracklets,
                                  const std::vector<DetectionRecord>& detections,
                                  const TrackerConfig& config) {
  const int n = static_cast<int>(tracklets.size());
  const int m = static_cast<int>(detections.size());
  const Eigen::Matrix2d r = config.noise.measurement_covariance();

  // Stage 1: gated fusion of appearance and motion.
  Eigen::MatrixXd cost(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const double d_app =
          cosine_distance(tracklets[i].embedding, detections[j].embedding);
      const double d_motion_sq =
          mahalanobis_sq(tracklets[i].state, detections[j].position(), r);
      cost(i, j) = fused_cost(d_app, d_motion_sq, config);
    }
  }
  AssociationResult result;
  result.stage1 = hungarian(cost);

  // Demote stage-1 matches above tau1 back into the leftover pools.
  {
    std::vector<std::pair<int, int>> kept;
    for (const auto& [i, j] : result.stage1.matches) {
      if (cost(i, j) > config.tau1) {
        result.stage1.unmatched_rows.push_back(i);
        result.stage1.unmatched_cols.push_back(j);
      } else {
        kept.emplace_back(i, j);
      }
    }
    result.stage1.matches = std::move(kept);
    std::sort(result.stage1.unmatched_rows.begin(), result.stage1.unmatched_rows.end());
    std::sort(result.stage1.unmatched_cols.begin(), result.stage1.unmatched_cols.end());
    result.stage1.total_cost = 0.0;
    for (const auto& [i, j] : result.stage1.matches) {
      result.stage1.total_cost += cost(i, j);
    }
  }

  // Stage 2: Euclidean rescue over the leftovers.
  const auto& rows = result.stage1.unmatched_rows;
  const auto& cols = result.stage1.unmatched_cols;
  Eigen::MatrixXd dist(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const Eigen::Vector2d predicted =
        tracklets[rows[a]].state.mean.head<2>();
    for (std::size_t b = 0; b < cols.size(); ++b) {
      dist(a, b) = (predicted - detections[cols[b]].position()).norm();
    }
  }
  Assignment stage2_local = hungarian(dist);

  // Map local indices back to the original vectors, demoting above tau2.
  result.stage2.total_cost = 0.0;
  for (const auto& [a, b] : stage2_local.matches) {
    if (dist(a, b) > config.tau2) {
      result.stage2.unmatched_rows.push_back(rows[a]);
      result.stage2.unmatched_cols.push_back(cols[b]);
    } else {
      result.stage2.matches.emplace_back(rows[a], cols[b]);
      result.stage2.total_cost += dist(a, b);
    }
  }
  for (const int a : stage2_local.unmatched_rows) {
    result.stage2.unmatched_rows.push_back(rows[a]);
  }
  for (const int b : stage2_local.unmatched_cols) {
    result.stage2.unmatched_cols.push_back(cols[b]);
  }
  std::sort(result.stage2.matches.begin(), result.stage2.matches.end());
  std::sort(result.stage2.unmatched_rows.begin(), result.stage2.unmatched_rows.end());
  std::sort(result.stage2.unmatched_cols.begin(), result.stage2.unmatched_cols.end());
  return result;
}

std::vector<TrackRow> Tracker::step(int frame,
                                    const std::vector<DetectionRecord>& detections) {
  if (started_ && frame <= last_frame_) {
    throw SequencingError("frame " + std::to_string(frame) +
                          " not after frame " + std::to_string(last_frame_));
  }
  started_ = true;
  last_frame_ = frame;

  for (auto& track : tracklets_) {
    track.state = kalman_predict(track.state, config_.noise);
  }

  std::vector<DetectionRecord> kept;
  for (const auto& det : detections) {
    if (det.score > config_.det_threshold) kept.push_back(det);
  }
  for (const auto& det : kept) {
    if (det.embedding.size() == 0 || det.embedding.norm() < 1e-12) {
      throw ValidationError("detection embedding is empty or zero-norm");
    }
  }

  const AssociationResult assoc = associate_frame(tracklets_, kept, config_);

  std::vector<TrackRow> rows;
  std::vector<char> matched(tracklets_.size(), 0);
  auto apply_match = [&](int i, int j) {
    Tracklet& track = tracklets_[i];
    const DetectionRecord& det = kept[j];
    track.state = kalman_update(track.state, det.position(), config_.noise);
    Eigen::VectorXd blended = config_.ema_alpha * track.embedding +
                              (1.0 - config_.ema_alpha) * det.embedding;
    const double norm = blended.norm();
    track.embedding = norm < 1e-12 ? det.embedding : (blended / norm).eval();
    track.hits += 1;
    track.time_since_update = 0;
    matched[i] = 1;
    if (track.hits >= config_.min_hits) {
      rows.push_back({frame, track.id, track.state.mean(0), track.state.mean(1),
                      det.score});
    }
  };
  for (const auto& [i, j] : assoc.stage1.matches) apply_match(i, j);
  for (const auto& [i, j] : assoc.stage2.matches) apply_match(i, j);

  // Age out tracks that stayed unmatched beyond max_age.
  std::vector<Tracklet> survivors;
  survivors.reserve(tracklets_.size());
  for (std::size_t i = 0; i < tracklets_.size(); ++i) {
    if (!matched[i]) tracklets_[i].time_since_update += 1;
    if (tracklets_[i].time_since_update <= config_.max_age) {
      survivors.push_back(std::move(tracklets_[i]));
    }
  }
  tracklets_ = std::move(survivors);

  // Unmatched detections found new tracks.
  for (const int j : assoc.stage2.unmatched_cols) {
    const DetectionRecord& det = kept[j];
    Tracklet track;
    track.id = next_id_++;
    track.state = kalman_initiate(det.position(), config_.noise);
    track.embedding = det.embedding.normalized();
    track.hits = 1;
    track.time_since_update = 0;
    if (track.hits >= config_.min_hits) {
      rows.push_back({frame, track.id, track.state.mean(0), track.state.mean(1),
                      det.score});
    }
    tracklets_.push_back(std::move(track));
  }

  std::sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
    return a.track_id < b.track_id;
  });
  return rows;
}

}  // namespace bevtrack::assoc
