#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bevtrack/assignment.hpp"
#include "bevtrack/detection.hpp"
#include "bevtrack/kalman.hpp"

namespace bevtrack::assoc {

struct TrackerConfig {
  double lambda = 0.98;          // appearance weight in the fused cost
  double tau1 = 0.4;             // stage-1 acceptance threshold (fused cost)
  double tau2 = 2.5;             // stage-2 acceptance threshold (meters)
  int max_age = 10;              // frames a track survives without a match
  double det_threshold = 0.4;    // detections with score <= this are dropped
  double gate_threshold = 5.9915;  // chi-square 95% quantile, 2 dof
  double ema_alpha = 0.9;        // embedding smoothing factor
  int min_hits = 1;              // matches required before a track emits rows
  KalmanNoise noise;
};

/// One maintained track.
struct Tracklet {
  int id = 0;
  KalmanState state;
  Eigen::VectorXd embedding;  // unit-norm, exponentially smoothed
  int hits = 0;
  int time_since_update = 0;
};

/// One output row: a track's posterior position at a frame.
struct TrackRow {
  int frame = 0;
  int track_id = 0;
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;  // score of the matched detection
};

/// Cosine distance 1 - cos(a, b) in [0, 2]; inputs need not be unit norm.
/// Throws ValidationError on zero-norm input.
double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Appearance-motion fusion: lambda * d_appearance + (1 - lambda) * d_motion_sq,
/// or +infinity when the squared Mahalanobis distance exceeds the gate.
double fused_cost(double appearance_distance, double mahalanobis_squared,
                  const TrackerConfig& config);

/// Two-stage association between predicted tracklets and detections.
/// Stage 1 minimizes the gated fused cost and demotes matches whose cost is
/// strictly above tau1; stage 2 re-matches the leftovers by plain Euclidean
/// distance, demoting above tau2.  Indices in both results refer to the
/// original input vectors.
struct AssociationResult {
  Assignment stage1;
  Assignment stage2;
};
AssociationResult associate_frame(const std::vector<Tracklet>& tracklets,
                                  const std::vector<DetectionRecord>& detections,
                                  const TrackerConfig& config);

/// Online multi-object tracker over ground-plane detections.
class Tracker {
 public:
  explicit Tracker(const TrackerConfig& config = {}) : config_(config) {}

  /// Advances one frame: predicts all tracks, drops low-score detections,
  /// associates in two stages, updates matched tracks (Kalman + embedding
  /// EMA), ages unmatched ones out after max_age frames, and starts new
  /// tracks on unmatched detections.  Returns one row per track matched this
  /// frame (subject to min_hits).  Frames must be presented in strictly
  /// increasing order; violations throw SequencingError.
  std::vector<TrackRow> step(int frame, const std::vector<DetectionRecord>& detections);

  const TrackerConfig& config() const { return config_; }
  const std::vector<Tracklet>& tracklets() const { return tracklets_; }

 private:
  TrackerConfig config_;
  std::vector<Tracklet> tracklets_;
  int next_id_ = 1;
  bool started_ = false;
  int last_frame_ = 0;
};

}  // namespace bevtrack::assoc
