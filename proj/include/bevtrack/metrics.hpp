#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

namespace bevtrack::metrics {

/// One identified object at one frame.
struct TrackPoint {
  int id = 0;
  double x = 0.0;
  double y = 0.0;

  Eigen::Vector2d position() const { return {x, y}; }
};

/// Objects per frame, keyed by frame index.
using FrameMap = std::map<int, std::vector<TrackPoint>>;

/// Default match radii in meters.
inline constexpr double kDetectionRadius = 0.5;
inline constexpr double kTrackingRadius = 1.0;

/// Minimum-distance bipartite matching between ground truth and predictions
/// at one frame.  A pair may match only when its distance is <= radius
/// (boundary inclusive); among valid pairings the total distance is minimal.
struct FrameMatch {
  std::vector<std::pair<int, int>> pairs;  // (gt index, prediction index)
  std::vector<int> unmatched_gt;
  std::vector<int> unmatched_pred;
  double total_distance = 0.0;  // over matched pairs
};
FrameMatch match_frame(const std::vector<Eigen::Vector2d>& gt,
                       const std::vector<Eigen::Vector2d>& predictions,
                       double radius);

/// Frame-independent detection quality.  Throws UndefinedMetricError when
/// the ground truth is empty.
struct DetectionMetrics {
  double moda = 0.0;       // 1 - (FN + FP) / GT; can be negative
  double modp = 0.0;       // mean over TPs of (1 - d / radius); 0 without TPs
  double precision = 0.0;  // TP / (TP + FP); 1 when nothing was predicted
  double recall = 0.0;     // TP / GT
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long gt = 0;
};
DetectionMetrics detection_metrics(const FrameMap& gt, const FrameMap& predictions,
                                   double radius = kDetectionRadius);

/// Identity-aware tracking quality.  Correspondences established in earlier
/// frames persist while the pair stays within the radius; the remainder is
/// re-matched per frame by minimum distance.  An identity switch is counted
/// when a ground-truth id's matched track id differs between its consecutive
/// matched frames.  Throws UndefinedMetricError when the ground truth is
/// empty.
struct TrackingMetrics {
  double mota = 0.0;  // 1 - (FN + FP + IDSW) / GT
  double motp = 0.0;  // 1 - mean TP distance / radius; 0 without TPs
  double idf1 = 0.0;
  double mt = 0.0;    // fraction of GT ids matched on >= 80% of their frames
  double ml = 0.0;    // fraction of GT ids matched on <= 20% of their frames
  long idsw = 0;
  long fp = 0;
  long fn = 0;
  long gt_count = 0;
};
TrackingMetrics clear_mot(const FrameMap& gt, const FrameMap& predictions,
                          double radius = kTrackingRadius);

/// Global identity measure: ground-truth and predicted identities are paired
/// one-to-one to maximize the number of frame-wise hits within the radius;
/// IDF1 = 2 IDTP / (total GT points + total predicted points).
double idf1(const FrameMap& gt, const FrameMap& predictions,
            double radius = kTrackingRadius);

/// Detection and tracking metrics side by side, as written to metrics.json.
struct MetricsReport {
  DetectionMetrics detection;
  TrackingMetrics tracking;
};

}  // namespace bevtrack::metrics
