#include "bevtrack/metrics.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "bevtrack/assignment.hpp"
#include "bevtrack/errors.hpp"

namespace bevtrack::metrics {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FrameMatch match_frame(const std::vector<Eigen::Vector2d>& gt,
                       const std::vector<Eigen::Vector2d>& predictions,
                       double radius) {
  if (!(radius > 0.0)) throw ValidationError("match radius must be positive");

  Eigen::MatrixXd cost(gt.size(), predictions.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < predictions.size(); ++j) {
      const double d = (gt[i] - predictions[j]).norm();
      cost(i, j) = d <= radius ? d : kInf;
    }
  }
  const assoc::Assignment assignment = assoc::hungarian(cost);

  FrameMatch match;
  match.pairs = assignment.matches;
  match.unmatched_gt = assignment.unmatched_rows;
  match.unmatched_pred = assignment.unmatched_cols;
  match.total_distance = assignment.total_cost;
  return match;
}

namespace {

std::vector<Eigen::Vector2d> positions_of(const std::vector<TrackPoint>& points) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.position());
  return out;
}

/// Frames appearing in either map, ascending.
std::set<int> frame_union(const FrameMap& a, const FrameMap& b) {
  std::set<int> frames;
  for (const auto& [f, _] : a) frames.insert(f);
  for (const auto& [f, _] : b) frames.insert(f);
  return frames;
}

const std::vector<TrackPoint>& at_or_empty(const FrameMap& map, int frame) {
  static const std::vector<TrackPoint> empty;
  const auto it = map.find(frame);
  return it == map.end() ? empty : it->second;
}

long total_points(const FrameMap& map) {
  long n = 0;
  for (const auto& [_, points] : map) n += static_cast<long>(points.size());
  return n;
}

}  // namespace

DetectionMetrics detection_metrics(const FrameMap& gt, const FrameMap& predictions,
                                   double radius) {
  DetectionMetrics m;
  double modp_sum = 0.0;
  for (const int frame : frame_union(gt, predictions)) {
    const auto& g = at_or_empty(gt, frame);
    const auto& p = at_or_empty(predictions, frame);
    const FrameMatch match = match_frame(positions_of(g), positions_of(p), radius);

    m.tp += static_cast<long>(match.pairs.size());
    m.fn += static_cast<long>(match.unmatched_gt.size());
    m.fp += static_cast<long>(match.unmatched_pred.size());
    m.gt += static_cast<long>(g.size());
    for (const auto& [i, j] : match.pairs) {
      modp_sum += 1.0 - (g[i].position() - p[j].position()).norm() / radius;
    }
  }
  if (m.gt == 0) {
    throw UndefinedMetricError("detection metrics need non-empty ground truth");
  }
  // (TP - FP) / GT equals 1 - (FN + FP) / GT since TP + FN = GT; this form
  // keeps MODA bitwise equal to recall when FP = 0.
  m.moda = static_cast<double>(m.tp - m.fp) / static_cast<double>(m.gt);
  m.modp = m.tp > 0 ? modp_sum / static_cast<double>(m.tp) : 0.0;
  m.precision = (m.tp + m.fp) > 0
                    ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp)
                    : 1.0;
  m.recall = static_cast<double>(m.tp) / static_cast<double>(m.gt);
  return m;
}

TrackingMetrics clear_mot(const FrameMap& gt, const FrameMap& predictions,
                          double radius) {
  if (!(radius > 0.0)) throw ValidationError("match radius must be positive");

  TrackingMetrics m;
  double distance_sum = 0.0;
  long tp = 0;
  std::map<int, int> corr;        // gt id -> track id, persisted across frames
  std::map<int, long> present;    // frames each gt id appears in
  std::map<int, long> covered;    // frames each gt id is matched in

  for (const int frame : frame_union(gt, predictions)) {
    const auto& g = at_or_empty(gt, frame);
    const auto& p = at_or_empty(predictions, frame);
    m.gt_count += static_cast<long>(g.size());
    for (const auto& point : g) present[point.id] += 1;

    std::map<int, int> gt_index;    // id -> index in g
    std::map<int, int> pred_index;  // id -> index in p
    for (std::size_t i = 0; i < g.size(); ++i) gt_index[g[i].id] = static_cast<int>(i);
    for (std::size_t j = 0; j < p.size(); ++j) pred_index[p[j].id] = static_cast<int>(j);

    std::vector<char> gt_used(g.size(), 0), pred_used(p.size(), 0);

    // Keep earlier correspondences that still hold within the radius.
    for (const auto& [gt_id, track_id] : corr) {
      const auto gi = gt_index.find(gt_id);
      const auto pj = pred_index.find(track_id);
      if (gi == gt_index.end() || pj == pred_index.end()) continue;
      if (gt_used[gi->second] || pred_used[pj->second]) continue;
      const double d =
          (g[gi->second].position() - p[pj->second].position()).norm();
      if (d > radius) continue;
      gt_used[gi->second] = 1;
      pred_used[pj->second] = 1;
      distance_sum += d;
      ++tp;
      covered[gt_id] += 1;
    }

    // Re-match the remainder by minimum distance.
    std::vector<int> free_gt, free_pred;
    std::vector<Eigen::Vector2d> free_gt_pos, free_pred_pos;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!gt_used[i]) {
        free_gt.push_back(static_cast<int>(i));
        free_gt_pos.push_back(g[i].position());
      }
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!pred_used[j]) {
        free_pred.push_back(static_cast<int>(j));
        free_pred_pos.push_back(p[j].position());
      }
    }
    const FrameMatch match = match_frame(free_gt_pos, free_pred_pos, radius);
    for (const auto& [a, b] : match.pairs) {
      const TrackPoint& gt_point = g[free_gt[a]];
      const TrackPoint& pred_point = p[free_pred[b]];
      distance_sum += (gt_point.position() - pred_point.position()).norm();
      ++tp;
      covered[gt_point.id] += 1;
      const auto previous = corr.find(gt_point.id);
      if (previous != corr.end() && previous->second != pred_point.id) {
        m.idsw += 1;
      }
      corr[gt_point.id] = pred_point.id;
      gt_used[free_gt[a]] = 1;
      pred_used[free_pred[b]] = 1;
    }

    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!gt_used[i]) m.fn += 1;
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!pred_used[j]) m.fp += 1;
    }
  }

  if (m.gt_count == 0) {
    throw UndefinedMetricError("tracking metrics need non-empty ground truth");
  }
  m.mota = static_cast<double>(m.gt_count - m.fn - m.fp - m.idsw) /
           static_cast<double>(m.gt_count);
  m.motp = tp > 0 ? 1.0 - (distance_sum / static_cast<double>(tp)) / radius : 0.0;

  long mostly_tracked = 0, mostly_lost = 0;
  for (const auto& [gt_id, n_present] : present) {
    const double ratio =
        static_cast<double>(covered[gt_id]) / static_cast<double>(n_present);
    if (ratio >= 0.8) ++mostly_tracked;
    if (ratio <= 0.2) ++mostly_lost;
  }
  m.mt = static_cast<double>(mostly_tracked) / static_cast<double>(present.size());
  m.ml = static_cast<double>(mostly_lost) / static_cast<double>(present.size());
  m.idf1 = idf1(gt, predictions, radius);
  return m;
}

double idf1(const FrameMap& gt, const FrameMap& predictions, double radius) {
  if (!(radius > 0.0)) throw ValidationError("match radius must be positive");

  const long gt_total = total_points(gt);
  const long pred_total = total_points(predictions);
  if (gt_total == 0) {
    throw UndefinedMetricError("IDF1 needs non-empty ground truth");
  }

  // hits(g, t): frames where identity g and track t are both present within
  // the radius of each other.
  std::map<int, int> gt_ids, pred_ids;
  for (const auto& [_, points] : gt) {
    for (const auto& point : points) gt_ids.emplace(point.id, 0);
  }
  for (const auto& [_, points] : predictions) {
    for (const auto& point : points) pred_ids.emplace(point.id, 0);
  }
  int next = 0;
  for (auto& [_, index] : gt_ids) index = next++;
  next = 0;
  for (auto& [_, index] : pred_ids) index = next++;

  Eigen::MatrixXd hits = Eigen::MatrixXd::Zero(
      static_cast<int>(gt_ids.size()), static_cast<int>(pred_ids.size()));
  for (const auto& [frame, g] : gt) {
    const auto& p = at_or_empty(predictions, frame);
    for (const auto& gt_point : g) {
      for (const auto& pred_point : p) {
        if ((gt_point.position() - pred_point.position()).norm() <= radius) {
          hits(gt_ids[gt_point.id], pred_ids[pred_point.id]) += 1.0;
        }
      }
    }
  }

  // Maximum-weight one-to-one pairing of identities.
  const assoc::Assignment assignment = assoc::hungarian(-hits);
  const double idtp = -assignment.total_cost;
  return 2.0 * idtp / static_cast<double>(gt_total + pred_total);
}

}  // namespace bevtrack::metrics
