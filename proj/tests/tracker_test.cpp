#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "bevtrack/errors.hpp"
#include "bevtrack/rng.hpp"
#include "bevtrack/sim.hpp"
#include "bevtrack/tracker.hpp"

using namespace bevtrack;
using assoc::Tracker;
using assoc::TrackerConfig;
using assoc::Tracklet;

namespace {

DetectionRecord make_detection(double x, double y, int emb_axis,
                               double score = 0.95) {
  DetectionRecord det;
  det.x = x;
  det.y = y;
  det.score = score;
  det.embedding = Eigen::VectorXd::Unit(kEmbeddingDim, emb_axis);
  return det;
}

Tracklet make_tracklet(int id, double x, double y, int emb_axis,
                       const TrackerConfig& config) {
  Tracklet t;
  t.id = id;
  t.state = assoc::kalman_initiate({x, y}, config.noise);
  t.embedding = Eigen::VectorXd::Unit(kEmbeddingDim, emb_axis);
  t.hits = 1;
  return t;
}

}  // namespace

TEST_SUITE("tracker") {
  TEST_CASE("cosine distance endpoints") {
    const Eigen::VectorXd a = Eigen::VectorXd::Unit(8, 0);
    const Eigen::VectorXd b = Eigen::VectorXd::Unit(8, 1);
    CHECK(assoc::cosine_distance(a, a) == 0.0);
    CHECK(assoc::cosine_distance(a, b) == 1.0);
    CHECK(assoc::cosine_distance(a, (-a).eval()) == 2.0);
    // Scale invariance: distance works on non-unit inputs.
    CHECK(assoc::cosine_distance((3.0 * a).eval(), (0.5 * a).eval()) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(assoc::cosine_distance(a, Eigen::VectorXd::Zero(8)),
                    ValidationError);
    CHECK_THROWS_AS(assoc::cosine_distance(a, Eigen::VectorXd::Unit(9, 0)),
                    ValidationError);
  }

  TEST_CASE("fused cost blends appearance and gated motion") {
    TrackerConfig config;
    CHECK(assoc::fused_cost(0.5, 6.5, config) ==
          std::numeric_limits<double>::infinity());
    CHECK(assoc::fused_cost(0.5, 1.0, config) ==
          doctest::Approx(0.51).epsilon(1e-12));
    // The gate boundary itself is allowed.
    CHECK(std::isfinite(assoc::fused_cost(0.5, config.gate_threshold, config)));

    TrackerConfig pure_appearance = config;
    pure_appearance.lambda = 1.0;
    CHECK(assoc::fused_cost(0.37, 2.0, pure_appearance) == 0.37);

    TrackerConfig pure_motion = config;
    pure_motion.lambda = 0.0;
    CHECK(assoc::fused_cost(0.37, 2.0, pure_motion) == 2.0);
  }

  TEST_CASE("fused cost is monotone below the gate") {
    TrackerConfig config;
    double last = -1.0;
    for (double d_app = 0.0; d_app <= 2.0; d_app += 0.25) {
      const double cost = assoc::fused_cost(d_app, 1.0, config);
      CHECK(cost > last);
      last = cost;
    }
    last = -1.0;
    for (double d_m = 0.0; d_m <= 5.5; d_m += 0.5) {
      const double cost = assoc::fused_cost(0.3, d_m, config);
      CHECK(cost > last);
      last = cost;
    }
  }

  TEST_CASE("a nearby same-appearance detection matches in stage 1") {
    TrackerConfig config;
    const std::vector<Tracklet> tracks = {make_tracklet(1, 0.0, 0.0, 0, config)};
    const std::vector<DetectionRecord> dets = {make_detection(0.1, 0.0, 0)};
    const auto result = assoc::associate_frame(tracks, dets, config);
    REQUIRE(result.stage1.matches.size() == 1);
    CHECK(result.stage1.matches[0] == std::pair{0, 0});
    CHECK(result.stage2.matches.empty());
    CHECK(result.stage1.total_cost < 0.4);
  }

  TEST_CASE("a far detection with a foreign appearance stays unmatched") {
    TrackerConfig config;
    const std::vector<Tracklet> tracks = {make_tracklet(1, 0.0, 0.0, 0, config)};
    const std::vector<DetectionRecord> dets = {make_detection(5.0, 0.0, 1)};
    const auto result = assoc::associate_frame(tracks, dets, config);
    CHECK(result.stage1.matches.empty());
    CHECK(result.stage2.matches.empty());
    CHECK(result.stage2.unmatched_rows == std::vector<int>{0});
    CHECK(result.stage2.unmatched_cols == std::vector<int>{0});
  }

  TEST_CASE("stage 2 rescues a near detection whose appearance changed") {
    TrackerConfig config;
    const std::vector<Tracklet> tracks = {make_tracklet(1, 0.0, 0.0, 0, config)};
    // Orthogonal embedding pushes the fused cost to ~0.98 > tau1, but the
    // Euclidean distance 0.3 m is well inside tau2.
    const std::vector<DetectionRecord> dets = {make_detection(0.3, 0.0, 1)};
    const auto result = assoc::associate_frame(tracks, dets, config);
    CHECK(result.stage1.matches.empty());
    REQUIRE(result.stage2.matches.size() == 1);
    CHECK(result.stage2.matches[0] == std::pair{0, 0});
    CHECK(result.stage2.total_cost == doctest::Approx(0.3).epsilon(1e-12));
  }

  TEST_CASE("without tracklets every detection is left for track birth") {
    TrackerConfig config;
    const std::vector<DetectionRecord> dets = {make_detection(1.0, 1.0, 0),
                                               make_detection(2.0, 2.0, 1)};
    const auto result = assoc::associate_frame({}, dets, config);
    CHECK(result.stage1.matches.empty());
    CHECK(result.stage2.matches.empty());
    CHECK(result.stage2.unmatched_cols == std::vector<int>{0, 1});
    CHECK(result.stage2.unmatched_rows.empty());
  }

  TEST_CASE("appearance breaks a positional tie between two tracklets") {
    TrackerConfig config;
    const std::vector<Tracklet> tracks = {make_tracklet(1, 0.0, 0.0, 0, config),
                                          make_tracklet(2, 0.0, 0.0, 1, config)};
    // Both detections sit at the tracklets' shared position; only the
    // embeddings disambiguate, and they arrive in swapped order.
    const std::vector<DetectionRecord> dets = {make_detection(0.0, 0.0, 1),
                                               make_detection(0.0, 0.0, 0)};
    const auto result = assoc::associate_frame(tracks, dets, config);
    REQUIRE(result.stage1.matches.size() == 2);
    CHECK(result.stage1.matches[0] == std::pair{0, 1});
    CHECK(result.stage1.matches[1] == std::pair{1, 0});
  }

  TEST_CASE("a stationary pedestrian yields one track pinned to ground truth") {
    Tracker tracker;
    std::set<int> ids;
    int rows_seen = 0;
    for (int frame = 0; frame < 10; ++frame) {
      const auto rows =
          tracker.step(frame, {make_detection(5.0, 5.0, 0)});
      REQUIRE(rows.size() == 1);
      ids.insert(rows[0].track_id);
      CHECK(rows[0].frame == frame);
      CHECK(std::abs(rows[0].x - 5.0) < 1e-6);
      CHECK(std::abs(rows[0].y - 5.0) < 1e-6);
      CHECK(rows[0].score == 0.95);
      ++rows_seen;
    }
    CHECK(rows_seen == 10);
    CHECK(ids.size() == 1);
    CHECK(*ids.begin() == 1);
  }

  TEST_CASE("a closed loop over a noiseless simulated walker stays locked on") {
    const auto rig = sim::default_rig(sim::RigPreset::kWildtrackLike);
    Rng rng(17);
    sim::MotionParams motion;
    motion.speed_min = 0.3;
    motion.speed_max = 0.6;
    const auto scenario = sim::generate_scenario(rig, 1, 30, motion, rng);
    sim::NoiseModel noise;
    noise.seed = 17;
    Tracker tracker;
    std::set<int> ids;
    for (int frame = 0; frame < 30; ++frame) {
      const auto rows =
          tracker.step(frame, sim::observe_frame(scenario, frame, noise));
      REQUIRE(rows.size() == 1);
      ids.insert(rows[0].track_id);
      const auto& truth = scenario.pedestrians[0].positions[frame];
      // The posterior trails a moving target with a small, bounded lag;
      // the worst case is the filter overshooting a sharp waypoint turn.
      CHECK(std::hypot(rows[0].x - truth.x(), rows[0].y - truth.y()) < 0.4);
    }
    CHECK(ids.size() == 1);
  }

  TEST_CASE("a ten-frame gap is bridged, an eleven-frame gap is not") {
    auto run_gap = [](int gap) {
      Tracker tracker;
      int first_id = 0;
      for (int frame = 0; frame < 5; ++frame) {
        const auto rows = tracker.step(frame, {make_detection(5.0, 5.0, 0)});
        REQUIRE(rows.size() == 1);
        first_id = rows[0].track_id;
      }
      for (int frame = 5; frame < 5 + gap; ++frame) {
        CHECK(tracker.step(frame, {}).empty());
      }
      const auto rows =
          tracker.step(5 + gap, {make_detection(5.0, 5.0, 0)});
      REQUIRE(rows.size() == 1);
      return std::pair{first_id, rows[0].track_id};
    };

    const auto bridged = run_gap(10);
    CHECK(bridged.first == bridged.second);

    const auto severed = run_gap(11);
    CHECK(severed.first != severed.second);
  }

  TEST_CASE("frames must strictly increase") {
    Tracker tracker;
    tracker.step(3, {});
    CHECK_THROWS_AS(tracker.step(3, {}), SequencingError);
    CHECK_THROWS_AS(tracker.step(2, {}), SequencingError);
    CHECK_NOTHROW(tracker.step(4, {}));
  }

  TEST_CASE("an empty stream creates nothing") {
    Tracker tracker;
    for (int frame = 0; frame < 5; ++frame) {
      CHECK(tracker.step(frame, {}).empty());
    }
    CHECK(tracker.tracklets().empty());
  }

  TEST_CASE("low-score detections are dropped at the threshold") {
    Tracker tracker;
    const auto at_threshold =
        tracker.step(0, {make_detection(1.0, 1.0, 0, 0.4)});
    CHECK(at_threshold.empty());
    CHECK(tracker.tracklets().empty());

    const auto above =
        tracker.step(1, {make_detection(1.0, 1.0, 0, 0.41)});
    CHECK(above.size() == 1);
    CHECK(tracker.tracklets().size() == 1);
  }

  TEST_CASE("min_hits delays emission until a track is confirmed") {
    TrackerConfig config;
    config.min_hits = 3;
    Tracker tracker(config);
    CHECK(tracker.step(0, {make_detection(2.0, 2.0, 0)}).empty());
    CHECK(tracker.step(1, {make_detection(2.0, 2.0, 0)}).empty());
    const auto rows = tracker.step(2, {make_detection(2.0, 2.0, 0)});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].track_id == 1);
  }

  TEST_CASE("track ids are sequential and never reused") {
    TrackerConfig config;
    config.max_age = 1;
    Tracker tracker(config);
    auto rows = tracker.step(0, {make_detection(0.0, 0.0, 0)});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].track_id == 1);

    // Starve the track past max_age so it is removed.
    tracker.step(1, {});
    tracker.step(2, {});
    CHECK(tracker.tracklets().empty());

    rows = tracker.step(3, {make_detection(0.0, 0.0, 0)});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].track_id == 2);

    rows = tracker.step(4, {make_detection(0.0, 0.0, 0),
                            make_detection(7.0, 7.0, 1)});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].track_id == 2);
    CHECK(rows[1].track_id == 3);
  }

  TEST_CASE("per-frame output ids are distinct on a busy noisy scene") {
    const auto rig = sim::default_rig(sim::RigPreset::kWildtrackLike);
    Rng rng(23);
    const auto scenario =
        sim::generate_scenario(rig, 12, 60, sim::MotionParams{}, rng);
    sim::NoiseModel noise;
    noise.seed = 23;
    noise.p_miss_cam = 0.2;
    noise.sigma_loc = 0.05;
    noise.sigma_emb = 0.05;
    noise.fp_rate = 0.5;

    Tracker tracker;
    int max_id_seen = 0;
    for (int frame = 0; frame < 60; ++frame) {
      const auto rows =
          tracker.step(frame, sim::observe_frame(scenario, frame, noise));
      std::set<int> frame_ids;
      for (const auto& row : rows) {
        CHECK(row.track_id >= 1);
        CHECK(frame_ids.insert(row.track_id).second);  // unique per frame
      }
      // New ids only ever extend the sequence upward.
      for (const auto& row : rows) {
        if (row.track_id > max_id_seen) {
          CHECK(row.track_id == max_id_seen + 1);
          max_id_seen = row.track_id;
        }
      }
    }
    CHECK(max_id_seen >= 12);
  }

  TEST_CASE("matched embeddings are folded in by the smoothing factor") {
    TrackerConfig config;
    Tracker tracker(config);
    const auto e = Eigen::VectorXd::Unit(kEmbeddingDim, 0);
    const auto f = Eigen::VectorXd::Unit(kEmbeddingDim, 1);
    tracker.step(0, {make_detection(0.0, 0.0, 0)});
    REQUIRE(tracker.tracklets().size() == 1);
    CHECK(tracker.tracklets()[0].embedding == e);

    // Same spot, orthogonal appearance: stage 2 keeps the track alive and
    // the embedding averages toward the new observation.
    tracker.step(1, {make_detection(0.0, 0.0, 1)});
    REQUIRE(tracker.tracklets().size() == 1);
    const Eigen::VectorXd expected =
        (config.ema_alpha * e + (1.0 - config.ema_alpha) * f).normalized();
    CHECK((tracker.tracklets()[0].embedding - expected).cwiseAbs().maxCoeff() <
          1e-12);
  }

  TEST_CASE("two crossing pedestrians keep their ids thanks to appearance") {
    const auto rig = sim::default_rig(sim::RigPreset::kWildtrackLike);
    const auto scenario = sim::crossing_scenario(rig, 41);
    sim::NoiseModel noise;
    noise.seed = 3;
    noise.sigma_loc = 0.05;
    noise.sigma_emb = 0.05;

    Tracker tracker;  // lambda = 0.98: appearance dominates
    std::map<int, std::set<int>> ids_near_ped;
    for (int frame = 0; frame < 41; ++frame) {
      const auto rows =
          tracker.step(frame, sim::observe_frame(scenario, frame, noise));
      for (const auto& row : rows) {
        // Attribute each row to the nearest ground-truth pedestrian.
        const auto& a = scenario.pedestrians[0].positions[frame];
        const auto& b = scenario.pedestrians[1].positions[frame];
        const double da = std::hypot(row.x - a.x(), row.y - a.y());
        const double db = std::hypot(row.x - b.x(), row.y - b.y());
        if (std::abs(da - db) < 0.3) continue;  // ambiguous near the cross
        ids_near_ped[da < db ? 0 : 1].insert(row.track_id);
      }
    }
    REQUIRE(ids_near_ped.count(0));
    REQUIRE(ids_near_ped.count(1));
    CHECK(ids_near_ped[0].size() == 1);
    CHECK(ids_near_ped[1].size() == 1);
    CHECK(*ids_near_ped[0].begin() != *ids_near_ped[1].begin());
  }
}
