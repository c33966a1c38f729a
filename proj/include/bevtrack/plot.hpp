#pragma once

#include <string>

#include "bevtrack/heatmap.hpp"
#include "bevtrack/metrics.hpp"

namespace bevtrack::plot {

/// SVG of track polylines on the ground plane (one color per id, derived
/// from a hash of the id so colors are stable across runs).  When ground
/// truth is supplied its trajectories are drawn underneath in gray.
std::string tracks_svg(const metrics::FrameMap& tracks,
                       const metrics::FrameMap& ground_truth = {});

/// Occupancy map as a binary 16-bit PGM (maxval 65535, big-endian samples);
/// pixel (i, j) is cell (i, j), sample = round(score * 65535) with scores
/// clamped to [0, 1].
std::string heatmap_pgm(const bev::OccupancyMap& map);

/// Occupancy map as an SVG grid of colored cells (dark-to-bright ramp).
std::string heatmap_svg(const bev::OccupancyMap& map);

}  // namespace bevtrack::plot
