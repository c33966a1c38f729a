#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bevtrack/geometry.hpp"

namespace bevtrack::bev {

/// Per-cell occupancy scores over a ground grid, each in [0, 1].
struct OccupancyMap {
  geometry::GroundGrid grid;
  Eigen::MatrixXd scores;  // rows x cols
};

/// Per-cell sub-cell offsets accompanying an occupancy map, each in [0, 1).
struct OffsetField {
  Eigen::MatrixXd x;  // fractional offset along rows (world x)
  Eigen::MatrixXd y;  // fractional offset along columns (world y)
};

struct Peak {
  int row = 0;
  int col = 0;
  double score = 0.0;
  double offset_x = 0.5;
  double offset_y = 0.5;
  double world_x = 0.0;
  double world_y = 0.0;
};

/// Renders ground points into a Gaussian occupancy map.  Each cell takes the
/// maximum over points of exp(-d^2 / (2 sigma^2)), with d the distance from
/// the cell center to the point measured in cells.  Points outside the grid
/// contribute whatever tail falls inside it.
OccupancyMap render_heatmap(const std::vector<Eigen::Vector2d>& points,
                            const geometry::GroundGrid& grid,
                            double sigma_cells = 1.0);

/// 3x3 max-pool non-maximum suppression.  A cell keeps its score iff it
/// equals the maximum of its (border-truncated) 3x3 neighbourhood and no
/// equal-scoring neighbour precedes it in (row, col) order; all other cells
/// are zeroed.  Comparisons read the input scores, so the pass is
/// order-independent and idempotent.
OccupancyMap nms_maxpool(const OccupancyMap& map);

/// Suppresses non-maxima, then collects cells with score strictly above the
/// threshold, de-quantized through the offsets.  Sorted by descending score
/// (ties by ascending row, then column).
std::vector<Peak> extract_peaks(const OccupancyMap& map,
                                const OffsetField& offsets, double threshold);

/// Convenience overload using cell-center offsets of 0.5.
std::vector<Peak> extract_peaks(const OccupancyMap& map, double threshold);

}  // namespace bevtrack::bev
