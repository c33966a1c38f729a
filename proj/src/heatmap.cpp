#include "bevtrack/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "bevtrack/errors.hpp"

namespace bevtrack::bev {

OccupancyMap render_heatmap(const std::vector<Eigen::Vector2d>& points,
                            const geometry::GroundGrid& grid,
                            double sigma_cells) {
  geometry::validate(grid);
  if (!(sigma_cells > 0.0)) {
    throw ValidationError("heatmap sigma must be positive");
  }

  OccupancyMap map;
  map.grid = grid;
  map.scores = Eigen::MatrixXd::Zero(grid.rows, grid.cols);

  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma_cells * sigma_cells);
  for (const auto& point : points) {
    // Point position in cell units; cell (r, c) has its center at (r + 0.5,
    // c + 0.5) in these units.
    const double pu = (point.x() - grid.origin_x) / grid.cell_size;
    const double pv = (point.y() - grid.origin_y) / grid.cell_size;
    for (int r = 0; r < grid.rows; ++r) {
      const double dx = pu - (r + 0.5);
      for (int c = 0; c < grid.cols; ++c) {
        const double dy = pv - (c + 0.5);
        const double score = std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
        if (score > map.scores(r, c)) map.scores(r, c) = score;
      }
    }
  }
  return map;
}

OccupancyMap nms_maxpool(const OccupancyMap& map) {
  const auto& s = map.scores;
  OccupancyMap out;
  out.grid = map.grid;
  out.scores = Eigen::MatrixXd::Zero(s.rows(), s.cols());

  for (int r = 0; r < s.rows(); ++r) {
    for (int c = 0; c < s.cols(); ++c) {
      const double v = s(r, c);
      bool keep = true;
      for (int dr = -1; dr <= 1 && keep; ++dr) {
        for (int dc = -1; dc <= 1 && keep; ++dc) {
          const int nr = r + dr;
          const int nc = c + dc;
          if ((dr == 0 && dc == 0) || nr < 0 || nc < 0 || nr >= s.rows() ||
              nc >= s.cols()) {
            continue;
          }
          const double n = s(nr, nc);
          // A strictly larger neighbour, or an equal one earlier in
          // (row, col) order, suppresses this cell.
          if (n > v || (n == v && (nr < r || (nr == r && nc < c)))) {
            keep = false;
          }
        }
      }
      if (keep) out.scores(r, c) = v;
    }
  }
  return out;
}

namespace {

std::vector<Peak> collect_peaks(const OccupancyMap& suppressed,
                                const OffsetField* offsets, double threshold) {
  std::vector<Peak> peaks;
  const auto& s = suppressed.scores;
  for (int r = 0; r < s.rows(); ++r) {
    for (int c = 0; c < s.cols(); ++c) {
      if (!(s(r, c) > threshold)) continue;
      Peak peak;
      peak.row = r;
      peak.col = c;
      peak.score = s(r, c);
      if (offsets) {
        peak.offset_x = offsets->x(r, c);
        peak.offset_y = offsets->y(r, c);
      }
      const Eigen::Vector2d world = geometry::grid_to_world(
          suppressed.grid, r, c, peak.offset_x, peak.offset_y);
      peak.world_x = world.x();
      peak.world_y = world.y();
      peaks.push_back(peak);
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  return peaks;
}

}  // namespace

std::vector<Peak> extract_peaks(const OccupancyMap& map,
                                const OffsetField& offsets, double threshold) {
  if (offsets.x.rows() != map.scores.rows() ||
      offsets.x.cols() != map.scores.cols() ||
      offsets.y.rows() != map.scores.rows() ||
      offsets.y.cols() != map.scores.cols()) {
    throw ValidationError("offset field dimensions must match the map");
  }
  return collect_peaks(nms_maxpool(map), &offsets, threshold);
}

std::vector<Peak> extract_peaks(const OccupancyMap& map, double threshold) {
  return collect_peaks(nms_maxpool(map), nullptr, threshold);
}

}  // namespace bevtrack::bev
