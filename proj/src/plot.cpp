#include "bevtrack/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

namespace bevtrack::plot {

namespace {

struct PathPoint {
  double x = 0.0;
  double y = 0.0;
};

std::string format2(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

/// Stable per-id hue: SplitMix64 finalizer over the id.
int id_hue(int id) {
  std::uint64_t z = static_cast<std::uint64_t>(id) + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z = z ^ (z >> 31);
  return static_cast<int>(z % 360);
}

std::map<int, std::vector<PathPoint>> paths_by_id(const metrics::FrameMap& frames) {
  std::map<int, std::vector<PathPoint>> paths;
  for (const auto& [frame, points] : frames) {
    for (const auto& p : points) paths[p.id].push_back({p.x, p.y});
  }
  return paths;
}

/// Tick spacing of 1, 2, or 5 times a power of ten giving <= ~7 ticks.
double nice_step(double span) {
  const double raw = span / 6.0;
  const double base = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0}) {
    if (m * base >= raw) return m * base;
  }
  return 10.0 * base;
}

std::string format_tick(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%g", v + 0.0);  // normalize -0
  return buffer;
}

}  // namespace

std::string tracks_svg(const metrics::FrameMap& tracks,
                       const metrics::FrameMap& ground_truth) {
  const auto track_paths = paths_by_id(tracks);
  const auto gt_paths = paths_by_id(ground_truth);

  double min_x = 0.0, min_y = 0.0, max_x = 10.0, max_y = 10.0;
  bool first = true;
  for (const auto* paths : {&gt_paths, &track_paths}) {
    for (const auto& [id, points] : *paths) {
      for (const auto& p : points) {
        if (first) {
          min_x = max_x = p.x;
          min_y = max_y = p.y;
          first = false;
        } else {
          min_x = std::min(min_x, p.x);
          max_x = std::max(max_x, p.x);
          min_y = std::min(min_y, p.y);
          max_y = std::max(max_y, p.y);
        }
      }
    }
  }
  const double pad = 1.0;
  min_x -= pad;
  min_y -= pad;
  max_x += pad;
  max_y += pad;

  const double scale = 40.0;  // pixels per meter
  const double left = 50.0, right = 15.0, top = 15.0, bottom = 45.0;
  const double plot_w = (max_x - min_x) * scale;
  const double plot_h = (max_y - min_y) * scale;
  const double width = left + plot_w + right;
  const double height = top + plot_h + bottom;
  const auto to_px_x = [&](double x) { return left + (x - min_x) * scale; };
  const auto to_px_y = [&](double y) { return top + (max_y - y) * scale; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format2(width)
      << "\" height=\"" << format2(height) << "\" viewBox=\"0 0 "
      << format2(width) << ' ' << format2(height) << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  // Axes with tick labels in meters.
  svg << "  <g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
  svg << "    <line x1=\"" << format2(left) << "\" y1=\"" << format2(top)
      << "\" x2=\"" << format2(left) << "\" y2=\"" << format2(top + plot_h)
      << "\" stroke=\"#333333\"/>\n";
  svg << "    <line x1=\"" << format2(left) << "\" y1=\"" << format2(top + plot_h)
      << "\" x2=\"" << format2(left + plot_w) << "\" y2=\""
      << format2(top + plot_h) << "\" stroke=\"#333333\"/>\n";
  const double step_x = nice_step(max_x - min_x);
  for (double t = std::ceil(min_x / step_x) * step_x; t <= max_x + 1e-9;
       t += step_x) {
    const double px = to_px_x(t);
    svg << "    <line x1=\"" << format2(px) << "\" y1=\"" << format2(top + plot_h)
        << "\" x2=\"" << format2(px) << "\" y2=\"" << format2(top + plot_h + 5)
        << "\" stroke=\"#333333\"/>\n";
    svg << "    <text x=\"" << format2(px) << "\" y=\""
        << format2(top + plot_h + 18) << "\" text-anchor=\"middle\">"
        << format_tick(t) << "</text>\n";
  }
  const double step_y = nice_step(max_y - min_y);
  for (double t = std::ceil(min_y / step_y) * step_y; t <= max_y + 1e-9;
       t += step_y) {
    const double py = to_px_y(t);
    svg << "    <line x1=\"" << format2(left - 5) << "\" y1=\"" << format2(py)
        << "\" x2=\"" << format2(left) << "\" y2=\"" << format2(py)
        << "\" stroke=\"#333333\"/>\n";
    svg << "    <text x=\"" << format2(left - 8) << "\" y=\"" << format2(py + 4)
        << "\" text-anchor=\"end\">" << format_tick(t) << "</text>\n";
  }
  svg << "    <text x=\"" << format2(left + plot_w / 2) << "\" y=\""
      << format2(height - 10) << "\" text-anchor=\"middle\">x (m)</text>\n";
  svg << "    <text x=\"14\" y=\"" << format2(top + plot_h / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << format2(top + plot_h / 2) << ")\">y (m)</text>\n";
  svg << "  </g>\n";

  const auto polyline = [&](const std::vector<PathPoint>& points,
                            const std::string& stroke, double stroke_width) {
    if (points.empty()) return;
    if (points.size() == 1) {
      svg << "  <circle cx=\"" << format2(to_px_x(points[0].x)) << "\" cy=\""
          << format2(to_px_y(points[0].y)) << "\" r=\"" << format2(stroke_width)
          << "\" fill=\"" << stroke << "\"/>\n";
      return;
    }
    svg << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
        << format2(stroke_width) << "\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i) svg << ' ';
      svg << format2(to_px_x(points[i].x)) << ',' << format2(to_px_y(points[i].y));
    }
    svg << "\"/>\n";
  };

  for (const auto& [id, points] : gt_paths) polyline(points, "#bbbbbb", 3.0);
  for (const auto& [id, points] : track_paths) {
    char color[32];
    std::snprintf(color, sizeof(color), "hsl(%d,70%%,45%%)", id_hue(id));
    polyline(points, color, 1.5);
    const auto& last = points.back();
    svg << "  <circle cx=\"" << format2(to_px_x(last.x)) << "\" cy=\""
        << format2(to_px_y(last.y)) << "\" r=\"3.00\" fill=\"" << color
        << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string heatmap_pgm(const bev::OccupancyMap& map) {
  const Eigen::Index rows = map.scores.rows();
  const Eigen::Index cols = map.scores.cols();
  std::ostringstream out;
  out << "P5\n" << cols << ' ' << rows << "\n65535\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double score = std::clamp(map.scores(i, j), 0.0, 1.0);
      const auto sample = static_cast<std::uint16_t>(std::lround(score * 65535.0));
      out.put(static_cast<char>(sample >> 8));
      out.put(static_cast<char>(sample & 0xFF));
    }
  }
  return out.str();
}

namespace {

struct RampStop {
  double r, g, b;
};

/// Dark-purple-to-yellow ramp, perceptually ordered.
std::string ramp_color(double t) {
  static constexpr RampStop kStops[] = {{68, 1, 84},
                                        {59, 82, 139},
                                        {33, 145, 140},
                                        {94, 201, 98},
                                        {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int low = std::min(3, static_cast<int>(pos));
  const double f = pos - low;
  const RampStop& a = kStops[low];
  const RampStop& b = kStops[low + 1];
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "rgb(%d,%d,%d)",
                static_cast<int>(std::lround(a.r + f * (b.r - a.r))),
                static_cast<int>(std::lround(a.g + f * (b.g - a.g))),
                static_cast<int>(std::lround(a.b + f * (b.b - a.b))));
  return buffer;
}

}  // namespace

std::string heatmap_svg(const bev::OccupancyMap& map) {
  const Eigen::Index rows = map.scores.rows();
  const Eigen::Index cols = map.scores.cols();
  const int cell = 8;  // pixels per grid cell
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell
      << "\" height=\"" << rows * cell << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"" << ramp_color(0.0)
      << "\"/>\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double score = map.scores(i, j);
      if (score <= 0.0) continue;  // background already covers zero cells
      svg << "  <rect x=\"" << j * cell << "\" y=\"" << i * cell << "\" width=\""
          << cell << "\" height=\"" << cell << "\" fill=\"" << ramp_color(score)
          << "\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace bevtrack::plot
