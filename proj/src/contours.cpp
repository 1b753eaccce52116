#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "ldd/error.hpp"
#include "ldd/proposals.hpp"

namespace ldd {
namespace {

// Difference between two orientations on the half circle [0, pi).
double orientation_delta(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, std::numbers::pi - d);
}

constexpr int kNeighbourDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kNeighbourDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

}  // namespace

ContourSet group_contours(const GradientMap& g, double magnitude_threshold,
                          double max_orientation_change) {
  if (magnitude_threshold < 0.0) throw InvalidArgument("group_contours: negative threshold");
  const int w = g.width();
  const int h = g.height();
  Raster<int> label = Raster<int>::Constant(h, w, -1);
  auto is_edge = [&](int x, int y) { return g.magnitude(y, x) > magnitude_threshold; };

  struct Frontier {
    int x, y;
    double accumulated;
  };

  ContourSet contours;
  std::deque<Frontier> queue;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (label(sy, sx) >= 0 || !is_edge(sx, sy)) continue;
      const int id = static_cast<int>(contours.size());
      Contour c;
      c.bounds = {sx, sy, sx + 1, sy + 1};
      label(sy, sx) = id;
      queue.push_back({sx, sy, 0.0});
      while (!queue.empty()) {
        const Frontier f = queue.front();
        queue.pop_front();
        const double mag = g.magnitude(f.y, f.x);
        c.pixels.emplace_back(f.x, f.y);
        c.weight += mag;
        c.centroid_x += f.x;
        c.centroid_y += f.y;
        c.bounds.x1 = std::min(c.bounds.x1, f.x);
        c.bounds.y1 = std::min(c.bounds.y1, f.y);
        c.bounds.x2 = std::max(c.bounds.x2, f.x + 1);
        c.bounds.y2 = std::max(c.bounds.y2, f.y + 1);
        for (int k = 0; k < 8; ++k) {
          const int nx = f.x + kNeighbourDx[k];
          const int ny = f.y + kNeighbourDy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (label(ny, nx) >= 0 || !is_edge(nx, ny)) continue;
          const double acc = f.accumulated + orientation_delta(g.orientation(f.y, f.x),
                                                               g.orientation(ny, nx));
          if (acc > max_orientation_change) continue;
          label(ny, nx) = id;
          queue.push_back({nx, ny, acc});
        }
      }
      const auto n = static_cast<double>(c.pixels.size());
      c.centroid_x /= n;
      c.centroid_y /= n;
      contours.push_back(std::move(c));
    }
  }
  return contours;
}

double score_box(const Box& b, const ContourSet& contours, double kappa) {
  if (!b.valid()) throw InvalidArgument("score_box: degenerate box");
  if (!(kappa > 0.0)) throw InvalidArgument("score_box: kappa must be positive");
  double enclosed = 0.0;
  for (const Contour& c : contours)
    if (b.contains(c.bounds)) enclosed += c.weight;
  if (enclosed == 0.0) return 0.0;
  return enclosed / std::pow(2.0 * (b.width() + b.height()), kappa);
}

}  // namespace ldd
