#include "minmaxloc/geom.hpp"

#include "minmaxloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mmloc {

namespace {

struct Grid {
  Point2 lo;
  double res = 0.0;
  long nx = 0;  // number of nodes along x
  long ny = 0;

  Point2 node(long i, long j) const { return {lo.x() + static_cast<double>(i) * res, lo.y() + static_cast<double>(j) * res}; }
};

Grid make_grid(const FeasibleRegion& region, const std::optional<BBox>& bbox, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw InvalidInput("grid resolution must be positive");
  const BBox box = bbox ? *bbox : default_bbox(region);
  if (!(box.hi.x() >= box.lo.x() && box.hi.y() >= box.lo.y())) throw InvalidInput("bounding box is inverted");
  Grid g;
  g.lo = box.lo;
  g.res = resolution;
  g.nx = static_cast<long>(std::floor((box.hi.x() - box.lo.x()) / resolution + 1e-9)) + 1;
  g.ny = static_cast<long>(std::floor((box.hi.y() - box.lo.y()) / resolution + 1e-9)) + 1;
  return g;
}

// Per grid column, the lowest and highest feasible node. Their convex hull
// is the hull of all feasible nodes.
struct ColumnExtremes {
  std::vector<Point2> points;
  std::size_t count = 0;
};

ColumnExtremes scan_columns(const FeasibleRegion& region, const Grid& g) {
  ColumnExtremes out;
  for (long i = 0; i < g.nx; ++i) {
    long first = -1;
    long last = -1;
    for (long j = 0; j < g.ny; ++j) {
      if (region.contains(g.node(i, j))) {
        if (first < 0) first = j;
        last = j;
        ++out.count;
      }
    }
    if (first >= 0) {
      out.points.push_back(g.node(i, first));
      if (last != first) out.points.push_back(g.node(i, last));
    }
  }
  if (out.count == 0) throw EmptyRegion("no feasible grid point in the search box");
  return out;
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double max_sq_distance(const Point2& c, const std::vector<Point2>& pts) {
  double best = 0.0;
  for (const auto& p : pts) best = std::max(best, (c - p).squaredNorm());
  return best;
}

Circle circle_from(const Point2& a, const Point2& b) {
  return {(a + b) / 2.0, (a - b).norm() / 2.0};
}

Circle circle_from(const Point2& a, const Point2& b, const Point2& c) {
  const Point2 ab = b - a;
  const Point2 ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  if (std::abs(d) < 1e-300) {
    // Collinear: the widest pair spans the others.
    Circle best = circle_from(a, b);
    for (const Circle& cand : {circle_from(a, c), circle_from(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double ab2 = ab.squaredNorm();
  const double ac2 = ac.squaredNorm();
  const Point2 off((ac.y() * ab2 - ab.y() * ac2) / d, (ab.x() * ac2 - ac.x() * ab2) / d);
  return {a + off, off.norm()};
}

bool inside(const Circle& c, const Point2& p) {
  return (p - c.center).norm() <= c.radius * (1.0 + 1e-12) + 1e-15;
}

}  // namespace

BBox default_bbox(const FeasibleRegion& region) {
  if (region.constraints.empty()) throw InvalidInput("region has no constraints");
  const double inf = std::numeric_limits<double>::infinity();
  BBox box{Point2(-inf, -inf), Point2(inf, inf)};
  for (const auto& c : region.constraints) {
    if (!(c.lower >= 0.0 && c.upper >= c.lower)) throw InvalidInput("annulus bounds must satisfy 0 <= lower <= upper");
    box.lo = box.lo.cwiseMax(c.center - Point2::Constant(c.upper));
    box.hi = box.hi.cwiseMin(c.center + Point2::Constant(c.upper));
  }
  if (box.lo.x() > box.hi.x() || box.lo.y() > box.hi.y()) throw EmptyRegion("annuli do not overlap");
  return box;
}

Circle min_enclosing_circle(std::vector<Point2> points) {
  if (points.empty()) throw InvalidInput("no points");
  std::mt19937_64 rng(0x5eedu);
  std::shuffle(points.begin(), points.end(), rng);
  Circle c{points[0], 0.0};
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (inside(c, points[i])) continue;
    c = {points[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (inside(c, points[j])) continue;
      c = circle_from(points[i], points[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (!inside(c, points[k])) c = circle_from(points[i], points[j], points[k]);
      }
    }
  }
  return c;
}

ChebyshevResult grid_chebyshev_center(const FeasibleRegion& region, const std::optional<BBox>& bbox,
                                      double resolution) {
  const Grid g = make_grid(region, bbox, resolution);
  const ColumnExtremes ext = scan_columns(region, g);
  const std::vector<Point2> hull = convex_hull(ext.points);
  const Circle mec = min_enclosing_circle(hull);

  // For every c, max_y |c - y|^2 >= R*^2 + |c - c*|^2 with (c*, R*) the
  // enclosing circle, so only nodes near c* can beat the incumbent.
  auto clamp_i = [&](double v, long n) { return std::clamp(static_cast<long>(std::lround(v)), 0L, n - 1); };
  const long ci = clamp_i((mec.center.x() - g.lo.x()) / g.res, g.nx);
  const long cj = clamp_i((mec.center.y() - g.lo.y()) / g.res, g.ny);
  double best = max_sq_distance(g.node(ci, cj), hull);
  long bi = ci;
  long bj = cj;
  const double reach = std::sqrt(std::max(0.0, best - mec.radius * mec.radius)) + g.res;
  const long i0 = std::max(0L, static_cast<long>(std::floor((mec.center.x() - reach - g.lo.x()) / g.res)));
  const long i1 = std::min(g.nx - 1, static_cast<long>(std::ceil((mec.center.x() + reach - g.lo.x()) / g.res)));
  const long j0 = std::max(0L, static_cast<long>(std::floor((mec.center.y() - reach - g.lo.y()) / g.res)));
  const long j1 = std::min(g.ny - 1, static_cast<long>(std::ceil((mec.center.y() + reach - g.lo.y()) / g.res)));
  const double r2 = mec.radius * mec.radius;
  for (long i = i0; i <= i1; ++i) {
    for (long j = j0; j <= j1; ++j) {
      const Point2 c = g.node(i, j);
      if (r2 + (c - mec.center).squaredNorm() > best) continue;
      const double v = max_sq_distance(c, hull);
      if (v < best || (v == best && (i < bi || (i == bi && j < bj)))) {
        best = v;
        bi = i;
        bj = j;
      }
    }
  }
  return {g.node(bi, bj), std::sqrt(best), g.res, ext.count};
}

Point2 project_to_region(const Point2& p, const FeasibleRegion& region, const std::optional<BBox>& bbox,
                         double resolution) {
  const Grid g = make_grid(region, bbox, resolution);
  double best = std::numeric_limits<double>::infinity();
  Point2 arg = Point2::Zero();
  for (long i = 0; i < g.nx; ++i) {
    for (long j = 0; j < g.ny; ++j) {
      const Point2 c = g.node(i, j);
      const double d = (c - p).squaredNorm();
      if (d < best && region.contains(c)) {
        best = d;
        arg = c;
      }
    }
  }
  if (!std::isfinite(best)) throw EmptyRegion("no feasible grid point in the search box");
  return arg;
}

double grid_radius_from(const Point2& p, const FeasibleRegion& region, const std::optional<BBox>& bbox,
                        double resolution) {
  const Grid g = make_grid(region, bbox, resolution);
  const ColumnExtremes ext = scan_columns(region, g);
  return std::sqrt(max_sq_distance(p, ext.points));
}

RelaxedCenterResult grid_relaxed_center(const FeasibleRegion& region, const std::optional<BBox>& bbox,
                                        double resolution) {
  const Grid g = make_grid(region, bbox, resolution);
  RelaxedCenterResult best;
  best.grid_resolution = g.res;
  bool found = false;
  for (long i = 0; i < g.nx; ++i) {
    for (long j = 0; j < g.ny; ++j) {
      const Point2 y = g.node(i, j);
      double upper = std::numeric_limits<double>::infinity();
      double lower = -upper;
      for (const auto& c : region.constraints) {
        const double lin = 2.0 * c.center.dot(y) - c.center.squaredNorm();
        upper = std::min(upper, c.upper * c.upper + lin);
        lower = std::max(lower, c.lower * c.lower + lin);
      }
      const double yy = y.squaredNorm();
      if (yy > upper || lower > upper) continue;
      const double v = upper - yy;
      if (!found || v > best.value) {
        best.center = y;
        best.value = v;
        found = true;
      }
    }
  }
  if (!found) throw EmptyRegion("relaxed region has no grid point in the search box");
  return best;
}

FeasibleRegion anchor_region(const NetworkScenario& scenario, const IntervalMap& bounds, NodeId sensor) {
  FeasibleRegion region;
  for (const auto& m : scenario.edges) {
    if (m.edge.a != sensor) continue;
    const Anchor* anchor = scenario.find_anchor(m.edge.b);
    if (!anchor) continue;
    const IntervalBound& b = bounds.at(m.edge);
    region.constraints.push_back({anchor->position, b.lower, b.upper});
  }
  if (region.constraints.empty()) throw InvalidInput("sensor " + std::to_string(sensor) + " has no anchor links");
  return region;
}

}  // namespace mmloc
