#include "minmaxloc/errors.hpp"
#include "minmaxloc/geom.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mmloc;

namespace {

FeasibleRegion disc(const Point2& c, double r) { return {{{c, 0.0, r}}}; }

// Crescent: a thin ring around the origin cut by a disc, so the enclosing
// center lies in the hole.
FeasibleRegion crescent() {
  return {{{Point2(0, 0), 0.9, 1.0}, {Point2(0, 1.0), 0.0, 1.0}}};
}

// Brute-force Chebyshev center on the same grid: every node against every
// feasible node.
ChebyshevResult brute_center(const FeasibleRegion& region, const BBox& box, double res) {
  const long nx = static_cast<long>(std::floor((box.hi.x() - box.lo.x()) / res + 1e-9)) + 1;
  const long ny = static_cast<long>(std::floor((box.hi.y() - box.lo.y()) / res + 1e-9)) + 1;
  auto node = [&](long i, long j) { return Point2(box.lo.x() + i * res, box.lo.y() + j * res); };
  std::vector<Point2> feasible;
  for (long i = 0; i < nx; ++i)
    for (long j = 0; j < ny; ++j)
      if (region.contains(node(i, j))) feasible.push_back(node(i, j));
  ChebyshevResult best;
  double best_sq = 1e300;
  for (long i = 0; i < nx; ++i) {
    for (long j = 0; j < ny; ++j) {
      double worst = 0.0;
      for (const auto& y : feasible) worst = std::max(worst, (node(i, j) - y).squaredNorm());
      if (worst < best_sq) {
        best_sq = worst;
        best.center = node(i, j);
      }
    }
  }
  best.radius = std::sqrt(best_sq);
  best.feasible_points = feasible.size();
  return best;
}

// Smallest enclosing circle by checking every pair and triple.
Circle brute_mec(const std::vector<Point2>& pts) {
  Circle best{pts[0], 1e300};
  auto covers = [&](const Circle& c) {
    for (const auto& p : pts)
      if ((p - c.center).norm() > c.radius * (1 + 1e-9) + 1e-12) return false;
    return true;
  };
  auto consider = [&](const Circle& c) {
    if (c.radius < best.radius && covers(c)) best = c;
  };
  if (pts.size() == 1) return {pts[0], 0.0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      consider({(pts[i] + pts[j]) / 2, (pts[i] - pts[j]).norm() / 2});
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        const Point2 a = pts[i], b = pts[j], c = pts[k];
        const double d = 2 * (a.x() * (b.y() - c.y()) + b.x() * (c.y() - a.y()) + c.x() * (a.y() - b.y()));
        if (std::abs(d) < 1e-14) continue;
        const double ux = (a.squaredNorm() * (b.y() - c.y()) + b.squaredNorm() * (c.y() - a.y()) +
                           c.squaredNorm() * (a.y() - b.y())) / d;
        const double uy = (a.squaredNorm() * (c.x() - b.x()) + b.squaredNorm() * (a.x() - c.x()) +
                           c.squaredNorm() * (b.x() - a.x())) / d;
        const Point2 u(ux, uy);
        consider({u, (a - u).norm()});
      }
    }
  }
  return best;
}

}  // namespace

TEST(Membership, AnnulusExamples) {
  const FeasibleRegion r{{{Point2(0, 0), 1.0, 2.0}}};
  EXPECT_TRUE(membership(Point2(1.5, 0), r));
  EXPECT_FALSE(membership(Point2(0.5, 0), r));
  EXPECT_TRUE(membership(Point2(1.0, 0), r));
  EXPECT_TRUE(membership(Point2(0, 2.0), r));
  EXPECT_FALSE(membership(Point2(2.0 + 1e-12, 0), r));
}

TEST(Chebyshev, DiscCenter) {
  const auto c = grid_chebyshev_center(disc({0, 0}, 1.0));
  EXPECT_NEAR(c.center.x(), 0.0, 1e-3);
  EXPECT_NEAR(c.center.y(), 0.0, 1e-3);
  EXPECT_NEAR(c.radius, 1.0, 2e-3);
  EXPECT_DOUBLE_EQ(c.grid_resolution, 1e-3);
}

TEST(Chebyshev, TwoPointRegion) {
  // Points at distance 1 from (1, 0) and sqrt(2) from (1, 1): (0, 0) and (2, 0).
  const double tol = 3e-3;
  const FeasibleRegion r{{{Point2(1, 0), 1.0 - tol, 1.0 + tol}, {Point2(1, 1), std::sqrt(2.0) - tol, std::sqrt(2.0) + tol}}};
  const auto c = grid_chebyshev_center(r);
  EXPECT_NEAR(c.center.x(), 1.0, 1e-2);
  EXPECT_NEAR(c.center.y(), 0.0, 1e-2);
  EXPECT_NEAR(c.radius, 1.0, 1e-2);
}

TEST(Chebyshev, MatchesBruteForceOnCoarseGrid) {
  const double res = 0.02;
  const std::vector<FeasibleRegion> regions{
      crescent(),
      {{{Point2(0, 0), 0.4, 0.6}, {Point2(1, 0), 0.6, 0.9}, {Point2(0, 1), 0.5, 0.8}}},
      {{{Point2(0, 0), 0.2, 0.5}, {Point2(0.3, 0.1), 0.0, 0.4}}},
      disc({0.2, -0.1}, 0.3)};
  for (const auto& r : regions) {
    const BBox box = default_bbox(r);
    const auto fast = grid_chebyshev_center(r, box, res);
    const auto slow = brute_center(r, box, res);
    EXPECT_NEAR(fast.radius, slow.radius, 1e-12);
    EXPECT_EQ(fast.center, slow.center);
    EXPECT_EQ(fast.feasible_points, slow.feasible_points);
  }
}

TEST(Chebyshev, EmptyRegionThrows) {
  const FeasibleRegion r{{{Point2(0, 0), 0.0, 0.1}, {Point2(1, 0), 0.0, 0.1}}};
  EXPECT_THROW(grid_chebyshev_center(r), EmptyRegion);
  const FeasibleRegion hole{{{Point2(0, 0), 0.5, 0.6}, {Point2(0, 0), 0.0, 0.4}}};
  EXPECT_THROW(grid_chebyshev_center(hole), EmptyRegion);
  EXPECT_THROW(grid_chebyshev_center(disc({0, 0}, 1), std::nullopt, 0.0), InvalidInput);
}

TEST(Chebyshev, AddingConstraintNeverIncreasesRadius) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const double res = 5e-3;
  FeasibleRegion r{{{Point2(0, 0), 0.3, 0.8}}};
  double prev = grid_chebyshev_center(r, std::nullopt, res).radius;
  const BBox box = default_bbox(r);
  int added = 0;
  while (added < 4) {
    const Point2 c(u(rng), u(rng));
    const double d = c.norm();  // keep (0.55, 0) style points feasible
    const Annulus a{c, std::max(0.0, d - 0.4), d + 0.4};
    FeasibleRegion next = r;
    next.constraints.push_back(a);
    try {
      const double rad = grid_chebyshev_center(next, box, res).radius;
      EXPECT_LE(rad, prev + 1e-12);
      prev = rad;
      r = next;
      ++added;
    } catch (const EmptyRegion&) {
    }
  }
}

TEST(Projection, Examples) {
  const auto d = disc({0, 0}, 1.0);
  const Point2 inside = project_to_region(Point2(0.3, -0.2), d);
  EXPECT_NEAR((inside - Point2(0.3, -0.2)).norm(), 0.0, 1e-3);
  const Point2 outside = project_to_region(Point2(2, 0), d);
  EXPECT_NEAR(outside.x(), 1.0, 1e-3);
  EXPECT_NEAR(outside.y(), 0.0, 1e-3);
}

TEST(Projection, PropositionOneOnCrescent) {
  const double res = 1e-3;
  const auto r = crescent();
  const auto c = grid_chebyshev_center(r, std::nullopt, res);
  EXPECT_FALSE(r.contains(c.center));
  const Point2 p = project_to_region(c.center, r, std::nullopt, res);
  EXPECT_TRUE(r.contains(p));
  const double rp = grid_radius_from(p, r, std::nullopt, res);
  EXPECT_GE(rp, c.radius - 2 * res);
  EXPECT_LE(rp, 2 * c.radius + 2 * res);
}

TEST(Circle, WelzlMatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Point2> pts(1 + trial % 12);
    for (auto& p : pts) p = Point2(u(rng), u(rng));
    const Circle fast = min_enclosing_circle(pts);
    const Circle slow = brute_mec(pts);
    EXPECT_NEAR(fast.radius, slow.radius, 1e-9);
    EXPECT_NEAR((fast.center - slow.center).norm(), 0.0, 1e-7);
  }
  EXPECT_THROW(min_enclosing_circle({}), InvalidInput);
}

TEST(RelaxedCenter, DominatesChebyshevRadius) {
  const std::vector<FeasibleRegion> regions{
      crescent(), {{{Point2(0, 0), 0.4, 0.6}, {Point2(1, 0), 0.6, 0.9}, {Point2(0, 1), 0.5, 0.8}}}};
  for (const auto& r : regions) {
    const auto c = grid_chebyshev_center(r, std::nullopt, 2e-3);
    const auto rel = grid_relaxed_center(r, std::nullopt, 2e-3);
    EXPECT_GE(rel.value, c.radius * c.radius - 4e-3);
  }
}

TEST(RelaxedCenter, DiscIsExact) {
  // For a single disc the relaxation is tight: center c, value r^2.
  const auto rel = grid_relaxed_center(disc({0.1, 0.2}, 0.5));
  EXPECT_NEAR(rel.center.x(), 0.1, 1e-3);
  EXPECT_NEAR(rel.center.y(), 0.2, 1e-3);
  EXPECT_NEAR(rel.value, 0.25, 1e-5);
}

TEST(BBox, IntersectionOfBoxes) {
  const FeasibleRegion r{{{Point2(0, 0), 0.0, 1.0}, {Point2(1, 0), 0.2, 0.5}}};
  const BBox b = default_bbox(r);
  EXPECT_DOUBLE_EQ(b.lo.x(), 0.5);
  EXPECT_DOUBLE_EQ(b.hi.x(), 1.0);
  EXPECT_DOUBLE_EQ(b.lo.y(), -0.5);
  EXPECT_DOUBLE_EQ(b.hi.y(), 0.5);
  EXPECT_THROW(default_bbox(FeasibleRegion{}), InvalidInput);
}
