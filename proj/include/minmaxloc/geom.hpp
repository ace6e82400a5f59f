#pragma once

// Single-sensor geometry: intersections of annuli, and brute-force grid
// oracles for the Chebyshev center and the projection onto such a region.

#include "minmaxloc/model.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace mmloc {

template <typename Scalar>
struct BasicAnnulus {
  Eigen::Matrix<Scalar, 2, 1> center = Eigen::Matrix<Scalar, 2, 1>::Zero();
  Scalar lower = 0;
  Scalar upper = 0;

  bool contains(const Eigen::Matrix<Scalar, 2, 1>& p, Scalar slack = 0) const {
    const Scalar d = (p - center).norm();
    return d >= lower - slack && d <= upper + slack;
  }
};

/// Intersection of annuli: the feasible set of one sensor.
template <typename Scalar>
struct BasicFeasibleRegion {
  std::vector<BasicAnnulus<Scalar>> constraints;

  bool contains(const Eigen::Matrix<Scalar, 2, 1>& p, Scalar slack = 0) const {
    for (const auto& c : constraints) {
      if (!c.contains(p, slack)) return false;
    }
    return true;
  }
};

using Annulus = BasicAnnulus<double>;
using FeasibleRegion = BasicFeasibleRegion<double>;

template <typename Scalar>
bool membership(const Eigen::Matrix<Scalar, 2, 1>& p, const BasicFeasibleRegion<Scalar>& region) {
  return region.contains(p);
}

struct BBox {
  Point2 lo = Point2::Zero();
  Point2 hi = Point2::Zero();
};

/// Intersection of the boxes [c - upper, c + upper] over all constraints.
/// Throws InvalidInput for regions without constraints and EmptyRegion if
/// the boxes do not overlap.
BBox default_bbox(const FeasibleRegion& region);

struct ChebyshevResult {
  Point2 center = Point2::Zero();
  double radius = 0.0;
  double grid_resolution = 0.0;
  std::size_t feasible_points = 0;
};

/// Grid point c minimizing max_{y in F} |c - y| where F is the set of
/// feasible grid points of the box. Grid nodes are lo + (i, j) * resolution;
/// ties go to the smallest (i, j) in lexicographic order. Throws EmptyRegion
/// if F is empty.
ChebyshevResult grid_chebyshev_center(const FeasibleRegion& region, const std::optional<BBox>& bbox = std::nullopt,
                                      double resolution = 1e-3);

/// Feasible grid point nearest to p (same grid and tie rule).
Point2 project_to_region(const Point2& p, const FeasibleRegion& region,
                         const std::optional<BBox>& bbox = std::nullopt, double resolution = 1e-3);

/// max_{y in F} |p - y| over the feasible grid points.
double grid_radius_from(const Point2& p, const FeasibleRegion& region, const std::optional<BBox>& bbox = std::nullopt,
                        double resolution = 1e-3);

/// Relaxed Chebyshev center of a single-sensor region by grid search. With
/// U_k(y) = u_k^2 - |c_k|^2 + 2 c_k'y and L_k(y) = l_k^2 - |c_k|^2 + 2 c_k'y,
/// the relaxed worst-case value is max (min_k U_k(y) - |y|^2) over grid
/// points with |y|^2 <= min_k U_k(y) and max_k L_k(y) <= min_k U_k(y); the
/// maximizer is the relaxed center. Throws EmptyRegion if no node qualifies.
struct RelaxedCenterResult {
  Point2 center = Point2::Zero();
  double value = 0.0;  // squared radius
  double grid_resolution = 0.0;
};
RelaxedCenterResult grid_relaxed_center(const FeasibleRegion& region, const std::optional<BBox>& bbox = std::nullopt,
                                        double resolution = 1e-3);

/// Smallest enclosing circle of a point set (exact, Welzl).
struct Circle {
  Point2 center = Point2::Zero();
  double radius = 0.0;
};
Circle min_enclosing_circle(std::vector<Point2> points);

/// Single-sensor region for `sensor` built from its anchor links.
FeasibleRegion anchor_region(const NetworkScenario& scenario, const IntervalMap& bounds, NodeId sensor);

}  // namespace mmloc
