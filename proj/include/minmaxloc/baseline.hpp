#pragma once

// Nonlinear least-squares localization used as the comparison estimator:
// minimizes sum (|x_i - x_j| - z_ij)^2 + sum (|x_i - a_k| - z_ik)^2 with a
// damped Gauss-Newton (Levenberg-Marquardt) method.

#include "minmaxloc/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <vector>

namespace mmloc {

struct BaselineOptions {
  int max_iters = 500;
  double grad_tol = 1e-9;
  double initial_damping = 1e-3;
};

struct BaselineResult {
  std::map<NodeId, Point2> positions;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  std::vector<double> objective_history;  // after every accepted step, starting point first
};

/// Objective and gradient over the stacked sensor vector (x1, y1, x2, ...).
double ls_objective(const NetworkScenario& scenario, const Eigen::VectorXd& x);
Eigen::VectorXd ls_gradient(const NetworkScenario& scenario, const Eigen::VectorXd& x);

BaselineResult least_squares_from(const NetworkScenario& scenario, Eigen::VectorXd start,
                                  const BaselineOptions& options = {});

/// Starts from sensors drawn uniformly in `area_min`..`area_max` with `seed`.
BaselineResult baseline_least_squares(const NetworkScenario& scenario, std::uint64_t seed,
                                      const BaselineOptions& options = {},
                                      const Point2& area_min = Point2(-0.5, -0.5),
                                      const Point2& area_max = Point2(0.5, 0.5));

}  // namespace mmloc
