#pragma once

// Centralized minimax localization: the relaxed Chebyshev center of the
// joint feasible set, computed through the dual SDP with the Lagrange
// matrix eliminated.

#include "minmaxloc/model.hpp"
#include "minmaxloc/sdp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <vector>

namespace mmloc {

/// Multipliers of the lower/upper range constraints and the epigraph
/// variable t. Keys follow the scenario's edge keys.
struct DualMultipliers {
  std::map<EdgeKey, double> alpha;  // sensor-sensor, lower bound
  std::map<EdgeKey, double> beta;   // sensor-sensor, upper bound
  std::map<EdgeKey, double> omega;  // sensor-anchor, lower bound
  std::map<EdgeKey, double> phi;    // sensor-anchor, upper bound
  double t = 0.0;
};

struct CentralEstimate {
  std::map<NodeId, Point2> positions;
  /// Certified bound on sum_i ||x_i - x_est,i||^2 over the feasible set,
  /// recomputed from the recovered multipliers.
  double worst_case_value = 0.0;
  double solver_objective = 0.0;
  DualMultipliers multipliers;
  sdp::SdpStatus solver_status = sdp::SdpStatus::NumericalFailure;
  int iterations = 0;
  double solve_seconds = 0.0;
};

/// Selector matrices on the stacked coordinate vector (x1, y1, x2, y2, ...).
/// `i`, `j` are 0-based sensor slots.
Eigen::MatrixXd pair_selector(int n, int i, int j);  // E_ij
Eigen::MatrixXd sensor_selector(int n, int i);       // E_i

/// Variable layout of the dual SDP: t, then alpha and beta per sensor edge,
/// then omega and phi per anchor edge, each group in scenario edge order.
struct DualLayout {
  int n = 0;
  std::vector<EdgeKey> sensor_edges;
  std::vector<EdgeKey> anchor_edges;

  int num_vars() const { return 1 + 2 * static_cast<int>(sensor_edges.size() + anchor_edges.size()); }
  int t() const { return 0; }
  int alpha(std::size_t e) const { return 1 + static_cast<int>(e); }
  int beta(std::size_t e) const { return 1 + static_cast<int>(sensor_edges.size() + e); }
  int omega(std::size_t e) const { return 1 + 2 * static_cast<int>(sensor_edges.size()) + static_cast<int>(e); }
  int phi(std::size_t e) const {
    return 1 + 2 * static_cast<int>(sensor_edges.size()) + static_cast<int>(anchor_edges.size() + e);
  }
};

struct DualSdp {
  sdp::SdpProblem problem;
  DualLayout layout;
};

/// Blocks: the (2n+1) Schur block [[M, f], [f', t]], the 2n block M - I, and
/// a 1x1 nonnegativity block per multiplier, where
///   M = -sum (alpha - beta) E_ij - sum (omega - phi) E_i,
///   f =  sum (omega - phi) (a_kx e_{2i-1} + a_ky e_{2i}).
/// Throws InvalidInput if some group of connected sensors has no anchor link.
DualSdp assemble_dual_sdp(const NetworkScenario& scenario, const IntervalMap& bounds);

DualMultipliers extract_multipliers(const DualLayout& layout, const Eigen::VectorXd& x);

/// M and f for given multipliers.
struct DualMatrices {
  Eigen::MatrixXd m;
  Eigen::VectorXd f;
};
DualMatrices dual_matrices(const NetworkScenario& scenario, const DualMultipliers& multipliers);

/// x_est = -M^{-1} f. Throws NumericalError if lambda_min(M) < 1 - 1e-6.
std::map<NodeId, Point2> recover_estimate(const NetworkScenario& scenario, const DualMultipliers& multipliers);

/// f' M^{-1} f + h(multipliers): an upper bound on ||y - x_est||^2 for every
/// y in the feasible set whenever M >= I and the multipliers are nonnegative.
double dual_bound(const NetworkScenario& scenario, const IntervalMap& bounds,
                  const DualMultipliers& multipliers);

/// Validates, solves the dual SDP, and recovers the estimate and bound.
/// Throws InvalidInput on invalid scenarios and NumericalError when no
/// estimate can be recovered; other solver statuses are reported.
CentralEstimate solve_minmax_sdp(const NetworkScenario& scenario, const sdp::SolverConfig& config = {});

/// Variables y (2n), the lower triangle of Delta (row-major, n(2n+1)) and s.
/// Minimizes s - Tr(Delta) subject to [[Delta, y], [y', 1]] >= 0,
/// [[I, y], [y', s]] >= 0 and the squared-range intervals; the optimal value
/// of the relaxed maximization is minus the SDP optimum.
sdp::SdpProblem assemble_primal_sdp(const NetworkScenario& scenario, const IntervalMap& bounds);

/// Uniform rejection sampling of the (non-relaxed) joint feasible set inside
/// the box [lo, hi]^2 per sensor. Returns up to `count` stacked position
/// vectors using at most `max_draws` draws.
std::vector<Eigen::VectorXd> sample_feasible_points(const NetworkScenario& scenario, const IntervalMap& bounds,
                                                    const Point2& lo, const Point2& hi, std::size_t count,
                                                    std::uint64_t seed, std::size_t max_draws = 1'000'000);

Eigen::VectorXd stack_positions(const NetworkScenario& scenario, const std::map<NodeId, Point2>& positions);

}  // namespace mmloc
