#pragma once

// Distributed minimax localization. Every sensor first bounds its distance
// to every anchor through hop-count propagation and solves a small SDP for
// an initial estimate and radius. It then refines the estimate in
// synchronous rounds, treating neighbors' current estimates as anchors and
// its own ball as an extra constraint, so the radius never grows.

#include "minmaxloc/geom.hpp"
#include "minmaxloc/model.hpp"
#include "minmaxloc/sdp.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mmloc {

struct AnchorBound {
  double lower = 0.0;
  double upper = 0.0;
  int hops = 0;
  NodeId via = 0;  // relaying neighbor, or the anchor itself for direct links
};

/// Keyed by (sensor, anchor).
struct BoundTable {
  std::map<std::pair<NodeId, NodeId>, AnchorBound> entries;

  const AnchorBound& at(NodeId sensor, NodeId anchor) const;
};

/// Direct links take their interval with hops 1. Otherwise a sensor takes
/// the neighbor with the fewest hops to the anchor (smallest id on ties) and
/// combines the two intervals by the triangle inequality. Rounds repeat
/// until no entry changes. Only sensors relay. Throws UnreachableAnchor if
/// some pair stays unbounded.
BoundTable propagate_distance_bounds(const NetworkScenario& scenario, const IntervalMap& bounds);

/// Two intervals joined through a relay node.
AnchorBound combine_bounds(const IntervalBound& first, const AnchorBound& second);

struct NodeState {
  Point2 estimate = Point2::Zero();
  double radius_sq = 0.0;      // certified, never increasing
  double raw_radius_sq = 0.0;  // value of the latest solve before clamping
  bool localized = false;
  int iteration = 0;
  bool solve_failed = false;
};

/// Result of the per-node minimax SDP over a list of annuli.
struct NodeSolve {
  Point2 estimate = Point2::Zero();
  double radius_sq = 0.0;  // certified value recomputed from the multipliers
  double solver_objective = 0.0;
  sdp::SdpStatus status = sdp::SdpStatus::NumericalFailure;
  std::vector<double> lower_multipliers;
  std::vector<double> upper_multipliers;
};

/// Relaxed Chebyshev center of the intersection of annuli in the plane.
/// Variables: t, then one multiplier per lower and per upper bound. With
///   mu = sum upper - sum lower >= 1,  g = sum upper * c - sum lower * c,
/// the block [[mu I, g], [g', t]] >= 0 and objective t + h, the estimate is
/// g / mu and the radius bound is |g|^2 / mu + h. Throws NumericalError if
/// mu is below 1e-12.
NodeSolve solve_node_sdp(const std::vector<Annulus>& constraints, const sdp::SolverConfig& config = {});

/// The SDP solved by solve_node_sdp.
sdp::SdpProblem assemble_node_sdp(const std::vector<Annulus>& constraints);

NodeState initial_estimate(NodeId sensor, const BoundTable& table, const std::vector<Anchor>& anchors,
                           const sdp::SolverConfig& config = {});

/// How a neighbor's estimate enters the local problem.
enum class NeighborModel {
  /// Annulus [d_lo, d_hi] around the neighbor's estimate, as if it were an
  /// anchor. Local problems can become infeasible and containment can fail.
  Estimate,
  /// Annulus widened by the neighbor's certified radius:
  /// [max(d_lo - R_j, 0), d_hi + R_j]. The true position stays feasible.
  Inflated,
};

/// Neighbor seen by a sensor during refinement.
struct NeighborView {
  NodeId id = 0;
  Point2 estimate = Point2::Zero();
  IntervalBound bound;
  double radius_sq = 0.0;  // neighbor's certified radius; zero for anchors
};

/// Annulus a neighbor contributes under `model`.
Annulus neighbor_annulus(const NeighborView& neighbor, NeighborModel model);

/// One refinement step. The own ball |y - x_i| <= R_i is added to the
/// neighbor annuli. The new radius is clamped to the old one; a failed solve
/// keeps the previous estimate and radius.
NodeState iterate_node(const NodeState& own, const std::vector<NeighborView>& neighbors,
                       const sdp::SolverConfig& config = {}, NeighborModel model = NeighborModel::Inflated);

struct DisMinMaxConfig {
  double epsilon = 1e-6;
  NeighborModel neighbor_model = NeighborModel::Inflated;
  int max_rounds = 200;
  int threads = 1;
  sdp::SolverConfig solver;

  void validate() const;
};

struct RoundRecord {
  int round = 0;
  std::map<NodeId, NodeState> states;
  double rmse_upper_bound = 0.0;
  std::size_t reals_received = 0;  // neighbor data delivered to updating sensors
  int failed_solves = 0;
};

struct DisMinMaxTrace {
  std::vector<RoundRecord> rounds;  // rounds[0] holds the initial estimates
  BoundTable bounds;
  bool all_localized = false;
  std::string status = "ok";

  const RoundRecord& final_round() const { return rounds.back(); }
  std::map<NodeId, Point2> final_positions() const;
};

/// Jacobi rounds: every update in round r reads only round r - 1 states.
/// Localized sensors stop updating but keep serving their estimate.
DisMinMaxTrace run_dis_minmax(const NetworkScenario& scenario, const DisMinMaxConfig& config = {});

/// sqrt(sum_i R_i^2 / n).
double rmse_upper_bound(const std::map<NodeId, NodeState>& states);

}  // namespace mmloc
