#pragma once

// Network, measurement and error-model types for 2-D range-based
// localization with bounded measurement errors.

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace mmloc {

using Point2 = Eigen::Vector2d;
using NodeId = int;

struct Anchor {
  NodeId id = 0;
  Point2 position = Point2::Zero();
};

/// Undirected link. Sensor-sensor keys are stored with a < b; sensor-anchor
/// keys store the sensor in `a` and the anchor in `b`.
struct EdgeKey {
  NodeId a = 0;
  NodeId b = 0;

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct Measurement {
  EdgeKey edge;
  double z = 0.0;
};

/// Closed distance interval [lower, upper] with 0 <= lower <= upper.
struct IntervalBound {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double d, double slack = 0.0) const {
    return d >= lower - slack && d <= upper + slack;
  }
};

using IntervalMap = std::map<EdgeKey, IntervalBound>;

struct NetworkScenario {
  std::vector<NodeId> sensors;
  std::vector<Anchor> anchors;
  std::map<NodeId, Point2> true_positions;  // empty when unknown
  std::vector<Measurement> edges;           // sorted by key, one per link
  double gamma = 0.0;
  double sensing_range = 0.0;

  bool is_anchor(NodeId id) const;
  const Anchor* find_anchor(NodeId id) const;
  bool has_truth() const { return !true_positions.empty(); }

  /// Position of sensor ids in `sensors`; used to lay out stacked vectors.
  std::map<NodeId, int> sensor_index() const;
  std::size_t num_sensor_edges() const;
  std::size_t num_anchor_edges() const;

  /// Sorts edges and normalizes their keys. Throws InvalidInput on unknown
  /// ids, self loops, anchor-anchor links, duplicates or negative ranges.
  void normalize();
};

/// Builds a normalized key; throws InvalidInput if both ends are anchors.
EdgeKey make_edge_key(const NetworkScenario& scenario, NodeId u, NodeId v);

struct ScenarioConfig {
  int n_sensors = 0;
  std::vector<Point2> anchor_positions;
  double sensing_range = 0.5;
  Point2 area_min{-0.5, -0.5};
  Point2 area_max{0.5, 0.5};
};

/// Anchor layout of the centralized experiments: (+-0.3, +-0.3).
std::vector<Point2> centralized_anchor_layout();
/// Anchor layout of the distributed experiments: the corners (+-0.5, +-0.5).
std::vector<Point2> corner_anchor_layout();

struct UniformError {
  double gamma = 0.0;
};
struct GaussianError {
  double sigma = 0.0;
};
/// Gaussian inliers plus outliers uniform on [-3 sigma, 3 sigma]; the
/// outlier count is round(ratio * inliers).
struct MixtureError {
  double sigma = 0.0;
  double ratio = 0.0;
};
using ErrorModel = std::variant<UniformError, GaussianError, MixtureError>;

/// gamma for Uniform, 3 sigma otherwise.
double error_bound(const ErrorModel& model);
void check_error_model(const ErrorModel& model);
std::string describe(const ErrorModel& model);

/// Outlier count for a mixture over `edge_count` errors, chosen so that
/// outliers + inliers = edge_count and outliers ~ ratio * inliers.
std::size_t mixture_outlier_count(std::size_t edge_count, double ratio);

struct SampledErrors {
  std::vector<double> values;
  std::vector<bool> outlier;
};

SampledErrors sample_errors(const ErrorModel& model, std::size_t count, std::mt19937_64& rng);

/// splitmix64 finalizer applied to master ^ golden * (stream + 1). Used for
/// every derived seed (trial, retry, estimator streams).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Uniform sensors, all links within the sensing range, exact ranges and
/// gamma = 0. Redraws with derive_seed(seed, attempt) while the graph is
/// disconnected; throws InvalidInput after 100 attempts.
NetworkScenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Replaces every measurement by true distance + sampled error (clamped at
/// zero) and sets gamma to error_bound(model).
NetworkScenario apply_errors(const NetworkScenario& scenario, const ErrorModel& model,
                             std::uint64_t seed);

/// [max(z - gamma, 0), z + gamma] for every link.
IntervalMap build_feasibility_intervals(const NetworkScenario& scenario);

struct ValidationReport {
  bool connected = false;
  bool anchors_noncollinear = false;
  std::vector<std::string> warnings;

  bool ok() const { return connected && anchors_noncollinear; }
};

ValidationReport validate_scenario(const NetworkScenario& scenario);

/// True when every measurement deviates from the true distance by at most
/// gamma (plus `slack`). Requires true positions.
bool errors_within_bound(const NetworkScenario& scenario, double slack = 1e-12);

/// Position of a node (anchor position or true sensor position).
Point2 node_position(const NetworkScenario& scenario, NodeId id);

}  // namespace mmloc
