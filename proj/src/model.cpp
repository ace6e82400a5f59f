#include "minmaxloc/model.hpp"

#include "minmaxloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace mmloc {

namespace {

constexpr int kMaxGenerationAttempts = 100;
constexpr double kCollinearAreaTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

bool NetworkScenario::is_anchor(NodeId id) const { return find_anchor(id) != nullptr; }

const Anchor* NetworkScenario::find_anchor(NodeId id) const {
  for (const auto& anchor : anchors) {
    if (anchor.id == id) return &anchor;
  }
  return nullptr;
}

std::map<NodeId, int> NetworkScenario::sensor_index() const {
  std::map<NodeId, int> index;
  for (std::size_t i = 0; i < sensors.size(); ++i) index.emplace(sensors[i], static_cast<int>(i));
  return index;
}

std::size_t NetworkScenario::num_anchor_edges() const {
  return static_cast<std::size_t>(std::count_if(
      edges.begin(), edges.end(), [this](const Measurement& m) { return is_anchor(m.edge.b); }));
}

std::size_t NetworkScenario::num_sensor_edges() const { return edges.size() - num_anchor_edges(); }

EdgeKey make_edge_key(const NetworkScenario& scenario, NodeId u, NodeId v) {
  const bool u_anchor = scenario.is_anchor(u);
  const bool v_anchor = scenario.is_anchor(v);
  if (u_anchor && v_anchor) {
    throw InvalidInput("link between anchors " + std::to_string(u) + " and " + std::to_string(v));
  }
  if (u_anchor) return {v, u};
  if (v_anchor) return {u, v};
  return {std::min(u, v), std::max(u, v)};
}

void NetworkScenario::normalize() {
  std::set<NodeId> ids;
  for (NodeId s : sensors) {
    if (!ids.insert(s).second) throw InvalidInput("duplicate node id " + std::to_string(s));
  }
  for (const auto& a : anchors) {
    if (!ids.insert(a.id).second) throw InvalidInput("duplicate node id " + std::to_string(a.id));
    if (!a.position.allFinite()) throw InvalidInput("non-finite anchor position");
  }
  for (auto& m : edges) {
    if (!ids.contains(m.edge.a) || !ids.contains(m.edge.b)) {
      throw InvalidInput("edge references unknown node " + std::to_string(m.edge.a) + "-" +
                         std::to_string(m.edge.b));
    }
    if (m.edge.a == m.edge.b) throw InvalidInput("self loop at node " + std::to_string(m.edge.a));
    if (!(m.z >= 0.0) || !std::isfinite(m.z)) throw InvalidInput("negative or non-finite range");
    m.edge = make_edge_key(*this, m.edge.a, m.edge.b);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Measurement& x, const Measurement& y) { return x.edge < y.edge; });
  auto dup = std::adjacent_find(edges.begin(), edges.end(),
                                [](const Measurement& x, const Measurement& y) { return x.edge == y.edge; });
  if (dup != edges.end()) {
    throw InvalidInput("duplicate measurement for link " + std::to_string(dup->edge.a) + "-" +
                       std::to_string(dup->edge.b));
  }
  if (!(gamma >= 0.0)) throw InvalidInput("gamma must be nonnegative");
}

std::vector<Point2> centralized_anchor_layout() {
  return {Point2(-0.3, -0.3), Point2(0.3, -0.3), Point2(-0.3, 0.3), Point2(0.3, 0.3)};
}

std::vector<Point2> corner_anchor_layout() {
  return {Point2(-0.5, -0.5), Point2(0.5, -0.5), Point2(-0.5, 0.5), Point2(0.5, 0.5)};
}

double error_bound(const ErrorModel& model) {
  return std::visit(Overloaded{[](const UniformError& e) { return e.gamma; },
                               [](const GaussianError& e) { return 3.0 * e.sigma; },
                               [](const MixtureError& e) { return 3.0 * e.sigma; }},
                    model);
}

void check_error_model(const ErrorModel& model) {
  std::visit(Overloaded{[](const UniformError& e) {
                          if (!(e.gamma > 0.0)) throw InvalidInput("uniform error bound must be > 0");
                        },
                        [](const GaussianError& e) {
                          if (!(e.sigma > 0.0)) throw InvalidInput("sigma must be > 0");
                        },
                        [](const MixtureError& e) {
                          if (!(e.sigma > 0.0)) throw InvalidInput("sigma must be > 0");
                          if (!(e.ratio >= 0.0)) throw InvalidInput("outlier ratio must be >= 0");
                        }},
             model);
}

std::string describe(const ErrorModel& model) {
  std::ostringstream out;
  std::visit(Overloaded{[&](const UniformError& e) { out << "uniform(gamma=" << e.gamma << ")"; },
                        [&](const GaussianError& e) { out << "gaussian(sigma=" << e.sigma << ")"; },
                        [&](const MixtureError& e) {
                          out << "mixture(sigma=" << e.sigma << ", ratio=" << e.ratio << ")";
                        }},
             model);
  return out.str();
}

std::size_t mixture_outlier_count(std::size_t edge_count, double ratio) {
  const double outliers = static_cast<double>(edge_count) * ratio / (1.0 + ratio);
  return std::min(edge_count, static_cast<std::size_t>(std::llround(outliers)));
}

SampledErrors sample_errors(const ErrorModel& model, std::size_t count, std::mt19937_64& rng) {
  check_error_model(model);
  SampledErrors out;
  out.values.resize(count);
  out.outlier.assign(count, false);
  std::visit(Overloaded{[&](const UniformError& e) {
                          std::uniform_real_distribution<double> dist(-e.gamma, e.gamma);
                          for (auto& v : out.values) v = dist(rng);
                        },
                        [&](const GaussianError& e) {
                          std::normal_distribution<double> dist(0.0, e.sigma);
                          for (auto& v : out.values) v = dist(rng);
                        },
                        [&](const MixtureError& e) {
                          std::vector<std::size_t> order(count);
                          std::iota(order.begin(), order.end(), std::size_t{0});
                          std::shuffle(order.begin(), order.end(), rng);
                          const std::size_t n_out = mixture_outlier_count(count, e.ratio);
                          for (std::size_t k = 0; k < n_out; ++k) out.outlier[order[k]] = true;
                          std::normal_distribution<double> inlier(0.0, e.sigma);
                          std::uniform_real_distribution<double> outlier(-3.0 * e.sigma, 3.0 * e.sigma);
                          for (std::size_t k = 0; k < count; ++k) {
                            out.values[k] = out.outlier[k] ? outlier(rng) : inlier(rng);
                          }
                        }},
             model);
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

NetworkScenario draw_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(config.area_min.x(), config.area_max.x());
  std::uniform_real_distribution<double> uy(config.area_min.y(), config.area_max.y());

  NetworkScenario s;
  s.sensing_range = config.sensing_range;
  s.gamma = 0.0;
  const int n = config.n_sensors;
  for (int i = 1; i <= n; ++i) {
    s.sensors.push_back(i);
    const double x = ux(rng);
    const double y = uy(rng);
    s.true_positions.emplace(i, Point2(x, y));
  }
  for (std::size_t k = 0; k < config.anchor_positions.size(); ++k) {
    s.anchors.push_back({n + 1 + static_cast<NodeId>(k), config.anchor_positions[k]});
  }
  for (int i = 1; i <= n; ++i) {
    const Point2& xi = s.true_positions.at(i);
    for (int j = i + 1; j <= n; ++j) {
      const double d = (xi - s.true_positions.at(j)).norm();
      if (d <= config.sensing_range) s.edges.push_back({{i, j}, d});
    }
    for (const auto& a : s.anchors) {
      const double d = (xi - a.position).norm();
      if (d <= config.sensing_range) s.edges.push_back({{i, a.id}, d});
    }
  }
  s.normalize();
  return s;
}

}  // namespace

NetworkScenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  if (config.n_sensors < 1) throw InvalidInput("n_sensors must be >= 1");
  if (!(config.sensing_range > 0.0)) throw InvalidInput("sensing_range must be > 0");
  if (!(config.area_max.array() > config.area_min.array()).all()) {
    throw InvalidInput("deployment area is empty");
  }
  NetworkScenario probe;
  for (std::size_t k = 0; k < config.anchor_positions.size(); ++k) {
    probe.anchors.push_back({static_cast<NodeId>(k), config.anchor_positions[k]});
  }
  if (probe.anchors.size() < 3 || !validate_scenario(probe).anchors_noncollinear) {
    throw InvalidInput("at least three non-collinear anchors are required");
  }

  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    NetworkScenario s = draw_scenario(config, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (validate_scenario(s).connected) return s;
  }
  throw InvalidInput("no connected network after " + std::to_string(kMaxGenerationAttempts) +
                     " draws; increase the sensing range or the number of sensors");
}

Point2 node_position(const NetworkScenario& scenario, NodeId id) {
  if (const Anchor* a = scenario.find_anchor(id)) return a->position;
  auto it = scenario.true_positions.find(id);
  if (it == scenario.true_positions.end()) {
    throw InvalidInput("no known position for node " + std::to_string(id));
  }
  return it->second;
}

NetworkScenario apply_errors(const NetworkScenario& scenario, const ErrorModel& model,
                             std::uint64_t seed) {
  if (!scenario.has_truth()) throw InvalidInput("apply_errors needs true positions");
  std::mt19937_64 rng(seed);
  const SampledErrors errors = sample_errors(model, scenario.edges.size(), rng);
  NetworkScenario out = scenario;
  for (std::size_t k = 0; k < out.edges.size(); ++k) {
    auto& m = out.edges[k];
    const double d = (node_position(scenario, m.edge.a) - node_position(scenario, m.edge.b)).norm();
    m.z = std::max(0.0, d + errors.values[k]);
  }
  out.gamma = error_bound(model);
  return out;
}

IntervalMap build_feasibility_intervals(const NetworkScenario& scenario) {
  if (!(scenario.gamma >= 0.0)) throw InvalidInput("gamma must be nonnegative");
  IntervalMap bounds;
  for (const auto& m : scenario.edges) {
    bounds[m.edge] = {std::max(m.z - scenario.gamma, 0.0), m.z + scenario.gamma};
  }
  return bounds;
}

ValidationReport validate_scenario(const NetworkScenario& scenario) {
  ValidationReport report;

  // Non-collinearity: some triple of anchors spans a triangle of positive area.
  const auto& anchors = scenario.anchors;
  for (std::size_t i = 0; i < anchors.size() && !report.anchors_noncollinear; ++i) {
    for (std::size_t j = i + 1; j < anchors.size() && !report.anchors_noncollinear; ++j) {
      for (std::size_t k = j + 1; k < anchors.size(); ++k) {
        const Point2 u = anchors[j].position - anchors[i].position;
        const Point2 v = anchors[k].position - anchors[i].position;
        if (0.5 * std::abs(u.x() * v.y() - u.y() * v.x()) > kCollinearAreaTol) {
          report.anchors_noncollinear = true;
          break;
        }
      }
    }
  }
  if (anchors.size() < 3) report.warnings.push_back("fewer than three anchors");

  // Connectivity over sensors and anchors by breadth-first search.
  std::map<NodeId, std::vector<NodeId>> adjacency;
  for (NodeId s : scenario.sensors) adjacency[s];
  for (const auto& a : anchors) adjacency[a.id];
  for (const auto& m : scenario.edges) {
    adjacency[m.edge.a].push_back(m.edge.b);
    adjacency[m.edge.b].push_back(m.edge.a);
  }
  if (!adjacency.empty()) {
    std::set<NodeId> seen{adjacency.begin()->first};
    std::queue<NodeId> frontier;
    frontier.push(adjacency.begin()->first);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      for (NodeId v : adjacency[u]) {
        if (seen.insert(v).second) frontier.push(v);
      }
    }
    report.connected = seen.size() == adjacency.size();
  }
  if (!report.connected) report.warnings.push_back("network graph is disconnected");
  if (scenario.num_anchor_edges() == 0 && !scenario.sensors.empty()) {
    report.warnings.push_back("no sensor-anchor links");
  }
  for (NodeId s : scenario.sensors) {
    const auto degree = adjacency[s].size();
    if (degree < 3) {
      report.warnings.push_back("sensor " + std::to_string(s) + " has only " + std::to_string(degree) +
                                " links");
    }
  }
  return report;
}

bool errors_within_bound(const NetworkScenario& scenario, double slack) {
  for (const auto& m : scenario.edges) {
    const double d = (node_position(scenario, m.edge.a) - node_position(scenario, m.edge.b)).norm();
    if (std::abs(m.z - d) > scenario.gamma + slack) return false;
  }
  return true;
}

}  // namespace mmloc
