#include "minmaxloc/dist.hpp"

#include "minmaxloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace mmloc {

namespace {

constexpr double kMuFloor = 1e-12;
constexpr double kMuSlack = 1e-9;

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < count; k += workers) fn(k);
    });
  }
  for (auto& t : pool) t.join();
}

struct NodeLayout {
  int t = 0;
  std::vector<int> lower;  // -1 when the lower bound is zero and dropped
  std::vector<int> upper;
  int num_vars = 1;
};

NodeLayout node_layout(const std::vector<Annulus>& constraints) {
  NodeLayout layout;
  for (const auto& c : constraints) {
    if (!(c.lower >= 0.0 && c.upper >= c.lower) || !std::isfinite(c.upper)) {
      throw InvalidInput("annulus bounds must satisfy 0 <= lower <= upper < inf");
    }
    layout.lower.push_back(c.lower > 0.0 ? layout.num_vars++ : -1);
  }
  for (std::size_t k = 0; k < constraints.size(); ++k) layout.upper.push_back(layout.num_vars++);
  return layout;
}

bool usable(sdp::SdpStatus status) {
  return status == sdp::SdpStatus::Optimal || status == sdp::SdpStatus::MaxIterations;
}

}  // namespace

const AnchorBound& BoundTable::at(NodeId sensor, NodeId anchor) const {
  auto it = entries.find({sensor, anchor});
  if (it == entries.end()) {
    throw UnreachableAnchor("no bound between sensor " + std::to_string(sensor) + " and anchor " + std::to_string(anchor));
  }
  return it->second;
}

AnchorBound combine_bounds(const IntervalBound& first, const AnchorBound& second) {
  AnchorBound out;
  out.lower = std::max({first.lower - second.upper, second.lower - first.upper, 0.0});
  out.upper = first.upper + second.upper;
  out.hops = second.hops + 1;
  return out;
}

BoundTable propagate_distance_bounds(const NetworkScenario& scenario, const IntervalMap& bounds) {
  BoundTable table;
  std::map<NodeId, std::vector<std::pair<NodeId, IntervalBound>>> relays;  // sensor neighbors, id order
  for (const auto& m : scenario.edges) {
    const IntervalBound& b = bounds.at(m.edge);
    if (scenario.is_anchor(m.edge.b)) {
      table.entries[{m.edge.a, m.edge.b}] = {b.lower, b.upper, 1, m.edge.b};
    } else {
      relays[m.edge.a].push_back({m.edge.b, b});
      relays[m.edge.b].push_back({m.edge.a, b});
    }
  }
  for (auto& [id, list] : relays) {
    std::sort(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  }

  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::pair<std::pair<NodeId, NodeId>, AnchorBound>> fresh;
    for (NodeId i : scenario.sensors) {
      auto rel = relays.find(i);
      if (rel == relays.end()) continue;
      for (const Anchor& k : scenario.anchors) {
        if (table.entries.count({i, k.id})) continue;
        const AnchorBound* pick = nullptr;
        const IntervalBound* link = nullptr;
        NodeId via = 0;
        for (const auto& [j, b] : rel->second) {
          auto it = table.entries.find({j, k.id});
          if (it == table.entries.end()) continue;
          if (!pick || it->second.hops < pick->hops) {
            pick = &it->second;
            link = &b;
            via = j;
          }
        }
        if (pick) {
          AnchorBound nb = combine_bounds(*link, *pick);
          nb.via = via;
          fresh.push_back({{i, k.id}, nb});
        }
      }
    }
    for (auto& [key, value] : fresh) table.entries.emplace(key, value);
    changed = !fresh.empty();
  }

  for (NodeId i : scenario.sensors) {
    for (const Anchor& k : scenario.anchors) table.at(i, k.id);
  }
  return table;
}

sdp::SdpProblem assemble_node_sdp(const std::vector<Annulus>& constraints) {
  if (constraints.empty()) throw InvalidInput("node SDP needs at least one constraint");
  const NodeLayout layout = node_layout(constraints);
  sdp::SdpProblem p;
  p.num_vars = layout.num_vars;
  p.objective = Eigen::VectorXd::Zero(p.num_vars);
  p.objective[layout.t] = 1.0;

  sdp::SdpBlock lmi;  // [[mu I, g], [g', t]]
  lmi.dim = 3;
  lmi.coeff(layout.t).add(2, 2, 1.0);
  sdp::SdpBlock normal;  // mu - 1 >= 0
  normal.dim = 1;
  normal.constant.add(0, 0, -1.0);

  auto add_term = [&](int var, const Point2& c, double sign) {
    auto& a = lmi.coeff(var);
    a.add(0, 0, sign);
    a.add(1, 1, sign);
    a.add(2, 0, sign * c.x());
    a.add(2, 1, sign * c.y());
    normal.coeff(var).add(0, 0, sign);
  };
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const Annulus& c = constraints[k];
    const double cc = c.center.squaredNorm();
    if (layout.lower[k] >= 0) {
      p.objective[layout.lower[k]] = cc - c.lower * c.lower;
      add_term(layout.lower[k], c.center, -1.0);
    }
    p.objective[layout.upper[k]] = c.upper * c.upper - cc;
    add_term(layout.upper[k], c.center, 1.0);
  }
  p.blocks.push_back(std::move(lmi));
  p.blocks.push_back(std::move(normal));
  for (int v = 1; v < layout.num_vars; ++v) {
    sdp::SdpBlock nonneg;
    nonneg.coeff(v).add(0, 0, 1.0);
    p.blocks.push_back(std::move(nonneg));
  }
  return p;
}

NodeSolve solve_node_sdp(const std::vector<Annulus>& constraints, const sdp::SolverConfig& config) {
  const NodeLayout layout = node_layout(constraints);
  const sdp::SdpSolution sol = sdp::solve(assemble_node_sdp(constraints), config);

  NodeSolve out;
  out.status = sol.status;
  out.solver_objective = sol.objective_value;
  double mu = 0.0;
  Point2 g = Point2::Zero();
  double h = 0.0;
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const Annulus& c = constraints[k];
    const double cc = c.center.squaredNorm();
    const double p = layout.lower[k] >= 0 ? std::max(0.0, sol.x[layout.lower[k]]) : 0.0;
    const double q = std::max(0.0, sol.x[layout.upper[k]]);
    out.lower_multipliers.push_back(p);
    out.upper_multipliers.push_back(q);
    mu += q - p;
    g += (q - p) * c.center;
    h += p * (cc - c.lower * c.lower) + q * (c.upper * c.upper - cc);
  }
  if (!(mu >= kMuFloor)) throw NumericalError("degenerate normalization in node SDP");
  if (mu < 1.0 - kMuSlack) throw NumericalError("node SDP multipliers violate mu >= 1");
  out.estimate = g / mu;
  out.radius_sq = std::max(0.0, g.squaredNorm() / mu + h);
  if (!out.estimate.allFinite() || !std::isfinite(out.radius_sq)) throw NumericalError("node SDP produced non-finite values");
  return out;
}

NodeState initial_estimate(NodeId sensor, const BoundTable& table, const std::vector<Anchor>& anchors,
                           const sdp::SolverConfig& config) {
  std::vector<Annulus> constraints;
  for (const Anchor& k : anchors) {
    const AnchorBound& b = table.at(sensor, k.id);
    constraints.push_back({k.position, b.lower, b.upper});
  }
  const NodeSolve sol = solve_node_sdp(constraints, config);
  if (!usable(sol.status)) {
    throw NumericalError("initial SDP for sensor " + std::to_string(sensor) + " ended with " + sdp::to_string(sol.status));
  }
  NodeState s;
  s.estimate = sol.estimate;
  s.radius_sq = sol.radius_sq;
  s.raw_radius_sq = sol.radius_sq;
  return s;
}

Annulus neighbor_annulus(const NeighborView& nb, NeighborModel model) {
  if (model == NeighborModel::Estimate || nb.radius_sq <= 0.0) return {nb.estimate, nb.bound.lower, nb.bound.upper};
  const double r = std::sqrt(nb.radius_sq);
  return {nb.estimate, std::max(0.0, nb.bound.lower - r), nb.bound.upper + r};
}

NodeState iterate_node(const NodeState& own, const std::vector<NeighborView>& neighbors,
                       const sdp::SolverConfig& config, NeighborModel model) {
  if (!std::isfinite(own.radius_sq) || own.radius_sq < 0.0) throw InvalidInput("own radius must be finite and nonnegative");
  if (neighbors.empty()) throw InvalidInput("iterate_node needs at least one neighbor");
  NodeState next = own;
  next.iteration = own.iteration + 1;
  next.solve_failed = false;
  if (own.localized) return next;

  std::vector<Annulus> constraints;
  constraints.push_back({own.estimate, 0.0, std::sqrt(own.radius_sq)});
  for (const auto& nb : neighbors) constraints.push_back(neighbor_annulus(nb, model));
  try {
    const NodeSolve sol = solve_node_sdp(constraints, config);
    if (!usable(sol.status)) {
      next.solve_failed = true;
      return next;
    }
    next.raw_radius_sq = sol.radius_sq;
    next.estimate = sol.estimate;
    next.radius_sq = std::min(sol.radius_sq, own.radius_sq);
  } catch (const NumericalError&) {
    next.solve_failed = true;
  }
  return next;
}

void DisMinMaxConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  if (max_rounds < 0) throw InvalidInput("max_rounds must be nonnegative");
  if (threads < 1) throw InvalidInput("threads must be at least 1");
  solver.validate();
}

double rmse_upper_bound(const std::map<NodeId, NodeState>& states) {
  if (states.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [id, s] : states) sum += s.radius_sq;
  return std::sqrt(sum / static_cast<double>(states.size()));
}

std::map<NodeId, Point2> DisMinMaxTrace::final_positions() const {
  std::map<NodeId, Point2> out;
  if (rounds.empty()) return out;
  for (const auto& [id, s] : rounds.back().states) out.emplace(id, s.estimate);
  return out;
}

DisMinMaxTrace run_dis_minmax(const NetworkScenario& scenario, const DisMinMaxConfig& config) {
  config.validate();
  const ValidationReport report = validate_scenario(scenario);
  if (!report.connected) throw InvalidInput("scenario graph is disconnected");
  if (!report.anchors_noncollinear) throw InvalidInput("anchors are collinear");

  const IntervalMap bounds = build_feasibility_intervals(scenario);
  DisMinMaxTrace trace;
  trace.bounds = propagate_distance_bounds(scenario, bounds);

  struct Link {
    NodeId id;
    bool anchor;
    IntervalBound bound;
  };
  std::map<NodeId, std::vector<Link>> links;
  for (const auto& m : scenario.edges) {
    const IntervalBound& b = bounds.at(m.edge);
    const bool anchor = scenario.is_anchor(m.edge.b);
    links[m.edge.a].push_back({m.edge.b, anchor, b});
    if (!anchor) links[m.edge.b].push_back({m.edge.a, false, b});
  }

  const std::vector<NodeId>& sensors = scenario.sensors;
  std::vector<NodeState> current(sensors.size());
  std::vector<std::string> failures(sensors.size());
  parallel_for(sensors.size(), config.threads, [&](std::size_t k) {
    try {
      current[k] = initial_estimate(sensors[k], trace.bounds, scenario.anchors, config.solver);
    } catch (const NumericalError& e) {
      failures[k] = e.what();
    }
  });
  RoundRecord first;
  for (std::size_t k = 0; k < sensors.size(); ++k) first.states.emplace(sensors[k], current[k]);
  first.rmse_upper_bound = rmse_upper_bound(first.states);
  trace.rounds.push_back(std::move(first));
  for (const auto& f : failures) {
    if (!f.empty()) {
      trace.status = "initial estimate failed: " + f;
      return trace;
    }
  }

  for (int round = 1; round <= config.max_rounds; ++round) {
    if (std::all_of(current.begin(), current.end(), [](const NodeState& s) { return s.localized; })) break;
    const std::vector<NodeState> previous = current;
    const auto& prev_states = trace.rounds.back().states;
    parallel_for(sensors.size(), config.threads, [&](std::size_t k) {
      if (previous[k].localized) {
        current[k].iteration = previous[k].iteration + 1;
        return;
      }
      std::vector<NeighborView> view;
      for (const Link& l : links.at(sensors[k])) {
        if (l.anchor) {
          view.push_back({l.id, scenario.find_anchor(l.id)->position, l.bound, 0.0});
        } else {
          const NodeState& nb = prev_states.at(l.id);
          view.push_back({l.id, nb.estimate, l.bound, nb.radius_sq});
        }
      }
      NodeState next = iterate_node(previous[k], view, config.solver, config.neighbor_model);
      if (!next.solve_failed && std::abs(next.radius_sq - previous[k].radius_sq) <= config.epsilon) next.localized = true;
      current[k] = next;
    });

    RoundRecord rec;
    rec.round = round;
    for (std::size_t k = 0; k < sensors.size(); ++k) {
      rec.states.emplace(sensors[k], current[k]);
      if (previous[k].localized) continue;
      for (const Link& l : links.at(sensors[k])) {
        if (!l.anchor) rec.reals_received += config.neighbor_model == NeighborModel::Inflated ? 3 : 2;
      }
      if (current[k].solve_failed) ++rec.failed_solves;
    }
    rec.rmse_upper_bound = rmse_upper_bound(rec.states);
    trace.rounds.push_back(std::move(rec));
  }
  trace.all_localized = std::all_of(current.begin(), current.end(), [](const NodeState& s) { return s.localized; });
  if (!trace.all_localized) trace.status = "max_rounds reached";
  return trace;
}

}  // namespace mmloc
