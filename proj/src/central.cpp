#include "minmaxloc/central.hpp"

#include "minmaxloc/errors.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace mmloc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kRecoveryEigenFloor = 1.0 - 1e-6;
constexpr double kCholeskyJitter = 1e-10;

struct EdgeSplit {
  std::vector<EdgeKey> sensor_edges;
  std::vector<EdgeKey> anchor_edges;
};

EdgeSplit split_edges(const NetworkScenario& scenario) {
  EdgeSplit out;
  for (const auto& m : scenario.edges) {
    (scenario.is_anchor(m.edge.b) ? out.anchor_edges : out.sensor_edges).push_back(m.edge);
  }
  return out;
}

// Every group of sensors connected through sensor links needs an anchor
// link, otherwise M is singular along a translation of that group.
void require_anchored_components(const NetworkScenario& scenario) {
  const auto index = scenario.sensor_index();
  const int n = static_cast<int>(scenario.sensors.size());
  if (n == 0) throw InvalidInput("scenario has no sensors");
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<bool> anchored(n, false);
  for (const auto& m : scenario.edges) {
    if (scenario.is_anchor(m.edge.b)) {
      anchored[index.at(m.edge.a)] = true;
    } else {
      parent[find(index.at(m.edge.a))] = find(index.at(m.edge.b));
    }
  }
  std::vector<bool> root_anchored(n, false);
  for (int v = 0; v < n; ++v) {
    if (anchored[v]) root_anchored[find(v)] = true;
  }
  for (int v = 0; v < n; ++v) {
    if (!root_anchored[find(v)]) {
      throw InvalidInput("sensor " + std::to_string(scenario.sensors[v]) + " has no path to any anchor link");
    }
  }
}

void add_pair_selector(sdp::SparseSym& m, int i, int j, double scale) {
  for (int c = 0; c < 2; ++c) {
    const int p = 2 * i + c;
    const int q = 2 * j + c;
    m.add(p, p, scale);
    m.add(q, q, scale);
    m.add(p, q, -scale);
  }
}

void add_sensor_selector(sdp::SparseSym& m, int i, double scale) {
  m.add(2 * i, 2 * i, scale);
  m.add(2 * i + 1, 2 * i + 1, scale);
}

const IntervalBound& bound_of(const IntervalMap& bounds, const EdgeKey& e) {
  auto it = bounds.find(e);
  if (it == bounds.end()) {
    throw InvalidInput("no interval bound for link " + std::to_string(e.a) + "-" + std::to_string(e.b));
  }
  return it->second;
}

VectorXd solve_spd(const MatrixXd& m, const VectorXd& rhs) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  const MatrixXd jittered = m + kCholeskyJitter * MatrixXd::Identity(m.rows(), m.cols());
  Eigen::LLT<MatrixXd> retry(jittered);
  if (retry.info() != Eigen::Success) throw NumericalError("M is not positive definite");
  return retry.solve(rhs);
}

}  // namespace

MatrixXd pair_selector(int n, int i, int j) {
  sdp::SparseSym s;
  add_pair_selector(s, i, j, 1.0);
  return s.dense(2 * n);
}

MatrixXd sensor_selector(int n, int i) {
  sdp::SparseSym s;
  add_sensor_selector(s, i, 1.0);
  return s.dense(2 * n);
}

DualSdp assemble_dual_sdp(const NetworkScenario& scenario, const IntervalMap& bounds) {
  require_anchored_components(scenario);
  const auto index = scenario.sensor_index();
  const auto split = split_edges(scenario);

  DualSdp out;
  DualLayout& layout = out.layout;
  layout.n = static_cast<int>(scenario.sensors.size());
  layout.sensor_edges = split.sensor_edges;
  layout.anchor_edges = split.anchor_edges;
  const int n = layout.n;
  const int nv = layout.num_vars();

  sdp::SdpProblem& p = out.problem;
  p.num_vars = nv;
  p.objective = VectorXd::Zero(nv);
  p.objective[layout.t()] = 1.0;

  sdp::SdpBlock schur;  // [[M, f], [f', t]]
  schur.dim = 2 * n + 1;
  sdp::SdpBlock excess;  // M - I
  excess.dim = 2 * n;
  for (int r = 0; r < 2 * n; ++r) excess.constant.add(r, r, -1.0);
  schur.coeff(layout.t()).add(2 * n, 2 * n, 1.0);

  for (std::size_t e = 0; e < layout.sensor_edges.size(); ++e) {
    const EdgeKey& key = layout.sensor_edges[e];
    const IntervalBound& b = bound_of(bounds, key);
    const int i = index.at(key.a);
    const int j = index.at(key.b);
    p.objective[layout.alpha(e)] = -b.lower * b.lower;
    p.objective[layout.beta(e)] = b.upper * b.upper;
    add_pair_selector(schur.coeff(layout.alpha(e)), i, j, -1.0);
    add_pair_selector(schur.coeff(layout.beta(e)), i, j, 1.0);
    add_pair_selector(excess.coeff(layout.alpha(e)), i, j, -1.0);
    add_pair_selector(excess.coeff(layout.beta(e)), i, j, 1.0);
  }
  for (std::size_t e = 0; e < layout.anchor_edges.size(); ++e) {
    const EdgeKey& key = layout.anchor_edges[e];
    const IntervalBound& b = bound_of(bounds, key);
    const int i = index.at(key.a);
    const Point2 a = scenario.find_anchor(key.b)->position;
    const double aa = a.squaredNorm();
    p.objective[layout.omega(e)] = aa - b.lower * b.lower;
    p.objective[layout.phi(e)] = b.upper * b.upper - aa;
    for (const auto& [var, sign] : {std::pair{layout.omega(e), 1.0}, std::pair{layout.phi(e), -1.0}}) {
      add_sensor_selector(schur.coeff(var), i, -sign);
      add_sensor_selector(excess.coeff(var), i, -sign);
      schur.coeff(var).add(2 * n, 2 * i, sign * a.x());
      schur.coeff(var).add(2 * n, 2 * i + 1, sign * a.y());
    }
  }
  p.blocks.push_back(std::move(schur));
  p.blocks.push_back(std::move(excess));
  for (int v = 1; v < nv; ++v) {
    sdp::SdpBlock nonneg;
    nonneg.dim = 1;
    nonneg.coeff(v).add(0, 0, 1.0);
    p.blocks.push_back(std::move(nonneg));
  }
  return out;
}

DualMultipliers extract_multipliers(const DualLayout& layout, const VectorXd& x) {
  if (x.size() != layout.num_vars()) throw InvalidInput("multiplier vector has the wrong length");
  DualMultipliers mult;
  mult.t = x[layout.t()];
  for (std::size_t e = 0; e < layout.sensor_edges.size(); ++e) {
    mult.alpha[layout.sensor_edges[e]] = x[layout.alpha(e)];
    mult.beta[layout.sensor_edges[e]] = x[layout.beta(e)];
  }
  for (std::size_t e = 0; e < layout.anchor_edges.size(); ++e) {
    mult.omega[layout.anchor_edges[e]] = x[layout.omega(e)];
    mult.phi[layout.anchor_edges[e]] = x[layout.phi(e)];
  }
  return mult;
}

DualMatrices dual_matrices(const NetworkScenario& scenario, const DualMultipliers& mult) {
  const auto index = scenario.sensor_index();
  const int n = static_cast<int>(scenario.sensors.size());
  DualMatrices out{MatrixXd::Zero(2 * n, 2 * n), VectorXd::Zero(2 * n)};
  auto value = [](const std::map<EdgeKey, double>& m, const EdgeKey& k) {
    auto it = m.find(k);
    return it == m.end() ? 0.0 : it->second;
  };
  for (const auto& meas : scenario.edges) {
    const EdgeKey& key = meas.edge;
    const int i = index.at(key.a);
    if (const Anchor* anchor = scenario.find_anchor(key.b)) {
      const double w = value(mult.omega, key) - value(mult.phi, key);
      out.m(2 * i, 2 * i) -= w;
      out.m(2 * i + 1, 2 * i + 1) -= w;
      out.f[2 * i] += w * anchor->position.x();
      out.f[2 * i + 1] += w * anchor->position.y();
    } else {
      const int j = index.at(key.b);
      const double w = value(mult.alpha, key) - value(mult.beta, key);
      for (int c = 0; c < 2; ++c) {
        const int p = 2 * i + c;
        const int q = 2 * j + c;
        out.m(p, p) -= w;
        out.m(q, q) -= w;
        out.m(p, q) += w;
        out.m(q, p) += w;
      }
    }
  }
  return out;
}

namespace {

VectorXd recover_stacked(const NetworkScenario& scenario, const DualMultipliers& mult, DualMatrices& mats) {
  mats = dual_matrices(scenario, mult);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(mats.m, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  if (!(lmin >= kRecoveryEigenFloor)) {
    throw NumericalError("recovered M has smallest eigenvalue " + std::to_string(lmin) + " < 1");
  }
  return -solve_spd(mats.m, mats.f);
}

}  // namespace

std::map<NodeId, Point2> recover_estimate(const NetworkScenario& scenario, const DualMultipliers& mult) {
  DualMatrices mats;
  const VectorXd x = recover_stacked(scenario, mult, mats);
  std::map<NodeId, Point2> out;
  for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
    out.emplace(scenario.sensors[i], Point2(x[2 * i], x[2 * i + 1]));
  }
  return out;
}

double dual_bound(const NetworkScenario& scenario, const IntervalMap& bounds, const DualMultipliers& mult) {
  const DualMatrices mats = dual_matrices(scenario, mult);
  double h = 0.0;
  for (const auto& [key, a] : mult.alpha) {
    const auto& b = bound_of(bounds, key);
    h -= a * b.lower * b.lower;
  }
  for (const auto& [key, v] : mult.beta) {
    const auto& b = bound_of(bounds, key);
    h += v * b.upper * b.upper;
  }
  for (const auto& [key, w] : mult.omega) {
    const auto& b = bound_of(bounds, key);
    h += w * (scenario.find_anchor(key.b)->position.squaredNorm() - b.lower * b.lower);
  }
  for (const auto& [key, v] : mult.phi) {
    const auto& b = bound_of(bounds, key);
    h += v * (b.upper * b.upper - scenario.find_anchor(key.b)->position.squaredNorm());
  }
  return mats.f.dot(solve_spd(mats.m, mats.f)) + h;
}

CentralEstimate solve_minmax_sdp(const NetworkScenario& scenario, const sdp::SolverConfig& config) {
  const ValidationReport report = validate_scenario(scenario);
  if (!report.connected) throw InvalidInput("scenario graph is disconnected");
  if (!report.anchors_noncollinear) throw InvalidInput("anchors are collinear");

  const auto start = std::chrono::steady_clock::now();
  const IntervalMap bounds = build_feasibility_intervals(scenario);
  const DualSdp dual = assemble_dual_sdp(scenario, bounds);
  const sdp::SdpSolution sol = sdp::solve(dual.problem, config);

  CentralEstimate est;
  est.solver_status = sol.status;
  est.solver_objective = sol.objective_value;
  est.iterations = sol.iterations;
  est.multipliers = extract_multipliers(dual.layout, sol.x);
  // Interior iterates keep the multipliers positive up to roundoff.
  for (auto* group : {&est.multipliers.alpha, &est.multipliers.beta, &est.multipliers.omega, &est.multipliers.phi}) {
    for (auto& [key, v] : *group) v = std::max(v, 0.0);
  }
  est.positions = recover_estimate(scenario, est.multipliers);
  est.worst_case_value = std::max(0.0, dual_bound(scenario, bounds, est.multipliers));
  est.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return est;
}

sdp::SdpProblem assemble_primal_sdp(const NetworkScenario& scenario, const IntervalMap& bounds) {
  require_anchored_components(scenario);
  const auto index = scenario.sensor_index();
  const int n = static_cast<int>(scenario.sensors.size());
  const int d = 2 * n;
  auto y_var = [](int p) { return p; };
  auto delta_var = [d](int p, int q) {
    if (p < q) std::swap(p, q);
    return d + p * (p + 1) / 2 + q;
  };
  const int s_var = d + d * (d + 1) / 2;

  sdp::SdpProblem prob;
  prob.num_vars = s_var + 1;
  prob.objective = VectorXd::Zero(prob.num_vars);
  prob.objective[s_var] = 1.0;
  for (int p = 0; p < d; ++p) prob.objective[delta_var(p, p)] = -1.0;

  sdp::SdpBlock lifted;  // [[Delta, y], [y', 1]]
  lifted.dim = d + 1;
  lifted.constant.add(d, d, 1.0);
  sdp::SdpBlock epigraph;  // [[I, y], [y', s]]
  epigraph.dim = d + 1;
  for (int p = 0; p < d; ++p) epigraph.constant.add(p, p, 1.0);
  epigraph.coeff(s_var).add(d, d, 1.0);
  for (int p = 0; p < d; ++p) {
    lifted.coeff(y_var(p)).add(d, p, 1.0);
    epigraph.coeff(y_var(p)).add(d, p, 1.0);
    for (int q = 0; q <= p; ++q) lifted.coeff(delta_var(p, q)).add(p, q, 1.0);
  }
  prob.blocks.push_back(std::move(lifted));
  prob.blocks.push_back(std::move(epigraph));

  // Each range interval gives g - lower^2 >= 0 and upper^2 - g >= 0.
  for (const auto& meas : scenario.edges) {
    const IntervalBound& b = bound_of(bounds, meas.edge);
    sdp::SdpBlock lo, hi;
    lo.constant.add(0, 0, -b.lower * b.lower);
    hi.constant.add(0, 0, b.upper * b.upper);
    auto add_g = [&](int var, double coeff) {
      lo.coeff(var).add(0, 0, coeff);
      hi.coeff(var).add(0, 0, -coeff);
    };
    const int i = index.at(meas.edge.a);
    if (const Anchor* anchor = scenario.find_anchor(meas.edge.b)) {
      const Point2 a = anchor->position;
      lo.constant.add(0, 0, a.squaredNorm());
      hi.constant.add(0, 0, -a.squaredNorm());
      add_g(y_var(2 * i), -2.0 * a.x());
      add_g(y_var(2 * i + 1), -2.0 * a.y());
      add_g(delta_var(2 * i, 2 * i), 1.0);
      add_g(delta_var(2 * i + 1, 2 * i + 1), 1.0);
    } else {
      const int j = index.at(meas.edge.b);
      for (int c = 0; c < 2; ++c) {
        add_g(delta_var(2 * i + c, 2 * i + c), 1.0);
        add_g(delta_var(2 * j + c, 2 * j + c), 1.0);
        add_g(delta_var(2 * i + c, 2 * j + c), -2.0);
      }
    }
    prob.blocks.push_back(std::move(lo));
    prob.blocks.push_back(std::move(hi));
  }
  return prob;
}

Eigen::VectorXd stack_positions(const NetworkScenario& scenario, const std::map<NodeId, Point2>& positions) {
  VectorXd out(2 * scenario.sensors.size());
  for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
    auto it = positions.find(scenario.sensors[i]);
    if (it == positions.end()) throw InvalidInput("missing position for sensor " + std::to_string(scenario.sensors[i]));
    out.segment<2>(2 * i) = it->second;
  }
  return out;
}

std::vector<VectorXd> sample_feasible_points(const NetworkScenario& scenario, const IntervalMap& bounds,
                                             const Point2& lo, const Point2& hi, std::size_t count,
                                             std::uint64_t seed, std::size_t max_draws) {
  const auto index = scenario.sensor_index();
  const int n = static_cast<int>(scenario.sensors.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  std::vector<VectorXd> out;
  VectorXd y(2 * n);
  for (std::size_t draw = 0; draw < max_draws && out.size() < count; ++draw) {
    for (int i = 0; i < n; ++i) {
      y[2 * i] = ux(rng);
      y[2 * i + 1] = uy(rng);
    }
    bool feasible = true;
    for (const auto& meas : scenario.edges) {
      const Point2 yi = y.segment<2>(2 * index.at(meas.edge.a));
      const Anchor* anchor = scenario.find_anchor(meas.edge.b);
      const Point2 other = anchor ? anchor->position : Point2(y.segment<2>(2 * index.at(meas.edge.b)));
      if (!bound_of(bounds, meas.edge).contains((yi - other).norm())) {
        feasible = false;
        break;
      }
    }
    if (feasible) out.push_back(y);
  }
  return out;
}

}  // namespace mmloc
