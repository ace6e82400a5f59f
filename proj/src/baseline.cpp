#include "minmaxloc/baseline.hpp"

#include "minmaxloc/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace mmloc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Guards the Jacobian of |d| at coincident points.
constexpr double kMinDistance = 1e-12;

struct Residual {
  int i = -1;
  int j = -1;  // -1 for anchor links
  Point2 anchor = Point2::Zero();
  double z = 0.0;
};

std::vector<Residual> residual_terms(const NetworkScenario& scenario) {
  const auto index = scenario.sensor_index();
  std::vector<Residual> out;
  for (const auto& m : scenario.edges) {
    Residual r;
    r.i = index.at(m.edge.a);
    r.z = m.z;
    if (const Anchor* a = scenario.find_anchor(m.edge.b)) {
      r.anchor = a->position;
    } else {
      r.j = index.at(m.edge.b);
    }
    out.push_back(r);
  }
  return out;
}

Point2 other_end(const Residual& r, const VectorXd& x) {
  return r.j < 0 ? r.anchor : Point2(x.segment<2>(2 * r.j));
}

void linearize(const std::vector<Residual>& terms, const VectorXd& x, VectorXd& res, MatrixXd& jac) {
  res.resize(static_cast<Eigen::Index>(terms.size()));
  jac = MatrixXd::Zero(res.size(), x.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Residual& r = terms[k];
    const Point2 diff = Point2(x.segment<2>(2 * r.i)) - other_end(r, x);
    const double d = diff.norm();
    res[k] = d - r.z;
    const Point2 u = d > kMinDistance ? Point2(diff / d) : Point2::Zero();
    jac.block<1, 2>(k, 2 * r.i) = u.transpose();
    if (r.j >= 0) jac.block<1, 2>(k, 2 * r.j) = -u.transpose();
  }
}

double objective_of(const std::vector<Residual>& terms, const VectorXd& x) {
  double f = 0.0;
  for (const auto& r : terms) {
    const double d = (Point2(x.segment<2>(2 * r.i)) - other_end(r, x)).norm();
    f += (d - r.z) * (d - r.z);
  }
  return f;
}

}  // namespace

double ls_objective(const NetworkScenario& scenario, const VectorXd& x) {
  return objective_of(residual_terms(scenario), x);
}

VectorXd ls_gradient(const NetworkScenario& scenario, const VectorXd& x) {
  VectorXd res;
  MatrixXd jac;
  linearize(residual_terms(scenario), x, res, jac);
  return 2.0 * jac.transpose() * res;
}

BaselineResult least_squares_from(const NetworkScenario& scenario, VectorXd x, const BaselineOptions& options) {
  const auto terms = residual_terms(scenario);
  if (x.size() != static_cast<Eigen::Index>(2 * scenario.sensors.size())) throw InvalidInput("start vector has the wrong length");

  BaselineResult out;
  double f = objective_of(terms, x);
  out.objective_history.push_back(f);
  double damping = options.initial_damping;
  VectorXd res;
  MatrixXd jac;
  for (out.iterations = 0; out.iterations < options.max_iters; ++out.iterations) {
    linearize(terms, x, res, jac);
    const VectorXd grad = 2.0 * jac.transpose() * res;
    if (grad.norm() <= options.grad_tol) {
      out.converged = true;
      break;
    }
    const MatrixXd jtj = jac.transpose() * jac;
    bool accepted = false;
    while (damping < 1e12) {
      MatrixXd lhs = jtj;
      lhs.diagonal().array() += damping * (1.0 + jtj.diagonal().array());
      const VectorXd step = lhs.ldlt().solve(-jac.transpose() * res);
      const VectorXd trial = x + step;
      const double ft = objective_of(terms, trial);
      if (std::isfinite(ft) && ft < f) {
        x = trial;
        f = ft;
        damping = std::max(damping / 3.0, 1e-12);
        accepted = true;
        break;
      }
      damping *= 4.0;
    }
    if (!accepted) {
      // No descent at any damping: stationary up to roundoff.
      out.converged = grad.norm() <= 1e-6;
      break;
    }
    out.objective_history.push_back(f);
  }
  out.objective = f;
  for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
    out.positions.emplace(scenario.sensors[i], Point2(x.segment<2>(2 * i)));
  }
  return out;
}

BaselineResult baseline_least_squares(const NetworkScenario& scenario, std::uint64_t seed,
                                      const BaselineOptions& options, const Point2& area_min,
                                      const Point2& area_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(area_min.x(), area_max.x());
  std::uniform_real_distribution<double> uy(area_min.y(), area_max.y());
  VectorXd start(2 * scenario.sensors.size());
  for (std::size_t i = 0; i < scenario.sensors.size(); ++i) {
    start[2 * i] = ux(rng);
    start[2 * i + 1] = uy(rng);
  }
  return least_squares_from(scenario, std::move(start), options);
}

}  // namespace mmloc
