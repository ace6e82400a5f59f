#pragma once

// Slow reference for LMI-form SDPs, written independently of the
// interior-point engine: a primal-only log-barrier method with damped Newton
// steps on  t c'x - sum_b log det F_b(x), starting from a known strictly
// feasible point. Test-only.

#include "minmaxloc/sdp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace mmloc::oracle {

struct RandomSdp {
  sdp::SdpProblem problem;
  Eigen::VectorXd feasible_x;
};

// Random problem that is strictly feasible on both sides: F(x0) = P > 0 and
// c_k = <A_k, Z0> for some Z0 > 0, so the optimum is attained.
inline RandomSdp make_random_sdp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvars(1, 6);
  std::uniform_int_distribution<int> nblocks(1, 3);
  std::uniform_int_distribution<int> bdim(1, 4);
  std::normal_distribution<double> g(0.0, 1.0);

  RandomSdp out;
  auto& p = out.problem;
  p.num_vars = nvars(rng);
  const int nb = nblocks(rng);
  out.feasible_x = Eigen::VectorXd::Zero(p.num_vars);
  for (int k = 0; k < p.num_vars; ++k) out.feasible_x[k] = g(rng);
  p.objective = Eigen::VectorXd::Zero(p.num_vars);

  for (int b = 0; b < nb; ++b) {
    sdp::SdpBlock block;
    block.dim = bdim(rng);
    const int n = block.dim;
    Eigen::MatrixXd fx = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < p.num_vars; ++k) {
      Eigen::MatrixXd a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) block.coeff(k).add(i, j, a(i, j));
      fx += out.feasible_x[k] * a;
    }
    Eigen::MatrixXd r(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = g(rng);
    const Eigen::MatrixXd pd = r * r.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd a0 = pd - fx;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) block.constant.add(i, j, a0(i, j));

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(i, j) = g(rng);
    const Eigen::MatrixXd z0 = r * r.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    for (const auto& [var, coeff] : block.coefficients) {
      p.objective[var] += coeff.dense(n).cwiseProduct(z0).sum();
    }
    p.blocks.push_back(std::move(block));
  }
  return out;
}

// Reference optimal value by the barrier method; duality gap <= total_dim / t.
inline double barrier_reference(const sdp::SdpProblem& p, Eigen::VectorXd x, double t_final = 1e10) {
  const int m = p.num_vars;
  std::vector<Eigen::MatrixXd> a0(p.blocks.size());
  std::vector<std::vector<Eigen::MatrixXd>> ak(p.blocks.size(), std::vector<Eigen::MatrixXd>(m));
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const int n = p.blocks[b].dim;
    a0[b] = p.blocks[b].constant.dense(n);
    for (int k = 0; k < m; ++k) {
      auto it = p.blocks[b].coefficients.find(k);
      ak[b][k] = it == p.blocks[b].coefficients.end() ? Eigen::MatrixXd::Zero(n, n) : it->second.dense(n);
    }
  }
  auto eval = [&](const Eigen::VectorXd& v, std::size_t b) {
    Eigen::MatrixXd f = a0[b];
    for (int k = 0; k < m; ++k) f += v[k] * ak[b][k];
    return f;
  };
  auto phi = [&](const Eigen::VectorXd& v, double t, bool& ok) {
    double val = t * p.objective.dot(v);
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      Eigen::LLT<Eigen::MatrixXd> llt(eval(v, b));
      if (llt.info() != Eigen::Success) {
        ok = false;
        return 0.0;
      }
      val -= 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    ok = true;
    return val;
  };

  for (double t = 1.0; t <= t_final; t *= 10.0) {
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd grad = t * p.objective;
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
      for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        const Eigen::MatrixXd finv = eval(x, b).inverse();
        std::vector<Eigen::MatrixXd> fa(m);
        for (int k = 0; k < m; ++k) {
          fa[k] = finv * ak[b][k];
          grad[k] -= fa[k].trace();
        }
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) hess(k, l) += (fa[k] * fa[l]).trace();
      }
      const Eigen::VectorXd step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      if (decrement < 1e-12) break;
      bool ok = false;
      const double f0 = phi(x, t, ok);
      double s = 1.0;
      for (;;) {
        const double f1 = phi(x + s * step, t, ok);
        // Near the center the Armijo test drowns in roundoff of t c'x, so
        // small decrements only need to keep the iterate feasible.
        if (ok && (f1 <= f0 - 0.25 * s * decrement || decrement < 1e-6)) break;
        s *= 0.5;
        if (s < 1e-16) throw std::runtime_error("barrier line search failed");
      }
      x += s * step;
    }
  }
  return p.objective.dot(x);
}

}  // namespace mmloc::oracle
