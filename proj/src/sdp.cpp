#include "minmaxloc/sdp.hpp"

#include "minmaxloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <tuple>

namespace mmloc::sdp {

void SparseSym::add(int row, int col, double value) {
  if (value == 0.0) return;
  if (row < col) std::swap(row, col);
  entries_.push_back({row, col, value});
}

Eigen::MatrixXd SparseSym::dense(int dim) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& e : entries_) {
    m(e.row, e.col) += e.value;
    if (e.row != e.col) m(e.col, e.row) += e.value;
  }
  return m;
}

double SparseSym::frobenius_norm() const {
  // Entries may repeat, so go through the dense form when that happens.
  int dim = 0;
  for (const auto& e : entries_) dim = std::max(dim, e.row + 1);
  return dense(dim).norm();
}

void SdpProblem::validate() const {
  if (num_vars < 0) throw InvalidInput("negative variable count");
  if (objective.size() != num_vars) throw InvalidInput("objective length does not match num_vars");
  if (blocks.empty()) throw InvalidInput("problem has no blocks");
  for (const auto& block : blocks) {
    if (block.dim < 1) throw InvalidInput("block dimension must be >= 1");
    auto check = [&](const SparseSym& m) {
      for (const auto& e : m.entries()) {
        if (e.row < 0 || e.col < 0 || e.row >= block.dim || e.col >= block.dim) {
          throw InvalidInput("matrix entry outside its block");
        }
        if (!std::isfinite(e.value)) throw InvalidInput("non-finite matrix entry");
      }
    };
    check(block.constant);
    for (const auto& [var, m] : block.coefficients) {
      if (var < 0 || var >= num_vars) throw InvalidInput("coefficient for unknown variable");
      check(m);
    }
  }
}

int SdpProblem::total_dim() const {
  int n = 0;
  for (const auto& b : blocks) n += b.dim;
  return n;
}

std::vector<Eigen::MatrixXd> SdpProblem::evaluate(const Eigen::VectorXd& x) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(blocks.size());
  for (const auto& block : blocks) {
    Eigen::MatrixXd m = block.constant.dense(block.dim);
    for (const auto& [var, coeff] : block.coefficients) {
      for (const auto& e : coeff.entries()) {
        m(e.row, e.col) += x[var] * e.value;
        if (e.row != e.col) m(e.col, e.row) += x[var] * e.value;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

void SolverConfig::validate() const {
  if (!(gap_tol > 0.0) || !(feas_tol > 0.0) || max_iters <= 0) {
    throw InvalidInput("solver tolerances and iteration limit must be positive");
  }
  if (!(step_fraction > 0.0 && step_fraction < 1.0)) {
    throw InvalidInput("step_fraction must lie in (0, 1)");
  }
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::MaxIterations: return "max_iterations";
    case SdpStatus::NumericalFailure: return "numerical_failure";
    case SdpStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Both triangles spelled out, so Tr(A W) = sum value * W(col, row).
struct FullEntry {
  int row;
  int col;
  double value;
};

struct BlockData {
  int dim = 1;
  MatrixXd a0;
  std::vector<int> vars;
  std::vector<std::vector<FullEntry>> coeffs;  // parallel to vars
};

std::vector<FullEntry> expand(const SparseSym& m) {
  std::vector<FullEntry> out;
  out.reserve(2 * m.entries().size());
  for (const auto& e : m.entries()) {
    out.push_back({e.row, e.col, e.value});
    if (e.row != e.col) out.push_back({e.col, e.row, e.value});
  }
  return out;
}

double trace_product(const std::vector<FullEntry>& a, const MatrixXd& w) {
  double s = 0.0;
  for (const auto& e : a) s += e.value * w(e.col, e.row);
  return s;
}

void add_scaled(MatrixXd& m, const std::vector<FullEntry>& a, double scale) {
  for (const auto& e : a) m(e.row, e.col) += scale * e.value;
}

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double frob_inner(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

// Largest alpha with m + alpha * dm >= 0 (infinity if unbounded).
double max_step(const MatrixXd& m, const MatrixXd& dm) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (m.rows() == 1) {
    return dm(0, 0) < 0.0 ? -m(0, 0) / dm(0, 0) : kInf;
  }
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  MatrixXd t = llt.matrixL().solve(dm);
  t = llt.matrixL().solve(t.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrize(t), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

double min_eigenvalue(const MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(symmetrize(m), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

struct Direction {
  VectorXd dx;
  std::vector<MatrixXd> ds;
  std::vector<MatrixXd> dz;
};

class Engine {
public:
  Engine(const SdpProblem& problem, const SolverConfig& config)
      : problem_(problem), config_(config), m_(problem.num_vars) {
    for (const auto& block : problem.blocks) {
      BlockData data;
      data.dim = block.dim;
      data.a0 = block.constant.dense(block.dim);
      for (const auto& [var, coeff] : block.coefficients) {
        if (coeff.empty()) continue;
        data.vars.push_back(var);
        data.coeffs.push_back(expand(coeff));
      }
      blocks_.push_back(std::move(data));
    }
    total_dim_ = problem.total_dim();
    norm_a0_ = 0.0;
    for (const auto& b : blocks_) norm_a0_ += b.a0.squaredNorm();
    norm_a0_ = std::sqrt(norm_a0_);
    norm_c_ = problem.objective.norm();
  }

  SdpSolution run();

private:
  void initialize();
  void compute_residuals();
  bool factor_slack();
  bool assemble_schur();
  // Solves the HKM system for a complementarity right-hand side given as
  // T_b = S_b^{-1} R_c,b.
  Direction direction(const std::vector<MatrixXd>& t);
  bool detect_infeasibility() const;
  // Damped primal and dual step lengths, each capped at 1.
  std::pair<double, double> step_lengths(const Direction& d) const;

  const SdpProblem& problem_;
  const SolverConfig& config_;
  int m_;
  int total_dim_ = 0;
  double norm_a0_ = 0.0;
  double norm_c_ = 0.0;
  std::vector<BlockData> blocks_;

  VectorXd x_;
  std::vector<MatrixXd> s_, z_, s_inv_, rp_;
  VectorXd rd_;
  double pobj_ = 0.0, dobj_ = 0.0, mu_ = 0.0;
  Residuals res_;
  double gap_ = 0.0;
  Eigen::LDLT<MatrixXd> schur_;
};

void Engine::initialize() {
  x_ = VectorXd::Zero(m_);
  s_.clear();
  z_.clear();
  for (const auto& b : blocks_) {
    const double n = b.dim;
    double max_coeff = 0.0;
    double max_ratio = 0.0;
    for (std::size_t k = 0; k < b.vars.size(); ++k) {
      double nrm = 0.0;
      // Frobenius norm of the expanded entries; repeats are rare enough here.
      for (const auto& e : b.coeffs[k]) nrm += e.value * e.value;
      nrm = std::sqrt(nrm);
      max_coeff = std::max(max_coeff, nrm);
      max_ratio = std::max(max_ratio, (1.0 + std::abs(problem_.objective[b.vars[k]])) / (1.0 + nrm));
    }
    const double eta = std::max({10.0, std::sqrt(n), b.a0.norm(), max_coeff});
    const double xi = std::max({10.0, std::sqrt(n), n * max_ratio});
    s_.push_back(eta * MatrixXd::Identity(b.dim, b.dim));
    z_.push_back(xi * MatrixXd::Identity(b.dim, b.dim));
  }
}

void Engine::compute_residuals() {
  rp_.resize(blocks_.size());
  rd_ = problem_.objective;
  double rp_norm = 0.0;
  double tr_a0z = 0.0;
  double tr_sz = 0.0;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& data = blocks_[b];
    MatrixXd f = data.a0;
    for (std::size_t k = 0; k < data.vars.size(); ++k) {
      add_scaled(f, data.coeffs[k], x_[data.vars[k]]);
      rd_[data.vars[k]] -= trace_product(data.coeffs[k], z_[b]);
    }
    rp_[b] = f - s_[b];
    rp_norm += rp_[b].squaredNorm();
    tr_a0z += frob_inner(data.a0, z_[b]);
    tr_sz += frob_inner(s_[b], z_[b]);
  }
  pobj_ = problem_.objective.dot(x_);
  dobj_ = -tr_a0z;
  mu_ = tr_sz / total_dim_;
  res_.primal = std::sqrt(rp_norm) / (1.0 + norm_a0_);
  res_.dual = rd_.norm() / (1.0 + norm_c_);
  gap_ = std::abs(pobj_ - dobj_) / (1.0 + std::abs(pobj_) + std::abs(dobj_));
}

bool Engine::factor_slack() {
  s_inv_.resize(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].dim == 1) {
      if (!(s_[b](0, 0) > 0.0)) return false;
      s_inv_[b] = MatrixXd::Constant(1, 1, 1.0 / s_[b](0, 0));
      continue;
    }
    Eigen::LLT<MatrixXd> llt(s_[b]);
    if (llt.info() != Eigen::Success) return false;
    s_inv_[b] = llt.solve(MatrixXd::Identity(blocks_[b].dim, blocks_[b].dim));
    s_inv_[b] = symmetrize(s_inv_[b]);
  }
  return true;
}

bool Engine::assemble_schur() {
  // H_kl = sum_b Tr(A_kb S_b^{-1} A_lb Z_b).
  MatrixXd h = MatrixXd::Zero(m_, m_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& data = blocks_[b];
    const MatrixXd& si = s_inv_[b];
    const MatrixXd& z = z_[b];
    const std::size_t nv = data.vars.size();
    if (data.dim == 1) {
      const double w = z(0, 0) * si(0, 0);
      auto scalar = [](const std::vector<FullEntry>& a) {
        double v = 0.0;
        for (const auto& e : a) v += e.value;
        return v;
      };
      for (std::size_t p = 0; p < nv; ++p) {
        const double ap = scalar(data.coeffs[p]);
        for (std::size_t q = p; q < nv; ++q) {
          const double aq = scalar(data.coeffs[q]);
          h(data.vars[p], data.vars[q]) += ap * aq * w;
          if (p != q) h(data.vars[q], data.vars[p]) += ap * aq * w;
        }
      }
      continue;
    }
    for (std::size_t p = 0; p < nv; ++p) {
      const auto& ak = data.coeffs[p];
      for (std::size_t q = p; q < nv; ++q) {
        const auto& al = data.coeffs[q];
        double v = 0.0;
        for (const auto& e1 : ak) {
          for (const auto& e2 : al) {
            // a_pq a_rs Sinv(q, r) Z(s, p)
            v += e1.value * e2.value * si(e1.col, e2.row) * z(e2.col, e1.row);
          }
        }
        h(data.vars[p], data.vars[q]) += v;
        if (p != q) h(data.vars[q], data.vars[p]) += v;
      }
    }
  }
  schur_.compute(h);
  if (schur_.info() != Eigen::Success || !schur_.isPositive()) {
    const double reg = 1e-14 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    h.diagonal().array() += reg;
    schur_.compute(h);
    if (schur_.info() != Eigen::Success) return false;
  }
  return true;
}

Direction Engine::direction(const std::vector<MatrixXd>& t) {
  Direction d;
  VectorXd rhs = -rd_;
  std::vector<MatrixXd> w(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    w[b] = t[b] - s_inv_[b] * rp_[b] * z_[b];
    const auto& data = blocks_[b];
    for (std::size_t k = 0; k < data.vars.size(); ++k) {
      rhs[data.vars[k]] += trace_product(data.coeffs[k], w[b]);
    }
  }
  d.dx = schur_.solve(rhs);
  d.ds.resize(blocks_.size());
  d.dz.resize(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& data = blocks_[b];
    MatrixXd ds = rp_[b];
    for (std::size_t k = 0; k < data.vars.size(); ++k) add_scaled(ds, data.coeffs[k], d.dx[data.vars[k]]);
    d.ds[b] = ds;
    d.dz[b] = symmetrize(t[b] - s_inv_[b] * ds * z_[b]);
  }
  return d;
}

std::pair<double, double> Engine::step_lengths(const Direction& d) const {
  double ap = std::numeric_limits<double>::infinity();
  double ad = ap;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    ap = std::min(ap, max_step(s_[b], d.ds[b]));
    ad = std::min(ad, max_step(z_[b], d.dz[b]));
  }
  return {std::min(1.0, config_.step_fraction * ap), std::min(1.0, config_.step_fraction * ad)};
}

bool Engine::detect_infeasibility() const {
  // No x with A0 + sum x_k A_k >= 0: Z >= 0 with <A_k, Z> = 0 and <A0, Z> < 0.
  const double tr_a0z = -dobj_;
  if (tr_a0z < 0.0) {
    const VectorXd traces = problem_.objective - rd_;
    if (traces.norm() < config_.feas_tol * (-tr_a0z) && -tr_a0z > 1e6 * (1.0 + norm_c_)) return true;
  }
  // Unbounded below: x drifting along a recession direction with c' x -> -inf.
  const double xn = x_.norm();
  if (xn > 1e8 && pobj_ < -1e-6 * xn) {
    double lmin = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      lmin = std::min(lmin, min_eigenvalue(s_[b] + rp_[b] - blocks_[b].a0));
    }
    if (lmin > -1e-7 * xn) return true;
  }
  return false;
}

SdpSolution Engine::run() {
  initialize();
  SdpSolution sol;
  sol.status = SdpStatus::MaxIterations;
  int iter = 0;
  for (;; ++iter) {
    compute_residuals();
    sol.history.push_back({pobj_, dobj_, res_, mu_});
    if (res_.primal <= config_.feas_tol && res_.dual <= config_.feas_tol && gap_ <= config_.gap_tol) {
      sol.status = SdpStatus::Optimal;
      break;
    }
    if (detect_infeasibility()) {
      sol.status = SdpStatus::Infeasible;
      break;
    }
    if (iter >= config_.max_iters) {
      sol.status = SdpStatus::MaxIterations;
      break;
    }
    if (!factor_slack() || !assemble_schur()) {
      sol.status = SdpStatus::NumericalFailure;
      break;
    }

    // Predictor (affine scaling): R_c = -S Z, so S^{-1} R_c = -Z.
    std::vector<MatrixXd> t(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) t[b] = -z_[b];
    const Direction aff = direction(t);
    double ap = 1.0, ad = 1.0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      ap = std::min(ap, max_step(s_[b], aff.ds[b]));
      ad = std::min(ad, max_step(z_[b], aff.dz[b]));
    }
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      mu_aff += frob_inner(s_[b] + ap * aff.ds[b], z_[b] + ad * aff.dz[b]);
    }
    mu_aff /= total_dim_;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu_, 3.0), 0.0, 1.0);

    // Corrector: R_c = sigma mu I - S Z - dS_aff dZ_aff.
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      t[b] = sigma * mu_ * s_inv_[b] - z_[b] - s_inv_[b] * aff.ds[b] * aff.dz[b];
    }
    const Direction dir = direction(t);
    std::tie(ap, ad) = step_lengths(dir);
    if (!std::isfinite(dir.dx.sum()) || (ap < 1e-14 && ad < 1e-14)) {
      sol.status = SdpStatus::NumericalFailure;
      break;
    }
    x_ += ap * dir.dx;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      s_[b] = symmetrize(s_[b] + ap * dir.ds[b]);
      z_[b] = symmetrize(z_[b] + ad * dir.dz[b]);
    }
  }
  sol.x = x_;
  sol.objective_value = pobj_;
  sol.dual_objective = dobj_;
  sol.dual_blocks = z_;
  sol.slack_blocks = s_;
  sol.gap = gap_;
  sol.residuals = res_;
  sol.iterations = iter;
  return sol;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate();
  Engine engine(problem, config);
  return engine.run();
}

CertificateReport check_certificate(const SdpProblem& problem, const SdpSolution& solution) {
  CertificateReport report;
  if (solution.x.size() != problem.num_vars || solution.dual_blocks.size() != problem.blocks.size()) {
    throw InvalidInput("solution does not match problem dimensions");
  }
  const std::vector<MatrixXd> f = problem.evaluate(solution.x);

  report.psd_ok = true;
  report.dual_psd_ok = true;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  double primal_violation = 0.0;
  double tr_a0z = 0.0;
  VectorXd traces = VectorXd::Zero(problem.num_vars);
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    const auto& block = problem.blocks[b];
    const MatrixXd& z = solution.dual_blocks[b];
    const double lmin = min_eigenvalue(f[b]);
    report.min_eigenvalue = std::min(report.min_eigenvalue, lmin);
    const double floor = -1e-9 * (1.0 + f[b].norm());
    if (lmin < floor) report.psd_ok = false;
    primal_violation = std::max(primal_violation, std::max(0.0, -lmin) / (1.0 + f[b].norm()));
    if (min_eigenvalue(z) < -1e-9 * (1.0 + z.norm())) report.dual_psd_ok = false;

    tr_a0z += frob_inner(block.constant.dense(block.dim), z);
    for (const auto& [var, coeff] : block.coefficients) {
      traces[var] += frob_inner(coeff.dense(block.dim), z);
    }
  }
  const double pobj = problem.objective.dot(solution.x);
  const double dobj = -tr_a0z;
  report.residuals.primal = primal_violation;
  report.residuals.dual = (problem.objective - traces).norm() / (1.0 + problem.objective.norm());
  report.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
  return report;
}

void write_sdpa(const SdpProblem& problem, std::ostream& out) {
  problem.validate();
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  out << "* minmaxloc SDP export\n";
  out << problem.num_vars << " = mDIM\n";
  out << problem.blocks.size() << " = nBLOCK\n";
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    out << problem.blocks[b].dim << (b + 1 < problem.blocks.size() ? " " : "\n");
  }
  for (int k = 0; k < problem.num_vars; ++k) {
    out << problem.objective[k] << (k + 1 < problem.num_vars ? " " : "\n");
  }
  if (problem.num_vars == 0) out << "\n";
  // Lines: matrix-index block row col value, upper triangle, 1-based.
  auto emit = [&](int mat, std::size_t b, const SparseSym& m, double sign) {
    const MatrixXd d = m.dense(problem.blocks[b].dim);
    for (int c = 0; c < d.cols(); ++c) {
      for (int r = 0; r <= c; ++r) {
        if (d(r, c) != 0.0) out << mat << ' ' << b + 1 << ' ' << r + 1 << ' ' << c + 1 << ' ' << sign * d(r, c) << '\n';
      }
    }
  };
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) emit(0, b, problem.blocks[b].constant, -1.0);
  for (int k = 0; k < problem.num_vars; ++k) {
    for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
      auto it = problem.blocks[b].coefficients.find(k);
      if (it != problem.blocks[b].coefficients.end()) emit(k + 1, b, it->second, 1.0);
    }
  }
  out.precision(old_precision);
}

}  // namespace mmloc::sdp
