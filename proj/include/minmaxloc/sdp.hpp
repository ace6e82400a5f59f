#pragma once

// Small dense semidefinite programs in linear-matrix-inequality form:
//
//   minimize    c' x
//   subject to  A0_b + sum_k x_k A_kb  >= 0   for every block b,
//
// with conic dual
//
//   maximize    -sum_b <A0_b, Z_b>
//   subject to  sum_b <A_kb, Z_b> = c_k,  Z_b >= 0.
//
// Scalar inequalities are 1x1 blocks. Coefficient matrices are kept as
// lower-triangular coordinate lists since each multiplier touches only a
// handful of entries.

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mmloc::sdp {

/// One lower-triangular entry (row >= col) of a symmetric matrix.
struct SymEntry {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Symmetric matrix as a list of lower-triangular entries; repeated
/// positions are summed.
class SparseSym {
public:
  SparseSym() = default;

  /// Adds `value` at (row, col) and, implicitly, at (col, row).
  void add(int row, int col, double value);
  const std::vector<SymEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  Eigen::MatrixXd dense(int dim) const;
  double frobenius_norm() const;

private:
  std::vector<SymEntry> entries_;
};

struct SdpBlock {
  int dim = 1;
  SparseSym constant;
  std::map<int, SparseSym> coefficients;  // variable index -> A_k restricted to the block

  SparseSym& coeff(int var) { return coefficients[var]; }
};

struct SdpProblem {
  int num_vars = 0;
  Eigen::VectorXd objective;
  std::vector<SdpBlock> blocks;

  /// Throws InvalidInput on out-of-range indices or dimensions.
  void validate() const;
  int total_dim() const;
  /// A0_b + sum_k x_k A_kb for every block.
  std::vector<Eigen::MatrixXd> evaluate(const Eigen::VectorXd& x) const;
};

struct SolverConfig {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iters = 200;
  double step_fraction = 0.98;

  void validate() const;
};

enum class SdpStatus { Optimal, MaxIterations, NumericalFailure, Infeasible };

std::string to_string(SdpStatus status);

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

struct IterateRecord {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
  double mu = 0.0;
};

struct SdpSolution {
  Eigen::VectorXd x;
  double objective_value = 0.0;  // c' x
  double dual_objective = 0.0;   // -sum <A0, Z>
  std::vector<Eigen::MatrixXd> dual_blocks;
  std::vector<Eigen::MatrixXd> slack_blocks;
  SdpStatus status = SdpStatus::NumericalFailure;
  double gap = 0.0;
  Residuals residuals;
  int iterations = 0;
  std::vector<IterateRecord> history;
};

/// Infeasible-start primal-dual path following with the HKM search direction
/// and Mehrotra predictor-corrector. Initial iterate x = 0, S_b = eta_b I,
/// Z_b = xi_b I with eta/xi scaled from block data norms.
SdpSolution solve(const SdpProblem& problem, const SolverConfig& config = {});

struct CertificateReport {
  bool psd_ok = false;       // A0 + sum x_k A_k within the eigenvalue floor
  bool dual_psd_ok = false;  // Z blocks within the eigenvalue floor
  double gap = 0.0;
  Residuals residuals;
  double min_eigenvalue = 0.0;

  bool ok(double gap_tol, double feas_tol) const {
    return psd_ok && dual_psd_ok && gap <= gap_tol && residuals.primal <= feas_tol &&
           residuals.dual <= feas_tol;
  }
};

/// Recomputes feasibility and gap from (problem, x, Z) only. The floor for a
/// block M is -1e-9 (1 + ||M||_F); the primal residual is the worst relative
/// violation of that floor, the dual residual ||c - <A_k, Z>|| / (1 + ||c||).
CertificateReport check_certificate(const SdpProblem& problem, const SdpSolution& solution);

/// Writes the problem in SDPA sparse format (".dat-s"). SDPA expects
/// sum_k x_k F_k - F_0 >= 0, so F_0 = -A0.
void write_sdpa(const SdpProblem& problem, std::ostream& out);

}  // namespace mmloc::sdp
