#include "minmaxloc/sdp.hpp"

#include "minmaxloc/errors.hpp"
#include "sdp_oracle.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace mmloc;
using namespace mmloc::sdp;

namespace {

// minimize x  s.t.  [x - 2] >= 0
SdpProblem scalar_problem() {
  SdpProblem p;
  p.num_vars = 1;
  p.objective = Eigen::VectorXd::Ones(1);
  SdpBlock b;
  b.dim = 1;
  b.constant.add(0, 0, -2.0);
  b.coeff(0).add(0, 0, 1.0);
  p.blocks.push_back(b);
  return p;
}

// minimize x1 + x2  s.t.  [[x1, 1], [1, x2]] >= 0
SdpProblem amgm_problem() {
  SdpProblem p;
  p.num_vars = 2;
  p.objective = Eigen::VectorXd::Ones(2);
  SdpBlock b;
  b.dim = 2;
  b.constant.add(1, 0, 1.0);
  b.coeff(0).add(0, 0, 1.0);
  b.coeff(1).add(1, 1, 1.0);
  p.blocks.push_back(b);
  return p;
}

}  // namespace

TEST(Sdp, ScalarBound) {
  const auto p = scalar_problem();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SdpStatus::Optimal);
  EXPECT_NEAR(sol.x[0], 2.0, 1e-7);
  EXPECT_NEAR(sol.objective_value, 2.0, 1e-7);
}

TEST(Sdp, AmGmEqualityCase) {
  const auto p = amgm_problem();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SdpStatus::Optimal);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-6);
  EXPECT_NEAR(sol.objective_value, 2.0, 1e-7);
}

TEST(Sdp, RandomProblemsMatchBarrierReference) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = oracle::make_random_sdp(rng);
    const double ref = oracle::barrier_reference(inst.problem, inst.feasible_x);
    const auto sol = solve(inst.problem);
    ASSERT_EQ(sol.status, SdpStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(sol.objective_value, ref, 1e-5 * (1.0 + std::abs(ref))) << "trial " << trial;
    EXPECT_TRUE(check_certificate(inst.problem, sol).ok(1e-8, 1e-8)) << "trial " << trial;
  }
}

TEST(Sdp, OptimalImpliesCertificate) {
  const auto p = scalar_problem();
  const auto sol = solve(p);
  const auto cert = check_certificate(p, sol);
  EXPECT_TRUE(cert.psd_ok);
  EXPECT_TRUE(cert.dual_psd_ok);
  EXPECT_LE(cert.gap, 1e-8);
  EXPECT_TRUE(cert.ok(1e-8, 1e-8));
}

TEST(Sdp, CertificateFlagsPerturbedPrimal) {
  const auto p = scalar_problem();
  auto sol = solve(p);
  sol.x[0] += 0.1;
  EXPECT_FALSE(check_certificate(p, sol).ok(1e-8, 1e-8));
  sol.x[0] -= 0.2;
  const auto cert = check_certificate(p, sol);
  EXPECT_FALSE(cert.psd_ok);
  EXPECT_GT(cert.residuals.primal, 1e-8);
}

TEST(Sdp, WeakDualityOnFeasibleIterates) {
  std::mt19937_64 rng(7);
  const SolverConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = oracle::make_random_sdp(rng);
    const auto sol = solve(inst.problem, cfg);
    for (const auto& rec : sol.history) {
      if (rec.residuals.primal > cfg.feas_tol || rec.residuals.dual > cfg.feas_tol) continue;
      const double scale = 1.0 + std::abs(rec.primal_objective) + std::abs(rec.dual_objective);
      EXPECT_GE(rec.primal_objective, rec.dual_objective - cfg.feas_tol * scale);
    }
    EXPECT_GE(sol.objective_value, sol.dual_objective - cfg.feas_tol * (1.0 + std::abs(sol.objective_value)));
  }
}

TEST(Sdp, Deterministic) {
  std::mt19937_64 rng(99);
  const auto inst = oracle::make_random_sdp(rng);
  const auto a = solve(inst.problem);
  const auto b = solve(inst.problem);
  ASSERT_EQ(a.x.size(), b.x.size());
  for (int k = 0; k < a.x.size(); ++k) EXPECT_EQ(a.x[k], b.x[k]);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Sdp, DetectsInfeasibleLmi) {
  // x >= 1 and -x >= 0 cannot both hold.
  SdpProblem p;
  p.num_vars = 1;
  p.objective = Eigen::VectorXd::Ones(1);
  SdpBlock a;
  a.constant.add(0, 0, -1.0);
  a.coeff(0).add(0, 0, 1.0);
  SdpBlock b;
  b.coeff(0).add(0, 0, -1.0);
  p.blocks = {a, b};
  const auto sol = solve(p);
  EXPECT_EQ(sol.status, SdpStatus::Infeasible);
}

TEST(Sdp, DetectsUnboundedObjective) {
  // minimize -x s.t. x >= 0
  SdpProblem p;
  p.num_vars = 1;
  p.objective = -Eigen::VectorXd::Ones(1);
  SdpBlock a;
  a.coeff(0).add(0, 0, 1.0);
  p.blocks = {a};
  const auto sol = solve(p);
  EXPECT_EQ(sol.status, SdpStatus::Infeasible);
}

TEST(Sdp, RejectsMalformedProblems) {
  auto p = scalar_problem();
  p.blocks[0].coeff(3).add(0, 0, 1.0);
  EXPECT_THROW(solve(p), InvalidInput);
  auto q = scalar_problem();
  q.blocks[0].constant.add(1, 0, 1.0);
  EXPECT_THROW(solve(q), InvalidInput);
  SolverConfig bad;
  bad.step_fraction = 1.0;
  EXPECT_THROW(solve(scalar_problem(), bad), InvalidInput);
}

TEST(Sdp, SdpaExport) {
  std::ostringstream out;
  write_sdpa(amgm_problem(), out);
  const std::string text = out.str();
  EXPECT_NE(text.find("2 = mDIM"), std::string::npos);
  EXPECT_NE(text.find("1 = nBLOCK"), std::string::npos);
  // F0 = -A0 has -1 at (1,2); F1 has 1 at (1,1); F2 has 1 at (2,2).
  EXPECT_NE(text.find("0 1 1 2 -1\n"), std::string::npos);
  EXPECT_NE(text.find("1 1 1 1 1\n"), std::string::npos);
  EXPECT_NE(text.find("2 1 2 2 1\n"), std::string::npos);
}
