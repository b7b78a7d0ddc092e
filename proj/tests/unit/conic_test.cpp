#include "cran/conic.hpp"
#include "grid_oracle.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <array>
#include <random>

using namespace cran::conic;

namespace {

ConeProgram one_variable_lp() {
  ConeProgramBuilder b;
  const auto x = b.add_variable("x", 1.0);
  b.add_nonnegative(AffineExpr(-1.0).add(x, 1.0));
  return b.build();
}

ConeProgram norm_epigraph() {
  ConeProgramBuilder b;
  const auto t = b.add_variable("t", 1.0);
  const std::array rows{AffineExpr().add(t, 1.0), AffineExpr(3.0), AffineExpr(4.0)};
  b.add_second_order(rows);
  return b.build();
}

ConeProgram contradictory_bounds() {
  ConeProgramBuilder b;
  const auto x = b.add_variable("x", 1.0);
  b.add_nonnegative(AffineExpr(-1.0).add(x, 1.0));
  b.add_nonnegative(AffineExpr().add(x, -1.0));
  return b.build();
}

}  // namespace

TEST(ConeProgramBuilder, RowsFollowConeLayout) {
  const auto p = norm_epigraph();
  ASSERT_EQ(p.cones.size(), 1u);
  EXPECT_EQ(p.cones[0].kind, ConeKind::second_order);
  EXPECT_EQ(p.cones[0].dim, 3);
  EXPECT_EQ(p.num_rows(), 3);
  EXPECT_DOUBLE_EQ(p.h(1), 3.0);
  EXPECT_DOUBLE_EQ(p.G.coeff(0, 0), -1.0);
  EXPECT_NO_THROW(p.validate());
}

TEST(ConeProgramBuilder, RejectsDegenerateSecondOrderCone) {
  ConeProgramBuilder b;
  const auto x = b.add_variable("x");
  const std::array rows{AffineExpr().add(x, 1.0)};
  EXPECT_THROW(b.add_second_order(rows), std::invalid_argument);
}

TEST(ConeProgram, ValidateCatchesDimensionMismatch) {
  auto p = one_variable_lp();
  p.cones[0].dim = 2;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(ConicSolve, OneVariableLp) {
  const auto sol = solve(one_variable_lp());
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.diagnostic;
  EXPECT_NEAR(sol.primal(0), 1.0, 1e-8);
  EXPECT_NEAR(sol.objective_value, 1.0, 1e-8);
}

TEST(ConicSolve, NormEpigraph) {
  const auto sol = solve(norm_epigraph());
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.diagnostic;
  EXPECT_NEAR(sol.primal(0), 5.0, 1e-7);
}

TEST(ConicSolve, ContradictoryBoundsArePrimalInfeasible) {
  const auto p = contradictory_bounds();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::primal_infeasible);
  const auto rep = check_certificate(p, sol);
  EXPECT_TRUE(rep.within_tolerance) << rep.violation;
  EXPECT_NEAR(p.h.dot(sol.dual), -1.0, 1e-12);
}

TEST(ConicSolve, UnboundedBelowIsDualInfeasible) {
  ConeProgramBuilder b;
  const auto x = b.add_variable("x", -1.0);
  b.add_nonnegative(AffineExpr().add(x, 1.0));
  const auto p = b.build();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::dual_infeasible);
  EXPECT_TRUE(check_certificate(p, sol).within_tolerance);
}

TEST(ConicSolve, RotatedQuadraticEpigraph) {
  // min s  s.t. (x - 1)^2 + (y + 2)^2 <= s  ->  s = 0 at (1, -2); add x + y >= 1 so s = 2 at (2, -1).
  ConeProgramBuilder b;
  const auto x = b.add_variable("x");
  const auto y = b.add_variable("y");
  const auto s = b.add_variable("s", 1.0);
  const std::array xs{AffineExpr(-1.0).add(x, 1.0), AffineExpr(2.0).add(y, 1.0)};
  b.add_rotated_quadratic(AffineExpr().add(s, 1.0), AffineExpr(1.0), xs);
  b.add_nonnegative(AffineExpr(-1.0).add(x, 1.0).add(y, 1.0));
  const auto sol = solve(b.build());
  ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.diagnostic;
  EXPECT_NEAR(sol.objective_value, 2.0, 1e-7);
  EXPECT_NEAR(sol.primal(0), 2.0, 1e-4);
  EXPECT_NEAR(sol.primal(1), -1.0, 1e-4);
}

TEST(CheckCertificate, OptimalNormEpigraphResidualsAreTiny) {
  const auto p = norm_epigraph();
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  const auto rep = check_certificate(p, sol);
  EXPECT_TRUE(rep.within_tolerance);
  EXPECT_LE(rep.primal, 1e-8);
  EXPECT_LE(rep.dual, 1e-8);
  EXPECT_LE(std::min(rep.gap, rep.gap_rel), 1e-8);
}

TEST(CheckCertificate, FlagsPerturbedPrimal) {
  const auto p = norm_epigraph();
  auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  sol.primal(0) -= 1e-2;
  const auto rep = check_certificate(p, sol);
  EXPECT_FALSE(rep.within_tolerance);
  EXPECT_GT(rep.primal, 1e-3);
  EXPECT_NE(rep.violation.find("primal"), std::string::npos);
}

TEST(CheckCertificate, RejectsDimensionMismatch) {
  const auto p = norm_epigraph();
  auto sol = solve(p);
  sol.primal.resize(3);
  EXPECT_THROW(check_certificate(p, sol), std::invalid_argument);
}

TEST(CheckCertificate, BrokenRayIsFlagged) {
  const auto p = contradictory_bounds();
  auto sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::primal_infeasible);
  sol.dual(0) *= 2.0;  // G'z no longer vanishes
  EXPECT_FALSE(check_certificate(p, sol).within_tolerance);
}

TEST(ConicSolve, ScalingObjectiveScalesValueOnly) {
  const auto corpus = cran::testing::tiny_socp_corpus(8, 7u, 3.0);
  for (const auto& p : corpus) {
    const auto a = solve(p);
    auto scaled = p;
    scaled.objective *= 7.5;
    const auto b = solve(scaled);
    ASSERT_EQ(a.status, SolveStatus::optimal);
    ASSERT_EQ(b.status, SolveStatus::optimal);
    EXPECT_NEAR(b.objective_value, 7.5 * a.objective_value, 1e-6 * (1.0 + std::abs(b.objective_value)));
  }
}

TEST(ConicSolve, WeakDualityAndCertifiedResidualsOnCorpus) {
  const auto corpus = cran::testing::tiny_socp_corpus(20, 11u, 3.0);
  for (const auto& p : corpus) {
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::optimal) << sol.diagnostic;
    EXPECT_LE(sol.dual_objective, sol.objective_value + 1e-8);
    const auto rep = check_certificate(p, sol);
    EXPECT_TRUE(rep.within_tolerance) << rep.violation;
  }
}

TEST(ConicSolve, NeverWorseThanFeasibleGridPoints) {
  const auto corpus = cran::testing::tiny_socp_corpus(8, 3u, 3.0);
  for (const auto& p : corpus) {
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::optimal);
    const auto grid = cran::testing::grid_search(p, -3.0, 3.0);
    ASSERT_TRUE(grid.found);
    EXPECT_LE(sol.objective_value, grid.value + 1e-7 * std::max(1.0, std::abs(grid.value)));
    if (p.num_variables() <= 2) {
      EXPECT_LE(std::abs(sol.objective_value - grid.value), 1e-6 * std::max(1.0, std::abs(grid.value)));
    }
  }
}

TEST(ConicSolve, MatchesBarrierPathOnCorpus) {
  const auto corpus = cran::testing::tiny_socp_corpus(20, 3u, 3.0);
  for (const auto& p : corpus) {
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, SolveStatus::optimal);
    const auto ref = cran::testing::barrier_search(p, Eigen::VectorXd::Zero(p.num_variables()));
    ASSERT_TRUE(ref.found);
    EXPECT_NEAR(sol.objective_value, ref.value, 1e-7 * std::max(1.0, std::abs(ref.value)));
  }
}

TEST(ConeProgramJson, RoundTripPreservesProblem) {
  const auto p = cran::testing::tiny_socp_corpus(3, 5u, 2.0).back();
  const auto q = cone_program_from_json(nlohmann::json::parse(to_json(p).dump()));
  EXPECT_EQ(q.cones.size(), p.cones.size());
  EXPECT_EQ(q.variable_names, p.variable_names);
  EXPECT_TRUE(q.objective.isApprox(p.objective));
  EXPECT_TRUE(Eigen::MatrixXd(q.G).isApprox(Eigen::MatrixXd(p.G)));
  EXPECT_NEAR(solve(q).objective_value, solve(p).objective_value, 1e-9);
}
