#include "fsipp/sdp.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace fsipp;

namespace {

LinearForm form(std::initializer_list<std::pair<int, double>> terms, double constant = 0.0) {
  LinearForm f;
  for (const auto& [j, c] : terms) f.add(j, c);
  f.constant = constant;
  return f;
}

void expect_gap_within_tol(const ConicSolution& s, const SolverOptions& o = {}) {
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_LE(std::abs(s.objective_value - s.dual_objective) / (1.0 + std::abs(s.objective_value)), o.tol);
}

// min tr(C X) over the spectraplex {X >= 0, tr X = 1} is lambda_min(C).
ConicProgram spectraplex(const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  ConicProgram p;
  LmiConstraint lmi(n);
  LinearForm trace;
  trace.constant = -1.0;
  int var = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      p.add_variables(1);
      lmi.add(var, i, j, 1.0);
      p.objective.add(var, i == j ? C(i, i) : 2.0 * C(i, j));
      if (i == j) trace.add(var, 1.0);
      ++var;
    }
  }
  p.lmis.push_back(lmi);
  p.equalities.push_back(trace);
  return p;
}

}  // namespace

TEST(Solve, ScalarCone) {
  ConicProgram p;
  p.add_variables(1);
  p.objective.add(0, 1.0);
  LmiConstraint l(1);
  l.add(0, 0, 0, 1.0);
  p.lmis.push_back(l);
  const auto s = solve(p);
  expect_gap_within_tol(s);
  EXPECT_NEAR(s.z(0), 0.0, 1e-7);
}

TEST(Solve, TwoByTwoEigenvalueCondition) {
  ConicProgram p;
  p.add_variables(1);
  p.objective.add(0, 1.0);
  LmiConstraint l(2);
  l.add(0, 0, 0, 1.0);
  l.add(0, 1, 1, 1.0);
  l.add_constant(0, 1, 1.0);
  p.lmis.push_back(l);
  const auto s = solve(p);
  expect_gap_within_tol(s);
  EXPECT_NEAR(s.z(0), 1.0, 1e-7);
}

TEST(Solve, GramProgramForSquare) {
  // max rho with t^2 - rho = [1 t] G [1 t]^T: G = [[-rho, 0], [0, 1]] >= 0
  ConicProgram p;
  p.add_variables(1);
  p.objective.add(0, -1.0);
  LmiConstraint l(2);
  l.add(0, 0, 0, -1.0);
  l.add_constant(1, 1, 1.0);
  p.lmis.push_back(l);
  const auto s = solve(p);
  expect_gap_within_tol(s);
  EXPECT_NEAR(s.z(0), 0.0, 1e-7);
}

TEST(Solve, SpectraplexGivesSmallestEigenvalue) {
  std::mt19937 gen(3);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd C(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) C(i, j) = n01(gen);
    }
    C = 0.5 * (C + C.transpose()).eval();
    const auto s = solve(spectraplex(C));
    expect_gap_within_tol(s);
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues()(0);
    EXPECT_NEAR(s.objective_value, lmin, 1e-6);
    // dual of tr X = 1 is the eigenvalue itself
    EXPECT_NEAR(s.eq_duals(0), lmin, 1e-6);
  }
}

TEST(Solve, LinearProgramWithMixedRows) {
  // min x + 2y s.t. x + y = 1, x >= 0, y >= 0.25
  ConicProgram p;
  p.add_variables(2);
  p.objective = form({{0, 1.0}, {1, 2.0}});
  p.equalities.push_back(form({{0, 1.0}, {1, 1.0}}, -1.0));
  p.inequalities.push_back(form({{0, 1.0}}));
  p.inequalities.push_back(form({{1, 1.0}}, -0.25));
  const auto s = solve(p);
  expect_gap_within_tol(s);
  EXPECT_NEAR(s.objective_value, 1.25, 1e-7);
  EXPECT_NEAR(s.z(0), 0.75, 1e-6);
  EXPECT_NEAR(s.z(1), 0.25, 1e-6);
}

TEST(Solve, DetectsInfeasibility) {
  ConicProgram p;
  p.add_variables(1);
  p.objective.add(0, 1.0);
  p.inequalities.push_back(form({{0, 1.0}}, -1.0));   // z >= 1
  p.inequalities.push_back(form({{0, -1.0}}, -1.0));  // z <= -1
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(Solve, InconsistentEqualitiesAreInfeasible) {
  ConicProgram p;
  p.add_variables(1);
  p.equalities.push_back(form({{0, 1.0}}, -1.0));
  p.equalities.push_back(form({{0, 1.0}}, -2.0));
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(Solve, DetectsUnboundedness) {
  ConicProgram p;
  p.add_variables(1);
  p.objective.add(0, -1.0);
  LmiConstraint l(1);
  l.add(0, 0, 0, 1.0);
  p.lmis.push_back(l);
  EXPECT_EQ(solve(p).status, SolveStatus::Unbounded);

  ConicProgram free_var;
  free_var.add_variables(1);
  free_var.objective.add(0, 1.0);
  EXPECT_EQ(solve(free_var).status, SolveStatus::Unbounded);
}

TEST(SolveProperty, RowScalingLeavesSolutionUnchanged) {
  ConicProgram p;
  p.add_variables(2);
  p.objective = form({{0, 1.0}, {1, 1.0}});
  LmiConstraint l(2);
  l.add(0, 0, 0, 1.0);
  l.add(1, 1, 1, 1.0);
  l.add_constant(0, 1, 1.0);
  p.lmis.push_back(l);
  p.inequalities.push_back(form({{0, 1.0}, {1, -1.0}}, 0.5));
  p.equalities.push_back(form({{0, 1.0}}, -2.0));
  const auto base = solve(p);
  ASSERT_EQ(base.status, SolveStatus::Optimal);
  for (double scale : {1e-3, 7.0, 1e3}) {
    ConicProgram q = p;
    for (auto& [j, c] : q.inequalities[0].coef) c *= scale;
    q.inequalities[0].constant *= scale;
    for (auto& [j, c] : q.equalities[0].coef) c *= scale;
    q.equalities[0].constant *= scale;
    const auto s = solve(q);
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    EXPECT_LE((s.z - base.z).cwiseAbs().maxCoeff(), 1e-6) << "scale " << scale;
  }
}

TEST(Feasible, EmptyProgramIsFeasible) {
  ConicProgram p;
  EXPECT_TRUE(feasible(p));
  p.add_variables(2);
  EXPECT_TRUE(feasible(p));
}

TEST(Feasible, NegativeConstantBlockIsInfeasible) {
  ConicProgram p;
  LmiConstraint l(1);
  l.add_constant(0, 0, -1.0);
  p.lmis.push_back(l);
  EXPECT_FALSE(feasible(p));
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(Feasible, MarginOfUnitBall) {
  // [[1, z], [z, 1]] >= 0 with z = 0.5 pinned: margin is 1 - 0.5
  ConicProgram p;
  p.add_variables(1);
  LmiConstraint l(2);
  l.add_constant(0, 0, 1.0);
  l.add_constant(1, 1, 1.0);
  l.add(0, 0, 1, 1.0);
  p.lmis.push_back(l);
  p.equalities.push_back(form({{0, 1.0}}, -0.5));
  EXPECT_NEAR(feasibility_margin(p), 0.5, 1e-6);
  p.equalities[0].constant = -1.5;
  EXPECT_FALSE(feasible(p));
}

TEST(Sdpa, SingleScalarBlockIsFiveLines) {
  ConicProgram p;
  p.add_variables(1);
  p.objective.add(0, 1.0);
  LmiConstraint l(1);
  l.add(0, 0, 0, 1.0);
  p.lmis.push_back(l);
  std::ostringstream os;
  write_sdpa(p, os);
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5) << text;
}

TEST(Sdpa, RoundTripIsExact) {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ConicProgram p;
  p.add_variables(4);
  p.objective = form({{0, u(gen)}, {2, u(gen)}}, 0.1 + u(gen));
  for (int size : {3, 1, 2}) {
    LmiConstraint l(size);
    for (int i = 0; i < size; ++i) {
      for (int j = i; j < size; ++j) {
        l.add_constant(i, j, u(gen));
        for (int v = 0; v < 4; ++v) l.add(v, i, j, u(gen) / 3.0);
      }
    }
    p.lmis.push_back(l);
  }
  p.equalities.push_back(form({{1, u(gen)}, {3, 1.0}}, u(gen)));
  p.inequalities.push_back(form({{0, 1.0}}, 2.0));
  p.inequalities.push_back(form({{2, u(gen)}}, -u(gen)));
  std::stringstream ss;
  write_sdpa(p, ss);
  const ConicProgram back = read_sdpa(ss);
  EXPECT_TRUE(back == p);
  std::stringstream again;
  write_sdpa(back, again);
  std::stringstream first;
  write_sdpa(p, first);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Sdpa, UnwritablePathThrows) {
  ConicProgram p;
  EXPECT_THROW(export_sdpa(p, "/nonexistent-dir/x.dat-s"), std::ios_base::failure);
}
