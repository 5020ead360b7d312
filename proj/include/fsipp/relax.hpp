#pragma once

// Moment relaxations of the fractional semi-infinite program: the order-k dual
// bound, minimizer extraction L(x)/L(1), the outer sets Lambda_k (membership
// and support points), and the finite grid baseline.

#include "fsipp/diag.hpp"
#include "fsipp/moments.hpp"
#include "fsipp/poly.hpp"
#include "fsipp/problem.hpp"
#include "fsipp/sdp.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsipp {

/// Conic program whose variable j is L(basis[j]) for the graded-lex basis of R[x]_{2d}.
struct MomentProgram {
  ConicProgram program;
  int d = 1;
  int k = 1;
  MonomialBasis basis{0, 0};
  int moment_block = -1;
  int ball_block = -1;
  int denominator_block = -1;
  int index_block = -1;
};

namespace detail {

inline void add_localizing_block(MomentProgram& mp, const Polynomial& q, int order) {
  MonomialBasis b(mp.basis.dim(), order);
  LmiConstraint lmi(b.size());
  for (int i = 0; i < b.size(); ++i) {
    for (int j = i; j < b.size(); ++j) {
      const Monomial bij = b[i] * b[j];
      for (const auto& [g, c] : q.terms()) {
        const int var = mp.basis.index_of(g * bij);
        if (var < 0) throw std::logic_error("localizing entry exceeds the moment degree");
        lmi.add(var, i, j, c);
      }
    }
  }
  mp.program.lmis.push_back(std::move(lmi));
}

// Q^T A_k(-L(p(x,.))) Q with Q^T B_k Q = I, a congruence that keeps the block
// well scaled at high order.
inline void add_index_block(MomentProgram& mp, const FsippProblem& prob, int k) {
  const Eigen::MatrixXd Q = range_whitening(moment_matrix(prob.Y, k));
  LmiConstraint lmi(static_cast<int>(Q.cols()));
  for (const auto& [alpha, coeff] : prob.p.coefficients_in_x()) {
    const int var = mp.basis.index_of(alpha);
    if (var < 0) throw std::logic_error("x-degree of p exceeds the moment degree");
    const Eigen::MatrixXd A = Q.transpose() * localized_matrix(prob.Y, coeff, k) * Q;
    for (int i = 0; i < A.rows(); ++i) {
      for (int j = i; j < A.cols(); ++j) {
        const double v = -0.5 * (A(i, j) + A(j, i));
        if (v != 0.0) lmi.add(var, i, j, v);
      }
    }
  }
  mp.program.lmis.push_back(std::move(lmi));
}

inline LinearForm functional_form(const MomentProgram& mp, const Polynomial& h) {
  LinearForm form;
  for (const auto& [a, c] : h.terms()) {
    const int var = mp.basis.index_of(a);
    if (var < 0) throw std::logic_error("polynomial degree exceeds the moment degree");
    form.add(var, c);
  }
  return form;
}

// Shared skeleton: M_d(L) >= 0, q1 localization, optional q2 localization,
// A_k block, and L(phi_j) <= 0.
inline MomentProgram skeleton(const FsippProblem& prob, int k, bool with_denominator, bool with_index_block) {
  prob.check();
  if (k < 1) throw std::invalid_argument("relaxation order must be at least 1");
  MomentProgram mp;
  mp.d = prob.degree_bound();
  mp.k = k;
  mp.basis = MonomialBasis(prob.m, 2 * mp.d);
  mp.program.add_variables(mp.basis.size());

  const int m = prob.m;
  mp.moment_block = 0;
  add_localizing_block(mp, Polynomial::constant(m, 1.0), mp.d);

  Polynomial q1 = Polynomial::constant(m, prob.R * prob.R);
  for (int i = 0; i < m; ++i) q1 -= Polynomial::variable(m, i).pow(2);
  mp.ball_block = static_cast<int>(mp.program.lmis.size());
  add_localizing_block(mp, q1, mp.d - 1);

  if (with_denominator) {
    const Polynomial q2 = prob.g - Polynomial::constant(m, prob.gstar);
    const int order = prob.g.is_constant() ? 0 : mp.d - (prob.g.degree() + 1) / 2;
    mp.denominator_block = static_cast<int>(mp.program.lmis.size());
    add_localizing_block(mp, q2, order);
  }

  if (with_index_block) {
    mp.index_block = static_cast<int>(mp.program.lmis.size());
    add_index_block(mp, prob, k);
  }

  for (const auto& h : prob.phi) {
    LinearForm row = functional_form(mp, h);
    LinearForm neg;
    for (const auto& [j, c] : row.coef) neg.add(j, -c);
    mp.program.inequalities.push_back(neg);
  }
  return mp;
}

}  // namespace detail

/// The order-k dual relaxation: min L(f) with L(g) = 1 (equality 0).
inline MomentProgram build_dual(const FsippProblem& prob, int k) {
  MomentProgram mp = detail::skeleton(prob, k, true, true);
  mp.program.objective = detail::functional_form(mp, prob.f);
  LinearForm norm = detail::functional_form(mp, prob.g);
  norm.constant = -1.0;
  mp.program.equalities.push_back(norm);
  return mp;
}

/// Constraints of Lambda_k: as the dual relaxation but with L(1) = 1 and no q2 block.
inline MomentProgram build_outer(const FsippProblem& prob, int k) {
  MomentProgram mp = detail::skeleton(prob, k, false, true);
  LinearForm norm;
  norm.add(0, 1.0);
  norm.constant = -1.0;
  mp.program.equalities.push_back(norm);
  return mp;
}

/// (1/g*) sqrt(binom(m+d, m)) sum_{i=0..d} R^{2i}.
inline double moment_norm_bound(const FsippProblem& prob) {
  const int d = prob.degree_bound();
  double s = 0.0;
  for (int i = 0; i <= d; ++i) s += std::pow(prob.R, 2 * i);
  return std::sqrt(static_cast<double>(binomial(prob.m + d, prob.m))) * s / prob.gstar;
}

struct PrimalCertificate {
  double rho = 0.0;
  Eigen::VectorXd eta;
  std::vector<Eigen::MatrixXd> blocks;
};

struct HierarchyResult {
  int k = 0;
  SolveStatus status = SolveStatus::NumericalTrouble;
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  MomentFunctional functional{1, 1};
  Eigen::VectorXd minimizer;
  double feas_residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<PrimalCertificate> primal_cert;
  std::optional<GapReport> gap;
  double solver_gap = std::numeric_limits<double>::infinity();
  double wall_time_s = 0.0;
};

struct HierarchyOptions {
  SolverOptions solver;
  bool feasibility = true;
  bool diagnostics = false;
};

inline HierarchyResult solve_order(const FsippProblem& prob, int k, const HierarchyOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  MomentProgram mp = build_dual(prob, k);
  const ConicSolution sol = solve(mp.program, opt.solver);
  HierarchyResult r;
  r.k = k;
  r.status = sol.status;
  r.solver_gap = sol.gap;
  r.functional = MomentFunctional(prob.m, mp.d, sol.z);
  if (sol.status == SolveStatus::Optimal) {
    r.lower_bound = sol.objective_value;
    r.minimizer = r.functional.barycenter();
    r.primal_cert = PrimalCertificate{sol.eq_duals(0), sol.ineq_duals, sol.lmi_duals};
    if (opt.feasibility) r.feas_residual = feasibility_residual(prob, r.minimizer);
    if (opt.diagnostics && prob.n <= 3) r.gap = gap_E(prob, r.functional, k);
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::vector<HierarchyResult> solve_hierarchy(const FsippProblem& prob, const std::vector<int>& orders,
                                                    const HierarchyOptions& opt = {}) {
  std::vector<HierarchyResult> out;
  for (int k : orders) out.push_back(solve_order(prob, k, opt));
  return out;
}

inline std::vector<HierarchyResult> solve_hierarchy(const FsippProblem& prob, int kmax,
                                                    const HierarchyOptions& opt = {}) {
  std::vector<int> orders;
  for (int k = 1; k <= kmax; ++k) orders.push_back(k);
  return solve_hierarchy(prob, orders, opt);
}

enum class MemberStatus { Member, NonMember, Inconclusive };

inline const char* to_string(MemberStatus s) {
  switch (s) {
    case MemberStatus::Member: return "member";
    case MemberStatus::NonMember: return "non-member";
    case MemberStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// Is u in Lambda_k, i.e. is there a feasible L with L(x) = u?
inline MemberStatus membership(const FsippProblem& prob, const Eigen::VectorXd& u, int k,
                               const SolverOptions& opt = {}) {
  if (u.size() != prob.m) throw DimensionError("point dimension differs from m");
  MomentProgram mp = build_outer(prob, k);
  for (int i = 0; i < prob.m; ++i) {
    LinearForm e;
    e.add(1 + i, 1.0);
    e.constant = -u(i);
    mp.program.equalities.push_back(e);
  }
  try {
    return feasible(mp.program, opt) ? MemberStatus::Member : MemberStatus::NonMember;
  } catch (const NumericalTrouble&) {
    return MemberStatus::Inconclusive;
  }
}

struct SupportPoint {
  int index = 0;
  double angle = 0.0;
  Eigen::VectorXd direction;
  Eigen::VectorXd point;
  SolveStatus status = SolveStatus::NumericalTrouble;
};

inline std::vector<Eigen::VectorXd> circle_directions(int count) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    const double a = 2.0 * std::numbers::pi * i / count;
    Eigen::VectorXd c(2);
    c << std::cos(a), std::sin(a);
    out.push_back(c);
  }
  return out;
}

/// Fibonacci lattice on the unit sphere of R^3.
inline std::vector<Eigen::VectorXd> sphere_directions(int count) {
  std::vector<Eigen::VectorXd> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Eigen::VectorXd c(3);
    c << r * std::cos(golden * i), r * std::sin(golden * i), z;
    out.push_back(c);
  }
  return out;
}

/// Support points argmax c . L(x) over Lambda_k, ordered by the azimuth of c.
inline std::vector<SupportPoint> boundary_trace(const FsippProblem& prob, int k,
                                                const std::vector<Eigen::VectorXd>& directions,
                                                const SolverOptions& opt = {}) {
  if (prob.m != 2 && prob.m != 3) throw std::invalid_argument("boundary tracing needs m = 2 or 3");
  std::vector<SupportPoint> out;
  if (directions.empty()) return out;
  const MomentProgram base = build_outer(prob, k);
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const Eigen::VectorXd& c = directions[i];
    if (c.size() != prob.m) throw DimensionError("direction dimension differs from m");
    MomentProgram mp = base;
    mp.program.objective = LinearForm{};
    for (int j = 0; j < prob.m; ++j) mp.program.objective.add(1 + j, -c(j));
    const ConicSolution sol = solve(mp.program, opt);
    SupportPoint sp;
    sp.index = static_cast<int>(i);
    sp.angle = std::atan2(c(1), c(0));
    sp.direction = c;
    sp.status = sol.status;
    sp.point = sol.z.segment(1, prob.m) / sol.z(0);
    out.push_back(std::move(sp));
  }
  std::stable_sort(out.begin(), out.end(), [](const SupportPoint& a, const SupportPoint& b) { return a.angle < b.angle; });
  return out;
}

/// Points of T_N^n = {-1 + 2i/N}^n lying in Y.
inline std::vector<Eigen::VectorXd> grid_points(const IndexSet& Y, int N) {
  if (N < 1) throw std::invalid_argument("grid resolution must be at least 1");
  const int n = Y.dim();
  const double total = std::pow(N + 1.0, n);
  if (total > 1e6) throw std::length_error("grid has more than 10^6 points");
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(n, 0);
  Eigen::VectorXd y(n);
  while (true) {
    for (int i = 0; i < n; ++i) y(i) = -1.0 + 2.0 * idx[i] / N;
    if (Y.contains(y)) out.push_back(y);
    int i = 0;
    while (i < n && ++idx[i] == N + 1) idx[i++] = 0;
    if (i == n) break;
  }
  return out;
}

struct DiscretizeResult {
  SolveStatus status = SolveStatus::NumericalTrouble;
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd point;
  int grid_size = 0;
};

/// Replace Y by Y cap T_N: L(p(x, y_i)) <= 0 at every grid point instead of the A_k block.
inline DiscretizeResult discretize_baseline(const FsippProblem& prob, int N, const SolverOptions& opt = {}) {
  const auto pts = grid_points(prob.Y, N);
  MomentProgram mp = detail::skeleton(prob, 1, true, false);
  mp.program.objective = detail::functional_form(mp, prob.f);
  LinearForm norm = detail::functional_form(mp, prob.g);
  norm.constant = -1.0;
  mp.program.equalities.push_back(norm);
  for (const auto& y : pts) {
    LinearForm row = detail::functional_form(mp, prob.p.at_y(y));
    LinearForm neg;
    for (const auto& [j, c] : row.coef) neg.add(j, -c);
    mp.program.inequalities.push_back(neg);
  }
  const ConicSolution sol = solve(mp.program, opt);
  DiscretizeResult r;
  r.status = sol.status;
  r.grid_size = static_cast<int>(pts.size());
  if (sol.status == SolveStatus::Optimal) {
    r.lower_bound = sol.objective_value;
    r.point = MomentFunctional(prob.m, mp.d, sol.z).barycenter();
  }
  return r;
}

struct PreflightReport {
  double lower = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> upper;
  bool zero_optimum = false;
  std::string verdict;
};

/// Bracket min_K f with g replaced by 1; decide whether r* = 0 within (eps1, eps2).
inline PreflightReport preflight_positivity(const FsippProblem& prob, double eps1, double eps2, int kmax,
                                            const SolverOptions& opt = {}) {
  FsippProblem aux = prob;
  aux.g = Polynomial::constant(prob.m, 1.0);
  aux.gstar = 0.5;
  HierarchyOptions ho;
  ho.solver = opt;
  const HierarchyResult r = solve_order(aux, kmax, ho);
  if (r.status != SolveStatus::Optimal) {
    throw NumericalTrouble(std::string("preflight relaxation ended with status ") + to_string(r.status));
  }
  PreflightReport rep;
  rep.lower = r.lower_bound;
  if (r.feas_residual <= eps2) rep.upper = prob.f.evaluate(r.minimizer);
  rep.zero_optimum = rep.upper && *rep.upper <= eps2 && *rep.upper - rep.lower <= eps1;
  if (rep.zero_optimum) {
    rep.verdict = "r* = 0 within tolerance";
  } else if (!rep.upper) {
    rep.verdict = "upper bound unavailable; positive optimum assumed";
  } else {
    rep.verdict = "positive optimum assumed";
  }
  return rep;
}

}  // namespace fsipp
