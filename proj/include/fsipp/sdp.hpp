#pragma once

// Conic programs over scalar variables z:
//
//   min  c^T z + c0
//   s.t. F_0 + sum_j z_j F_j >= 0   (one linear matrix inequality per block)
//        a^T z + e  = 0             (equalities)
//        a^T z + e >= 0             (inequalities)
//
// solved by an infeasible-start primal-dual interior-point method (HKM search
// direction, Mehrotra predictor-corrector), plus SDPA sparse import/export.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fsipp {

class NumericalTrouble : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearForm {
  std::map<int, double> coef;
  double constant = 0.0;

  void add(int var, double v) {
    if (v == 0.0) return;
    auto [it, inserted] = coef.try_emplace(var, v);
    if (!inserted) {
      it->second += v;
      if (it->second == 0.0) coef.erase(it);
    }
  }
  double evaluate(const Eigen::VectorXd& z) const {
    double v = constant;
    for (const auto& [j, c] : coef) v += c * z(j);
    return v;
  }
  friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

/// Affine symmetric matrix F_0 + sum_j z_j F_j; only the upper triangle is stored.
class LmiConstraint {
 public:
  using Entries = std::map<std::pair<int, int>, double>;

  explicit LmiConstraint(int size = 0) : size_(size) {
    if (size < 0) throw std::invalid_argument("negative LMI size");
  }

  int size() const { return size_; }
  const Entries& constant() const { return constant_; }
  const std::map<int, Entries>& terms() const { return terms_; }

  void add_constant(int i, int j, double v) { accumulate(constant_, i, j, v); }
  void add(int var, int i, int j, double v) {
    if (var < 0) throw std::invalid_argument("negative variable index");
    if (v == 0.0) return;
    Entries& e = terms_[var];
    accumulate(e, i, j, v);
    if (e.empty()) terms_.erase(var);
  }

  Eigen::MatrixXd constant_matrix() const { return dense(constant_); }
  Eigen::MatrixXd coefficient(int var) const {
    auto it = terms_.find(var);
    return it == terms_.end() ? Eigen::MatrixXd::Zero(size_, size_) : dense(it->second);
  }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& z) const {
    Eigen::MatrixXd M = dense(constant_);
    for (const auto& [var, e] : terms_) {
      for (const auto& [ij, v] : e) {
        M(ij.first, ij.second) += z(var) * v;
        if (ij.first != ij.second) M(ij.second, ij.first) += z(var) * v;
      }
    }
    return M;
  }

  friend bool operator==(const LmiConstraint&, const LmiConstraint&) = default;

 private:
  void accumulate(Entries& e, int i, int j, double v) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= size_) throw std::out_of_range("LMI entry outside block");
    if (v == 0.0) return;
    auto [it, inserted] = e.try_emplace({i, j}, v);
    if (!inserted) {
      it->second += v;
      if (it->second == 0.0) e.erase(it);
    }
  }
  Eigen::MatrixXd dense(const Entries& e) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(size_, size_);
    for (const auto& [ij, v] : e) {
      M(ij.first, ij.second) = v;
      M(ij.second, ij.first) = v;
    }
    return M;
  }

  int size_;
  Entries constant_;
  std::map<int, Entries> terms_;
};

struct ConicProgram {
  int nvars = 0;
  LinearForm objective;
  std::vector<LmiConstraint> lmis;
  std::vector<LinearForm> equalities;    // form == 0
  std::vector<LinearForm> inequalities;  // form >= 0

  int add_variables(int count) {
    const int first = nvars;
    nvars += count;
    return first;
  }

  void check() const {
    auto check_form = [&](const LinearForm& f) {
      for (const auto& [j, c] : f.coef) {
        if (j < 0 || j >= nvars) throw std::out_of_range("variable index outside program");
      }
    };
    check_form(objective);
    for (const auto& f : equalities) check_form(f);
    for (const auto& f : inequalities) check_form(f);
    for (const auto& l : lmis) {
      for (const auto& [j, e] : l.terms()) {
        if (j >= nvars) throw std::out_of_range("variable index outside program");
      }
    }
  }

  friend bool operator==(const ConicProgram&, const ConicProgram&) = default;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalTrouble };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalTrouble: return "numerical_trouble";
  }
  return "?";
}

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 200;
  bool verbose = false;
  // Confirm infeasibility or unboundedness with an auxiliary solve when the iterates diverge.
  bool classify_divergence = true;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalTrouble;
  Eigen::VectorXd z;
  double objective_value = 0.0;
  double dual_objective = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  std::vector<Eigen::MatrixXd> lmi_duals;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  int iterations = 0;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

namespace detail {

struct Trip {
  int r;
  int c;
  double v;
};

// Reduced problem in the free variables, every block stored densely for the
// constant and as full (both triangles) triplet lists per variable.
struct Reduced {
  int m = 0;
  Eigen::VectorXd c;
  double c0 = 0.0;
  std::vector<int> sizes;
  std::vector<Eigen::MatrixXd> F0;
  std::vector<std::vector<std::vector<Trip>>> F;  // [block][var]
  std::vector<std::vector<int>> vars_in_block;
  Eigen::VectorXd g0;  // LP rows: g0 + G y >= 0
  Eigen::MatrixXd G;
};

struct Elimination {
  bool consistent = true;
  std::vector<int> free_vars;
  Eigen::VectorXd z0;     // particular solution (zero on free variables)
  Eigen::MatrixXd T;      // nvars x free: z = z0 + T v
};

inline Elimination eliminate_equalities(const ConicProgram& prog) {
  const int n = prog.nvars;
  const int q = static_cast<int>(prog.equalities.size());
  Elimination el;
  el.z0 = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(q, n);
  Eigen::VectorXd rhs(q);
  for (int r = 0; r < q; ++r) {
    for (const auto& [j, c] : prog.equalities[r].coef) E(r, j) = c;
    rhs(r) = -prog.equalities[r].constant;
  }
  const double scale = std::max(1.0, q ? E.cwiseAbs().maxCoeff() : 0.0);
  const double ptol = 1e-11 * scale;

  std::vector<int> pivot_col;
  int row = 0;
  for (int col = 0; col < n && row < q; ++col) {
    int best = row;
    for (int r = row + 1; r < q; ++r) {
      if (std::abs(E(r, col)) > std::abs(E(best, col))) best = r;
    }
    if (std::abs(E(best, col)) <= ptol) continue;
    E.row(row).swap(E.row(best));
    std::swap(rhs(row), rhs(best));
    const double piv = E(row, col);
    E.row(row) /= piv;
    rhs(row) /= piv;
    for (int r = 0; r < q; ++r) {
      if (r == row || E(r, col) == 0.0) continue;
      const double f = E(r, col);
      E.row(r) -= f * E.row(row);
      rhs(r) -= f * rhs(row);
    }
    pivot_col.push_back(col);
    ++row;
  }
  for (int r = row; r < q; ++r) {
    if (std::abs(rhs(r)) > 1e-9 * (1.0 + rhs.cwiseAbs().maxCoeff())) el.consistent = false;
  }
  std::vector<bool> is_pivot(n, false);
  for (int c : pivot_col) is_pivot[c] = true;
  for (int j = 0; j < n; ++j) {
    if (!is_pivot[j]) el.free_vars.push_back(j);
  }
  const int nf = static_cast<int>(el.free_vars.size());
  el.T = Eigen::MatrixXd::Zero(n, nf);
  for (int f = 0; f < nf; ++f) el.T(el.free_vars[f], f) = 1.0;
  for (int r = 0; r < row; ++r) {
    const int p = pivot_col[r];
    el.z0(p) = rhs(r);
    for (int f = 0; f < nf; ++f) {
      const double v = E(r, el.free_vars[f]);
      if (std::abs(v) > 1e-15) el.T(p, f) = -v;
    }
  }
  return el;
}

inline Reduced reduce(const ConicProgram& prog, const Elimination& el) {
  Reduced red;
  const int nf = static_cast<int>(el.free_vars.size());
  red.m = nf;
  Eigen::VectorXd cfull = Eigen::VectorXd::Zero(prog.nvars);
  for (const auto& [j, c] : prog.objective.coef) cfull(j) = c;
  red.c = el.T.transpose() * cfull;
  red.c0 = prog.objective.constant + cfull.dot(el.z0);

  // sparsity pattern of T by original variable
  std::vector<std::vector<std::pair<int, double>>> trow(prog.nvars);
  for (int j = 0; j < prog.nvars; ++j) {
    for (int f = 0; f < nf; ++f) {
      if (el.T(j, f) != 0.0) trow[j].push_back({f, el.T(j, f)});
    }
  }

  for (const auto& lmi : prog.lmis) {
    const int s = lmi.size();
    red.sizes.push_back(s);
    Eigen::MatrixXd F0 = lmi.constant_matrix();
    std::vector<std::map<std::pair<int, int>, double>> acc(nf);
    for (const auto& [j, entries] : lmi.terms()) {
      const double zj = el.z0(j);
      for (const auto& [ij, v] : entries) {
        if (zj != 0.0) {
          F0(ij.first, ij.second) += zj * v;
          if (ij.first != ij.second) F0(ij.second, ij.first) += zj * v;
        }
        for (const auto& [f, t] : trow[j]) acc[f][ij] += t * v;
      }
    }
    std::vector<std::vector<Trip>> F(nf);
    std::vector<int> present;
    for (int f = 0; f < nf; ++f) {
      for (const auto& [ij, v] : acc[f]) {
        if (v == 0.0) continue;
        F[f].push_back({ij.first, ij.second, v});
        if (ij.first != ij.second) F[f].push_back({ij.second, ij.first, v});
      }
      if (!F[f].empty()) present.push_back(f);
    }
    red.F0.push_back(std::move(F0));
    red.F.push_back(std::move(F));
    red.vars_in_block.push_back(std::move(present));
  }

  const int nl = static_cast<int>(prog.inequalities.size());
  red.g0 = Eigen::VectorXd::Zero(nl);
  red.G = Eigen::MatrixXd::Zero(nl, nf);
  for (int l = 0; l < nl; ++l) {
    const auto& form = prog.inequalities[l];
    red.g0(l) = form.constant;
    for (const auto& [j, a] : form.coef) {
      red.g0(l) += a * el.z0(j);
      for (const auto& [f, t] : trow[j]) red.G(l, f) += a * t;
    }
  }
  return red;
}

inline double step_to_boundary(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dX) {
  if (X.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::LLT<Eigen::MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXd Li = llt.matrixL().solve(Eigen::MatrixXd::Identity(X.rows(), X.cols()));
  Eigen::MatrixXd M = Li * dX * Li.transpose();
  M = 0.5 * (M + M.transpose());
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double step_to_boundary(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  }
  return a;
}

inline double min_eig(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return std::numeric_limits<double>::infinity();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

// Block-diagonal iterate: dense PSD blocks plus one diagonal (LP) block.
struct Iterate {
  std::vector<Eigen::MatrixXd> S;
  Eigen::VectorXd l;
};

inline double inner(const Iterate& a, const Iterate& b) {
  double v = a.l.dot(b.l);
  for (std::size_t k = 0; k < a.S.size(); ++k) v += a.S[k].cwiseProduct(b.S[k]).sum();
  return v;
}

inline double frob(const Iterate& a) { return std::sqrt(inner(a, a)); }

class Ipm {
 public:
  Ipm(const Reduced& red, const SolverOptions& opt) : r_(red), opt_(opt) {}

  struct Result {
    SolveStatus status;
    Eigen::VectorXd y;
    Iterate X;
    Iterate Z;
    double pobj;
    double dobj;
    double gap;
    double pres;
    double dres;
    int iterations;
    bool diverged = false;
  };

  // A(M)_j = <F_j, M>
  Eigen::VectorXd apply_A(const Iterate& M) const {
    Eigen::VectorXd out = r_.G.transpose() * M.l;
    for (std::size_t b = 0; b < r_.F.size(); ++b) {
      for (int j : r_.vars_in_block[b]) {
        double s = 0.0;
        for (const Trip& t : r_.F[b][j]) s += t.v * M.S[b](t.r, t.c);
        out(j) += s;
      }
    }
    return out;
  }

  // sum_j y_j F_j
  Iterate apply_At(const Eigen::VectorXd& y) const {
    Iterate out;
    for (std::size_t b = 0; b < r_.F.size(); ++b) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(r_.sizes[b], r_.sizes[b]);
      for (int j : r_.vars_in_block[b]) {
        if (y(j) == 0.0) continue;
        for (const Trip& t : r_.F[b][j]) M(t.r, t.c) += y(j) * t.v;
      }
      out.S.push_back(std::move(M));
    }
    out.l = r_.G * y;
    return out;
  }

  Iterate constant_part() const {
    Iterate c;
    c.S = r_.F0;
    c.l = r_.g0;
    return c;
  }

  Result run() const {
    const int m = r_.m;
    const int nb = static_cast<int>(r_.sizes.size());
    const int nl = static_cast<int>(r_.g0.size());
    int N = nl;
    for (int s : r_.sizes) N += s;
    const Iterate F0 = constant_part();
    const double normF0 = frob(F0);
    const double normc = r_.c.norm();

    // starting point
    double maxF = 0.0;
    double alpha = 0.0;
    for (int j = 0; j < m; ++j) {
      double nrm2 = r_.G.col(j).squaredNorm();
      for (int b = 0; b < nb; ++b) {
        for (const Trip& t : r_.F[b][j]) nrm2 += t.v * t.v;
      }
      const double nrm = std::sqrt(nrm2);
      maxF = std::max(maxF, nrm);
      alpha = std::max(alpha, N * (1.0 + std::abs(r_.c(j))) / (1.0 + nrm));
    }
    const double beta = (1.0 + std::max(maxF, normF0)) / std::sqrt(static_cast<double>(std::max(N, 1)));
    Iterate X;
    Iterate Z;
    for (int b = 0; b < nb; ++b) {
      X.S.push_back(10.0 * alpha * Eigen::MatrixXd::Identity(r_.sizes[b], r_.sizes[b]));
      Z.S.push_back(10.0 * beta * Eigen::MatrixXd::Identity(r_.sizes[b], r_.sizes[b]));
    }
    X.l = Eigen::VectorXd::Constant(nl, 10.0 * alpha);
    Z.l = Eigen::VectorXd::Constant(nl, 10.0 * beta);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

    // Gram matrix K = A A^T, used to push A(dX) back onto its target
    Eigen::MatrixXd K = r_.G.transpose() * r_.G;
    for (int b = 0; b < nb; ++b) {
      for (int j : r_.vars_in_block[b]) {
        Eigen::MatrixXd Fj = Eigen::MatrixXd::Zero(r_.sizes[b], r_.sizes[b]);
        for (const Trip& t : r_.F[b][j]) Fj(t.r, t.c) += t.v;
        for (int i : r_.vars_in_block[b]) {
          double v = 0.0;
          for (const Trip& t : r_.F[b][i]) v += t.v * Fj(t.r, t.c);
          K(i, j) += v;
        }
      }
    }
    const Eigen::LDLT<Eigen::MatrixXd> gram(K);

    Result res{SolveStatus::NumericalTrouble, y, X, Z, 0, 0, 0, 0, 0, 0, false};
    int stalls = 0;
    for (int it = 0; it <= opt_.max_iterations; ++it) {
      res.iterations = it;
      // residuals
      const Eigen::VectorXd AX = apply_A(X);
      const Eigen::VectorXd rp = r_.c - AX;
      Iterate Fd = apply_At(y);
      for (int b = 0; b < nb; ++b) Fd.S[b] += r_.F0[b] - Z.S[b];
      Fd.l += r_.g0 - Z.l;
      const double pobj = r_.c.dot(y);
      const double dobj = -inner(F0, X);
      const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
      const double pres = frob(Fd) / (1.0 + normF0);
      const double dres = rp.norm() / (1.0 + normc);
      res = {SolveStatus::NumericalTrouble, y, X, Z, pobj, dobj, relgap, pres, dres, it, false};
      if (opt_.verbose) {
        std::fprintf(stderr, "it %3d pobj % .10e dobj % .10e gap %.2e pres %.2e dres %.2e\n", it, pobj, dobj,
                     relgap, pres, dres);
      }
      if (relgap <= opt_.tol && pres <= opt_.tol && dres <= opt_.tol) {
        res.status = SolveStatus::Optimal;
        return res;
      }
      if (it >= 3 && (frob(X) > 1e10 * (1.0 + normc) || y.cwiseAbs().maxCoeff() > 1e10 * (1.0 + normF0))) {
        res.diverged = true;
        return res;
      }
      if (it == opt_.max_iterations || stalls >= 5) return res;

      // inverses of Z
      std::vector<Eigen::MatrixXd> Zi(nb);
      for (int b = 0; b < nb; ++b) {
        Eigen::LLT<Eigen::MatrixXd> llt(Z.S[b]);
        if (llt.info() != Eigen::Success) return res;
        Zi[b] = llt.solve(Eigen::MatrixXd::Identity(r_.sizes[b], r_.sizes[b]));
        Zi[b] = 0.5 * (Zi[b] + Zi[b].transpose());
      }
      const Eigen::VectorXd zli = Z.l.cwiseInverse();

      // Schur complement O_ij = tr(F_i X F_j Z^-1)
      Eigen::MatrixXd O = Eigen::MatrixXd::Zero(m, m);
      for (int b = 0; b < nb; ++b) {
        const int s = r_.sizes[b];
        const Eigen::MatrixXd& Xb = X.S[b];
        for (int j : r_.vars_in_block[b]) {
          const auto& Fj = r_.F[b][j];
          Eigen::MatrixXd Gj;
          if (static_cast<int>(Fj.size()) < 2 * s) {
            Gj = Eigen::MatrixXd::Zero(s, s);
            for (const Trip& t : Fj) Gj.noalias() += t.v * Xb.col(t.r) * Zi[b].row(t.c);
          } else {
            Eigen::MatrixXd Fd2 = Eigen::MatrixXd::Zero(s, s);
            for (const Trip& t : Fj) Fd2(t.r, t.c) += t.v;
            Gj = Xb * Fd2 * Zi[b];
          }
          for (int i : r_.vars_in_block[b]) {
            double v = 0.0;
            for (const Trip& t : r_.F[b][i]) v += t.v * Gj(t.c, t.r);
            O(i, j) += v;
          }
        }
      }
      if (nl > 0) O.noalias() += r_.G.transpose() * (X.l.cwiseProduct(zli)).asDiagonal() * r_.G;
      O = 0.5 * (O + O.transpose());
      Eigen::LLT<Eigen::MatrixXd> schur(O);
      const bool llt_ok = schur.info() == Eigen::Success;
      Eigen::LDLT<Eigen::MatrixXd> schur_ldlt;
      if (!llt_ok) schur_ldlt.compute(O);

      auto solve_dir = [&](double mu, const Iterate* dXa, const Iterate* dZa, Iterate& dX, Iterate& dZ,
                           Eigen::VectorXd& dy) {
        // V = mu Z^-1 - dXa dZa Z^-1; the Schur right-hand side also carries -X Fd Z^-1
        Iterate V;
        Iterate W;
        for (int b = 0; b < nb; ++b) {
          Eigen::MatrixXd Vb = mu * Zi[b];
          if (dXa) Vb -= dXa->S[b] * dZa->S[b] * Zi[b];
          W.S.push_back(Vb - X.S[b] * Fd.S[b] * Zi[b]);
          V.S.push_back(std::move(Vb));
        }
        V.l = mu * zli;
        if (dXa) V.l -= dXa->l.cwiseProduct(dZa->l).cwiseProduct(zli);
        W.l = V.l - X.l.cwiseProduct(Fd.l).cwiseProduct(zli);
        const Eigen::VectorXd rhs = -r_.c + apply_A(W);
        dy = llt_ok ? Eigen::VectorXd(schur.solve(rhs)) : Eigen::VectorXd(schur_ldlt.solve(rhs));
        dZ = apply_At(dy);
        for (int b = 0; b < nb; ++b) dZ.S[b] += Fd.S[b];
        dZ.l += Fd.l;
        dX = V;
        for (int b = 0; b < nb; ++b) {
          dX.S[b] -= X.S[b] + X.S[b] * dZ.S[b] * Zi[b];
          dX.S[b] = 0.5 * (dX.S[b] + dX.S[b].transpose()).eval();
        }
        dX.l -= X.l + X.l.cwiseProduct(dZ.l).cwiseProduct(zli);
        // least-squares correction so that A(dX) = c - A(X) holds to rounding
        const Eigen::VectorXd miss = rp - apply_A(dX);
        const Iterate fix = apply_At(gram.solve(miss));
        for (int b = 0; b < nb; ++b) dX.S[b] += fix.S[b];
        dX.l += fix.l;
      };
      auto max_steps = [&](const Iterate& dX, const Iterate& dZ) {
        double ap = step_to_boundary(X.l, dX.l);
        double ad = step_to_boundary(Z.l, dZ.l);
        for (int b = 0; b < nb; ++b) {
          ap = std::min(ap, step_to_boundary(X.S[b], dX.S[b]));
          ad = std::min(ad, step_to_boundary(Z.S[b], dZ.S[b]));
        }
        return std::pair<double, double>{ap, ad};
      };

      const double mu = inner(X, Z) / N;
      Iterate dXa;
      Iterate dZa;
      Eigen::VectorXd dya;
      solve_dir(0.0, nullptr, nullptr, dXa, dZa, dya);
      auto [apa, ada] = max_steps(dXa, dZa);
      apa = std::min(1.0, apa);
      ada = std::min(1.0, ada);
      Iterate Xa = X;
      Iterate Za = Z;
      for (int b = 0; b < nb; ++b) {
        Xa.S[b] += apa * dXa.S[b];
        Za.S[b] += ada * dZa.S[b];
      }
      Xa.l += apa * dXa.l;
      Za.l += ada * dZa.l;
      const double mua = inner(Xa, Za) / N;
      const double sigma = std::clamp(std::pow(std::max(mua, 0.0) / mu, 3.0), 0.0, 1.0);

      Iterate dX;
      Iterate dZ;
      Eigen::VectorXd dy;
      solve_dir(sigma * mu, &dXa, &dZa, dX, dZ, dy);
      auto [ap, ad] = max_steps(dX, dZ);
      ap = std::min(1.0, 0.95 * ap);
      ad = std::min(1.0, 0.95 * ad);
      if (!std::isfinite(ap) || !std::isfinite(ad) || !dy.allFinite()) return res;
      stalls = (ap < 1e-10 && ad < 1e-10) ? stalls + 1 : 0;

      for (int b = 0; b < nb; ++b) {
        X.S[b] += ap * dX.S[b];
        Z.S[b] += ad * dZ.S[b];
      }
      X.l += ap * dX.l;
      Z.l += ad * dZ.l;
      y += ad * dy;
    }
    return res;
  }

 private:
  const Reduced& r_;
  const SolverOptions& opt_;
};

inline SolveStatus classify_divergence(const ConicProgram& prog, const SolverOptions& opt);

}  // namespace detail

inline ConicSolution solve(const ConicProgram& prog, const SolverOptions& opt = {}) {
  prog.check();
  ConicSolution sol;
  const detail::Elimination el = detail::eliminate_equalities(prog);
  const int nlmi = static_cast<int>(prog.lmis.size());
  const int nl = static_cast<int>(prog.inequalities.size());
  if (!el.consistent) {
    sol.status = SolveStatus::Infeasible;
    sol.z = el.z0;
    return sol;
  }
  detail::Reduced red = detail::reduce(prog, el);

  // free variables that touch no constraint
  std::vector<int> keep;
  for (int f = 0; f < red.m; ++f) {
    bool used = red.G.rows() > 0 && red.G.col(f).cwiseAbs().maxCoeff() > 0.0;
    for (std::size_t b = 0; b < red.F.size() && !used; ++b) used = !red.F[b][f].empty();
    if (used) {
      keep.push_back(f);
    } else if (std::abs(red.c(f)) > 1e-14 * (1.0 + red.c.cwiseAbs().maxCoeff())) {
      sol.status = SolveStatus::Unbounded;
      sol.z = el.z0;
      return sol;
    }
  }
  if (static_cast<int>(keep.size()) != red.m) {
    detail::Reduced r2 = red;
    r2.m = static_cast<int>(keep.size());
    r2.c.resize(r2.m);
    r2.G.resize(red.G.rows(), r2.m);
    for (std::size_t b = 0; b < red.F.size(); ++b) {
      r2.F[b].assign(r2.m, {});
      r2.vars_in_block[b].clear();
    }
    for (int k = 0; k < r2.m; ++k) {
      const int f = keep[k];
      r2.c(k) = red.c(f);
      r2.G.col(k) = red.G.col(f);
      for (std::size_t b = 0; b < red.F.size(); ++b) {
        r2.F[b][k] = red.F[b][f];
        if (!r2.F[b][k].empty()) r2.vars_in_block[b].push_back(k);
      }
    }
    red = std::move(r2);
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(red.m);
  detail::Iterate Xd;
  if (red.m == 0) {
    double lmin = red.g0.size() ? red.g0.minCoeff() : std::numeric_limits<double>::infinity();
    double scale = 1.0 + (red.g0.size() ? red.g0.cwiseAbs().maxCoeff() : 0.0);
    for (const auto& F0 : red.F0) {
      lmin = std::min(lmin, detail::min_eig(F0));
      if (F0.size()) scale = std::max(scale, 1.0 + F0.cwiseAbs().maxCoeff());
    }
    sol.status = lmin >= -opt.tol * scale ? SolveStatus::Optimal : SolveStatus::Infeasible;
    for (int s : red.sizes) Xd.S.push_back(Eigen::MatrixXd::Zero(s, s));
    Xd.l = Eigen::VectorXd::Zero(nl);
    sol.gap = 0.0;
    sol.primal_residual = 0.0;
    sol.dual_residual = 0.0;
  } else {
    detail::Ipm ipm(red, opt);
    auto r = ipm.run();
    sol.status = r.status;
    sol.iterations = r.iterations;
    sol.gap = r.gap;
    sol.primal_residual = r.pres;
    sol.dual_residual = r.dres;
    Xd = r.X;
    for (int k = 0; k < red.m; ++k) v(k) = r.y(k);
    if (r.diverged && opt.classify_divergence) sol.status = detail::classify_divergence(prog, opt);
  }

  // back to the original variables
  Eigen::VectorXd vfree = Eigen::VectorXd::Zero(static_cast<int>(el.free_vars.size()));
  for (int k = 0; k < static_cast<int>(keep.size()); ++k) vfree(keep[k]) = v(k);
  sol.z = el.z0 + el.T * vfree;
  sol.objective_value = prog.objective.evaluate(sol.z);
  double dual = red.c0 - Xd.l.dot(red.g0);
  for (int b = 0; b < nlmi; ++b) dual -= Xd.S[b].cwiseProduct(red.F0[b]).sum();
  sol.dual_objective = dual;
  sol.lmi_duals = Xd.S;
  sol.ineq_duals = Xd.l;

  // equality multipliers from stationarity c = A(X) + G^T x + E^T lambda
  const int q = static_cast<int>(prog.equalities.size());
  sol.eq_duals = Eigen::VectorXd::Zero(q);
  if (q > 0 && prog.nvars > 0) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(prog.nvars);
    for (const auto& [j, c] : prog.objective.coef) r(j) += c;
    for (int b = 0; b < nlmi; ++b) {
      for (const auto& [j, e] : prog.lmis[b].terms()) {
        double s = 0.0;
        for (const auto& [ij, val] : e) {
          s += val * Xd.S[b](ij.first, ij.second) * (ij.first == ij.second ? 1.0 : 2.0);
        }
        r(j) -= s;
      }
    }
    for (int l = 0; l < nl; ++l) {
      for (const auto& [j, a] : prog.inequalities[l].coef) r(j) -= a * Xd.l(l);
    }
    Eigen::MatrixXd Et = Eigen::MatrixXd::Zero(prog.nvars, q);
    for (int k = 0; k < q; ++k) {
      for (const auto& [j, a] : prog.equalities[k].coef) Et(j, k) = a;
    }
    sol.eq_duals = Et.completeOrthogonalDecomposition().solve(r);
  }
  return sol;
}

/// Largest t <= 1 with every LMI block - tI >= 0 and every inequality row >= t.
inline double feasibility_margin(const ConicProgram& prog, const SolverOptions& opt = {}) {
  ConicProgram aux = prog;
  const int t = aux.add_variables(1);
  aux.objective = LinearForm{};
  aux.objective.add(t, -1.0);
  for (auto& lmi : aux.lmis) {
    for (int i = 0; i < lmi.size(); ++i) lmi.add(t, i, i, -1.0);
  }
  for (auto& row : aux.inequalities) row.add(t, -1.0);
  LinearForm cap;
  cap.constant = 1.0;
  cap.add(t, -1.0);
  aux.inequalities.push_back(cap);
  const ConicSolution sol = solve(aux, opt);
  if (sol.status == SolveStatus::Infeasible) return -std::numeric_limits<double>::infinity();
  if (sol.status != SolveStatus::Optimal) {
    throw NumericalTrouble(std::string("phase-I solve ended with status ") + to_string(sol.status));
  }
  return sol.z(t);
}

inline bool feasible(const ConicProgram& prog, const SolverOptions& opt = {}) {
  return feasibility_margin(prog, opt) >= -1e-7;
}

namespace detail {

// Diverging iterates: either the constraints admit no point (phase-I margin
// negative) or a recession direction d with c^T d < 0 exists.
inline SolveStatus classify_divergence(const ConicProgram& prog, const SolverOptions& opt) {
  SolverOptions inner = opt;
  inner.classify_divergence = false;
  double margin;
  try {
    margin = feasibility_margin(prog, inner);
  } catch (const NumericalTrouble&) {
    return SolveStatus::NumericalTrouble;
  }
  if (margin < -1e-7) return SolveStatus::Infeasible;

  ConicProgram ray;
  ray.nvars = prog.nvars;
  ray.objective.coef = prog.objective.coef;
  for (const auto& lmi : prog.lmis) {
    LmiConstraint h(lmi.size());
    for (const auto& [j, e] : lmi.terms()) {
      for (const auto& [ij, v] : e) h.add(j, ij.first, ij.second, v);
    }
    ray.lmis.push_back(std::move(h));
  }
  for (const auto& e : prog.equalities) ray.equalities.push_back(LinearForm{e.coef, 0.0});
  for (const auto& r : prog.inequalities) ray.inequalities.push_back(LinearForm{r.coef, 0.0});
  for (int j = 0; j < prog.nvars; ++j) {
    LinearForm up;
    up.constant = 1.0;
    up.add(j, -1.0);
    LinearForm lo;
    lo.constant = 1.0;
    lo.add(j, 1.0);
    ray.inequalities.push_back(up);
    ray.inequalities.push_back(lo);
  }
  const ConicSolution rs = solve(ray, inner);
  if (rs.status == SolveStatus::Optimal && rs.objective_value < -1e-7) return SolveStatus::Unbounded;
  return SolveStatus::NumericalTrouble;
}

}  // namespace detail

// SDPA sparse format. SDPA minimizes c^T x subject to sum_i F_i x_i - F_0 >= 0,
// so the stored F_0 is the negated constant. Equalities travel as pairs of LP
// rows, announced by a "*eq_pairs" comment; a nonzero objective constant is
// carried in a "*objective_constant" comment.

inline void write_sdpa(const ConicProgram& prog, std::ostream& os) {
  prog.check();
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const int neq = static_cast<int>(prog.equalities.size());
  std::vector<LinearForm> rows;
  for (const auto& e : prog.equalities) {
    rows.push_back(e);
    LinearForm neg;
    neg.constant = -e.constant;
    for (const auto& [j, c] : e.coef) neg.add(j, -c);
    rows.push_back(neg);
  }
  rows.insert(rows.end(), prog.inequalities.begin(), prog.inequalities.end());
  const int nlp = static_cast<int>(rows.size());

  if (neq > 0) os << "*eq_pairs " << neq << "\n";
  if (prog.objective.constant != 0.0) os << "*objective_constant " << num(prog.objective.constant) << "\n";
  const int nblocks = static_cast<int>(prog.lmis.size()) + (nlp > 0 ? 1 : 0);
  os << prog.nvars << "\n" << nblocks << "\n";
  for (std::size_t b = 0; b < prog.lmis.size(); ++b) os << (b ? " " : "") << prog.lmis[b].size();
  if (nlp > 0) os << (prog.lmis.empty() ? "" : " ") << -nlp;
  os << "\n";
  for (int j = 0; j < prog.nvars; ++j) {
    auto it = prog.objective.coef.find(j);
    os << (j ? " " : "") << num(it == prog.objective.coef.end() ? 0.0 : it->second);
  }
  os << "\n";

  for (std::size_t b = 0; b < prog.lmis.size(); ++b) {
    for (const auto& [ij, v] : prog.lmis[b].constant()) {
      os << 0 << " " << b + 1 << " " << ij.first + 1 << " " << ij.second + 1 << " " << num(-v) << "\n";
    }
  }
  const int lpblk = static_cast<int>(prog.lmis.size()) + 1;
  for (int l = 0; l < nlp; ++l) {
    if (rows[l].constant != 0.0) {
      os << 0 << " " << lpblk << " " << l + 1 << " " << l + 1 << " " << num(-rows[l].constant) << "\n";
    }
  }
  for (int j = 0; j < prog.nvars; ++j) {
    for (std::size_t b = 0; b < prog.lmis.size(); ++b) {
      auto it = prog.lmis[b].terms().find(j);
      if (it == prog.lmis[b].terms().end()) continue;
      for (const auto& [ij, v] : it->second) {
        os << j + 1 << " " << b + 1 << " " << ij.first + 1 << " " << ij.second + 1 << " " << num(v) << "\n";
      }
    }
    for (int l = 0; l < nlp; ++l) {
      auto it = rows[l].coef.find(j);
      if (it == rows[l].coef.end()) continue;
      os << j + 1 << " " << lpblk << " " << l + 1 << " " << l + 1 << " " << num(it->second) << "\n";
    }
  }
}

inline void export_sdpa(const ConicProgram& prog, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::ios_base::failure("cannot open " + path + " for writing");
  write_sdpa(prog, os);
  if (!os) throw std::ios_base::failure("write to " + path + " failed");
}

inline ConicProgram read_sdpa(std::istream& is) {
  int neq = 0;
  double c0 = 0.0;
  std::vector<std::string> body;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '*' || line[0] == '"') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "eq_pairs") ls >> neq;
      if (key == "objective_constant") ls >> c0;
      continue;
    }
    for (char& ch : line) {
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    }
    body.push_back(line);
  }
  std::istringstream in([&] {
    std::string all;
    for (const auto& b : body) all += b + "\n";
    return all;
  }());
  auto fail = [](const std::string& what) { return std::runtime_error("malformed SDPA file: " + what); };

  ConicProgram prog;
  int nblocks = 0;
  if (!(in >> prog.nvars >> nblocks) || prog.nvars < 0 || nblocks < 0) throw fail("header");
  std::vector<int> sizes(nblocks);
  int lpblk = -1;
  int nlp = 0;
  for (int b = 0; b < nblocks; ++b) {
    if (!(in >> sizes[b])) throw fail("block structure");
    if (sizes[b] < 0) {
      if (lpblk >= 0) throw fail("more than one LP block");
      lpblk = b;
      nlp = -sizes[b];
    }
  }
  for (int j = 0; j < prog.nvars; ++j) {
    double c;
    if (!(in >> c)) throw fail("objective");
    prog.objective.add(j, c);
  }
  prog.objective.constant = c0;
  std::vector<int> lmi_index(nblocks, -1);
  for (int b = 0; b < nblocks; ++b) {
    if (b == lpblk) continue;
    lmi_index[b] = static_cast<int>(prog.lmis.size());
    prog.lmis.emplace_back(sizes[b]);
  }
  std::vector<LinearForm> rows(nlp);
  int mat, blk, i, j;
  double v;
  while (in >> mat >> blk >> i >> j >> v) {
    if (mat < 0 || mat > prog.nvars || blk < 1 || blk > nblocks) throw fail("entry index");
    --blk;
    --i;
    --j;
    if (blk == lpblk) {
      if (i != j || i < 0 || i >= nlp) throw fail("LP entry");
      if (mat == 0) rows[i].constant += -v;
      else rows[i].add(mat - 1, v);
    } else {
      auto& lmi = prog.lmis[lmi_index[blk]];
      if (mat == 0) lmi.add_constant(i, j, -v);
      else lmi.add(mat - 1, i, j, v);
    }
  }
  if (!in.eof()) throw fail("trailing data");
  if (2 * neq > nlp) throw fail("equality pairs exceed LP rows");
  for (int k = 0; k < neq; ++k) prog.equalities.push_back(rows[2 * k]);
  for (int l = 2 * neq; l < nlp; ++l) prog.inequalities.push_back(rows[l]);
  return prog;
}

inline ConicProgram import_sdpa(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::ios_base::failure("cannot open " + path);
  return read_sdpa(is);
}

}  // namespace fsipp
