#pragma once

// Sum-of-squares certificates via Gram matrices, the s.o.s-convexity test
// z^T Hess(h)(x) z in SOS, and problem validation.

#include "fsipp/moments.hpp"
#include "fsipp/poly.hpp"
#include "fsipp/problem.hpp"
#include "fsipp/sdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fsipp {

enum class CertStatus { Pass, PassPointwise, Fail, Inconclusive };

inline const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Pass: return "pass";
    case CertStatus::PassPointwise: return "pass (pointwise only)";
    case CertStatus::Fail: return "fail";
    case CertStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

/// One term multiplier * v^T G v of a certificate.
struct GramBlock {
  Polynomial multiplier;
  std::vector<Monomial> basis;
  Eigen::MatrixXd gram;
};

struct SosCertificate {
  std::vector<GramBlock> blocks;
  double residual = 0.0;   // max coefficient mismatch
  double min_eig = 0.0;    // smallest Gram eigenvalue over all blocks

  /// sum_b multiplier_b * v_b^T G_b v_b.
  Polynomial reconstruct(int nvars) const {
    Polynomial r(nvars);
    for (const auto& b : blocks) {
      Polynomial s(nvars);
      for (std::size_t i = 0; i < b.basis.size(); ++i) {
        for (std::size_t j = 0; j < b.basis.size(); ++j) {
          s.add_term(b.basis[i] * b.basis[j], b.gram(static_cast<int>(i), static_cast<int>(j)));
        }
      }
      r += b.multiplier * s;
    }
    return r;
  }
};

struct SosResult {
  CertStatus status = CertStatus::Inconclusive;
  std::optional<SosCertificate> certificate;
  double gamma = std::numeric_limits<double>::quiet_NaN();  // largest lambda with h - lambda N certified
  std::string note;

  bool accepted() const { return status == CertStatus::Pass || status == CertStatus::PassPointwise; }
};

struct SosOptions {
  double accept_tol = 1e-8;
  double reject_tol = 1e-6;
  double residual_tol = 1e-7;
  // tighter than accept_tol so that boundary cases (gamma* = 0) land inside the band
  SolverOptions solver{.tol = 1e-10};
};

struct GramSpec {
  Polynomial multiplier;
  std::vector<Monomial> basis;
};

/// Certify h = sum_b multiplier_b * sigma_b with sigma_b SOS over the given bases.
/// Solved in moment form: min L(h) s.t. the localized moment matrices are PSD
/// and sum_b L(multiplier_b * |v_b|^2) = 1.
inline SosResult certify_weighted(const Polynomial& h, const std::vector<GramSpec>& parts, const SosOptions& opt = {}) {
  const int nv = h.nvars();
  SosResult out;
  if (h.is_zero()) {
    out.status = CertStatus::Pass;
    out.gamma = 0.0;
    SosCertificate cert;
    for (const auto& p : parts) {
      const int s = static_cast<int>(p.basis.size());
      cert.blocks.push_back({p.multiplier, p.basis, Eigen::MatrixXd::Zero(s, s)});
    }
    out.certificate = cert;
    return out;
  }

  bool any_basis = false;
  for (const auto& p : parts) any_basis = any_basis || !p.basis.empty();
  if (!any_basis) {
    out.status = CertStatus::Fail;
    out.note = "empty Gram basis for a nonzero polynomial";
    return out;
  }

  std::map<Monomial, int, GrlexLess> var;
  auto var_of = [&](const Monomial& a) {
    auto [it, inserted] = var.try_emplace(a, static_cast<int>(var.size()));
    return it->second;
  };
  ConicProgram prog;
  LinearForm norm;
  norm.constant = -1.0;
  for (const auto& p : parts) {
    const int s = static_cast<int>(p.basis.size());
    LmiConstraint lmi(s);
    for (int i = 0; i < s; ++i) {
      for (int j = i; j < s; ++j) {
        const Monomial bij = p.basis[i] * p.basis[j];
        for (const auto& [g, c] : p.multiplier.terms()) {
          const int v = var_of(g * bij);
          lmi.add(v, i, j, c);
          if (i == j) norm.add(v, c);
        }
      }
    }
    prog.lmis.push_back(std::move(lmi));
  }
  for (const auto& [a, c] : h.terms()) prog.objective.add(var_of(a), c);
  prog.nvars = static_cast<int>(var.size());
  prog.equalities.push_back(norm);

  const ConicSolution sol = solve(prog, opt.solver);
  if (sol.status == SolveStatus::Unbounded) {
    out.status = CertStatus::Fail;
    out.note = "polynomial has terms outside the span of the Gram bases";
    return out;
  }
  if (sol.status != SolveStatus::Optimal) {
    out.status = CertStatus::Inconclusive;
    out.note = std::string("solver status ") + to_string(sol.status);
    return out;
  }
  const double lambda = sol.eq_duals(0);
  out.gamma = lambda;

  SosCertificate cert;
  cert.min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < parts.size(); ++b) {
    Eigen::MatrixXd G = sol.lmi_duals[b];
    G.diagonal().array() += lambda;
    G = 0.5 * (G + G.transpose());
    if (G.rows() > 0) {
      cert.min_eig = std::min(cert.min_eig,
                              Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues()(0));
    }
    cert.blocks.push_back({parts[b].multiplier, parts[b].basis, std::move(G)});
  }
  const Polynomial diff = h - cert.reconstruct(nv);
  cert.residual = diff.max_abs_coeff();
  out.certificate = cert;

  if (lambda < -opt.reject_tol) {
    out.status = CertStatus::Fail;
    out.note = "no SOS decomposition: optimal shift " + std::to_string(lambda);
  } else if (lambda >= -opt.accept_tol && cert.min_eig >= -opt.accept_tol && cert.residual <= opt.residual_tol) {
    out.status = CertStatus::Pass;
  } else {
    out.status = CertStatus::Inconclusive;
    out.note = "certificate within tolerance band";
  }
  return out;
}

namespace detail {

// Half-degree basis pruned by per-variable and total-degree exponent ranges of h.
inline std::vector<Monomial> pruned_half_basis(const Polynomial& h) {
  const int nv = h.nvars();
  std::vector<int> lo(nv, std::numeric_limits<int>::max());
  std::vector<int> hi(nv, 0);
  int dlo = std::numeric_limits<int>::max();
  int dhi = 0;
  for (const auto& [a, c] : h.terms()) {
    for (int i = 0; i < nv; ++i) {
      lo[i] = std::min(lo[i], a[i]);
      hi[i] = std::max(hi[i], a[i]);
    }
    dlo = std::min(dlo, a.degree());
    dhi = std::max(dhi, a.degree());
  }
  std::vector<Monomial> out;
  for (const auto& b : MonomialBasis(nv, dhi / 2)) {
    if (2 * b.degree() < dlo) continue;
    bool ok = true;
    for (int i = 0; i < nv && ok; ++i) ok = 2 * b[i] >= lo[i] && 2 * b[i] <= hi[i];
    if (ok) out.push_back(b);
  }
  return out;
}

// q(x, z) = z^T H(x) z for a symmetric polynomial matrix given on the first m
// variables of a space with `total` variables; z occupies the last m slots.
inline Polynomial hessian_form(const Polynomial& h, int m, int total) {
  const Polynomial e = h.embed(total, 0);
  Polynomial q(total);
  for (int i = 0; i < m; ++i) {
    const Polynomial di = e.derivative(i);
    for (int j = 0; j < m; ++j) {
      const Polynomial hij = di.derivative(j);
      if (hij.is_zero()) continue;
      q += hij * Polynomial::variable(total, total - m + i) * Polynomial::variable(total, total - m + j);
    }
  }
  return q;
}

}  // namespace detail

/// Gram-matrix SOS test over the pruned basis of degree deg(h)/2.
inline SosResult certify_sos(const Polynomial& h, const SosOptions& opt = {}) {
  if (h.degree() % 2) {
    SosResult r;
    r.status = CertStatus::Fail;
    r.note = "odd degree";
    return r;
  }
  return certify_weighted(h, {{Polynomial::constant(h.nvars(), 1.0), detail::pruned_half_basis(h)}}, opt);
}

/// z^T Hess(h)(x) z SOS in (x, z); the certificate lives in variables (x, z).
inline SosResult certify_sos_convex(const Polynomial& h, const SosOptions& opt = {}) {
  const int m = h.nvars();
  if (h.degree() <= 1) {
    SosResult r;
    r.status = CertStatus::Pass;
    r.gamma = 0.0;
    r.note = "affine";
    return r;
  }
  const Polynomial q = detail::hessian_form(h, m, 2 * m);
  if (q.is_zero()) {
    SosResult r;
    r.status = CertStatus::Pass;
    r.gamma = 0.0;
    return r;
  }
  if (q.degree() % 2) {
    SosResult r;
    r.status = CertStatus::Fail;
    r.note = "odd degree";
    return r;
  }
  // bilinear basis x^a z_i
  std::vector<Monomial> basis;
  for (const auto& b : detail::pruned_half_basis(q)) {
    int zdeg = 0;
    for (int i = m; i < 2 * m; ++i) zdeg += b[i];
    if (zdeg == 1) basis.push_back(b);
  }
  return certify_weighted(q, {{Polynomial::constant(2 * m, 1.0), basis}}, opt);
}

/// Polynomials in y that are nonnegative on Y and describe a superset of it.
inline std::vector<Polynomial> hull_multipliers(const IndexSet& Y) {
  const int n = Y.dim();
  std::vector<Polynomial> out;
  switch (Y.kind()) {
    case SetKind::Box:
      for (int i = 0; i < n; ++i) out.push_back(Polynomial::constant(n, 1.0) - Polynomial::variable(n, i).pow(2));
      break;
    case SetKind::Ball:
    case SetKind::Sphere: {
      Polynomial q = Polynomial::constant(n, 1.0);
      for (int i = 0; i < n; ++i) q -= Polynomial::variable(n, i).pow(2);
      out.push_back(q);
      break;
    }
    case SetKind::SimplexUnion: {
      if (Y.simplex_list().size() != 1) return hull_multipliers(IndexSet::box(n));
      // facets of the simplex as affine functions, plus their pairwise products
      const Simplex& s = Y.simplex_list().front();
      const Eigen::MatrixXd Einv = s.edges().inverse();
      const Eigen::VectorXd v0 = s.vertex(0);
      std::vector<Polynomial> bary;
      Polynomial sum = Polynomial::constant(n, 0.0);
      for (int i = 0; i < n; ++i) {
        Polynomial t = Polynomial::constant(n, -Einv.row(i).dot(v0));
        for (int j = 0; j < n; ++j) t += Einv(i, j) * Polynomial::variable(n, j);
        sum += t;
        bary.push_back(t);
      }
      bary.insert(bary.begin(), Polynomial::constant(n, 1.0) - sum);
      for (auto& b : bary) {
        Polynomial clean(n);
        for (const auto& [a, c] : b.terms()) {
          if (std::abs(c) > 1e-14) clean.add_term(a, c);
        }
        b = clean;
      }
      out = bary;
      for (std::size_t i = 0; i < bary.size(); ++i) {
        for (std::size_t j = i + 1; j < bary.size(); ++j) out.push_back(bary[i] * bary[j]);
      }
      break;
    }
  }
  return out;
}

struct UniformConvexityOptions {
  SosOptions sos;
  int max_gram_size = 120;
  int max_grid_points = 256;
};

/// p(., y) s.o.s-convex for every y in Y: first the joint test
/// z^T Hess_x p z = sigma_0 + sum_l sigma_l h_l(y) in (x, y, z) with the hull
/// multipliers h_l, escalating the y-degree; failing that, pointwise tests on a grid of Y.
inline SosResult certify_sos_convex_uniform(const BiPolynomial& p, const IndexSet& Y,
                                            const UniformConvexityOptions& opt = {}) {
  const int m = p.xdim();
  const int n = p.ydim();
  const int total = 2 * m + n;
  if (p.deg_x() <= 1) {
    SosResult r;
    r.status = CertStatus::Pass;
    r.gamma = 0.0;
    r.note = "affine in x";
    return r;
  }
  const Polynomial q = detail::hessian_form(p.joint(), m, total);
  if (q.is_zero()) {
    SosResult r;
    r.status = CertStatus::Pass;
    r.gamma = 0.0;
    return r;
  }
  const int xhalf = (p.deg_x() - 2) / 2;
  const auto hulls = hull_multipliers(Y);

  auto bilinear = [&](int ydeg) {
    std::vector<Monomial> out;
    if (ydeg < 0) return out;
    MonomialBasis xb(m, xhalf);
    MonomialBasis yb(n, ydeg);
    for (const auto& a : xb) {
      for (int i = 0; i < m; ++i) {
        for (const auto& g : yb) {
          std::vector<int> e(total, 0);
          for (int t = 0; t < m; ++t) e[t] = a[t];
          for (int t = 0; t < n; ++t) e[m + t] = g[t];
          e[m + n + i] = 1;
          out.emplace_back(std::move(e));
        }
      }
    }
    return out;
  };

  // sample points of Y for the screen and the pointwise fallback
  int per_axis = std::max(2, static_cast<int>(std::floor(std::pow(opt.max_grid_points, 1.0 / n) + 1e-9)));
  std::vector<Eigen::VectorXd> pts;
  {
    std::vector<int> idx(n, 0);
    Eigen::VectorXd y(n);
    while (true) {
      for (int i = 0; i < n; ++i) y(i) = -1.0 + 2.0 * idx[i] / (per_axis - 1);
      if (Y.kind() == SetKind::Sphere) {
        if (y.norm() > 0.0) pts.push_back(y / y.norm());
      } else if (Y.contains(y)) {
        pts.push_back(y);
      }
      int i = 0;
      while (i < n && ++idx[i] == per_axis) idx[i++] = 0;
      if (i == n) break;
    }
    if (Y.kind() == SetKind::SimplexUnion) {
      for (const auto& s : Y.simplex_list()) {
        for (int v = 0; v <= n; ++v) pts.push_back(s.vertex(v));
      }
    }
  }

  // a negative Hessian eigenvalue at any sampled (x, y) refutes convexity outright
  {
    const auto H = hessian(p.joint());
    std::mt19937 gen(12345u);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Eigen::VectorXd> xs{Eigen::VectorXd::Zero(m)};
    for (int t = 0; t < 16; ++t) {
      Eigen::VectorXd xv(m);
      for (int i = 0; i < m; ++i) xv(i) = u(gen);
      xs.push_back(xv);
    }
    Eigen::VectorXd xy(m + n);
    Eigen::MatrixXd M(m, m);
    for (const auto& y : pts) {
      xy.tail(n) = y;
      for (const auto& xv : xs) {
        xy.head(m) = xv;
        for (int i = 0; i < m; ++i) {
          for (int j = i; j < m; ++j) M(i, j) = M(j, i) = H[i][j].evaluate(xy);
        }
        if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M, Eigen::EigenvaluesOnly).eigenvalues()(0) < -1e-6) {
          SosResult r;
          r.status = CertStatus::Fail;
          r.note = "Hessian in x has a negative eigenvalue at a sampled (x, y)";
          return r;
        }
      }
    }
  }

  SosResult last;
  if ((p.deg_x() % 2) == 0) {
    for (int dy = (p.deg_y() + 1) / 2;; ++dy) {
      std::vector<GramSpec> parts;
      parts.push_back({Polynomial::constant(total, 1.0), bilinear(dy)});
      if (static_cast<int>(parts.front().basis.size()) > opt.max_gram_size) break;
      for (const auto& hl : hulls) {
        const int e = hl.degree();
        const int half = (2 * dy - e) / 2;
        if (2 * dy < e) continue;
        parts.push_back({hl.embed(total, m), bilinear(half)});
      }
      last = certify_weighted(q, parts, opt.sos);
      if (last.status == CertStatus::Pass) {
        last.note = "joint certificate with y-degree " + std::to_string(2 * dy);
        return last;
      }
    }
  }

  bool all_pass = true;
  for (const auto& y : pts) {
    const SosResult r = certify_sos_convex(p.at_y(y), opt.sos);
    if (r.status == CertStatus::Fail) {
      SosResult out;
      out.status = CertStatus::Fail;
      out.note = "not s.o.s-convex at a sampled y";
      return out;
    }
    all_pass = all_pass && r.status == CertStatus::Pass;
  }
  SosResult out;
  out.status = all_pass ? CertStatus::PassPointwise : CertStatus::Inconclusive;
  out.note = "checked at " + std::to_string(pts.size()) + " points of Y";
  return out;
}

struct ValidationItem {
  std::string name;
  CertStatus status = CertStatus::Inconclusive;
  std::string note;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<ValidationItem> items;

  bool passed() const {
    return std::all_of(items.begin(), items.end(), [](const ValidationItem& i) {
      return i.status == CertStatus::Pass || i.status == CertStatus::PassPointwise;
    });
  }
  bool failed() const {
    return std::any_of(items.begin(), items.end(), [](const ValidationItem& i) { return i.status == CertStatus::Fail; });
  }
};

/// s.o.s-convexity of f, -g, each phi_j, and of p(., y) uniformly over Y.
inline ValidationReport validate_problem(const FsippProblem& prob, const UniformConvexityOptions& opt = {}) {
  prob.check();
  ValidationReport rep;
  auto push = [&](std::string name, const SosResult& r) {
    ValidationItem it;
    it.name = std::move(name);
    it.status = r.status;
    it.note = r.note;
    if (r.certificate) it.residual = r.certificate->residual;
    rep.items.push_back(std::move(it));
  };
  push("f", certify_sos_convex(prob.f, opt.sos));
  push("-g", certify_sos_convex(-prob.g, opt.sos));
  for (std::size_t j = 0; j < prob.phi.size(); ++j) {
    push("phi" + std::to_string(j + 1), certify_sos_convex(prob.phi[j], opt.sos));
  }
  push("p(., y)", certify_sos_convex_uniform(prob.p, prob.Y, opt));
  return rep;
}

}  // namespace fsipp
