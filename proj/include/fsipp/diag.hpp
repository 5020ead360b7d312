#pragma once

// Convergence diagnostics: the measure-based upper bound of a polynomial over
// Y, a grid oracle for its true minimum, the gap E between the two, the
// O(log k / k) rate bound, and the Chebyshev / needle / Phi_k utilities.

#include "fsipp/moments.hpp"
#include "fsipp/poly.hpp"
#include "fsipp/problem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace fsipp {

namespace detail {

// Flat polynomial for tight evaluation loops.
class CompiledPolynomial {
 public:
  explicit CompiledPolynomial(const Polynomial& h) : n_(h.nvars()), maxdeg_(h.nvars(), 0) {
    for (const auto& [m, c] : h.terms()) {
      exps_.insert(exps_.end(), m.exps.begin(), m.exps.end());
      coefs_.push_back(c);
      for (int i = 0; i < n_; ++i) maxdeg_[i] = std::max(maxdeg_[i], m.exps[i]);
    }
    for (int e : maxdeg_) stride_ = std::max(stride_, e + 1);
    pw_.resize(static_cast<std::size_t>(n_) * stride_);
  }

  double operator()(const double* u) const {
    for (int i = 0; i < n_; ++i) {
      double* row = &pw_[static_cast<std::size_t>(i) * stride_];
      row[0] = 1.0;
      for (int e = 1; e <= maxdeg_[i]; ++e) row[e] = row[e - 1] * u[i];
    }
    double v = 0.0;
    const int* e = exps_.data();
    for (double c : coefs_) {
      double t = c;
      for (int i = 0; i < n_; ++i) t *= pw_[static_cast<std::size_t>(i) * stride_ + e[i]];
      v += t;
      e += n_;
    }
    return v;
  }
  double operator()(const Eigen::VectorXd& u) const { return (*this)(u.data()); }

 private:
  int n_;
  std::vector<int> maxdeg_;
  std::vector<int> exps_;
  std::vector<double> coefs_;
  int stride_ = 1;
  mutable std::vector<double> pw_;
};

// Fast membership test for the grid scans.
class Membership {
 public:
  explicit Membership(const IndexSet& set) : set_(set) {
    for (const Simplex& s : set.simplex_list()) {
      inv_.push_back(s.edges().inverse());
      base_.push_back(s.vertex(0));
    }
  }
  bool operator()(const Eigen::VectorXd& y, double tol = 1e-12) const {
    switch (set_.kind()) {
      case SetKind::Box: return (y.array().abs() <= 1.0 + tol).all();
      case SetKind::Ball: return y.squaredNorm() <= 1.0 + tol;
      case SetKind::Sphere: return std::abs(y.norm() - 1.0) <= tol;
      case SetKind::SimplexUnion:
        for (std::size_t i = 0; i < inv_.size(); ++i) {
          const Eigen::VectorXd t = inv_[i] * (y - base_[i]);
          if ((t.array() >= -tol).all() && t.sum() <= 1.0 + tol) return true;
        }
        return false;
    }
    return false;
  }
  // Map a nearby point back onto Y when that is cheap; false when it cannot.
  bool project(Eigen::VectorXd& y) const {
    switch (set_.kind()) {
      case SetKind::Box: y = y.cwiseMax(-1.0).cwiseMin(1.0); return true;
      case SetKind::Ball: {
        const double r = y.norm();
        if (r > 1.0) y /= r;
        return true;
      }
      case SetKind::Sphere: {
        const double r = y.norm();
        if (r == 0.0) return false;
        y /= r;
        return true;
      }
      case SetKind::SimplexUnion: return (*this)(y);
    }
    return false;
  }

 private:
  const IndexSet& set_;
  std::vector<Eigen::MatrixXd> inv_;
  std::vector<Eigen::VectorXd> base_;
};

// Visit points of the product grid with `per_axis` points on [-1,1]; for the
// sphere only the cube's boundary points are visited, radially projected.
template <class Visit>
void scan_grid(const IndexSet& set, int per_axis, Visit&& visit) {
  const int n = set.dim();
  const Membership inside(set);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd y(n);
  const double h = 2.0 / (per_axis - 1);
  while (true) {
    bool on_face = false;
    for (int i = 0; i < n; ++i) {
      y(i) = (idx[i] == per_axis - 1) ? 1.0 : -1.0 + h * idx[i];
      on_face = on_face || idx[i] == 0 || idx[i] == per_axis - 1;
    }
    if (set.kind() == SetKind::Sphere) {
      if (on_face) {
        Eigen::VectorXd s = y / y.norm();
        visit(s);
      }
    } else if (inside(y)) {
      visit(y);
    }
    int i = 0;
    while (i < n && ++idx[i] == per_axis) idx[i++] = 0;
    if (i == n) break;
  }
}

struct GridMin {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd point;
};

inline GridMin grid_minimize(const IndexSet& set, const Polynomial& psi, int per_axis, double step,
                             int refinements) {
  if (psi.nvars() != set.dim()) throw DimensionError("polynomial dimension differs from index set");
  const CompiledPolynomial eval(psi);
  GridMin best;
  scan_grid(set, per_axis, [&](const Eigen::VectorXd& y) {
    const double v = eval(y);
    if (v < best.value) {
      best.value = v;
      best.point = y;
    }
  });
  if (best.point.size() == 0) throw std::runtime_error("grid contains no point of the index set");

  // compass search from the best grid point
  const Membership inside(set);
  double h = step;
  int halvings = 0;
  for (int guard = 0; halvings < refinements && guard < 10000; ++guard) {
    bool improved = false;
    for (int i = 0; i < set.dim(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        Eigen::VectorXd c = best.point;
        c(i) += sgn * h;
        if (!inside.project(c)) continue;
        const double v = eval(c);
        if (v < best.value) {
          best.value = v;
          best.point = c;
          improved = true;
        }
      }
    }
    if (!improved) {
      h *= 0.5;
      ++halvings;
    }
  }
  return best;
}

}  // namespace detail

/// min over sigma SOS of degree <= 2k with int sigma = 1 of int psi sigma:
/// the smallest generalized eigenvalue of (A_k(psi), B_k).
inline double lasserre_upper(const IndexSet& set, const Polynomial& psi, int k) {
  const Eigen::MatrixXd A = localized_matrix(set, psi, k);
  const Eigen::MatrixXd B = moment_matrix(set, k);
  const Eigen::MatrixXd Q = range_whitening(B);
  Eigen::MatrixXd C = Q.transpose() * A * Q;
  C = 0.5 * (C + C.transpose());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

struct InnerMin {
  double value;
  Eigen::VectorXd point;
};

/// min of psi over Y by a grid of step 1/200 followed by 20 compass-search halvings; n <= 3.
inline InnerMin inner_min_point(const IndexSet& set, const Polynomial& psi) {
  if (set.dim() > 3) throw std::invalid_argument("grid oracle supports dimension at most 3");
  const double step = 1.0 / 200.0;
  auto r = detail::grid_minimize(set, psi, 401, step, 20);
  return {r.value, r.point};
}

inline double inner_min(const IndexSet& set, const Polynomial& psi) { return inner_min_point(set, psi).value; }

/// Coarse variant for n > 3: at most 10^6 grid points, then the same refinement.
inline InnerMin coarse_min_point(const IndexSet& set, const Polynomial& psi) {
  if (set.dim() <= 3) return inner_min_point(set, psi);
  const int per_axis = std::max(2, static_cast<int>(std::floor(std::pow(1e6, 1.0 / set.dim()) + 1e-9)));
  auto r = detail::grid_minimize(set, psi, per_axis, 2.0 / (per_axis - 1), 30);
  return {r.value, r.point};
}

/// max over y in Y of p(x, y), together with max_j phi_j(x), clipped at 0.
inline double feasibility_residual(const FsippProblem& prob, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (const auto& h : prob.phi) worst = std::max(worst, h.evaluate(x));
  const Polynomial neg = -prob.p.at_x(x);
  worst = std::max(worst, -coarse_min_point(prob.Y, neg).value);
  return worst;
}

struct GapReport {
  double upper;                 // measure-based bound of psi at order k
  double inner;                 // grid minimum of psi
  double E;                     // upper - inner
  double infeasibility_bound;   // max_y L(p) / L(1) = -inner
};

/// E(L) for psi = -L(p(x, .)) / L(1).
inline GapReport gap_E(const FsippProblem& prob, const MomentFunctional& L, int k) {
  if (L.mass() <= 0.0) throw std::invalid_argument("functional has nonpositive mass");
  const Polynomial psi = -(1.0 / L.mass()) * prob.p.apply_in_x([&](const Monomial& a) { return L(a); });
  GapReport g{};
  g.upper = lasserre_upper(prob.Y, psi, k);
  g.inner = inner_min(prob.Y, psi);
  g.E = g.upper - g.inner;
  g.infeasibility_bound = -g.inner;
  return g;
}

struct RateConstants {
  double B1 = 0.0;
  double B2 = 0.0;
  double eta_Y = 1.0;
  double eps_Y = 1.0;
  int n = 1;
};

inline double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// C = 2^{3n+3} vol(H^n) / (eta n^{n/2} vol(B^n)) with vol(H^n) = 2^n.
inline double rate_constant_C(int n, double eta) {
  if (n < 1 || !(eta > 0.0) || eta > 1.0) throw std::invalid_argument("need n >= 1 and 0 < eta <= 1");
  return std::pow(2.0, 3 * n + 3) * std::pow(2.0, n) / (eta * std::pow(n, 0.5 * n) * unit_ball_volume(n));
}

/// 2 sqrt(n) B1 ((4n+2) log k / floor(k/2) + C / k).
inline double rate_bound(const RateConstants& c, int k) {
  if (k < 2) throw std::invalid_argument("rate bound needs k >= 2");
  if (c.B1 < 0.0 || c.B2 < 0.0 || !(c.eps_Y > 0.0)) throw std::invalid_argument("invalid rate constants");
  const double C = rate_constant_C(c.n, c.eta_Y);
  return 2.0 * std::sqrt(static_cast<double>(c.n)) * c.B1 *
         ((4.0 * c.n + 2.0) * std::log(static_cast<double>(k)) / (k / 2) + C / k);
}

/// Volume-regularity constants (eta_Y, eps_Y) for the supported sets.
inline std::pair<double, double> regularity_constants(const IndexSet& set) {
  const int n = set.dim();
  switch (set.kind()) {
    case SetKind::Box: return {std::pow(0.5, n), 2.0};
    case SetKind::Ball: return {std::pow(0.5, n), 1.0};
    case SetKind::Sphere: throw std::invalid_argument("the sphere has no volume-regularity constants");
    case SetKind::SimplexUnion: {
      double eta = 1.0;
      double diam = 0.0;
      for (const Simplex& s : set.simplex_list()) {
        double area = 0.0;
        double d = 0.0;
        for (int i = 0; i <= n; ++i) {
          for (int j = i + 1; j <= n; ++j) d = std::max(d, (s.vertex(i) - s.vertex(j)).norm());
          // facet opposite vertex i: |det| of its Gram matrix
          Eigen::MatrixXd E(n, n - 1);
          int col = 0;
          int first = i == 0 ? 1 : 0;
          for (int j = 0; j <= n; ++j) {
            if (j == i || j == first) continue;
            E.col(col++) = s.vertex(j) - s.vertex(first);
          }
          double fac = 1.0;
          for (int t = 2; t <= n - 1; ++t) fac *= t;
          area += (n == 1 ? 1.0 : std::sqrt(std::max(0.0, (E.transpose() * E).determinant())) / fac);
        }
        const double inradius = n * s.volume() / area;
        eta = std::min(eta, std::pow(inradius / d, n));
        diam = std::max(diam, d);
      }
      return {eta, diam};
    }
  }
  return {1.0, 1.0};
}

/// B1 = max ||grad psi||, B2 = max ||hess psi||_2 over the grid of Y.
inline RateConstants estimate_rate_constants(const IndexSet& set, const Polynomial& psi, int per_axis = 101) {
  const int n = set.dim();
  RateConstants c;
  c.n = n;
  std::tie(c.eta_Y, c.eps_Y) = regularity_constants(set);
  std::vector<detail::CompiledPolynomial> grad;
  std::vector<detail::CompiledPolynomial> hess;
  for (const auto& gi : gradient(psi)) grad.emplace_back(gi);
  const auto H = hessian(psi);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) hess.emplace_back(H[i][j]);
  }
  Eigen::VectorXd gv(n);
  Eigen::MatrixXd hv(n, n);
  detail::scan_grid(set, per_axis, [&](const Eigen::VectorXd& y) {
    for (int i = 0; i < n; ++i) gv(i) = grad[i](y);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) hv(i, j) = hess[i * n + j](y);
    }
    c.B1 = std::max(c.B1, gv.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hv, Eigen::EigenvaluesOnly);
    c.B2 = std::max(c.B2, es.eigenvalues().cwiseAbs().maxCoeff());
  });
  return c;
}

/// Chebyshev polynomial T_k, with the hyperbolic branch for |t| >= 1.
inline double chebyshev(int k, double t) {
  if (k < 0) throw std::invalid_argument("chebyshev degree must be nonnegative");
  if (std::abs(t) <= 1.0) return std::cos(k * std::acos(t));
  const double v = std::cosh(k * std::acosh(std::abs(t)));
  return (t < 0.0 && (k % 2)) ? -v : v;
}

/// Needle polynomial v_k^h(t) = T_k(1+h^2-t^2)^2 / T_k(1+h^2)^2.
inline double needle(int k, double h, double t) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("needle width must lie in (0,1)");
  const double num = chebyshev(k, 1.0 + h * h - t * t);
  const double den = chebyshev(k, 1.0 + h * h);
  return (num * num) / (den * den);
}

/// Phi_k(t) = 1 - 2k^2 t for t <= 1/(2k^2), else 0.
inline double phi_lower(int k, double t) {
  if (k < 1) throw std::invalid_argument("phi_lower needs k >= 1");
  const double kk = 2.0 * k * k;
  return t <= 1.0 / kk ? 1.0 - kk * t : 0.0;
}

}  // namespace fsipp
