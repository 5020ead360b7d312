#pragma once

#include "fsipp/moments.hpp"
#include "fsipp/poly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fsipp {

/// min f(x)/g(x) s.t. phi_j(x) <= 0, p(x,y) <= 0 for all y in Y.
struct FsippProblem {
  int m = 0;
  int n = 0;
  Polynomial f;
  Polynomial g;
  std::vector<Polynomial> phi;
  BiPolynomial p;
  IndexSet Y = IndexSet::box(1);
  double R = 2.0;
  double gstar = 0.5;

  /// d = ceil(max{deg f, deg g, deg phi_j, deg_x p} / 2), at least 1.
  int degree_bound() const {
    int top = std::max({f.degree(), g.degree(), p.deg_x()});
    for (const auto& h : phi) top = std::max(top, h.degree());
    return std::max(1, (top + 1) / 2);
  }

  void check() const {
    if (m < 1 || n < 1) throw std::invalid_argument("problem dimensions must be positive");
    if (f.nvars() != m || g.nvars() != m) throw DimensionError("f and g must be polynomials in x");
    for (const auto& h : phi) {
      if (h.nvars() != m) throw DimensionError("constraint phi must be a polynomial in x");
    }
    if (p.xdim() != m || p.ydim() != n) throw DimensionError("p must be a polynomial in (x, y)");
    if (Y.dim() != n) throw DimensionError("index set dimension differs from n");
    if (!(R > 0.0) || !(gstar > 0.0)) throw std::invalid_argument("R and g* must be positive");
  }
};

/// R = 2 (1 + largest coordinate magnitude over the hint points).
inline double default_radius(const std::vector<Eigen::VectorXd>& hints = {}) {
  double top = 0.0;
  for (const auto& h : hints) top = std::max(top, h.cwiseAbs().maxCoeff());
  return 2.0 * (1.0 + top);
}

inline double default_gstar(const Polynomial& g) {
  if (g.is_constant()) {
    const double c = g.constant_term();
    if (c <= 0.0) throw std::invalid_argument("constant denominator must be positive");
    return c / 2.0;
  }
  return 1e-3;
}

/// Linear functional on R[x]_{2d}, one value per monomial in graded-lex order.
class MomentFunctional {
 public:
  MomentFunctional(int m, int d) : basis_(m, 2 * d), d_(d), values_(Eigen::VectorXd::Zero(basis_.size())) {}
  MomentFunctional(int m, int d, Eigen::VectorXd values) : MomentFunctional(m, d) {
    if (values.size() != values_.size()) throw DimensionError("moment vector has wrong length");
    values_ = std::move(values);
  }

  int nvars() const { return basis_.dim(); }
  int half_degree() const { return d_; }
  const MonomialBasis& basis() const { return basis_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  double operator()(const Monomial& a) const {
    const int i = basis_.index_of(a);
    if (i < 0) throw DimensionError("monomial outside the functional's degree range");
    return values_(i);
  }
  double apply(const Polynomial& h) const {
    double v = 0.0;
    for (const auto& [a, c] : h.terms()) v += c * (*this)(a);
    return v;
  }
  double mass() const { return values_(0); }

  /// L(x) / L(1).
  Eigen::VectorXd barycenter() const {
    const int m = nvars();
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i) x(i) = values_(1 + i) / values_(0);
    return x;
  }

 private:
  MonomialBasis basis_;
  int d_;
  Eigen::VectorXd values_;
};

}  // namespace fsipp
