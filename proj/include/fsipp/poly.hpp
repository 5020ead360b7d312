#pragma once

// Sparse multivariate polynomials with double coefficients.
//
// Monomials are exponent vectors; every container keyed by monomials uses
// graded lexicographic order: ascending total degree, and within a degree
// the monomial with the larger exponent on the earlier variable comes first
// (1, x1, x2, x1^2, x1 x2, x2^2, ...).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fsipp {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Monomial {
  std::vector<int> exps;

  Monomial() = default;
  explicit Monomial(std::vector<int> e) : exps(std::move(e)) {
    for (int v : exps) {
      if (v < 0) throw std::invalid_argument("negative exponent in monomial");
    }
  }
  static Monomial one(int nvars) { return Monomial(std::vector<int>(nvars, 0)); }
  static Monomial unit(int nvars, int i) {
    std::vector<int> e(nvars, 0);
    e.at(i) = 1;
    return Monomial(std::move(e));
  }

  int nvars() const { return static_cast<int>(exps.size()); }
  int degree() const { return std::accumulate(exps.begin(), exps.end(), 0); }
  int operator[](int i) const { return exps[i]; }

  friend Monomial operator*(const Monomial& a, const Monomial& b) {
    if (a.nvars() != b.nvars()) throw DimensionError("monomial dimension mismatch");
    Monomial r = a;
    for (int i = 0; i < a.nvars(); ++i) r.exps[i] += b.exps[i];
    return r;
  }
  friend bool operator==(const Monomial& a, const Monomial& b) { return a.exps == b.exps; }
  friend bool operator!=(const Monomial& a, const Monomial& b) { return !(a == b); }

  // Concatenation of exponent blocks: (x-part, y-part) -> joint monomial.
  static Monomial concat(const Monomial& a, const Monomial& b) {
    Monomial r = a;
    r.exps.insert(r.exps.end(), b.exps.begin(), b.exps.end());
    return r;
  }

  double evaluate(std::span<const double> u) const {
    double v = 1.0;
    for (int i = 0; i < nvars(); ++i) {
      for (int k = 0; k < exps[i]; ++k) v *= u[i];
    }
    return v;
  }

  std::string to_string(const char* var = "x") const {
    std::ostringstream os;
    bool any = false;
    for (int i = 0; i < nvars(); ++i) {
      if (exps[i] == 0) continue;
      if (any) os << '*';
      os << var << (i + 1);
      if (exps[i] > 1) os << '^' << exps[i];
      any = true;
    }
    if (!any) os << '1';
    return os.str();
  }
};

struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const int da = a.degree();
    const int db = b.degree();
    if (da != db) return da < db;
    // larger leading exponent first
    return std::lexicographical_compare(b.exps.begin(), b.exps.end(), a.exps.begin(),
                                        a.exps.end());
  }
};

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// All monomials of N^dim with total degree <= order, in graded lexicographic order.
class MonomialBasis {
 public:
  MonomialBasis(int dim, int order) : dim_(dim), order_(order) {
    if (dim < 0 || order < 0) throw std::invalid_argument("MonomialBasis: negative size");
    std::vector<int> e(dim, 0);
    for (int deg = 0; deg <= order; ++deg) emit(e, 0, deg);
    for (std::size_t i = 0; i < list_.size(); ++i) index_.emplace(list_[i], static_cast<int>(i));
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(list_.size()); }
  const Monomial& operator[](int i) const { return list_[i]; }
  const std::vector<Monomial>& monomials() const { return list_; }
  auto begin() const { return list_.begin(); }
  auto end() const { return list_.end(); }

  /// Position of `m`, or -1 when it is not part of the basis.
  int index_of(const Monomial& m) const {
    auto it = index_.find(m);
    return it == index_.end() ? -1 : it->second;
  }

 private:
  // Within one degree, enumerate exponent vectors with the first variable's
  // exponent descending, which is exactly graded lexicographic order.
  void emit(std::vector<int>& e, int pos, int remaining) {
    if (dim_ == 0) {
      if (remaining == 0) list_.emplace_back(e);
      return;
    }
    if (pos == dim_ - 1) {
      e[pos] = remaining;
      list_.emplace_back(e);
      e[pos] = 0;
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      e[pos] = v;
      emit(e, pos + 1, remaining - v);
    }
    e[pos] = 0;
  }

  int dim_;
  int order_;
  std::vector<Monomial> list_;
  std::map<Monomial, int, GrlexLess> index_;
};

class Polynomial {
 public:
  using Terms = std::map<Monomial, double, GrlexLess>;

  explicit Polynomial(int nvars = 0) : nvars_(nvars) {
    if (nvars < 0) throw std::invalid_argument("negative polynomial dimension");
  }

  static Polynomial constant(int nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Monomial::one(nvars), c);
    return p;
  }
  static Polynomial variable(int nvars, int i) {
    Polynomial p(nvars);
    p.add_term(Monomial::unit(nvars, i), 1.0);
    return p;
  }
  static Polynomial term(const Monomial& m, double c) {
    Polynomial p(m.nvars());
    p.add_term(m, c);
    return p;
  }

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t num_terms() const { return terms_.size(); }

  /// Maximum total degree of a stored term; the zero polynomial has degree 0.
  int degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }

  /// Degree in the variables [first, first + count).
  int partial_degree(int first, int count) const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
      int s = 0;
      for (int i = first; i < first + count; ++i) s += m.exps[i];
      d = std::max(d, s);
    }
    return d;
  }

  bool is_constant() const { return degree() == 0; }

  double coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }
  double constant_term() const { return coeff(Monomial::one(nvars_)); }

  void add_term(const Monomial& m, double c) {
    if (m.nvars() != nvars_) throw DimensionError("term dimension does not match polynomial");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double evaluate(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != nvars_) throw DimensionError("evaluation point has wrong dimension");
    double v = 0.0;
    for (const auto& [m, c] : terms_) v += c * m.evaluate(u);
    return v;
  }
  double evaluate(const Eigen::VectorXd& u) const {
    return evaluate(std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
  }
  double operator()(std::span<const double> u) const { return evaluate(u); }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same(b);
    Polynomial r(a.nvars_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
    }
    return r;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  Polynomial pow(int e) const {
    if (e < 0) throw std::invalid_argument("negative power");
    Polynomial r = constant(nvars_, 1.0);
    Polynomial base = *this;
    while (e > 0) {
      if (e & 1) r *= base;
      e >>= 1;
      if (e) base *= base;
    }
    return r;
  }

  Polynomial derivative(int i) const {
    if (i < 0 || i >= nvars_) throw DimensionError("derivative index out of range");
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) {
      if (m.exps[i] == 0) continue;
      Monomial d = m;
      d.exps[i] -= 1;
      r.add_term(d, c * m.exps[i]);
    }
    return r;
  }

  /// Same polynomial embedded in a larger variable space, its variables placed at `offset`.
  Polynomial embed(int new_nvars, int offset) const {
    if (offset < 0 || offset + nvars_ > new_nvars) throw DimensionError("embedding out of range");
    Polynomial r(new_nvars);
    for (const auto& [m, c] : terms_) {
      std::vector<int> e(new_nvars, 0);
      std::copy(m.exps.begin(), m.exps.end(), e.begin() + offset);
      r.add_term(Monomial(std::move(e)), c);
    }
    return r;
  }

  /// Largest absolute coefficient.
  double max_abs_coeff() const {
    double v = 0.0;
    for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
    return v;
  }

  std::string to_string(const char* var = "x") const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << '-';
      os << std::abs(c);
      if (m.degree() > 0) os << '*' << m.to_string(var);
      first = false;
    }
    return os.str();
  }

 private:
  void check_same(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw DimensionError("polynomial dimension mismatch");
  }

  int nvars_;
  Terms terms_;
};

inline std::vector<Polynomial> gradient(const Polynomial& h) {
  std::vector<Polynomial> g;
  g.reserve(h.nvars());
  for (int i = 0; i < h.nvars(); ++i) g.push_back(h.derivative(i));
  return g;
}

inline std::vector<std::vector<Polynomial>> hessian(const Polynomial& h) {
  const int m = h.nvars();
  std::vector<std::vector<Polynomial>> H(m, std::vector<Polynomial>(m, Polynomial(m)));
  for (int i = 0; i < m; ++i) {
    Polynomial di = h.derivative(i);
    for (int j = i; j < m; ++j) {
      H[i][j] = di.derivative(j);
      if (j != i) H[j][i] = H[i][j];
    }
  }
  return H;
}

/// h(A z + b) expanded in the new variables z; A is nvars(h) x dim(z).
inline Polynomial substitute_affine(const Polynomial& h, const Eigen::MatrixXd& A,
                                    const Eigen::VectorXd& b) {
  if (A.rows() != h.nvars() || b.size() != h.nvars()) {
    throw DimensionError("affine substitution has wrong dimensions");
  }
  const int nz = static_cast<int>(A.cols());
  std::vector<Polynomial> images;
  images.reserve(h.nvars());
  for (int i = 0; i < h.nvars(); ++i) {
    Polynomial yi = Polynomial::constant(nz, b(i));
    for (int j = 0; j < nz; ++j) {
      if (A(i, j) != 0.0) yi.add_term(Monomial::unit(nz, j), A(i, j));
    }
    images.push_back(std::move(yi));
  }
  // cache powers of each image polynomial
  std::vector<std::vector<Polynomial>> powers(h.nvars());
  Polynomial r(nz);
  for (const auto& [m, c] : h.terms()) {
    Polynomial t = Polynomial::constant(nz, c);
    for (int i = 0; i < h.nvars(); ++i) {
      const int e = m.exps[i];
      if (e == 0) continue;
      auto& pw = powers[i];
      if (pw.empty()) pw.push_back(Polynomial::constant(nz, 1.0));
      while (static_cast<int>(pw.size()) <= e) pw.push_back(pw.back() * images[i]);
      t *= pw[e];
    }
    r += t;
  }
  return r;
}

/// Polynomial in two variable blocks x (xdim) and y (ydim).
class BiPolynomial {
 public:
  using Key = std::pair<Monomial, Monomial>;
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const {
      GrlexLess less;
      if (less(a.first, b.first)) return true;
      if (less(b.first, a.first)) return false;
      return less(a.second, b.second);
    }
  };
  using Terms = std::map<Key, double, KeyLess>;

  BiPolynomial(int xdim = 0, int ydim = 0) : xdim_(xdim), ydim_(ydim) {
    if (xdim < 0 || ydim < 0) throw std::invalid_argument("negative block dimension");
  }

  int xdim() const { return xdim_; }
  int ydim() const { return ydim_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Monomial& xm, const Monomial& ym, double c) {
    if (xm.nvars() != xdim_ || ym.nvars() != ydim_) throw DimensionError("bi-term dimension mismatch");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(Key{xm, ym}, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  int deg_x() const {
    int d = 0;
    for (const auto& [k, c] : terms_) d = std::max(d, k.first.degree());
    return d;
  }
  int deg_y() const {
    int d = 0;
    for (const auto& [k, c] : terms_) d = std::max(d, k.second.degree());
    return d;
  }

  double evaluate(std::span<const double> x, std::span<const double> y) const {
    if (static_cast<int>(x.size()) != xdim_ || static_cast<int>(y.size()) != ydim_) {
      throw DimensionError("bi-polynomial evaluation point has wrong dimension");
    }
    double v = 0.0;
    for (const auto& [k, c] : terms_) v += c * k.first.evaluate(x) * k.second.evaluate(y);
    return v;
  }
  double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                    std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  }

  /// p viewed in R[y][x]: x-monomial -> coefficient polynomial in y.
  std::map<Monomial, Polynomial, GrlexLess> coefficients_in_x() const {
    std::map<Monomial, Polynomial, GrlexLess> out;
    for (const auto& [k, c] : terms_) {
      auto it = out.try_emplace(k.first, Polynomial(ydim_)).first;
      it->second.add_term(k.second, c);
    }
    return out;
  }
  /// p viewed in R[x][y]: y-monomial -> coefficient polynomial in x.
  std::map<Monomial, Polynomial, GrlexLess> coefficients_in_y() const {
    std::map<Monomial, Polynomial, GrlexLess> out;
    for (const auto& [k, c] : terms_) {
      auto it = out.try_emplace(k.second, Polynomial(xdim_)).first;
      it->second.add_term(k.first, c);
    }
    return out;
  }

  static BiPolynomial from_coefficients_in_x(int xdim, int ydim,
                                             const std::map<Monomial, Polynomial, GrlexLess>& view) {
    BiPolynomial p(xdim, ydim);
    for (const auto& [xm, coeff] : view) {
      for (const auto& [ym, c] : coeff.terms()) p.add_term(xm, ym, c);
    }
    return p;
  }

  /// Apply a linear functional on R[x] termwise: sum_a L(x^a) p_a(y).
  Polynomial apply_in_x(const std::function<double(const Monomial&)>& functional) const {
    Polynomial r(ydim_);
    for (const auto& [k, c] : terms_) r.add_term(k.second, c * functional(k.first));
    return r;
  }
  /// Apply a linear functional on R[y] termwise: sum_b H(y^b) p_b(x).
  Polynomial apply_in_y(const std::function<double(const Monomial&)>& functional) const {
    Polynomial r(xdim_);
    for (const auto& [k, c] : terms_) r.add_term(k.first, c * functional(k.second));
    return r;
  }

  /// p(., y) for a fixed point y.
  Polynomial at_y(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != ydim_) throw DimensionError("y point has wrong dimension");
    return apply_in_y([&](const Monomial& m) { return m.evaluate(y); });
  }
  Polynomial at_y(const Eigen::VectorXd& y) const {
    return at_y(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  }
  /// p(x, .) for a fixed point x.
  Polynomial at_x(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != xdim_) throw DimensionError("x point has wrong dimension");
    return apply_in_x([&](const Monomial& m) { return m.evaluate(x); });
  }
  Polynomial at_x(const Eigen::VectorXd& x) const {
    return at_x(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  /// Joint polynomial in (x, y) with x variables first.
  Polynomial joint() const {
    Polynomial r(xdim_ + ydim_);
    for (const auto& [k, c] : terms_) r.add_term(Monomial::concat(k.first, k.second), c);
    return r;
  }
  static BiPolynomial from_joint(const Polynomial& h, int xdim) {
    const int ydim = h.nvars() - xdim;
    if (ydim < 0) throw DimensionError("joint polynomial too small for x block");
    BiPolynomial p(xdim, ydim);
    for (const auto& [m, c] : h.terms()) {
      Monomial xm(std::vector<int>(m.exps.begin(), m.exps.begin() + xdim));
      Monomial ym(std::vector<int>(m.exps.begin() + xdim, m.exps.end()));
      p.add_term(xm, ym, c);
    }
    return p;
  }

  friend bool operator==(const BiPolynomial& a, const BiPolynomial& b) {
    return a.xdim_ == b.xdim_ && a.ydim_ == b.ydim_ && a.terms_ == b.terms_;
  }

 private:
  int xdim_;
  int ydim_;
  Terms terms_;
};

}  // namespace fsipp
