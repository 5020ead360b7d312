#pragma once

// Index sets Y inside [-1,1]^n with exact monomial moments int_Y y^b dy,
// plus the moment and localizing matrices built from them.

#include "fsipp/poly.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsipp {

enum class SetKind { Box, Sphere, Ball, SimplexUnion };

inline const char* to_string(SetKind k) {
  switch (k) {
    case SetKind::Box: return "box";
    case SetKind::Sphere: return "sphere";
    case SetKind::Ball: return "ball";
    case SetKind::SimplexUnion: return "simplices";
  }
  return "?";
}

/// An n-simplex stored as its n+1 vertices (rows).
struct Simplex {
  Eigen::MatrixXd vertices;  // (n+1) x n

  int dim() const { return static_cast<int>(vertices.cols()); }
  Eigen::VectorXd vertex(int i) const { return vertices.row(i).transpose(); }
  /// Edge matrix [v1-v0, ..., vn-v0], n x n.
  Eigen::MatrixXd edges() const {
    const int n = dim();
    Eigen::MatrixXd E(n, n);
    for (int i = 0; i < n; ++i) E.col(i) = (vertices.row(i + 1) - vertices.row(0)).transpose();
    return E;
  }
  double volume() const {
    double f = 1.0;
    for (int i = 2; i <= dim(); ++i) f *= i;
    return std::abs(edges().determinant()) / f;
  }
  /// Barycentric coordinates of y (n+1 entries summing to 1).
  Eigen::VectorXd barycentric(const Eigen::VectorXd& y) const {
    Eigen::VectorXd t = edges().fullPivLu().solve(y - vertex(0));
    Eigen::VectorXd lam(dim() + 1);
    lam(0) = 1.0 - t.sum();
    lam.tail(dim()) = t;
    return lam;
  }
};

namespace detail {

struct MomentCache {
  std::mutex mutex;
  std::map<Monomial, double, GrlexLess> values;
};

inline double sphere_moment(const Monomial& b) {
  for (int e : b.exps) {
    if (e % 2) return 0.0;
  }
  double lg = 0.0;
  double hsum = 0.0;
  for (int e : b.exps) {
    const double h = 0.5 * (e + 1);
    lg += std::lgamma(h);
    hsum += h;
  }
  return 2.0 * std::exp(lg - std::lgamma(hsum));
}

inline double box_moment(const Monomial& b) {
  double v = 1.0;
  for (int e : b.exps) {
    if (e % 2) return 0.0;
    v *= 2.0 / (e + 1);
  }
  return v;
}

struct GaussRule {
  std::vector<double> x;  // nodes on [0, 1]
  std::vector<double> w;
};

/// q-point Gauss-Legendre rule mapped to [0, 1]; cached per q.
inline const GaussRule& gauss_legendre01(int q) {
  static std::mutex mutex;
  static std::map<int, GaussRule> rules;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = rules.find(q);
  if (it != rules.end()) return it->second;
  GaussRule r;
  for (double z : boost::math::legendre_p_zeros<double>(q)) {
    const double dp = boost::math::legendre_p_prime(q, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x.push_back(0.5 * (1.0 + z));
    r.w.push_back(0.5 * w);
    if (z != 0.0) {
      r.x.push_back(0.5 * (1.0 - z));
      r.w.push_back(0.5 * w);
    }
  }
  return rules.emplace(q, std::move(r)).first->second;
}

// Collapsed (Duffy) Gauss rule: positive weights, exact for degree |b|, so no
// cancellation between expanded terms.
inline double simplex_moment(const Simplex& s, const Monomial& b) {
  const int n = s.dim();
  const Eigen::MatrixXd E = s.edges();
  const Eigen::VectorXd v0 = s.vertex(0);
  const int q = (b.degree() + n) / 2 + 1;
  const GaussRule& g = gauss_legendre01(q);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd t(n);
  long double total = 0.0L;
  while (true) {
    double rest = 1.0;
    double weight = 1.0;
    for (int j = 0; j < n; ++j) {
      const double u = g.x[idx[j]];
      t(j) = rest * u;
      weight *= g.w[idx[j]] * std::pow(1.0 - u, n - 1 - j);
      rest *= 1.0 - u;
    }
    const Eigen::VectorXd y = v0 + E * t;
    double mono = 1.0;
    for (int j = 0; j < n; ++j) {
      for (int e = 0; e < b[j]; ++e) mono *= y(j);
    }
    total += static_cast<long double>(weight) * mono;
    int j = 0;
    while (j < n && ++idx[j] == q) idx[j++] = 0;
    if (j == n) break;
  }
  return static_cast<double>(total) * std::abs(E.determinant());
}

}  // namespace detail

class IndexSet {
 public:
  static IndexSet box(int n) { return IndexSet(SetKind::Box, n); }
  static IndexSet sphere(int n) {
    if (n < 1) throw std::invalid_argument("sphere dimension must be positive");
    return IndexSet(SetKind::Sphere, n);
  }
  static IndexSet ball(int n) { return IndexSet(SetKind::Ball, n); }

  /// Union of simplices with pairwise disjoint interiors (caller's obligation).
  static IndexSet simplices(std::vector<Simplex> list) {
    if (list.empty()) throw std::invalid_argument("simplex union needs at least one simplex");
    const int n = list.front().dim();
    for (const Simplex& s : list) {
      if (s.dim() != n || s.vertices.rows() != n + 1) {
        throw DimensionError("every simplex needs n+1 vertices in R^n");
      }
      if ((s.vertices.array().abs() > 1.0 + 1e-12).any()) {
        throw std::invalid_argument("simplex vertex outside [-1,1]^n");
      }
      if (s.volume() <= 1e-14) throw std::invalid_argument("degenerate simplex");
    }
    IndexSet y(SetKind::SimplexUnion, n);
    y.simplices_ = std::move(list);
    return y;
  }

  /// Convex polytope in vertex form, triangulated by pulling from the first vertex.
  static IndexSet convex_polytope(const std::vector<Eigen::VectorXd>& vertices);

  SetKind kind() const { return kind_; }
  int dim() const { return n_; }
  const std::vector<Simplex>& simplex_list() const { return simplices_; }

  /// Lebesgue measure (surface measure for the sphere).
  double measure() const { return moment(Monomial::one(n_)); }

  bool contains(const Eigen::VectorXd& y, double tol = 1e-12) const {
    if (y.size() != n_) throw DimensionError("point dimension does not match index set");
    switch (kind_) {
      case SetKind::Box: return (y.array().abs() <= 1.0 + tol).all();
      case SetKind::Ball: return y.norm() <= 1.0 + tol;
      case SetKind::Sphere: return std::abs(y.norm() - 1.0) <= tol;
      case SetKind::SimplexUnion:
        for (const Simplex& s : simplices_) {
          if ((s.barycentric(y).array() >= -tol).all()) return true;
        }
        return false;
    }
    return false;
  }

  /// int_Y y^b dy, cached per set.
  double moment(const Monomial& b) const {
    if (b.nvars() != n_) throw DimensionError("moment exponent has wrong dimension");
    {
      std::lock_guard lock(cache_->mutex);
      auto it = cache_->values.find(b);
      if (it != cache_->values.end()) return it->second;
    }
    const double v = compute_moment(b);
    std::lock_guard lock(cache_->mutex);
    cache_->values.emplace(b, v);
    return v;
  }

 private:
  IndexSet(SetKind kind, int n) : kind_(kind), n_(n), cache_(std::make_shared<detail::MomentCache>()) {
    if (n < 0) throw std::invalid_argument("negative index-set dimension");
  }

  double compute_moment(const Monomial& b) const {
    switch (kind_) {
      case SetKind::Box: return detail::box_moment(b);
      case SetKind::Sphere: return detail::sphere_moment(b);
      case SetKind::Ball: return detail::sphere_moment(b) / (b.degree() + n_);
      case SetKind::SimplexUnion: {
        double total = 0.0;
        for (const Simplex& s : simplices_) total += detail::simplex_moment(s, b);
        return total;
      }
    }
    return 0.0;
  }

  SetKind kind_;
  int n_;
  std::vector<Simplex> simplices_;
  std::shared_ptr<detail::MomentCache> cache_;
};

namespace detail {

// Pulling triangulation of conv(points[idx]); returns index lists of simplices.
inline std::vector<std::vector<int>> pull_triangulate(const std::vector<Eigen::VectorXd>& points,
                                                      const std::vector<int>& idx) {
  const double scale = 1.0;
  const double tol = 1e-9 * scale;
  const Eigen::VectorXd& p0 = points[idx[0]];
  const int ambient = static_cast<int>(p0.size());
  Eigen::MatrixXd D(ambient, static_cast<int>(idx.size()) - 1);
  for (std::size_t i = 1; i < idx.size(); ++i) D.col(static_cast<int>(i) - 1) = points[idx[i]] - p0;

  int k = 0;
  Eigen::MatrixXd U;
  if (D.cols() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    for (int i = 0; i < sv.size(); ++i) {
      if (sv(i) > tol) ++k;
    }
    U = svd.matrixU().leftCols(k);
  }
  if (k == 0) return {{idx[0]}};

  std::vector<Eigen::VectorXd> local;
  for (int i : idx) local.push_back(U.transpose() * (points[i] - p0));

  if (k == 1) {
    int lo = 0;
    int hi = 0;
    for (std::size_t i = 0; i < local.size(); ++i) {
      if (local[i](0) < local[lo](0)) lo = static_cast<int>(i);
      if (local[i](0) > local[hi](0)) hi = static_cast<int>(i);
    }
    return {{idx[lo], idx[hi]}};
  }

  // supporting hyperplanes spanned by k affinely independent points
  const int V = static_cast<int>(idx.size());
  std::set<std::vector<int>> facets;
  std::vector<int> pick(k);
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == k) {
      Eigen::MatrixXd diff(k, k - 1);
      for (int j = 1; j < k; ++j) diff.col(j - 1) = local[pick[j]] - local[pick[0]];
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff.transpose(), Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv.size() > 0 && sv(sv.size() - 1) <= tol) return;
      Eigen::VectorXd normal = svd.matrixV().col(k - 1);
      const double off = normal.dot(local[pick[0]]);
      bool pos = false;
      bool neg = false;
      std::vector<int> on;
      for (int i = 0; i < V; ++i) {
        const double s = normal.dot(local[i]) - off;
        if (s > tol) pos = true;
        else if (s < -tol) neg = true;
        else on.push_back(i);
      }
      if (pos && neg) return;
      facets.insert(on);
      return;
    }
    for (int i = start; i < V; ++i) {
      pick[depth] = i;
      choose(i + 1, depth + 1);
    }
  };
  choose(0, 0);

  std::vector<std::vector<int>> out;
  for (const auto& f : facets) {
    if (std::find(f.begin(), f.end(), 0) != f.end()) continue;
    std::vector<int> sub;
    for (int i : f) sub.push_back(idx[i]);
    for (auto s : pull_triangulate(points, sub)) {
      s.insert(s.begin(), idx[0]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace detail

inline IndexSet IndexSet::convex_polytope(const std::vector<Eigen::VectorXd>& vertices) {
  if (vertices.empty()) throw std::invalid_argument("polytope needs vertices");
  const int n = static_cast<int>(vertices.front().size());
  if (static_cast<int>(vertices.size()) < n + 1) throw std::invalid_argument("polytope is not full-dimensional");
  std::vector<int> idx(vertices.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<Simplex> list;
  for (const auto& s : detail::pull_triangulate(vertices, idx)) {
    if (static_cast<int>(s.size()) != n + 1) throw std::invalid_argument("polytope is not full-dimensional");
    Simplex sx{Eigen::MatrixXd(n + 1, n)};
    for (int i = 0; i <= n; ++i) sx.vertices.row(i) = vertices[s[i]].transpose();
    list.push_back(std::move(sx));
  }
  return simplices(std::move(list));
}

/// A_k(psi) = int_Y psi v_k v_k^T dy over the degree-k monomial basis of R[y].
inline Eigen::MatrixXd localized_matrix(const IndexSet& set, const Polynomial& psi, int k) {
  if (k < 0) throw std::invalid_argument("localized_matrix: negative order");
  if (psi.nvars() != set.dim()) throw DimensionError("localizing polynomial has wrong dimension");
  MonomialBasis basis(set.dim(), k);
  const int N = basis.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      const Monomial bij = basis[i] * basis[j];
      double v = 0.0;
      for (const auto& [b, c] : psi.terms()) v += c * set.moment(b * bij);
      A(i, j) = v;
      A(j, i) = v;
    }
  }
  return A;
}

/// B_k = int_Y v_k v_k^T dy.
inline Eigen::MatrixXd moment_matrix(const IndexSet& set, int k) {
  return localized_matrix(set, Polynomial::constant(set.dim(), 1.0), k);
}

/// Q with Q^T B Q = I spanning the range of B (numerical rank, relative cutoff).
/// For the sphere B is singular from k = 2 on; every localized matrix shares its kernel.
inline Eigen::MatrixXd range_whitening(const Eigen::MatrixXd& B, double cutoff = 1e-11) {
  const Eigen::VectorXd s = B.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Bs = s.asDiagonal() * B * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(Bs);
  const double top = eb.eigenvalues().maxCoeff();
  if (!(top > 0.0)) throw std::logic_error("moment matrix of the index set vanishes");
  std::vector<int> keep;
  for (int i = 0; i < Bs.rows(); ++i) {
    if (eb.eigenvalues()(i) > cutoff * top) keep.push_back(i);
  }
  Eigen::MatrixXd Q(Bs.rows(), static_cast<int>(keep.size()));
  for (int c = 0; c < Q.cols(); ++c) {
    Q.col(c) = s.asDiagonal() * eb.eigenvectors().col(keep[c]) / std::sqrt(eb.eigenvalues()(keep[c]));
  }
  return Q;
}

}  // namespace fsipp
