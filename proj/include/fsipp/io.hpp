#pragma once

// Problem and result files (JSON).

#include "fsipp/problem.hpp"
#include "fsipp/relax.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsipp {

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed or schema-violating problem file. line/column are 1-based, 0 when unknown.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"
                                    : what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ProblemFile {
  FsippProblem problem;
  double tol = 1e-8;
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing key \"" + key + "\"");
  return j.at(key);
}

inline double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(where + ": number is not finite");
  return v;
}

inline Monomial as_exponent(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw SchemaError(where + ": exponent must be an array of length " + std::to_string(dim));
  }
  std::vector<int> e;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw SchemaError(where + ": exponents must be nonnegative integers");
    e.push_back(v.get<int>());
  }
  return Monomial(std::move(e));
}

inline Polynomial parse_polynomial(const json& j, int m, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": polynomial must be a list of terms");
  Polynomial p(m);
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "[" + std::to_string(t) + "]";
    p.add_term(as_exponent(require(j[t], "exp", w), m, w + ".exp"), as_number(require(j[t], "coef", w), w + ".coef"));
  }
  return p;
}

inline json write_polynomial(const Polynomial& p) {
  json out = json::array();
  for (const auto& [a, c] : p.terms()) out.push_back({{"exp", a.exps}, {"coef", c}});
  return out;
}

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

inline ProblemFile problem_from_json(const nlohmann::json& j) {
  using detail::as_number;
  using detail::require;
  if (!j.is_object()) throw SchemaError("problem file must be a JSON object");
  ProblemFile pf;
  FsippProblem& P = pf.problem;
  const auto& jm = require(j, "m", "problem");
  const auto& jn = require(j, "n", "problem");
  if (!jm.is_number_integer() || !jn.is_number_integer() || jm.get<long long>() < 1 || jn.get<long long>() < 1) {
    throw SchemaError("m and n must be positive integers");
  }
  P.m = jm.get<int>();
  P.n = jn.get<int>();
  P.f = detail::parse_polynomial(require(j, "f", "problem"), P.m, "f");
  P.g = j.contains("g") ? detail::parse_polynomial(j.at("g"), P.m, "g") : Polynomial::constant(P.m, 1.0);
  if (j.contains("phi")) {
    const auto& jp = j.at("phi");
    if (!jp.is_array()) throw SchemaError("phi must be a list of polynomials");
    for (std::size_t i = 0; i < jp.size(); ++i) {
      P.phi.push_back(detail::parse_polynomial(jp[i], P.m, "phi[" + std::to_string(i) + "]"));
    }
  }
  const auto& jpp = require(j, "p", "problem");
  if (!jpp.is_array()) throw SchemaError("p must be a list of terms");
  P.p = BiPolynomial(P.m, P.n);
  for (std::size_t t = 0; t < jpp.size(); ++t) {
    const std::string w = "p[" + std::to_string(t) + "]";
    P.p.add_term(detail::as_exponent(require(jpp[t], "xexp", w), P.m, w + ".xexp"),
                 detail::as_exponent(require(jpp[t], "yexp", w), P.n, w + ".yexp"),
                 as_number(require(jpp[t], "coef", w), w + ".coef"));
  }

  const auto& js = require(j, "index_set", "problem");
  const auto& jk = require(js, "kind", "index_set");
  if (!jk.is_string()) throw SchemaError("index_set.kind must be a string");
  const std::string kind = jk.get<std::string>();
  if (kind == "box") {
    P.Y = IndexSet::box(P.n);
  } else if (kind == "ball") {
    P.Y = IndexSet::ball(P.n);
  } else if (kind == "sphere") {
    P.Y = IndexSet::sphere(P.n);
  } else if (kind == "simplices") {
    const auto& jv = require(js, "vertices", "index_set");
    if (!jv.is_array() || jv.empty()) throw SchemaError("index_set.vertices must be a nonempty list of simplices");
    std::vector<Simplex> list;
    for (std::size_t s = 0; s < jv.size(); ++s) {
      const std::string w = "index_set.vertices[" + std::to_string(s) + "]";
      if (!jv[s].is_array() || static_cast<int>(jv[s].size()) != P.n + 1) {
        throw SchemaError(w + ": a simplex needs n+1 vertices");
      }
      Eigen::MatrixXd V(P.n + 1, P.n);
      for (int r = 0; r <= P.n; ++r) {
        const auto& row = jv[s][r];
        if (!row.is_array() || static_cast<int>(row.size()) != P.n) throw SchemaError(w + ": vertex must have n coordinates");
        for (int c = 0; c < P.n; ++c) V(r, c) = as_number(row[c], w);
      }
      list.push_back(Simplex{V});
    }
    try {
      P.Y = IndexSet::simplices(std::move(list));
    } catch (const std::exception& e) {
      throw SchemaError(std::string("index_set: ") + e.what());
    }
  } else {
    throw SchemaError("index_set.kind must be one of box, sphere, ball, simplices");
  }

  if (j.contains("config")) {
    const auto& jc = j.at("config");
    if (!jc.is_object()) throw SchemaError("config must be an object");
    if (jc.contains("R")) P.R = as_number(jc.at("R"), "config.R");
    if (jc.contains("gstar")) {
      P.gstar = as_number(jc.at("gstar"), "config.gstar");
    } else {
      try {
        P.gstar = default_gstar(P.g);
      } catch (const std::exception& e) {
        throw SchemaError(std::string("config.gstar: ") + e.what());
      }
    }
    if (jc.contains("tol")) pf.tol = as_number(jc.at("tol"), "config.tol");
  } else {
    P.gstar = P.g.is_constant() && P.g.constant_term() > 0.0 ? default_gstar(P.g) : 1e-3;
  }
  try {
    P.check();
  } catch (const std::exception& e) {
    throw SchemaError(e.what());
  }
  if (!(pf.tol > 0.0)) throw SchemaError("config.tol must be positive");
  return pf;
}

inline nlohmann::json problem_to_json(const ProblemFile& pf) {
  using nlohmann::json;
  const FsippProblem& P = pf.problem;
  json j;
  j["m"] = P.m;
  j["n"] = P.n;
  j["f"] = detail::write_polynomial(P.f);
  j["g"] = detail::write_polynomial(P.g);
  j["phi"] = json::array();
  for (const auto& h : P.phi) j["phi"].push_back(detail::write_polynomial(h));
  j["p"] = json::array();
  for (const auto& [key, c] : P.p.terms()) {
    j["p"].push_back({{"xexp", key.first.exps}, {"yexp", key.second.exps}, {"coef", c}});
  }
  json s;
  switch (P.Y.kind()) {
    case SetKind::Box: s["kind"] = "box"; break;
    case SetKind::Ball: s["kind"] = "ball"; break;
    case SetKind::Sphere: s["kind"] = "sphere"; break;
    case SetKind::SimplexUnion: {
      s["kind"] = "simplices";
      s["vertices"] = json::array();
      for (const auto& sx : P.Y.simplex_list()) {
        json verts = json::array();
        for (int r = 0; r < sx.vertices.rows(); ++r) {
          json row = json::array();
          for (int c = 0; c < sx.vertices.cols(); ++c) row.push_back(sx.vertices(r, c));
          verts.push_back(row);
        }
        s["vertices"].push_back(verts);
      }
      break;
    }
  }
  j["index_set"] = s;
  j["config"] = {{"R", P.R}, {"gstar", P.gstar}, {"tol", pf.tol}};
  return j;
}

inline ProblemFile parse_problem(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw SchemaError("malformed JSON", line, col);
  }
  return problem_from_json(j);
}

inline std::string serialize_problem(const ProblemFile& pf) { return problem_to_json(pf).dump(2) + "\n"; }

inline ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

inline nlohmann::json result_to_json(const ProblemFile& pf, const std::vector<HierarchyResult>& results) {
  using nlohmann::json;
  json recs = json::array();
  std::vector<const HierarchyResult*> sorted;
  for (const auto& r : results) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->k < b->k; });
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  for (const auto* r : sorted) {
    json rec;
    rec["k"] = r->k;
    rec["status"] = to_string(r->status);
    rec["lower_bound"] = num(r->lower_bound);
    json x = json::array();
    for (int i = 0; i < r->minimizer.size(); ++i) x.push_back(num(r->minimizer(i)));
    rec["minimizer"] = x;
    rec["feas_residual"] = num(r->feas_residual);
    if (r->gap) rec["gap_E"] = num(r->gap->E);
    rec["wall_time_s"] = num(r->wall_time_s);
    recs.push_back(rec);
  }
  json out;
  out["results"] = recs;
  out["provenance"] = {{"tool", "fsipp"}, {"version", kToolVersion}, {"config", problem_to_json(pf)["config"]}};
  return out;
}

/// Separable quartic test family on the box: f = sum (x_i - 1)^4, g = sum x_i + 1,
/// phi = -sum x_i, p = sum (1 - (y_i - a_i)^2 / 4) x_i^2 - 1 with a_i uniform on
/// [-1, 1] drawn from mt19937(seed). The optimum is n (n^{-1/2} - 1)^4 / (1 + sqrt n).
inline ProblemFile quartic_example(int n, std::uint32_t seed) {
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  std::mt19937 gen(seed);
  std::vector<double> a(n);
  for (auto& v : a) v = -1.0 + 2.0 * (static_cast<double>(gen()) / 4294967296.0);
  ProblemFile pf;
  FsippProblem& P = pf.problem;
  P.m = n;
  P.n = n;
  P.f = Polynomial(n);
  P.g = Polynomial::constant(n, 1.0);
  Polynomial sum(n);
  for (int i = 0; i < n; ++i) {
    const Polynomial xi = Polynomial::variable(n, i);
    P.f += (xi - Polynomial::constant(n, 1.0)).pow(4);
    sum += xi;
  }
  P.g += sum;
  P.phi.push_back(-sum);
  P.p = BiPolynomial(n, n);
  const Monomial y0 = Monomial::one(n);
  for (int i = 0; i < n; ++i) {
    const Monomial xx = Monomial::unit(n, i) * Monomial::unit(n, i);
    const Monomial yi = Monomial::unit(n, i);
    P.p.add_term(xx, y0, 1.0 - 0.25 * a[i] * a[i]);
    P.p.add_term(xx, yi, 0.5 * a[i]);
    P.p.add_term(xx, yi * yi, -0.25);
  }
  P.p.add_term(Monomial::one(n), y0, -1.0);
  P.Y = IndexSet::box(n);
  P.R = 2.0;
  P.gstar = 0.5;
  return pf;
}

inline double quartic_example_optimum(int n) {
  const double s = std::sqrt(static_cast<double>(n));
  return n * std::pow(1.0 / s - 1.0, 4) / (1.0 + s);
}

}  // namespace fsipp
