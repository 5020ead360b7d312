// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is the number of failed criteria that are not listed as known deviations.

#include "fsipp/fsipp.hpp"

#include <chrono>
#include <cstdarg>
#include <functional>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fsipp;

namespace {

FsippProblem load(const std::string& name) {
  return load_problem(std::string(FSIPP_PROBLEMS_DIR) + "/" + name + ".json").problem;
}

class Report {
 public:
  void detail(const char* fmt, ...) __attribute__((format(printf, 2, 3))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    lines_.push_back(buf);
  }
  void check(bool ok, const char* what) {
    if (!ok) {
      failed_ = true;
      detail("failed: %s", what);
    }
  }
  void known(bool ok, const char* what) {
    if (!ok) {
      known_ = true;
      detail("failed (known deviation): %s", what);
    }
  }
  int finish(int id, const char* name, double seconds) {
    const char* tag = failed_ || known_ ? "FAIL" : "PASS";
    std::printf("%s  %d  %s  [%.1f s]%s\n", tag, id, name, seconds, !failed_ && known_ ? "  (known deviation only)" : "");
    for (const auto& l : lines_) std::printf("        %s\n", l.c_str());
    std::fflush(stdout);
    const int unexpected = failed_ ? 1 : 0;
    lines_.clear();
    failed_ = known_ = false;
    return unexpected;
  }

 private:
  std::vector<std::string> lines_;
  bool failed_ = false;
  bool known_ = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_gap = 0.0;
int optimal_solves = 0;

void record(const HierarchyResult& r) {
  if (r.status != SolveStatus::Optimal) return;
  max_gap = std::max(max_gap, r.solver_gap);
  ++optimal_solves;
}

struct Fixture {
  const char* name;
  double optimum;
};

const Fixture kFixtures[] = {{"box2d", 0.5}, {"ball2d", 0.5}, {"sphere2d", 0.1716}, {"triangle2d", 0.8358}};

std::vector<HierarchyResult> hierarchy_runs[4];

void reference_table_box(Report& rep) {
  const FsippProblem P = load("box2d");
  struct Row {
    int k;
    double bound;
    double x1, x2;
  };
  const Row rows[] = {{1, 0.0077, -0.9180, -0.9180}, {2, 0.1236, -0.7004, -0.8161}, {4, 0.2978, -0.5730, -0.6603},
                      {8, 0.4173, -0.5224, -0.5651}};
  for (const Row& row : rows) {
    const HierarchyResult r = solve_order(P, row.k);
    record(r);
    const double dx = (r.minimizer - Eigen::Vector2d(row.x1, row.x2)).cwiseAbs().maxCoeff();
    rep.detail("k=%d  bound %.6f (ref %.4f)  minimizer (%.4f, %.4f) (ref (%.4f, %.4f), inf-dist %.2e)", row.k,
               r.lower_bound, row.bound, r.minimizer(0), r.minimizer(1), row.x1, row.x2, dx);
    rep.check(r.status == SolveStatus::Optimal, "solver status");
    rep.check(std::abs(r.lower_bound - row.bound) <= 5e-3, "bound within 5e-3");
    if (row.k == 1) {
      rep.known(dx <= 2e-2, "k=1 minimizer: reference second coordinate -0.9180 is inconsistent with its bound");
    } else {
      rep.check(dx <= 2e-2, "minimizer within 2e-2");
    }
  }
}

void reference_table_circle_triangle(Report& rep) {
  struct Row {
    const char* name;
    int k;
    double bound;
  };
  const Row rows[] = {{"sphere2d", 1, 0.0929}, {"sphere2d", 6, 0.1597}, {"triangle2d", 1, 0.6860}, {"triangle2d", 3, 0.7747}};
  for (const Row& row : rows) {
    const HierarchyResult r = solve_order(load(row.name), row.k);
    record(r);
    rep.detail("%s k=%d  bound %.6f (ref %.4f)", row.name, row.k, r.lower_bound, row.bound);
    rep.check(r.status == SolveStatus::Optimal && std::abs(r.lower_bound - row.bound) <= 5e-3, "bound within 5e-3");
  }
}

void validity_and_monotonicity(Report& rep) {
  const double tol = SolverOptions{}.tol;
  HierarchyOptions ho;
  ho.diagnostics = true;
  ho.feasibility = false;
  for (int f = 0; f < 4; ++f) {
    const auto& fx = kFixtures[f];
    hierarchy_runs[f] = solve_hierarchy(load(fx.name), 8, ho);
    std::ostringstream line;
    line.precision(6);
    bool ok = true;
    for (std::size_t i = 0; i < hierarchy_runs[f].size(); ++i) {
      const auto& r = hierarchy_runs[f][i];
      record(r);
      line << " " << r.lower_bound;
      ok = ok && r.status == SolveStatus::Optimal && r.lower_bound <= fx.optimum + 1e-6;
      if (i > 0) ok = ok && hierarchy_runs[f][i - 1].lower_bound <= r.lower_bound + 2 * tol;
    }
    rep.detail("%-10s r* %.4f  k=1..8:%s", fx.name, fx.optimum, line.str().c_str());
    rep.check(ok, fx.name);
  }
}

void separable_quartic(Report& rep) {
  const ProblemFile pf = quartic_example(6, 20240601u);
  const double rstar = quartic_example_optimum(6);
  const auto rs = solve_hierarchy(pf.problem, 2);
  for (const auto& r : rs) record(r);
  const DiscretizeResult d = discretize_baseline(pf.problem, 1);
  rep.detail("r* %.6f  r1 %.6f  r2 %.6f  grid N=1 (%d points) %.6f", rstar, rs[0].lower_bound, rs[1].lower_bound,
             d.grid_size, d.lower_bound);
  rep.check(std::abs(rstar - 0.2133) <= 5e-5, "closed-form optimum");
  rep.check(rs[0].status == SolveStatus::Optimal && rs[1].status == SolveStatus::Optimal, "solver status");
  rep.check(rs[0].lower_bound <= rs[1].lower_bound && rs[1].lower_bound <= rstar, "r1 <= r2 <= r*");
  rep.check(rs[1].lower_bound >= 0.15, "r2 >= 0.15");
  rep.check(d.status == SolveStatus::Optimal && d.lower_bound <= rstar, "grid bound <= r*");
}

// Uniform samples with the set's total measure.
struct Sampler {
  const char* name;
  IndexSet set;
  std::function<Eigen::VectorXd(std::mt19937_64&)> draw;
};

Eigen::VectorXd gaussian(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = g(gen);
  return v;
}

Eigen::VectorXd in_simplex(const Simplex& s, std::mt19937_64& gen) {
  std::exponential_distribution<double> e;
  const int n = s.dim();
  Eigen::VectorXd w(n + 1);
  for (int i = 0; i <= n; ++i) w(i) = e(gen);
  w /= w.sum();
  return s.vertices.transpose() * w;
}

std::vector<Sampler> samplers() {
  std::vector<Sampler> out;
  for (int n : {2, 3}) {
    out.push_back({"box", IndexSet::box(n), [n](std::mt19937_64& gen) {
                     std::uniform_real_distribution<double> u(-1.0, 1.0);
                     Eigen::VectorXd v(n);
                     for (int i = 0; i < n; ++i) v(i) = u(gen);
                     return v;
                   }});
    out.push_back({"ball", IndexSet::ball(n), [n](std::mt19937_64& gen) {
                     std::uniform_real_distribution<double> u(0.0, 1.0);
                     const Eigen::VectorXd g = gaussian(n, gen);
                     return Eigen::VectorXd(g.normalized() * std::pow(u(gen), 1.0 / n));
                   }});
    out.push_back({"sphere", IndexSet::sphere(n), [n](std::mt19937_64& gen) {
                     return Eigen::VectorXd(gaussian(n, gen).normalized());
                   }});
  }
  const IndexSet tri = load("triangle2d").Y;
  out.push_back({"simplices", tri, [tri](std::mt19937_64& gen) { return in_simplex(tri.simplex_list()[0], gen); }});
  Simplex s3;
  s3.vertices.resize(4, 3);
  s3.vertices << -1, -1, -1, 1, -1, -0.5, 0, 1, 0, 0.2, 0.1, 1;
  const IndexSet tet = IndexSet::simplices({s3});
  out.push_back({"simplices", tet, [tet](std::mt19937_64& gen) { return in_simplex(tet.simplex_list()[0], gen); }});
  return out;
}

// Monte Carlo z-scores |mu * mean - exact| / sigma of every |beta| <= 6 moment from one sample stream.
std::vector<double> monte_carlo_z(Sampler& s, const MonomialBasis& basis, std::uint64_t seed) {
  constexpr int kSamples = 1000000;
  const int n = s.set.dim();
  const std::size_t B = basis.size();
  std::vector<double> sum(B, 0.0);
  std::vector<double> sum2(B, 0.0);
  std::mt19937_64 gen(seed);
  Eigen::MatrixXd pw(n, 7);
  for (int t = 0; t < kSamples; ++t) {
    const Eigen::VectorXd y = s.draw(gen);
    for (int i = 0; i < n; ++i) {
      pw(i, 0) = 1.0;
      for (int e = 1; e <= 6; ++e) pw(i, e) = pw(i, e - 1) * y(i);
    }
    for (std::size_t b = 0; b < B; ++b) {
      double v = 1.0;
      for (int i = 0; i < n; ++i) v *= pw(i, basis[b].exps[i]);
      sum[b] += v;
      sum2[b] += v * v;
    }
  }
  const double mu = s.set.measure();
  std::vector<double> z(B);
  for (std::size_t b = 0; b < B; ++b) {
    const double mean = sum[b] / kSamples;
    const double var = std::max(0.0, sum2[b] / kSamples - mean * mean);
    const double sigma = mu * std::sqrt(var / kSamples);
    const double err = std::abs(mu * mean - s.set.moment(basis[b]));
    z[b] = sigma > 0.0 ? err / sigma : (err > 1e-12 ? 1e9 : 0.0);
  }
  return z;
}

// A moment beyond 3 sigma is re-tested on an independent stream; only a repeated excursion counts.
void moment_oracle(Report& rep) {
  int total = 0;
  int flagged = 0;
  int confirmed = 0;
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (auto& s : samplers()) {
    const MonomialBasis basis(s.set.dim(), 6);
    const auto z = monte_carlo_z(s, basis, 1234567u + stream++);
    int bad = 0;
    for (double v : z) {
      worst = std::max(worst, v);
      bad += v > 3.0;
    }
    int again = 0;
    if (bad > 0) {
      const auto z2 = monte_carlo_z(s, basis, 7654321u + stream++);
      for (std::size_t b = 0; b < z.size(); ++b) again += z[b] > 3.0 && z2[b] > 3.0;
    }
    rep.detail("%-9s n=%d  %d moments, %d beyond 3 sigma, %d still beyond on a fresh stream", s.name, s.set.dim(),
               static_cast<int>(basis.size()), bad, again);
    total += static_cast<int>(basis.size());
    flagged += bad;
    confirmed += again;
  }
  rep.detail("%d moments checked, %d single excursions (largest %.2f sigma), %d confirmed", total, flagged, worst,
             confirmed);
  rep.check(confirmed == 0, "all moments within 3 sigma");

  double rel = 0.0;
  for (int n : {2, 3}) {
    std::vector<Eigen::VectorXd> corners;
    for (int c = 0; c < (1 << n); ++c) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v(i) = (c >> i) & 1 ? 1.0 : -1.0;
      corners.push_back(v);
    }
    const IndexSet tri = IndexSet::convex_polytope(corners);
    const IndexSet box = IndexSet::box(n);
    for (const auto& b : MonomialBasis(n, 6)) {
      const double exact = box.moment(b);
      rel = std::max(rel, std::abs(tri.moment(b) - exact) / std::max(1.0, std::abs(exact)));
    }
  }
  rep.detail("triangulated square and cube against box formula: max relative difference %.2e", rel);
  rep.check(rel <= 1e-12, "triangulated box within 1e-12");
}

// The box fixture's K: s = x1 + x2 in [-1, 0] and (x1 - x2)^2 <= -s.
std::vector<Eigen::VectorXd> box_feasible_points(int count) {
  std::mt19937 gen(777u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    const double s = -u(gen);
    const double d = (2.0 * u(gen) - 1.0) * std::sqrt(-s);
    out.push_back(Eigen::Vector2d(0.5 * (s + d), 0.5 * (s - d)));
  }
  return out;
}

void outer_approximation(Report& rep) {
  const FsippProblem P = load("box2d");
  int rejected = 0;
  for (const auto& u : box_feasible_points(200)) {
    for (int k = 1; k <= 6; ++k) {
      if (membership(P, u, k) != MemberStatus::Member) ++rejected;
    }
  }
  rep.detail("200 feasible points x k=1..6: %d membership rejections", rejected);
  rep.check(rejected == 0, "feasible points are members");

  int violations = 0;
  int inconclusive = 0;
  int members[7] = {0};
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const Eigen::Vector2d u(-1.5 + 0.1 * i, -1.5 + 0.1 * j);
      bool prev = true;
      for (int k = 1; k <= 6; ++k) {
        const MemberStatus s = membership(P, u, k);
        if (s == MemberStatus::Inconclusive) ++inconclusive;
        const bool now = s == MemberStatus::Member;
        if (now) ++members[k];
        if (now && !prev) ++violations;
        prev = now;
      }
    }
  }
  rep.detail("21x21 grid on [-1.5, 0.5]^2: members per k = %d %d %d %d %d %d, %d order reversals, %d inconclusive",
             members[1], members[2], members[3], members[4], members[5], members[6], violations, inconclusive);
  rep.check(violations == 0, "membership anti-monotone in k");

  double worst = 0.0;
  int nonoptimal = 0;
  for (const auto& fx : kFixtures) {
    const FsippProblem Q = load(fx.name);
    for (int k = 1; k <= 6; ++k) {
      for (const auto& sp : boundary_trace(Q, k, circle_directions(16))) {
        if (sp.status != SolveStatus::Optimal) ++nonoptimal;
        worst = std::max(worst, sp.point.norm());
      }
    }
  }
  rep.detail("support points (4 fixtures, k=1..6, 16 directions): max norm %.6f, R = 2, %d non-optimal", worst,
             nonoptimal);
  rep.check(nonoptimal == 0 && worst <= 2.0 + 1e-6, "support points within R");
}

void diagnostics(Report& rep) {
  const Polynomial t2 = Polynomial::variable(1, 0).pow(2);
  const double ub = lasserre_upper(IndexSet::box(1), t2, 1);
  rep.detail("lasserre_upper(box n=1, t^2, k=1) = %.15f", ub);
  rep.check(std::abs(ub - 1.0 / 3.0) <= 1e-9, "pencil value 1/3");

  double minE = std::numeric_limits<double>::infinity();
  int runs = 0;
  for (const auto& rs : hierarchy_runs) {
    for (const auto& r : rs) {
      if (!r.gap) continue;
      minE = std::min(minE, r.gap->E);
      ++runs;
    }
  }
  rep.detail("E(L_k) over %d hierarchy runs: min %.3e", runs, minE);
  rep.check(runs == 32 && minE >= -1e-6, "E nonnegative");

  int needle_bad = 0;
  for (int k = 1; k <= 20; ++k) {
    for (double h : {0.1, 0.3, 0.5}) {
      for (int i = 0; i < 1000; ++i) {
        const double t = -1.0 + 2.0 * i / 999.0;
        const double v = needle(k, h, t);
        if (v < 0.0 || v > 1.0 + 1e-12) ++needle_bad;
        if (std::abs(t) >= h && v > 4.0 * std::exp(-0.5 * k * h) + 1e-12) ++needle_bad;
      }
    }
    for (double h : {0.1, 0.3, 0.5}) {
      if (std::abs(needle(k, h, 0.0) - 1.0) > 1e-14) ++needle_bad;
    }
  }
  rep.detail("needle bounds on 1000-point grid, k<=20, h in {0.1,0.3,0.5}: %d violations", needle_bad);
  rep.check(needle_bad == 0, "needle bounds");

  const double C = rate_constant_C(1, 1.0);
  RateConstants rc;
  rc.B1 = 1.0;
  const double expect = 2.0 * (6.0 * std::log(2.0) / 1.0 + 64.0 / 2.0);
  rep.detail("C(n=1, eta=1) = %.12g; rate_bound(k=2) = %.12g (hand value %.12g)", C, rate_bound(rc, 2), expect);
  rep.check(std::abs(C - 64.0) <= 1e-12 && std::abs(rate_bound(rc, 2) - expect) <= 1e-12, "rate constant");
}

void certification(Report& rep) {
  double worst = 0.0;
  for (const auto& fx : kFixtures) {
    const ValidationReport v = validate_problem(load(fx.name));
    std::string items;
    for (const auto& it : v.items) {
      items += " " + it.name + "=" + to_string(it.status);
      worst = std::max(worst, it.residual);
    }
    rep.detail("%-10s%s", fx.name, items.c_str());
    rep.check(v.passed(), fx.name);
  }
  FsippProblem bad = load("box2d");
  bad.f = -1.0 * Polynomial::variable(2, 0).pow(4);
  const ValidationReport vb = validate_problem(bad);
  rep.detail("f = -x1^4: f=%s", to_string(vb.items.at(0).status));
  rep.check(vb.items.at(0).status == CertStatus::Fail && !vb.passed(), "rejects -x1^4");

  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Polynomial h(3);
    for (int s = 0; s < 3; ++s) {
      Polynomial q(3);
      for (const auto& a : MonomialBasis(3, 2)) q.add_term(a, u(gen));
      h += q * q;
    }
    const SosResult r = certify_sos(h);
    if (r.accepted() && r.certificate) {
      worst = std::max(worst, (h - r.certificate->reconstruct(3)).max_abs_coeff());
    } else {
      rep.check(false, "random sum of squares accepted");
    }
  }
  rep.detail("largest coefficient residual over accepted certificates: %.2e", worst);
  rep.check(worst <= 1e-7, "reconstruction within 1e-7");
}

void export_and_duality(Report& rep) {
  int programs = 0;
  bool exact = true;
  for (const auto& fx : kFixtures) {
    for (int k = 1; k <= 3; ++k) {
      const ConicProgram p = build_dual(load(fx.name), k).program;
      std::stringstream ss;
      write_sdpa(p, ss);
      exact = exact && read_sdpa(ss) == p;
      ++programs;
    }
  }
  rep.detail("%d relaxations written and read back", programs);
  rep.check(exact, "SDPA round trip exact");
  rep.detail("%d optimal solves in this run, largest relative duality gap %.2e", optimal_solves, max_gap);
  rep.check(max_gap <= 1e-8, "duality gap within 1e-8");
}

}  // namespace

int main() {
  Report rep;
  int unexpected = 0;
  auto run = [&](int id, const char* name, auto&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(rep);
    } catch (const std::exception& e) {
      rep.check(false, e.what());
    }
    unexpected += rep.finish(id, name, seconds_since(t0));
  };
  run(1, "box-indexed problem: reference bounds and minimizers at k = 1, 2, 4, 8", reference_table_box);
  run(2, "circle and triangle problems: reference bounds", reference_table_circle_triangle);
  run(3, "hierarchy bounds valid and non-decreasing on four fixtures, k = 1..8", validity_and_monotonicity);
  run(4, "seeded separable quartic, n = 6: bound ordering and grid baseline", separable_quartic);
  run(5, "moment oracle against Monte Carlo and triangulated boxes", moment_oracle);
  run(6, "outer approximation: feasible points, anti-monotonicity, support radius", outer_approximation);
  run(7, "diagnostics: pencil value, gap E, needle bounds, rate constant", diagnostics);
  run(8, "s.o.s-convexity validation and certificate reconstruction", certification);
  run(9, "SDPA round trip and primal-dual agreement", export_and_duality);
  std::printf("%d unexpected failure(s)\n", unexpected);
  return unexpected;
}
