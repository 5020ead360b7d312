// Builds the box-indexed problem in code and runs the first orders of the hierarchy.

#include "fsipp/fsipp.hpp"

#include <cstdio>

using namespace fsipp;

int main() {
  const Polynomial x1 = Polynomial::variable(2, 0);
  const Polynomial x2 = Polynomial::variable(2, 1);
  const Polynomial one = Polynomial::constant(2, 1.0);

  FsippProblem P;
  P.m = 2;
  P.n = 2;
  P.f = (x1 + one).pow(2) + (x2 + one).pow(2);
  P.g = one;
  // p(x, y) = x1^2 + y1^2 x2^2 + 2 y1 y2 x1 x2 + x1 + x2
  P.p = BiPolynomial(2, 2);
  P.p.add_term(Monomial({2, 0}), Monomial({0, 0}), 1.0);
  P.p.add_term(Monomial({0, 2}), Monomial({2, 0}), 1.0);
  P.p.add_term(Monomial({1, 1}), Monomial({1, 1}), 2.0);
  P.p.add_term(Monomial({1, 0}), Monomial({0, 0}), 1.0);
  P.p.add_term(Monomial({0, 1}), Monomial({0, 0}), 1.0);
  P.Y = IndexSet::box(2);
  P.R = 2.0;
  P.gstar = 0.5;
  P.check();

  const ValidationReport v = validate_problem(P);
  std::printf("convexity validation: %s\n", v.passed() ? "passed" : "failed");

  HierarchyOptions opt;
  opt.diagnostics = true;
  std::printf("%3s %12s %22s %12s %10s\n", "k", "bound", "minimizer", "infeas", "E");
  for (const auto& r : solve_hierarchy(P, 6, opt)) {
    std::printf("%3d %12.6f  (%8.4f, %8.4f) %12.2e %10.4f\n", r.k, r.lower_bound, r.minimizer(0), r.minimizer(1),
                r.feas_residual, r.gap ? r.gap->E : 0.0);
  }
  std::printf("optimum 0.5 at (-0.5, -0.5)\n");
}
