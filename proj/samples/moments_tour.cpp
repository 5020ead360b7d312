// Moments of the supported index sets and the measure-based upper bound they feed.

#include "fsipp/fsipp.hpp"

#include <cstdio>

using namespace fsipp;

int main() {
  const Monomial b22({2, 2});
  std::printf("int y1^2 y2^2 over the square   %.10f\n", IndexSet::box(2).moment(b22));
  std::printf("                 over the disk     %.10f\n", IndexSet::ball(2).moment(b22));
  std::printf("                 over the circle   %.10f\n", IndexSet::sphere(2).moment(b22));

  Simplex s;
  s.vertices.resize(3, 2);
  s.vertices << 0, 0, 1, 0, 0, 1;
  std::printf("int y1 y2 over the unit triangle %.10f (1/24)\n", IndexSet::simplices({s}).moment(Monomial({1, 1})));

  std::vector<Eigen::VectorXd> corners;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) corners.push_back(Eigen::Vector2d(a, b));
  }
  const IndexSet square = IndexSet::convex_polytope(corners);
  std::printf("triangulated square, same moment  %.10f\n", square.moment(b22));

  const IndexSet disk = IndexSet::ball(2);
  std::printf("\nmoment matrix of the disk, k = 1:\n");
  const Eigen::MatrixXd B = moment_matrix(disk, 1);
  for (int i = 0; i < B.rows(); ++i) {
    for (int j = 0; j < B.cols(); ++j) std::printf(" %9.5f", B(i, j));
    std::printf("\n");
  }

  // psi = y1 + y2 has minimum -sqrt(2) on the disk; the upper bounds close in slowly
  const Polynomial psi = Polynomial::variable(2, 0) + Polynomial::variable(2, 1);
  std::printf("\nmin of y1 + y2 on the disk: %.6f\n", inner_min(disk, psi));
  for (int k = 0; k <= 8; k += 2) std::printf("  upper bound k = %d: %.6f\n", k, lasserre_upper(disk, psi, k));
}
