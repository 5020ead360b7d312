// Validates a fixture, probes a few points against the outer approximations and prints a boundary polyline.
// Usage: sample_certify_and_trace [problem.json] [order]

#include "fsipp/fsipp.hpp"

#include <cstdio>
#include <string>

using namespace fsipp;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : std::string(FSIPP_PROBLEMS_DIR) + "/triangle2d.json";
  const int k = argc > 2 ? std::stoi(argv[2]) : 4;
  const FsippProblem P = load_problem(path).problem;

  for (const auto& item : validate_problem(P).items) {
    std::printf("%-8s %-14s %s\n", item.name.c_str(), to_string(item.status), item.note.c_str());
  }
  if (P.m != 2) return 0;

  std::printf("\nmembership at k = 1..%d\n", k);
  for (const Eigen::Vector2d u : {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(-0.35, 0.35), Eigen::Vector2d(0.6, 0.6)}) {
    std::printf("  (%5.2f, %5.2f):", u(0), u(1));
    for (int j = 1; j <= k; ++j) std::printf(" %s", to_string(membership(P, u, j)));
    std::printf("\n");
  }

  std::printf("\nangle,x1,x2\n");
  for (const auto& sp : boundary_trace(P, k, circle_directions(36))) {
    std::printf("%.4f,%.6f,%.6f\n", sp.angle, sp.point(0), sp.point(1));
  }
}
