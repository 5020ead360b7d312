// Command-line front end. Exit codes: 0 ok, 1 input/usage/IO error, 2 numerical
// trouble, 3 validation failure, 4 non-member, 5 inconclusive membership.

#include "fsipp/fsipp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace fsipp;

enum Exit { kOk = 0, kInput = 1, kNumerical = 2, kValidation = 3, kNonMember = 4, kInconclusive = 5 };

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw std::invalid_argument("not a number: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

// "1..8" or "1,2,4,8"
std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo < 1 || hi < lo) throw std::invalid_argument("bad order range " + text);
    for (int k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  for (double v : parse_list(text)) {
    if (v < 1 || v != std::floor(v)) throw std::invalid_argument("orders must be positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::ios_base::failure("cannot open " + path + " for writing");
  os << body;
  if (!os) throw std::ios_base::failure("write to " + path + " failed");
}

SolverOptions solver_options(const ProblemFile& pf, double tol_override) {
  SolverOptions o;
  o.tol = tol_override > 0.0 ? tol_override : pf.tol;
  return o;
}

void print_validation(const ValidationReport& rep) {
  for (const auto& it : rep.items) {
    std::cerr << "  " << it.name << ": " << to_string(it.status);
    if (!it.note.empty()) std::cerr << " (" << it.note << ")";
    std::cerr << "\n";
  }
}

int cmd_solve(const std::string& file, int order, const std::string& orders, double tol, bool diagnostics, bool force,
              const std::string& out) {
  const ProblemFile pf = load_problem(file);
  if (!force) {
    const ValidationReport rep = validate_problem(pf.problem);
    if (!rep.passed()) {
      std::cerr << "problem failed s.o.s-convexity validation (use --force to skip):\n";
      print_validation(rep);
      return kValidation;
    }
  }
  std::vector<int> ks = orders.empty() ? std::vector<int>{order} : parse_orders(orders);
  HierarchyOptions ho;
  ho.solver = solver_options(pf, tol);
  ho.diagnostics = diagnostics;
  const auto results = solve_hierarchy(pf.problem, ks, ho);
  bool trouble = false;
  std::fprintf(stderr, "%4s  %-18s  %14s  %10s  %s\n", "k", "status", "lower bound", "time [s]", "minimizer");
  for (const auto& r : results) {
    std::ostringstream x;
    for (int i = 0; i < r.minimizer.size(); ++i) x << (i ? " " : "") << r.minimizer(i);
    std::fprintf(stderr, "%4d  %-18s  %14.6f  %10.3f  %s\n", r.k, to_string(r.status), r.lower_bound, r.wall_time_s,
                 x.str().c_str());
    trouble = trouble || r.status != SolveStatus::Optimal;
  }
  write_text(out, result_to_json(pf, results).dump(2) + "\n");
  return trouble ? kNumerical : kOk;
}

int cmd_member(const std::string& file, const std::string& point, int order, double tol) {
  const ProblemFile pf = load_problem(file);
  const auto u = parse_list(point);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
  const MemberStatus s = membership(pf.problem, x, order, solver_options(pf, tol));
  std::cout << to_string(s) << "\n";
  switch (s) {
    case MemberStatus::Member: return kOk;
    case MemberStatus::NonMember: return kNonMember;
    case MemberStatus::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

int cmd_boundary(const std::string& file, int order, int count, const std::string& out, double tol) {
  const ProblemFile pf = load_problem(file);
  const int m = pf.problem.m;
  if (m != 2 && m != 3) throw std::invalid_argument("boundary tracing needs m = 2 or 3");
  if (count < 1) throw std::invalid_argument("need at least one direction");
  const auto dirs = m == 2 ? circle_directions(count) : sphere_directions(count);
  const auto pts = boundary_trace(pf.problem, order, dirs, solver_options(pf, tol));
  std::ostringstream csv;
  csv.precision(10);
  csv << "dir_index,angle,x1,x2" << (m == 3 ? ",x3" : "") << ",status\n";
  bool trouble = false;
  for (const auto& p : pts) {
    csv << p.index << "," << p.angle;
    for (int i = 0; i < m; ++i) csv << "," << p.point(i);
    csv << "," << to_string(p.status) << "\n";
    trouble = trouble || p.status != SolveStatus::Optimal;
  }
  write_text(out, csv.str());
  return trouble ? kNumerical : kOk;
}

int cmd_certify(const std::string& file) {
  const ProblemFile pf = load_problem(file);
  const ValidationReport rep = validate_problem(pf.problem);
  nlohmann::json j = nlohmann::json::array();
  for (const auto& it : rep.items) {
    j.push_back({{"name", it.name}, {"status", to_string(it.status)}, {"note", it.note}, {"residual", it.residual}});
  }
  std::cout << j.dump(2) << "\n";
  if (rep.passed()) return kOk;
  return rep.failed() ? kValidation : kNumerical;
}

int cmd_moments(const std::string& set, int dim, const std::string& beta, const std::string& vertices) {
  const auto b = parse_list(beta);
  const int n = dim > 0 ? dim : static_cast<int>(b.size());
  if (static_cast<int>(b.size()) != n) throw DimensionError("beta length differs from the set dimension");
  std::vector<int> e;
  for (double v : b) {
    if (v < 0 || v != std::floor(v)) throw std::invalid_argument("beta entries must be nonnegative integers");
    e.push_back(static_cast<int>(v));
  }
  IndexSet Y = IndexSet::box(n);
  if (set == "ball") {
    Y = IndexSet::ball(n);
  } else if (set == "sphere") {
    Y = IndexSet::sphere(n);
  } else if (set == "simplices") {
    nlohmann::json jv;
    try {
      jv = nlohmann::json::parse(vertices);
    } catch (const nlohmann::json::parse_error&) {
      throw SchemaError("--vertices must be a JSON array of simplices");
    }
    nlohmann::json doc = {{"m", 1}, {"n", n}, {"f", nlohmann::json::array()}, {"p", nlohmann::json::array()},
                          {"index_set", {{"kind", "simplices"}, {"vertices", jv}}}};
    Y = problem_from_json(doc).problem.Y;
  } else if (set != "box") {
    throw std::invalid_argument("unknown set " + set);
  }
  std::printf("%.17g\n", Y.moment(Monomial(e)));
  return kOk;
}

int cmd_discretize(const std::string& file, int grid, double tol) {
  const ProblemFile pf = load_problem(file);
  const DiscretizeResult r = discretize_baseline(pf.problem, grid, solver_options(pf, tol));
  nlohmann::json j = {{"grid", grid}, {"grid_points", r.grid_size}, {"status", to_string(r.status)}};
  if (r.status == SolveStatus::Optimal) {
    j["lower_bound"] = r.lower_bound;
    j["point"] = std::vector<double>(r.point.data(), r.point.data() + r.point.size());
  }
  std::cout << j.dump(2) << "\n";
  return r.status == SolveStatus::Optimal ? kOk : kNumerical;
}

int cmd_export(const std::string& file, int order, const std::string& out) {
  const ProblemFile pf = load_problem(file);
  const MomentProgram mp = build_dual(pf.problem, order);
  if (out.empty() || out == "-") {
    write_sdpa(mp.program, std::cout);
  } else {
    export_sdpa(mp.program, out);
  }
  return kOk;
}

int cmd_generate(int dim, unsigned seed, const std::string& out) {
  const ProblemFile pf = quartic_example(dim, seed);
  write_text(out, serialize_problem(pf));
  std::cerr << "optimal value " << quartic_example_optimum(dim) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lower bounds for fractional semi-infinite polynomial programs"};
  app.require_subcommand(1);

  std::string file;
  std::string out;
  std::string orders;
  std::string point;
  int order = 1;
  double tol = 0.0;
  bool diagnostics = false;
  bool force = false;

  auto* solve = app.add_subcommand("solve", "run the dual hierarchy and write a result file");
  solve->add_option("file", file, "problem file")->required();
  auto* ord = solve->add_option("--order", order, "single relaxation order");
  solve->add_option("--orders", orders, "orders as 1..K or a comma list")->excludes(ord);
  solve->add_option("--tol", tol, "solver tolerance");
  solve->add_flag("--diagnostics", diagnostics, "report the gap E(L) per order");
  solve->add_flag("--force", force, "skip the s.o.s-convexity validation");
  solve->add_option("--out", out, "result file (default stdout)");

  auto* member = app.add_subcommand("member", "test a point against the outer approximation");
  member->add_option("file", file)->required();
  member->add_option("--point", point, "comma-separated coordinates")->required();
  member->add_option("--order", order);
  member->add_option("--tol", tol);

  int directions = 64;
  auto* boundary = app.add_subcommand("boundary", "support points of the outer approximation as CSV");
  boundary->add_option("file", file)->required();
  boundary->add_option("--order", order);
  boundary->add_option("--directions", directions);
  boundary->add_option("--out", out);
  boundary->add_option("--tol", tol);

  auto* certify = app.add_subcommand("certify", "s.o.s-convexity validation report");
  certify->add_option("file", file)->required();

  std::string set = "box";
  std::string beta;
  std::string vertices;
  int dim = 0;
  auto* moments = app.add_subcommand("moments", "Lebesgue moment of a supported set");
  moments->add_option("--set", set)->check(CLI::IsMember({"box", "ball", "sphere", "simplices"}));
  moments->add_option("--beta", beta, "comma-separated exponents")->required();
  moments->add_option("--dim", dim);
  moments->add_option("--vertices", vertices, "JSON list of simplices");

  int grid = 2;
  auto* discretize = app.add_subcommand("discretize", "baseline bound with Y replaced by a grid");
  discretize->add_option("file", file)->required();
  discretize->add_option("--grid", grid);
  discretize->add_option("--tol", tol);

  auto* exporter = app.add_subcommand("export-sdpa", "write the order-k relaxation in SDPA sparse format");
  exporter->add_option("file", file)->required();
  exporter->add_option("--order", order);
  exporter->add_option("--out", out);

  unsigned seed = 20240601u;
  int gdim = 6;
  auto* generate = app.add_subcommand("generate-quartic", "write the seeded separable quartic problem");
  generate->add_option("--dim", gdim);
  generate->add_option("--seed", seed);
  generate->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInput;
  }

  try {
    if (*solve) return cmd_solve(file, order, orders, tol, diagnostics, force, out);
    if (*member) return cmd_member(file, point, order, tol);
    if (*boundary) return cmd_boundary(file, order, directions, out, tol);
    if (*certify) return cmd_certify(file);
    if (*moments) return cmd_moments(set, dim, beta, vertices);
    if (*discretize) return cmd_discretize(file, grid, tol);
    if (*exporter) return cmd_export(file, order, out);
    if (*generate) return cmd_generate(gdim, seed, out);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const NumericalTrouble& e) {
    std::cerr << "numerical trouble: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
