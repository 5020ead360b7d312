#include "fsipp/io.hpp"

#include <gtest/gtest.h>

using namespace fsipp;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(FSIPP_PROBLEMS_DIR) + "/" + name + ".json"; }

const char* kMinimal = R"({
  "m": 1, "n": 1,
  "f": [{"exp": [2], "coef": 1}],
  "p": [{"xexp": [1], "yexp": [1], "coef": 1}, {"xexp": [0], "yexp": [0], "coef": -1}],
  "index_set": {"kind": "box"}
})";

json minimal() { return json::parse(kMinimal); }

void expect_schema_error(const json& j, const std::string& fragment) {
  try {
    problem_from_json(j);
    FAIL() << "accepted: " << j.dump();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(ProblemFileRoundTrip, FixturesSurviveParseSerializeParse) {
  for (const char* name : {"box2d", "ball2d", "sphere2d", "triangle2d", "quartic6"}) {
    const ProblemFile a = load_problem(fixture(name));
    const std::string text = serialize_problem(a);
    const ProblemFile b = parse_problem(text);
    EXPECT_EQ(serialize_problem(b), text) << name;
    EXPECT_TRUE(a.problem.f == b.problem.f) << name;
    EXPECT_TRUE(a.problem.p == b.problem.p) << name;
    EXPECT_EQ(a.problem.Y.kind(), b.problem.Y.kind()) << name;
    EXPECT_EQ(a.tol, b.tol);
  }
}

TEST(ProblemFileRoundTrip, GeneratedQuarticMatchesFixture) {
  const ProblemFile gen = quartic_example(6, 20240601u);
  EXPECT_EQ(serialize_problem(gen), serialize_problem(load_problem(fixture("quartic6"))));
}

TEST(ProblemFile, DefaultsForMissingKeys) {
  const ProblemFile pf = problem_from_json(minimal());
  EXPECT_TRUE(pf.problem.g == Polynomial::constant(1, 1.0));
  EXPECT_TRUE(pf.problem.phi.empty());
  EXPECT_DOUBLE_EQ(pf.problem.gstar, default_gstar(pf.problem.g));
  EXPECT_DOUBLE_EQ(pf.tol, 1e-8);
  json j = minimal();
  j["g"] = json::parse(R"([{"exp": [1], "coef": 1}, {"exp": [0], "coef": 2}])");
  EXPECT_DOUBLE_EQ(problem_from_json(j).problem.gstar, 1e-3);
}

TEST(ProblemFile, TriangleVerticesAreSimplexList) {
  const ProblemFile pf = load_problem(fixture("triangle2d"));
  ASSERT_EQ(pf.problem.Y.kind(), SetKind::SimplexUnion);
  ASSERT_EQ(pf.problem.Y.simplex_list().size(), 1u);
  EXPECT_NEAR(pf.problem.Y.simplex_list()[0].volume(), 2.0, 1e-14);
}

TEST(ProblemFileErrors, SchemaViolations) {
  json j = minimal();
  j.erase("f");
  expect_schema_error(j, "missing key \"f\"");

  j = minimal();
  j["m"] = 0;
  expect_schema_error(j, "positive");

  j = minimal();
  j["f"][0]["exp"] = {1, 1};
  expect_schema_error(j, "length 1");

  j = minimal();
  j["f"][0]["exp"] = {-2};
  expect_schema_error(j, "nonnegative");

  j = minimal();
  j["f"][0]["coef"] = "one";
  expect_schema_error(j, "expected a number");

  j = minimal();
  j["index_set"]["kind"] = "torus";
  expect_schema_error(j, "one of");

  j = minimal();
  j["index_set"] = {{"kind", "simplices"}, {"vertices", {{{0.0}}}}};
  expect_schema_error(j, "n+1 vertices");

  j = minimal();
  j["config"] = {{"tol", -1.0}};
  expect_schema_error(j, "tol");

  j = minimal();
  j["config"] = {{"R", -2.0}};
  expect_schema_error(j, "positive");

  expect_schema_error(json::array(), "JSON object");
}

TEST(ProblemFileErrors, MalformedJsonReportsPosition) {
  const std::string text = "{\n  \"m\": 1,\n  \"n\": ,\n}";
  try {
    parse_problem(text);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.column(), 8);
    EXPECT_NE(std::string(e.what()).find("line 3, column 8"), std::string::npos);
  }
}

TEST(ProblemFileErrors, MissingFile) {
  EXPECT_THROW(load_problem("/nonexistent/problem.json"), std::ios_base::failure);
}

TEST(ResultJson, SortedFiniteAndWithProvenance) {
  const ProblemFile pf = load_problem(fixture("box2d"));
  auto rs = solve_hierarchy(pf.problem, std::vector<int>{3, 1, 2});
  HierarchyResult bad;
  bad.k = 0;
  bad.status = SolveStatus::Infeasible;
  bad.minimizer = Eigen::Vector2d(std::nan(""), 1.0);
  rs.push_back(bad);
  const json out = result_to_json(pf, rs);
  ASSERT_EQ(out["results"].size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out["results"][i]["k"].get<int>(), static_cast<int>(i));
  EXPECT_TRUE(out["results"][0]["lower_bound"].is_null());
  EXPECT_TRUE(out["results"][0]["minimizer"][0].is_null());
  EXPECT_EQ(out["results"][0]["status"], "infeasible");
  for (std::size_t i = 1; i < 4; ++i) {
    const auto& r = out["results"][i];
    EXPECT_EQ(r["status"], "optimal");
    EXPECT_TRUE(r["lower_bound"].is_number());
    EXPECT_FALSE(r.contains("gap_E"));
  }
  EXPECT_EQ(out["provenance"]["version"], kToolVersion);
  EXPECT_EQ(out["provenance"]["config"]["tol"].get<double>(), 1e-8);
  // the dump is valid JSON without NaN tokens
  EXPECT_NO_THROW(json::parse(out.dump()));
}

TEST(ResultJson, RerunIsDeterministic) {
  const ProblemFile pf = load_problem(fixture("triangle2d"));
  const auto a = solve_hierarchy(pf.problem, 3);
  const auto b = solve_hierarchy(pf.problem, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].lower_bound, b[i].lower_bound, 1e-9);
    EXPECT_LE((a[i].minimizer - b[i].minimizer).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(QuarticExample, OptimumFormulaAndDeterminism) {
  EXPECT_NEAR(quartic_example_optimum(1), 0.0, 1e-15);
  EXPECT_NEAR(quartic_example_optimum(4), 4.0 * std::pow(0.5, 4) / 3.0, 1e-15);
  EXPECT_EQ(serialize_problem(quartic_example(5, 7u)), serialize_problem(quartic_example(5, 7u)));
  EXPECT_NE(serialize_problem(quartic_example(5, 7u)), serialize_problem(quartic_example(5, 8u)));
  EXPECT_THROW(quartic_example(0, 1u), std::invalid_argument);
}
