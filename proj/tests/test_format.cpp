#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pathwig/run.hpp"

using namespace pathwig;

namespace {

const char* kMinimalDoc = R"({
  "schema_version": 1,
  "subsystems": [{"name": "q", "dim": 2}],
  "initial": {"product": {"q": [[1.0, 0.0], [0.0, 0.0]]}},
  "events": [
    {"measure": {"time": 1.0, "observer": "A", "registered": true,
      "observable": {"branches": [
        {"eigenvalue": 1.0, "label": "yes", "basis_states": [[[1.0, 0.0], [0.0, 0.0]]]},
        {"eigenvalue": 0.0, "label": "no", "basis_states": [[[0.0, 0.0], [1.0, 0.0]]]}
      ]}}}
  ]
})";

}  // namespace

TEST_CASE("a minimal one-qubit document parses into a valid protocol") {
  const auto doc = ScenarioDocument::parse(kMinimalDoc);
  CHECK(validate(doc.protocol()).empty());
  const auto dist = full_distribution(doc.protocol());
  REQUIRE(dist.size() == 2);
  CHECK(dist[0].probability == doctest::Approx(1.0));
}

TEST_CASE("broken JSON reports a syntax error with a line number") {
  try {
    ScenarioDocument::parse("{\n  \"schema_version\": 1,\n  oops\n}");
    FAIL("expected a syntax error");
  } catch (const ScenarioError& e) {
    CHECK(e.kind == ScenarioErrorKind::syntax);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("unknown fields are rejected in strict mode, tolerated with lenient") {
  std::string doc = kMinimalDoc;
  doc.insert(doc.rfind('}'), ", \"extra\": 1");
  try {
    ScenarioDocument::parse(doc);
    FAIL("expected a schema error");
  } catch (const ScenarioError& e) {
    CHECK(e.kind == ScenarioErrorKind::schema);
    CHECK(std::string(e.what()).find("extra") != std::string::npos);
  }
  CHECK_NOTHROW(ScenarioDocument::parse(doc, /*lenient=*/true));
}

TEST_CASE("projectors summing to 0.9 I fail as a protocol error naming the observable") {
  const char* doc = R"({
    "schema_version": 1,
    "subsystems": [{"name": "q", "dim": 2}],
    "initial": {"vector": [[1.0, 0.0], [0.0, 0.0]]},
    "events": [
      {"measure": {"time": 1.0, "observer": "A", "registered": true,
        "observable": {"label": "lopsided", "branches": [
          {"eigenvalue": 1.0, "projector": [[[0.9, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]},
          {"eigenvalue": 0.0, "projector": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.9, 0.0]]]}
        ]}}}
    ]
  })";
  try {
    ScenarioDocument::parse(doc);
    FAIL("expected a protocol error");
  } catch (const ScenarioError& e) {
    CHECK(e.kind == ScenarioErrorKind::protocol);
    CHECK(std::string(e.what()).find("lopsided") != std::string::npos);
  }
}

TEST_CASE("presets re-parse to byte-identical canonical text") {
  for (const auto& name : preset_names()) {
    const auto preset = preset_scenario(name);
    const std::string text = preset.canonical_text();
    const auto reparsed = ScenarioDocument::parse(text);
    CHECK(reparsed.canonical_text() == text);
  }
}

TEST_CASE("preset protocols match the builder outputs") {
  const auto doc = preset_scenario("case-f");
  const auto dist = full_distribution(doc.protocol());
  double p_yes = 0.0;
  for (const auto& rec : dist) {
    if (rec.outcome.back().label == "yes") p_yes += rec.probability;
  }
  CHECK(p_yes == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(doc.queries().size() == 2);
}

TEST_CASE("product and vector initial forms agree") {
  const char* vector_doc = R"({
    "schema_version": 1,
    "subsystems": [{"name": "a", "dim": 2}, {"name": "b", "dim": 2}],
    "initial": {"vector": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0], [0.0, 0.0]]},
    "events": [
      {"measure": {"time": 1.0, "observer": "A", "registered": true,
        "observable": {"branches": [
          {"eigenvalue": 1.0, "projector": [
            [[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]]},
          {"eigenvalue": 0.0, "projector": [
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[1.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]]}
        ]}}}
    ]
  })";
  const char* product_doc = R"({
    "schema_version": 1,
    "subsystems": [{"name": "a", "dim": 2}, {"name": "b", "dim": 2}],
    "initial": {"product": {"a": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]],
                            "b": [[1.0, 0.0], [0.0, 0.0]]}},
    "events": [
      {"measure": {"time": 1.0, "observer": "A", "registered": true,
        "observable": {"branches": [
          {"eigenvalue": 1.0, "projector": [
            [[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]]},
          {"eigenvalue": 0.0, "projector": [
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[1.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]]}
        ]}}}
    ]
  })";
  const auto a = full_distribution(ScenarioDocument::parse(vector_doc).protocol());
  const auto b = full_distribution(ScenarioDocument::parse(product_doc).protocol());
  // |a> = x+ on subsystem a, measured along a's z projector: hand value 1/2 each.
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].probability == doctest::Approx(b[i].probability).epsilon(1e-12));
    CHECK(a[i].probability == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("cnot gate form compiles to the controlled-flip matrix") {
  const char* doc = R"({
    "schema_version": 1,
    "subsystems": [{"name": "c", "dim": 2}, {"name": "t", "dim": 2}],
    "initial": {"product": {"c": [[0.0, 0.0], [1.0, 0.0]], "t": [[1.0, 0.0], [0.0, 0.0]]}},
    "events": [
      {"couple": {"time": 1.0, "cnot": {"control": "c", "target": "t"}}},
      {"measure": {"time": 2.0, "observer": "A", "registered": true,
        "observable": {"branches": [
          {"eigenvalue": 1.0, "label": "yes", "basis_states": [
            [[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[0.0,0.0],[1.0,0.0]]]},
          {"eigenvalue": 0.0, "label": "no", "basis_states": [
            [[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]],
            [[0.0,0.0],[0.0,0.0],[1.0,0.0],[0.0,0.0]]]}
        ]}}}
    ]
  })";
  // |c t> = |1 0> -> CNOT -> |1 1>: measuring t's excited projector gives yes.
  const auto parsed = ScenarioDocument::parse(doc);
  const auto dist = full_distribution(parsed.protocol());
  double p_yes = 0.0;
  for (const auto& rec : dist) {
    if (rec.outcome[0].label == "yes") p_yes += rec.probability;
  }
  CHECK(p_yes == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("queries parse and drive the run module") {
  std::string doc = kMinimalDoc;
  doc.insert(doc.rfind('}'),
             R"(, "queries": [{"distribution": {}}, {"compare_oracle": {"tolerance": 1e-9}},
                 {"interference": {"final": "yes^A"}}])");
  const auto parsed = ScenarioDocument::parse(doc);
  REQUIRE(parsed.queries().size() == 3);
  const auto report = run_queries(parsed.protocol(), parsed.queries());
  CHECK(!report.oracle_mismatch);
  const auto& queries = report.json["queries"];
  REQUIRE(queries.size() == 3);
  CHECK(queries[0]["distribution"]["total"].get<double>() == doctest::Approx(1.0));
  CHECK(queries[1]["compare_oracle"]["ok"].get<bool>());
  CHECK(queries[2]["interference"]["interference_term"].get<double>() ==
        doctest::Approx(0.0));
}

TEST_CASE("final labels resolve by name or eigenvalue and reject unknowns") {
  const auto doc = ScenarioDocument::parse(kMinimalDoc);
  const auto a = resolve_final_label(doc.protocol(), "yes^A");
  CHECK(a.eigenvalue == 1.0);
  const auto b = resolve_final_label(doc.protocol(), "0^A");
  CHECK(b.label == "no");
  const auto c = resolve_final_label(doc.protocol(), "yes");
  CHECK(c.eigenvalue == 1.0);
  CHECK_THROWS_AS(resolve_final_label(doc.protocol(), "maybe^A"), std::invalid_argument);
  CHECK_THROWS_AS(resolve_final_label(doc.protocol(), "yes^B"), std::invalid_argument);
}

TEST_CASE("compare-oracle rebasis sweeps stay inside tolerance") {
  const auto doc = preset_scenario("case-c");
  CompareOracleQuery q;
  q.rebasis_sweeps = 3;
  q.seed = 11;
  const Query queries[] = {Query{q}};
  const auto report = run_queries(doc.protocol(), queries);
  CHECK(!report.oracle_mismatch);
  CHECK(report.json["queries"][0]["compare_oracle"]["rebasis_sweeps"].get<int>() == 3);
}

TEST_CASE("wigner preset report prints the canonical case-f values") {
  WignerRunOptions options;
  options.case_name = "f";
  const auto report = run_wigner(options);
  CHECK(report.json["wigner"]["p_yes_registered"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.json["wigner"]["p_yes_unregistered"].get<double>() ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.text.find("0.500000000000") != std::string::npos);
  CHECK(report.text.find("1.000000000000") != std::string::npos);
}
