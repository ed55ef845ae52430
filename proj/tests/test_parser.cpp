#include <catch2/catch_amalgamated.hpp>

#include "hra/datagen.hpp"
#include "hra/parser.hpp"

using namespace hra;

namespace {

SemanticDataModel fig4b_catalog() {
  SemanticDataModel m;
  TableSpec schools;
  schools.name = "schools";
  schools.columns = {{"CDSCode", TypeTag::Text, {}, ""}, {"County", TypeTag::Text, {}, ""}};
  TableSpec scores;
  scores.name = "satscores";
  scores.columns = {{"cds", TypeTag::Text, {}, ""}, {"NumTstTakr", TypeTag::Integer, {}, ""}};
  m.tables = {schools, scores};
  return m;
}

const char* kFig4b =
    "WITH UDF ExtractPopulation = \"What is the population of {County}?\"\n"
    "Aggregate(sum(NumTstTakr)->total_test_takers, Join(satscores, "
    "Select(population>2000000, Project(ExtractPopulation(County)->population, schools)), "
    "cds=CDSCode))";

}  // namespace

TEST_CASE("reference query parses to the expected tree", "[parser]") {
  SemanticDataModel cat = fig4b_catalog();
  QueryPlan p = parse(kFig4b, cat);

  REQUIRE(p.nodes.size() == 6);
  const PlanNode& root = p.node(p.root);
  REQUIRE(root.kind == OpKind::Aggregate);
  REQUIRE(root.agg.has_value());
  CHECK(root.agg->func == AggFunc::Sum);
  CHECK(root.agg->column == "NumTstTakr");
  CHECK(root.agg->alias == "total_test_takers");

  const PlanNode& join = p.node(root.children[0]);
  REQUIRE(join.kind == OpKind::Join);
  CHECK(join.join_kind == JoinKind::InnerEqui);
  CHECK(join.left_key == "cds");
  CHECK(join.right_key == "CDSCode");

  const PlanNode& lscan = p.node(join.children[0]);
  CHECK(lscan.kind == OpKind::Scan);
  CHECK(lscan.table == "satscores");

  const PlanNode& select = p.node(join.children[1]);
  REQUIRE(select.kind == OpKind::Select);
  CHECK_FALSE(select.is_semantic());

  const PlanNode& project = p.node(select.children[0]);
  REQUIRE(project.kind == OpKind::Project);
  REQUIRE(project.is_semantic());
  CHECK(project.udf->name == "ExtractPopulation");
  CHECK(project.udf->input_columns == std::vector<std::string>{"County"});
  CHECK(project.udf->output_kind.tag == OutputKindTag::Scalar);
  CHECK(project.udf->output_kind.fields[0].name == "population");

  const PlanNode& sscan = p.node(project.children[0]);
  CHECK(sscan.kind == OpKind::Scan);
  CHECK(sscan.table == "schools");

  // the parsed plan validates cleanly
  CHECK(validate_plan(p, cat).ok());
}

TEST_CASE("minimal query parses to Scan plus Select", "[parser]") {
  SemanticDataModel cat = fig4b_catalog();
  QueryPlan p = parse("Select(true, schools)", cat);
  REQUIRE(p.nodes.size() == 2);
  CHECK(p.node(p.root).kind == OpKind::Select);
  CHECK(p.node(p.node(p.root).children[0]).kind == OpKind::Scan);
}

TEST_CASE("parse errors carry distinct codes and locations", "[parser]") {
  SemanticDataModel cat = fig4b_catalog();

  SECTION("typo in table name") {
    try {
      parse("Select(true, school)", cat);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.code == ParseErrorCode::UnknownTable);
      CHECK(std::string(e.what()).find("school") != std::string::npos);
    }
  }

  SECTION("unknown column") {
    try {
      parse("Select(Population > 10, schools)", cat);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.code == ParseErrorCode::UnknownColumn);
      CHECK(std::string(e.what()).find("Population") != std::string::npos);
    }
  }

  SECTION("syntax error names a location") {
    try {
      parse("Select(true schools)", cat);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.code == ParseErrorCode::Syntax);
      CHECK(e.line >= 1);
      CHECK(e.col >= 1);
    }
  }

  SECTION("UDF placeholder must name an input column") {
    try {
      parse("WITH UDF Bad = \"look at {Missing}\"\nSelect(Bad(County), schools)", cat);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.code == ParseErrorCode::UdfPlaceholder);
    }
  }

  SECTION("semantic predicates cannot nest in boolean expressions") {
    try {
      parse("WITH UDF IsBig = \"is {County} big?\"\n"
            "Select(IsBig(County) and County = 'Kern', schools)",
            cat);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.code == ParseErrorCode::Syntax);
    }
  }
}

TEST_CASE("printing round-trips hand-written queries", "[parser]") {
  SemanticDataModel cat = fig4b_catalog();

  SECTION("reference query") {
    QueryPlan p = parse(kFig4b, cat);
    QueryPlan q = parse(print(p), cat);
    CHECK(structurally_equal(p, q));
  }

  SECTION("single scan prints as the bare table name") {
    PlanBuilder b;
    QueryPlan p = b.finish(b.scan("schools"));
    CHECK(print(p) == "schools");
    CHECK(structurally_equal(p, parse(print(p), cat)));
  }

  SECTION("operator coverage") {
    const char* queries[] = {
        "Project(County, CDSCode, schools)",
        "Project(County -> cty, schools)",
        "Project(substr(CDSCode, 1, 4) -> prefix, schools)",
        "TopK(NumTstTakr desc, 3, satscores)",
        "WITH UDF Better = \"is {County} nicer than {County}?\"\n"
        "TopK(Better(County), 2, schools)",
        "Aggregate(count(*) -> n, satscores)",
        "Aggregate(avg(NumTstTakr) -> m, by(cds), satscores)",
        "WITH UDF Summ = \"summarize {County}\"\n"
        "Aggregate(Summ(County) -> summary:text, schools)",
        "Select(County in ('Kern', 'Fresno'), schools)",
        "Select(NumTstTakr between 10 and 99, satscores)",
        "Select(not (NumTstTakr > 5 or NumTstTakr < 2), satscores)",
        "Join(satscores, schools, llm(\"same place? {cds} {CDSCode}\", cds, CDSCode))",
        "Project(llm(\"tag {County}\", County) -> (tag:text, score:int), schools)",
    };
    for (const char* q : queries) {
      INFO(q);
      QueryPlan p = parse(q, cat);
      std::string text = print(p);
      INFO("printed: " << text);
      QueryPlan again = parse(text, cat);
      CHECK(structurally_equal(p, again));
    }
  }
}

TEST_CASE("random plans round-trip through print and parse", "[parser][property]") {
  Rng rng(20260809);
  GenOptions opts;
  opts.allow_semantic_join = true;
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    SemanticDataModel cat = random_catalog(rng, opts);
    QueryPlan p = random_plan(rng, cat, opts);
    REQUIRE(validate_plan(p, cat).ok());
    std::string text = print(p);
    INFO(text);
    QueryPlan q = parse(text, cat);
    CHECK(structurally_equal(p, q));
    // signatures are stable across the round trip
    CHECK(plan_signature(p) == plan_signature(q));
    ++checked;
  }
  CHECK(checked == 100);
}
