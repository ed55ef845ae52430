#include <catch2/catch_amalgamated.hpp>

#include "hra/parser.hpp"
#include "hra/plan.hpp"
#include "hra/relation.hpp"

using namespace hra;

TEST_CASE("value comparison is strict across tags", "[value]") {
  CHECK(Value::compare(Value(std::int64_t(2)), Value(std::int64_t(3))) < 0);
  CHECK(Value::compare(Value("a"), Value("a")) == 0);
  CHECK_THROWS_AS(Value::compare(Value(std::int64_t(1)), Value(1.0)), TypeError);
  CHECK_THROWS_AS(Value::compare(Value("1"), Value(std::int64_t(1))), TypeError);
  CHECK_THROWS_AS(Value(std::int64_t(1)).as_text(), TypeError);
}

TEST_CASE("text values render byte-exact", "[value]") {
  Value v("2014-09-14 00:00:00.0");
  CHECK(v.render() == "2014-09-14 00:00:00.0");
  CHECK(Value(std::int64_t(2000000)).render() == "2000000");
}

TEST_CASE("numeric parsing strips thousands separators", "[value]") {
  auto v = parse_value("2,000,000", TypeTag::Integer);
  REQUIRE(v.has_value());
  CHECK(v->as_int() == 2000000);
  CHECK_FALSE(parse_value("abc", TypeTag::Integer).has_value());
  auto any = parse_value("12.5", TypeTag::Any);
  REQUIRE(any.has_value());
  CHECK(any->tag() == TypeTag::Float);
}

TEST_CASE("schema rejects duplicate columns", "[schema]") {
  Schema s;
  s.add({"a", TypeTag::Integer, ""});
  CHECK_THROWS_AS(s.add({"a", TypeTag::Text, ""}), Error);
}

TEST_CASE("relation enforces arity and tags, keeps duplicates", "[relation]") {
  Relation r("t", Schema({{"a", TypeTag::Integer, ""}, {"b", TypeTag::Text, ""}}));
  r.append({Value(std::int64_t(1)), Value("x")});
  r.append({Value(std::int64_t(1)), Value("x")});  // bag semantics
  r.append({Value::null(), Value("y")});           // null allowed anywhere
  CHECK(r.row_count() == 3);
  CHECK_THROWS_AS(r.append({Value(std::int64_t(1))}), Error);
  CHECK_THROWS_AS(r.append({Value("no"), Value("x")}), TypeError);
}

TEST_CASE("bag equality ignores row order", "[relation]") {
  Schema s({{"a", TypeTag::Integer, ""}});
  Relation r1("x", s), r2("y", s);
  r1.append({Value(std::int64_t(1))});
  r1.append({Value(std::int64_t(2))});
  r2.append({Value(std::int64_t(2))});
  r2.append({Value(std::int64_t(1))});
  CHECK(bag_equal(r1, r2));
  r2.append({Value(std::int64_t(1))});
  CHECK_FALSE(bag_equal(r1, r2));
}

static SemanticDataModel tiny_catalog() {
  SemanticDataModel m;
  TableSpec schools;
  schools.name = "schools";
  schools.columns = {{"CDSCode", TypeTag::Text, {}, ""},
                     {"County", TypeTag::Text, {}, ""}};
  TableSpec scores;
  scores.name = "satscores";
  scores.columns = {{"cds", TypeTag::Text, {}, ""},
                    {"NumTstTakr", TypeTag::Integer, {}, ""}};
  m.tables = {schools, scores};
  m.relationships = {{"satscores", "cds", "schools", "CDSCode"}};
  return m;
}

static const char* kFig4bText =
    "Aggregate(sum(NumTstTakr)->total_test_takers, Join(satscores, "
    "Select(population>2000000, Project(ExtractPopulation(County)->population, schools)), "
    "cds=CDSCode))";

static std::string with_udf_prelude(const std::string& q) {
  return "WITH UDF ExtractPopulation = \"What is the population of {County} in California? "
         "Answer with only the number.\"\n" +
         q;
}

TEST_CASE("validate_plan accepts the reference plan and reports problems", "[validate]") {
  SemanticDataModel cat = tiny_catalog();
  QueryPlan plan = parse(with_udf_prelude(kFig4bText), cat);
  CHECK(validate_plan(plan, cat).ok());

  SECTION("unknown column yields one entry") {
    PlanBuilder b;
    int scan = b.scan("schools");
    auto pred = Pred::compare(CmpOp::Gt, Scalar::column_ref("Population"),
                              Scalar::lit(Value(std::int64_t(10))));
    QueryPlan p = b.finish(b.select(pred, scan));
    ValidationReport rep = validate_plan(p, cat);
    REQUIRE(rep.issues.size() == 1);
    CHECK(rep.issues[0].kind == IssueKind::UnknownColumn);
  }

  SECTION("tuple-valued UDF in a Select is a kind mismatch") {
    PlanBuilder b;
    int scan = b.scan("schools");
    LlmUdf udf;
    udf.name = "Extract";
    udf.expression = "extract things";
    udf.input_columns = {"County"};
    udf.output_kind = OutputKind::tuple({{"a", TypeTag::Text}});
    QueryPlan p = b.finish(b.semantic_select(udf, scan));
    ValidationReport rep = validate_plan(p, cat);
    REQUIRE(rep.issues.size() == 1);
    CHECK(rep.issues[0].kind == IssueKind::KindMismatch);
  }

  SECTION("operator/output-kind compatibility matrix") {
    // enumerated by hand: rows are host operators, columns UDF kinds
    struct Case { OpKind op; OutputKindTag kind; bool ok; };
    auto mk_kind = [](OutputKindTag t) {
      switch (t) {
        case OutputKindTag::Boolean: return OutputKind::boolean();
        case OutputKindTag::Scalar: return OutputKind::scalar("v", TypeTag::Text);
        case OutputKindTag::Tuple: return OutputKind::tuple({{"v", TypeTag::Text}});
        case OutputKindTag::Aggregate: return OutputKind::aggregate("v", TypeTag::Text);
      }
      return OutputKind::boolean();
    };
    const Case cases[] = {
        {OpKind::Select, OutputKindTag::Boolean, true},
        {OpKind::Select, OutputKindTag::Scalar, false},
        {OpKind::Select, OutputKindTag::Tuple, false},
        {OpKind::Select, OutputKindTag::Aggregate, false},
        {OpKind::Project, OutputKindTag::Boolean, false},
        {OpKind::Project, OutputKindTag::Scalar, true},
        {OpKind::Project, OutputKindTag::Tuple, true},
        {OpKind::Project, OutputKindTag::Aggregate, false},
        {OpKind::Join, OutputKindTag::Boolean, true},
        {OpKind::Join, OutputKindTag::Scalar, false},
        {OpKind::TopK, OutputKindTag::Boolean, true},
        {OpKind::TopK, OutputKindTag::Tuple, false},
        {OpKind::Aggregate, OutputKindTag::Aggregate, true},
        {OpKind::Aggregate, OutputKindTag::Boolean, false},
    };
    for (const auto& c : cases) {
      PlanBuilder b;
      LlmUdf udf;
      udf.name = "U";
      udf.expression = "do something";
      udf.input_columns = {"County"};
      udf.output_kind = mk_kind(c.kind);
      int node = -1;
      switch (c.op) {
        case OpKind::Select: node = b.semantic_select(udf, b.scan("schools")); break;
        case OpKind::Project: node = b.semantic_project(udf, b.scan("schools")); break;
        case OpKind::Join: {
          udf.input_columns = {"County", "cds"};
          node = b.semantic_join(b.scan("schools"), b.scan("satscores"), udf);
          break;
        }
        case OpKind::TopK: node = b.semantic_topk(udf, std::nullopt, b.scan("schools")); break;
        case OpKind::Aggregate:
          node = b.semantic_aggregate(udf, {}, b.scan("schools"));
          break;
        default: break;
      }
      QueryPlan p = b.finish(node);
      ValidationReport rep = validate_plan(p, cat);
      bool has_kind_issue = false;
      for (const auto& i : rep.issues) has_kind_issue |= i.kind == IssueKind::KindMismatch;
      INFO(std::string(op_name(c.op)) << " / " << output_kind_name(c.kind));
      CHECK(has_kind_issue != c.ok);
    }
  }
}

TEST_CASE("tree property holds for validated plans", "[plan]") {
  SemanticDataModel cat = tiny_catalog();
  QueryPlan plan = parse(with_udf_prelude(kFig4bText), cat);
  std::size_t edges = 0;
  for (const auto& n : plan.nodes) edges += n.children.size();
  CHECK(edges == plan.nodes.size() - 1);
  // reachability == postorder covers every node
  CHECK(plan.postorder().size() == plan.nodes.size());
  // semantic-payload partition: every node is in exactly one of D or M
  std::size_t semantic = plan.semantic_nodes().size();
  CHECK(semantic == 1);
}

TEST_CASE("plan signature is id-independent and order-sensitive", "[plan]") {
  SemanticDataModel cat = tiny_catalog();

  // same structure built in two different id orders
  PlanBuilder b1;
  int j1 = b1.join(b1.scan("satscores"), b1.scan("schools"), "cds", "CDSCode");
  QueryPlan p1 = b1.finish(j1);

  PlanBuilder b2;
  int right = b2.scan("schools");
  int left = b2.scan("satscores");
  PlanNode join;
  join.kind = OpKind::Join;
  join.left_key = "cds";
  join.right_key = "CDSCode";
  join.children = {left, right};
  QueryPlan p2 = b2.finish(b2.add(std::move(join)));

  CHECK(plan_signature(p1) == plan_signature(p2));

  // swapped join children differ
  PlanBuilder b3;
  int j3 = b3.join(b3.scan("schools"), b3.scan("satscores"), "CDSCode", "cds");
  QueryPlan p3 = b3.finish(j3);
  CHECK(plan_signature(p1) != plan_signature(p3));

  // determinism: serializing twice is byte-identical
  QueryPlan fig4b = parse(with_udf_prelude(kFig4bText), cat);
  CHECK(plan_signature(fig4b) == plan_signature(fig4b));

  // round-trip through the signature text
  QueryPlan again = parse_signature(plan_signature(fig4b));
  CHECK(structurally_equal(fig4b, again));
}
