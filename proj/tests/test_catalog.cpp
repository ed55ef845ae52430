#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "hra/catalog.hpp"
#include "hra/csv.hpp"
#include "hra/ingest.hpp"

using namespace hra;

namespace {

Relation make_schools() {
  Relation r("schools",
             Schema({{"CDSCode", TypeTag::Text, ""},
                     {"County", TypeTag::Text, ""},
                     {"OpenDate", TypeTag::Text, ""},
                     {"Phone", TypeTag::Text, ""}}));
  r.append({Value("01100170000000"), Value("Alameda"), Value("2014-09-14 00:00:00.0"),
            Value::null()});
  r.append({Value("01100170109835"), Value("Alameda"), Value("1980-07-01 00:00:00.0"),
            Value::null()});
  r.append({Value("01100170112607"), Value("Fresno"), Value("1989-01-01 00:00:00.0"),
            Value::null()});
  r.append({Value("01100170118489"), Value("Kern"), Value("2005-08-01 00:00:00.0"),
            Value::null()});
  return r;
}

Relation make_scores() {
  Relation r("satscores",
             Schema({{"cds", TypeTag::Text, ""}, {"NumTstTakr", TypeTag::Integer, ""}}));
  r.append({Value("01100170000000"), Value(std::int64_t(120))});
  r.append({Value("01100170109835"), Value(std::int64_t(88))});
  return r;
}

const char* kDescYaml = R"(tables:
  - name: schools
    description: California public schools
    columns:
      - name: County
        description: County name
relationships:
  - satscores.cds -> schools.CDSCode
notes:
  - kind: terminology
    text: cds stands for County-District-School code
)";

}  // namespace

TEST_CASE("build_model samples first three distinct non-null values", "[catalog]") {
  DescriptionDoc desc = DescriptionDoc::from_yaml(kDescYaml);
  SemanticDataModel model = build_model({make_schools(), make_scores()}, &desc);

  const TableSpec* schools = model.find_table("schools");
  REQUIRE(schools != nullptr);
  CHECK(schools->description == "California public schools");

  // timestamp strings render verbatim
  const ColumnSpec* open = schools->find("OpenDate");
  REQUIRE(open != nullptr);
  REQUIRE(open->sample_values.size() == 3);
  CHECK(open->sample_values[0] == "2014-09-14 00:00:00.0");

  // distinct: Alameda appears once despite two rows
  const ColumnSpec* county = schools->find("County");
  REQUIRE(county != nullptr);
  CHECK(county->sample_values == std::vector<std::string>{"Alameda", "Fresno", "Kern"});
  CHECK(county->description == "County name");

  // all-null column has no samples
  const ColumnSpec* phone = schools->find("Phone");
  REQUIRE(phone != nullptr);
  CHECK(phone->sample_values.empty());

  // one FK declaration becomes one relationship
  REQUIRE(model.relationships.size() == 1);
  CHECK(model.relationships[0].render() == "satscores.cds -> schools.CDSCode");
  REQUIRE(model.notes.size() == 1);
  CHECK(model.notes[0].kind == NoteKind::Terminology);

  // determinism
  SemanticDataModel again = build_model({make_schools(), make_scores()}, &desc);
  CHECK(model.to_yaml() == again.to_yaml());
}

TEST_CASE("build_model rejects empty databases and bad documents", "[catalog]") {
  CHECK_THROWS_AS(build_model({}), Error);
  try {
    DescriptionDoc::from_yaml("tables:\n  - name: [unclosed\n");
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(e.line > 0);  // names the offending line
  }
}

TEST_CASE("model YAML round-trips", "[catalog]") {
  DescriptionDoc desc = DescriptionDoc::from_yaml(kDescYaml);
  SemanticDataModel model = build_model({make_schools(), make_scores()}, &desc);
  std::string yaml = model.to_yaml();
  SemanticDataModel parsed = SemanticDataModel::from_yaml(yaml);
  CHECK(parsed.to_yaml() == yaml);
  CHECK(parsed.tables.size() == model.tables.size());
  CHECK(parsed.relationships == model.relationships);
}

TEST_CASE("model YAML golden", "[catalog]") {
  Relation t("t", Schema({{"a", TypeTag::Integer, ""}, {"b", TypeTag::Text, ""}}));
  t.append({Value(std::int64_t(1)), Value("x,y \"quoted\"")});
  SemanticDataModel model = build_model({t});
  CHECK(model.to_yaml() ==
        "tables:\n"
        "  - name: t\n"
        "    columns:\n"
        "      - name: a\n"
        "        type: int\n"
        "        samples: [1]\n"
        "      - name: b\n"
        "        type: text\n"
        "        samples: [\"x,y \\\"quoted\\\"\"]\n");
}

TEST_CASE("filter_model keeps a connected sub-model", "[catalog]") {
  DescriptionDoc desc = DescriptionDoc::from_yaml(kDescYaml);
  SemanticDataModel model = build_model({make_schools(), make_scores()}, &desc);

  SECTION("scripted selection gives 2 tables, 4 columns, 1 relationship") {
    MockRuleSet rules;
    rules.set_catch_all(
        "column: schools.County\n"
        "column: schools.CDSCode\n"
        "column: satscores.cds\n"
        "column: satscores.NumTstTakr\n"
        "note: 0\n");
    MockBackend backend{rules};
    FilterResult res = filter_model(model, "how many test takers per county?", backend);
    CHECK_FALSE(res.fell_back);
    REQUIRE(res.model.tables.size() == 2);
    std::size_t cols = 0;
    for (const auto& t : res.model.tables) cols += t.columns.size();
    CHECK(cols == 4);
    REQUIRE(res.model.relationships.size() == 1);
    CHECK(res.model.notes.size() == 1);
    CHECK(is_sub_model(res.model, model));
  }

  SECTION("selecting every column reproduces the model") {
    std::string all;
    for (const auto& t : model.tables)
      for (const auto& c : t.columns) all += "column: " + t.name + "." + c.name + "\n";
    MockRuleSet rules;
    rules.set_catch_all(all);
    MockBackend backend{rules};
    FilterResult res = filter_model(model, "anything", backend);
    std::size_t cols = 0, want = 0;
    for (const auto& t : res.model.tables) cols += t.columns.size();
    for (const auto& t : model.tables) want += t.columns.size();
    CHECK(cols == want);
    CHECK(is_sub_model(res.model, model));
  }

  SECTION("nonexistent names are dropped with a warning") {
    MockRuleSet rules;
    rules.set_catch_all("column: schools.Population\ncolumn: schools.County\n");
    MockBackend backend{rules};
    FilterResult res = filter_model(model, "population?", backend);
    CHECK_FALSE(res.fell_back);
    REQUIRE(res.model.tables.size() == 1);
    CHECK(res.model.tables[0].columns.size() == 1);
    REQUIRE_FALSE(res.warnings.empty());
    CHECK(res.warnings[0].find("Population") != std::string::npos);
    CHECK(is_sub_model(res.model, model));
  }

  SECTION("unparseable responses fall back to the unfiltered model") {
    MockRuleSet rules;
    rules.set_catch_all("I cannot answer that.");
    MockBackend backend{rules};
    FilterResult res = filter_model(model, "anything", backend, PromptTemplates::defaults(), 2);
    CHECK(res.fell_back);
    CHECK(res.model.tables.size() == model.tables.size());
  }

  SECTION("relationship endpoints are force-retained for connectivity") {
    MockRuleSet rules;
    rules.set_catch_all("column: schools.County\ncolumn: satscores.NumTstTakr\n");
    MockBackend backend{rules};
    FilterResult res = filter_model(model, "test takers by county", backend);
    REQUIRE(res.model.relationships.size() == 1);
    CHECK(res.model.find_table("schools")->find("CDSCode") != nullptr);
    CHECK(res.model.find_table("satscores")->find("cds") != nullptr);
    CHECK(is_sub_model(res.model, model));
  }
}

TEST_CASE("notes are append-only extensions", "[catalog]") {
  SemanticDataModel model = build_model({make_schools()});
  model.add_note({NoteKind::ComputationRule, "rate = NumTstTakr / enrollment"});
  REQUIRE(model.notes.size() == 1);
}

TEST_CASE("CSV ingestion", "[csv]") {
  auto dir = std::filesystem::temp_directory_path() / "hra_csv_test";
  std::filesystem::create_directories(dir);

  SECTION("two-table fixture catalog") {
    std::ofstream(dir / "a.csv") << "id,name\n1,Ann\n2,\"Bo,b\"\n";
    std::ofstream(dir / "b.csv") << "aid,score\n1,3.5\n2,4\n";
    std::ofstream(dir / "cat.yaml") << "tables:\n"
                                       "  - name: a\n"
                                       "    path: a.csv\n"
                                       "  - name: b\n"
                                       "    path: b.csv\n";
    Ingested ing = ingest_catalog((dir / "cat.yaml").string());
    CHECK(ing.db.tables().size() == 2);
    CHECK(ing.model.tables.size() == 2);
    const Relation& a = ing.db.table("a");
    CHECK(a.schema().at(0).type == TypeTag::Integer);
    CHECK(a.cell(1, "name").as_text() == "Bo,b");
    const Relation& b = ing.db.table("b");
    CHECK(b.schema().at(1).type == TypeTag::Float);
  }

  SECTION("header-only CSV loads as a zero-row relation") {
    std::ofstream(dir / "empty.csv") << "x,y\n";
    Relation r = read_csv_file((dir / "empty.csv").string(), "empty");
    CHECK(r.row_count() == 0);
    CHECK(r.schema().size() == 2);
  }

  SECTION("ragged row reports its row number") {
    std::ofstream(dir / "ragged.csv") << "x,y\n1,2\n3\n";
    try {
      read_csv_file((dir / "ragged.csv").string(), "ragged");
      FAIL("expected CsvError");
    } catch (const CsvError& e) {
      CHECK(e.row == 3);
    }
  }

  SECTION("round trip through write_csv") {
    Relation r("t", Schema({{"a", TypeTag::Integer, ""}, {"b", TypeTag::Text, ""}}));
    r.append({Value(std::int64_t(1)), Value("line\nbreak")});
    r.append({Value::null(), Value("quote\"inside")});
    std::ostringstream os;
    write_csv(r, os);
    std::ofstream(dir / "rt.csv") << os.str();
    Relation back = read_csv_file((dir / "rt.csv").string(), "t");
    CHECK(bag_equal(r, back));
  }
}
