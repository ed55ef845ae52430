#pragma once

#include <random>
#include <string>
#include <vector>

#include "hra/backend.hpp"
#include "hra/catalog.hpp"
#include "hra/parser.hpp"
#include "hra/plan.hpp"

namespace hra {

// Seeded generators for reproducible property tests and benchmarks, plus a
// deterministic oracle backend that answers executor prompts as a pure
// function of the rendered input values.

using Rng = std::mt19937_64;

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct GenOptions {
  int max_tables = 3;
  int max_rows = 50;
  int key_domain = 6;     // join keys collide within this range
  int max_nodes = 8;      // relational (skeleton) nodes
  int max_semantic = 3;
  int max_depth = 6;
  bool allow_root_agg = true;
  bool allow_root_topk = true;
  bool allow_semantic_join = false;
};

inline const std::vector<std::string>& word_pool() {
  static const std::vector<std::string> pool = {"red",  "green", "blue",  "gold",
                                                "iron", "jade",  "coral", "ash"};
  return pool;
}

/// Catalog of `n` small tables with unique column names: ti_id (int join
/// key), ti_cat (text), ti_num (int).
inline SemanticDataModel random_catalog(Rng& rng, const GenOptions& opts) {
  std::uniform_int_distribution<int> ntab(1, opts.max_tables);
  int n = ntab(rng);
  SemanticDataModel model;
  for (int i = 0; i < n; ++i) {
    TableSpec t;
    t.name = "t" + std::to_string(i);
    t.columns = {{t.name + "_id", TypeTag::Integer, {}, ""},
                 {t.name + "_cat", TypeTag::Text, {}, ""},
                 {t.name + "_num", TypeTag::Integer, {}, ""}};
    model.tables.push_back(std::move(t));
  }
  for (int i = 1; i < n; ++i)
    model.relationships.push_back({"t" + std::to_string(i), "t" + std::to_string(i) + "_id",
                                   "t" + std::to_string(i - 1),
                                   "t" + std::to_string(i - 1) + "_id"});
  return model;
}

inline Database random_database(Rng& rng, const SemanticDataModel& catalog, int max_rows) {
  std::uniform_int_distribution<int> nrows(1, std::max(1, max_rows));
  Database db;
  for (const auto& t : catalog.tables) {
    Relation rel(t.name, catalog.table_schema(t.name));
    int rows = nrows(rng);
    for (int r = 0; r < rows; ++r) {
      Row row;
      for (const auto& c : t.columns) {
        if (c.type == TypeTag::Integer) {
          bool is_key = c.name.size() > 3 && c.name.rfind("_id") == c.name.size() - 3;
          std::uniform_int_distribution<std::int64_t> val(0, is_key ? 5 : 99);
          row.push_back(Value(val(rng)));
        } else {
          std::uniform_int_distribution<std::size_t> idx(0, word_pool().size() - 1);
          row.push_back(Value(word_pool()[idx(rng)]));
        }
      }
      rel.append(std::move(row));
    }
    db.add(std::move(rel));
  }
  return db;
}

/// Random valid plan over the catalog: scans joined into one fragment with
/// relational selects and semantic selects/projects sprinkled in, optionally
/// topped by TopK or Aggregate. Node count covers the relational skeleton;
/// semantic nodes are counted separately.
inline QueryPlan random_plan(Rng& rng, const SemanticDataModel& catalog, const GenOptions& opts) {
  PlanBuilder b;
  auto pick = [&](int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(rng);
  };
  auto chance = [&](double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  };

  struct Frag {
    int node;
    Schema schema;
  };
  std::vector<Frag> frags;
  int ntables = 1 + pick(int(catalog.tables.size()));
  int relational_nodes = 0;
  for (int i = 0; i < ntables && relational_nodes + 2 * (ntables - i) <= opts.max_nodes + 2;
       ++i) {
    const TableSpec& t = catalog.tables[std::size_t(i)];
    frags.push_back({b.scan(t.name), catalog.table_schema(t.name)});
    ++relational_nodes;
  }

  int semantic_used = 0;
  int derived_counter = 0;

  auto int_cols = [](const Schema& s) {
    std::vector<std::string> out;
    for (const auto& c : s.columns())
      if (c.type == TypeTag::Integer) out.push_back(c.name);
    return out;
  };
  auto text_cols = [](const Schema& s) {
    std::vector<std::string> out;
    for (const auto& c : s.columns())
      if (c.type == TypeTag::Text) out.push_back(c.name);
    return out;
  };
  auto any_col = [&](const Schema& s) { return s.at(std::size_t(pick(int(s.size())))).name; };

  auto add_relational_select = [&](Frag& f) {
    auto ints = int_cols(f.schema);
    PredPtr pred;
    if (!ints.empty() && chance(0.7)) {
      std::uniform_int_distribution<std::int64_t> lim(0, 80);
      pred = Pred::compare(chance(0.5) ? CmpOp::Le : CmpOp::Gt,
                           Scalar::column_ref(ints[std::size_t(pick(int(ints.size())))]),
                           Scalar::lit(Value(lim(rng))));
    } else {
      auto texts = text_cols(f.schema);
      if (texts.empty()) return;
      pred = Pred::compare(CmpOp::Ne,
                           Scalar::column_ref(texts[std::size_t(pick(int(texts.size())))]),
                           Scalar::lit(Value(word_pool()[std::size_t(pick(3))])));
    }
    f.node = b.select(pred, f.node);
    ++relational_nodes;
  };

  auto add_semantic_select = [&](Frag& f) {
    std::string col = any_col(f.schema);
    LlmUdf udf;
    udf.name = "Keep" + std::to_string(semantic_used);
    udf.expression = "is {" + col + "} notable?";
    udf.input_columns = {col};
    udf.output_kind = OutputKind::boolean();
    f.node = b.semantic_select(std::move(udf), f.node);
    ++semantic_used;
  };

  auto add_semantic_project = [&](Frag& f) {
    std::string col = any_col(f.schema);
    std::string out = "d" + std::to_string(derived_counter++);
    LlmUdf udf;
    udf.name = "Derive" + std::to_string(semantic_used);
    udf.expression = "derive a tag for {" + col + "}";
    udf.input_columns = {col};
    udf.output_kind = OutputKind::scalar(out, TypeTag::Text);
    f.node = b.semantic_project(std::move(udf), f.node);
    f.schema.add({out, TypeTag::Text, ""});
    ++semantic_used;
  };

  auto maybe_decorate = [&](Frag& f) {
    while (chance(0.45)) {
      bool can_semantic = semantic_used < opts.max_semantic;
      int what = pick(3);
      if (what == 0 && relational_nodes < opts.max_nodes) {
        add_relational_select(f);
      } else if (what == 1 && can_semantic) {
        add_semantic_select(f);
      } else if (what == 2 && can_semantic) {
        add_semantic_project(f);
      } else {
        break;
      }
    }
  };

  for (auto& f : frags) maybe_decorate(f);

  // join every fragment into one, preferring the shared _id keys
  while (frags.size() > 1) {
    Frag right = frags.back();
    frags.pop_back();
    Frag& left = frags.back();
    auto li = int_cols(left.schema);
    auto ri = int_cols(right.schema);
    std::string lk, rk;
    for (const auto& c : li)
      if (c.rfind("_id") == c.size() - 3) lk = c;
    for (const auto& c : ri)
      if (c.rfind("_id") == c.size() - 3) rk = c;
    if (lk.empty() || rk.empty()) {
      lk = li.at(0);
      rk = ri.at(0);
    }
    if (opts.allow_semantic_join && semantic_used < opts.max_semantic && chance(0.25)) {
      auto lt = text_cols(left.schema);
      auto rt = text_cols(right.schema);
      if (!lt.empty() && !rt.empty()) {
        LlmUdf udf;
        udf.name = "Match" + std::to_string(semantic_used);
        udf.expression = "do {" + lt[0] + "} and {" + rt[0] + "} refer to the same thing?";
        udf.input_columns = {lt[0], rt[0]};
        udf.output_kind = OutputKind::boolean();
        left.node = b.semantic_join(left.node, right.node, std::move(udf));
        ++semantic_used;
      } else {
        left.node = b.join(left.node, right.node, lk, rk);
        ++relational_nodes;
      }
    } else {
      left.node = b.join(left.node, right.node, lk, rk);
      ++relational_nodes;
    }
    Schema joined = left.schema;
    for (const auto& c : right.schema.columns()) joined.add(c);
    left.schema = std::move(joined);
    maybe_decorate(frags.back());
  }

  Frag& f = frags.front();
  if (opts.allow_root_agg && chance(0.35)) {
    auto ints = int_cols(f.schema);
    AggSpec spec;
    if (!ints.empty() && chance(0.5)) {
      spec.func = AggFunc::Sum;
      spec.column = ints[std::size_t(pick(int(ints.size())))];
    } else {
      spec.func = AggFunc::CountStar;
    }
    spec.alias = "agg_out";
    std::vector<std::string> group;
    auto texts = text_cols(f.schema);
    if (!texts.empty() && chance(0.5)) group.push_back(texts[std::size_t(pick(int(texts.size())))]);
    f.node = b.aggregate(spec, group, f.node);
  } else if (opts.allow_root_topk && chance(0.25)) {
    auto ints = int_cols(f.schema);
    if (!ints.empty()) {
      std::vector<OrderKey> order{{ints[std::size_t(pick(int(ints.size())))], chance(0.5)}};
      f.node = b.topk(std::move(order), std::int64_t(1 + pick(5)), f.node);
    }
  }
  return b.finish(f.node);
}

// ---------------------------------------------------------------------------
// Deterministic oracle backend

/// Answers every executor prompt shape as a deterministic function of the
/// values rendered into the prompt. Join matching defaults to a hash rule so
/// nested-loop and smart-batching runs agree; tests can override it with
/// string equality for readable fixtures.
class OracleBackend : public LlmBackend {
 public:
  using JoinMatch = std::function<bool(const std::string&, const std::string&)>;

  OracleBackend() = default;
  explicit OracleBackend(JoinMatch match) : join_match_(std::move(match)) {}

  void set_batch_sizes(int b1, int b2) {
    batch_b1_ = b1;
    batch_b2_ = b2;
  }

  Completion complete(const std::string& prompt, const DecodeParams& = {}) override {
    std::string text = respond(prompt);
    return {text, estimate_tokens(prompt), estimate_tokens(text), true};
  }

  std::string respond(const std::string& prompt) const {
    // smart-batch sizing
    if (prompt.find("Answer exactly in the form: b1=") != std::string::npos)
      return "b1=" + std::to_string(batch_b1_) + ", b2=" + std::to_string(batch_b2_);
    // batched join
    if (prompt.rfind("Find all matching pairs", 0) == 0) return answer_batch(prompt);
    // pairwise prompts
    if (prompt.rfind("Do {", 0) == 0) {
      auto [l, r] = two_braced(prompt, "Do {", "} and {", "} match");
      return match(l, r) ? "yes" : "no";
    }
    if (prompt.rfind("Should {", 0) == 0) {
      auto [l, r] = two_braced(prompt, "Should {", "} be ranked before {", "} according");
      return fnv1a(l + "|" + r) % 2 == 0 ? "yes" : "no";
    }
    // selection
    if (prompt.rfind("Does {", 0) == 0) {
      auto vals = braced_after(prompt, "Does {", "} satisfy");
      return fnv1a(vals) % 2 == 0 ? "yes" : "no";
    }
    // projection: "...\nInput: {values}\n<output spec>"
    auto input_pos = prompt.find("\nInput: {");
    if (input_pos != std::string::npos) {
      auto end = prompt.find("}\n", input_pos);
      std::string vals = prompt.substr(input_pos + 9, end - input_pos - 9);
      if (prompt.find("integer") != std::string::npos)
        return std::to_string(fnv1a(vals) % 1000);
      if (prompt.find("float") != std::string::npos)
        return std::to_string(double(fnv1a(vals) % 1000)) ;
      return "v" + std::to_string(fnv1a(vals) % 1000);
    }
    // aggregation: summarize rows deterministically
    auto rows_pos = prompt.find("Rows:\n");
    if (rows_pos != std::string::npos)
      return "s" + std::to_string(fnv1a(prompt.substr(rows_pos)) % 100000);
    return "yes";
  }

 private:
  bool match(const std::string& l, const std::string& r) const {
    if (join_match_) return join_match_(l, r);
    return fnv1a(l + "&" + r) % 3 == 0;
  }

  static std::string braced_after(const std::string& s, std::string_view head,
                                  std::string_view tail) {
    auto start = head.size();
    auto end = s.find(tail);
    if (end == std::string::npos || end < start) return "";
    return s.substr(start, end - start);
  }

  static std::pair<std::string, std::string> two_braced(const std::string& s,
                                                        std::string_view head,
                                                        std::string_view mid,
                                                        std::string_view tail) {
    auto m = s.find(mid);
    if (m == std::string::npos) return {"", ""};
    std::string l = s.substr(head.size(), m - head.size());
    auto t = s.find(tail, m + mid.size());
    if (t == std::string::npos) return {l, ""};
    std::string r = s.substr(m + mid.size(), t - m - mid.size());
    return {l, r};
  }

  std::string answer_batch(const std::string& prompt) const {
    // item lines look like "  L3: value" / "  R7: value"
    std::vector<std::pair<int, std::string>> left, right;
    std::istringstream in(prompt);
    std::string line;
    while (std::getline(in, line)) {
      std::string t = trim_copy(line);
      if (t.size() > 1 && (t[0] == 'L' || t[0] == 'R') && std::isdigit((unsigned char)t[1])) {
        std::size_t colon = t.find(':');
        if (colon == std::string::npos) continue;
        int idx = std::stoi(t.substr(1, colon - 1));
        std::string val = t.substr(colon + 1);
        if (!val.empty() && val[0] == ' ') val.erase(0, 1);
        (t[0] == 'L' ? left : right).emplace_back(idx, val);
      }
    }
    std::string out;
    for (const auto& [li, lv] : left)
      for (const auto& [ri, rv] : right)
        if (match(lv, rv))
          out += (out.empty() ? "" : ", ") + std::string("(L") + std::to_string(li) + ",R" +
                 std::to_string(ri) + ")";
    return out.empty() ? "NONE" : out;
  }

  JoinMatch join_match_;
  int batch_b1_ = 3, batch_b2_ = 3;
};

}  // namespace hra
