#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "hra/plan.hpp"
#include "hra/relation.hpp"
#include "hra/validate.hpp"

namespace hra {

/// Base-table statistics: cardinalities plus per-column distinct counts.
/// Missing distinct counts default to the table cardinality.
struct TableStats {
  std::map<std::string, std::int64_t> cardinality;
  std::map<std::pair<std::string, std::string>, std::int64_t> distinct;

  std::int64_t card(const std::string& table) const {
    auto it = cardinality.find(table);
    if (it == cardinality.end()) throw Error("no cardinality statistics for table: " + table);
    return it->second;
  }

  std::int64_t distinct_of(const std::string& table, const std::string& column) const {
    auto it = distinct.find({table, column});
    if (it != distinct.end()) return it->second;
    return card(table);
  }

  static TableStats from_database(const Database& db) {
    TableStats s;
    for (const auto& t : db.tables()) {
      s.cardinality[t.name()] = std::int64_t(t.row_count());
      for (std::size_t c = 0; c < t.schema().size(); ++c) {
        std::vector<Value> seen;
        for (const auto& row : t.rows()) {
          if (row[c].is_null()) continue;
          bool dup = false;
          for (const auto& v : seen) dup = dup || v == row[c];
          if (!dup) seen.push_back(row[c]);
        }
        s.distinct[{t.name(), t.schema().at(c).name}] = std::int64_t(seen.size());
      }
    }
    return s;
  }
};

/// Unified cost model: per-tuple coefficients for relational operators and a
/// per-call cost for LLM UDFs that dominates by orders of magnitude. Units
/// are abstract; `calibrate` maps them to seconds.
struct CostModel {
  double beta_scan = 0.01;
  double beta_select = 0.01;
  double beta_project = 0.01;
  double beta_join = 0.02;
  double beta_topk = 0.01;
  double beta_aggregate = 0.01;

  double llm_call_cost = 100.0;
  double llm_char_cost = 0.01;  // per average prompt character
  std::map<OutputKindTag, double> llm_kind_multiplier = {
      {OutputKindTag::Boolean, 1.0},
      {OutputKindTag::Scalar, 1.0},
      {OutputKindTag::Tuple, 1.0},
      {OutputKindTag::Aggregate, 1.0},
  };

  double sel_eq = 0.1;
  double sel_ne = 0.9;
  double sel_range = 0.3;
  double sel_semantic = 0.5;           // the cardinality effect of a semantic selection
  double sel_semantic_join_match = 0.1;  // fraction of key pairs that match

  static CostModel defaults() { return {}; }

  double beta(OpKind k) const {
    switch (k) {
      case OpKind::Scan: return beta_scan;
      case OpKind::Select: return beta_select;
      case OpKind::Project: return beta_project;
      case OpKind::Join: return beta_join;
      case OpKind::TopK: return beta_topk;
      case OpKind::Aggregate: return beta_aggregate;
    }
    return 0.01;
  }

  double llm_cost_per_call(OutputKindTag kind, double avg_prompt_chars) const {
    double mult = 1.0;
    auto it = llm_kind_multiplier.find(kind);
    if (it != llm_kind_multiplier.end()) mult = it->second;
    return llm_call_cost * mult + llm_char_cost * avg_prompt_chars;
  }

  /// Selectivity of a relational predicate under the independence assumption.
  double selectivity_of(const PredPtr& p) const {
    if (!p) return 1.0;
    switch (p->kind) {
      case Pred::Kind::Compare:
        if (p->op == CmpOp::Eq) return sel_eq;
        if (p->op == CmpOp::Ne) return sel_ne;
        return sel_range;
      case Pred::Kind::In:
        return std::min(1.0, sel_eq * double(p->in_list.size()));
      case Pred::Kind::And: {
        double s = 1.0;
        for (const auto& c : p->children) s *= selectivity_of(c);
        return s;
      }
      case Pred::Kind::Or: {
        double keep = 1.0;
        for (const auto& c : p->children) keep *= 1.0 - selectivity_of(c);
        return 1.0 - keep;
      }
      case Pred::Kind::Not:
        return 1.0 - selectivity_of(p->children[0]);
      case Pred::Kind::Const:
        return p->const_value ? 1.0 : 0.0;
    }
    return 1.0;
  }

  static CostModel from_yaml_file(const std::string& path);
};

inline CostModel CostModel::from_yaml_file(const std::string& path) {
  CostModel m;
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw LoadError("cost config error: " + std::string(e.what()));
  }
  if (auto b = doc["beta"]) {
    if (b["scan"]) m.beta_scan = b["scan"].as<double>();
    if (b["select"]) m.beta_select = b["select"].as<double>();
    if (b["project"]) m.beta_project = b["project"].as<double>();
    if (b["join"]) m.beta_join = b["join"].as<double>();
    if (b["topk"]) m.beta_topk = b["topk"].as<double>();
    if (b["aggregate"]) m.beta_aggregate = b["aggregate"].as<double>();
  }
  if (auto l = doc["llm"]) {
    if (l["call_cost"]) m.llm_call_cost = l["call_cost"].as<double>();
    if (l["char_cost"]) m.llm_char_cost = l["char_cost"].as<double>();
  }
  if (auto s = doc["selectivity"]) {
    if (s["eq"]) m.sel_eq = s["eq"].as<double>();
    if (s["ne"]) m.sel_ne = s["ne"].as<double>();
    if (s["range"]) m.sel_range = s["range"].as<double>();
    if (s["semantic"]) m.sel_semantic = s["semantic"].as<double>();
    if (s["semantic_join_match"]) m.sel_semantic_join_match = s["semantic_join_match"].as<double>();
  }
  return m;
}

struct NodeCost {
  double card_in = 0;   // summed over inputs for binary nodes
  double card_out = 0;
  double cost = 0;
  double llm_calls = 0;
};

struct CostEstimate {
  double total = 0;
  double llm_calls = 0;
  std::map<int, NodeCost> per_node;
};

namespace detail {

/// Cardinality and per-column distinct estimates flowing bottom-up.
struct Flow {
  double card = 0;
  std::map<std::string, double> distinct;  // by output column name
  std::vector<std::string> cols;           // output column names, when known

  bool has_col(const std::string& c) const {
    for (const auto& x : cols)
      if (x == c) return true;
    return false;
  }

  double distinct_of(const std::string& col) const {
    auto it = distinct.find(col);
    return std::min(card, it == distinct.end() ? card : it->second);
  }

  double distinct_tuple(const std::vector<std::string>& cols) const {
    double d = 1;
    for (const auto& c : cols) d *= std::max(1.0, distinct_of(c));
    return std::min(std::max(card, 0.0), d);
  }

  void cap(double c) {
    card = c;
    for (auto& [k, v] : distinct) v = std::min(v, std::max(c, 0.0));
  }
};

inline double udf_prompt_chars(const LlmUdf& udf) {
  return double(udf.expression.size()) + 24.0 * double(udf.input_columns.size()) + 48.0;
}

}  // namespace detail

/// Bottom-up cost estimate per the unified model: unary relational nodes cost
/// beta*|Tin|, binary nodes beta*f(|L|,|R|), semantic nodes pay per call over
/// dedup-aware distinct-input estimates. Cardinalities propagate through
/// selectivities under the independence assumption.
inline CostEstimate estimate_cost(const QueryPlan& plan, const CostModel& model,
                                  const TableStats& stats) {
  CostEstimate est;
  std::vector<detail::Flow> flows(plan.nodes.size());

  for (int id : plan.postorder()) {
    const PlanNode& n = plan.node(id);
    detail::Flow flow;
    NodeCost nc;
    switch (n.kind) {
      case OpKind::Scan: {
        flow.card = double(stats.card(n.table));
        for (const auto& [key, d] : stats.distinct)
          if (key.first == n.table) {
            flow.distinct[key.second] = double(d);
            flow.cols.push_back(key.second);
          }
        nc.card_in = flow.card;
        nc.cost = model.beta_scan * flow.card;
        break;
      }
      case OpKind::Select: {
        const detail::Flow& in = flows[std::size_t(n.children[0])];
        flow = in;
        nc.card_in = in.card;
        if (n.udf) {
          nc.llm_calls = in.distinct_tuple(n.udf->input_columns);
          nc.cost = nc.llm_calls * model.llm_cost_per_call(n.udf->output_kind.tag,
                                                           detail::udf_prompt_chars(*n.udf)) +
                    model.beta_select * in.card;
          flow.cap(in.card * model.sel_semantic);
        } else {
          nc.cost = model.beta_select * in.card;
          flow.cap(in.card * model.selectivity_of(n.predicate));
        }
        break;
      }
      case OpKind::Project: {
        const detail::Flow& in = flows[std::size_t(n.children[0])];
        nc.card_in = in.card;
        if (n.udf) {
          flow = in;
          for (const auto& f : n.udf->output_kind.fields) flow.distinct[f.name] = in.card;
          nc.llm_calls = in.distinct_tuple(n.udf->input_columns);
          nc.cost = nc.llm_calls * model.llm_cost_per_call(n.udf->output_kind.tag,
                                                           detail::udf_prompt_chars(*n.udf)) +
                    model.beta_project * in.card;
        } else if (n.derived) {
          flow = in;
          flow.distinct[n.derived->name] = in.card;
          nc.cost = model.beta_project * in.card;
        } else {
          flow.card = in.card;
          for (const auto& item : n.columns)
            flow.distinct[item.out_name()] = in.distinct_of(item.column);
          nc.cost = model.beta_project * in.card;
        }
        break;
      }
      case OpKind::Join: {
        const detail::Flow& l = flows[std::size_t(n.children[0])];
        const detail::Flow& r = flows[std::size_t(n.children[1])];
        nc.card_in = l.card + r.card;
        flow.distinct = l.distinct;
        for (const auto& [k, v] : r.distinct) flow.distinct[k] = v;
        if (n.udf) {
          std::vector<std::string> lcols, rcols;
          for (const auto& c : n.udf->input_columns)
            (l.distinct.count(c) ? lcols : rcols).push_back(c);
          double k1 = l.distinct_tuple(lcols), k2 = r.distinct_tuple(rcols);
          nc.llm_calls = k1 * k2;  // key-pair product, the nested-loop bound
          flow.card = l.card * r.card * model.sel_semantic_join_match;
          nc.cost = nc.llm_calls * model.llm_cost_per_call(n.udf->output_kind.tag,
                                                           detail::udf_prompt_chars(*n.udf)) +
                    model.beta_join * flow.card;
        } else {
          double dl = l.distinct_of(n.left_key), dr = r.distinct_of(n.right_key);
          flow.card = l.card * r.card / std::max({dl, dr, 1.0});
          nc.cost = model.beta_join * flow.card;  // f = estimated matched size
        }
        flow.cap(flow.card);
        break;
      }
      case OpKind::TopK: {
        const detail::Flow& in = flows[std::size_t(n.children[0])];
        flow = in;
        nc.card_in = in.card;
        if (n.udf) {
          double d = in.distinct_tuple(n.udf->input_columns);
          nc.llm_calls = d * (d - 1) / 2;  // one call per unordered distinct pair
          nc.cost = nc.llm_calls * model.llm_cost_per_call(n.udf->output_kind.tag,
                                                           detail::udf_prompt_chars(*n.udf)) +
                    model.beta_topk * in.card;
        } else {
          nc.cost = model.beta_topk * in.card;
        }
        if (n.k) flow.cap(std::min(in.card, double(*n.k)));
        break;
      }
      case OpKind::Aggregate: {
        const detail::Flow& in = flows[std::size_t(n.children[0])];
        nc.card_in = in.card;
        double groups = n.group_by.empty() ? std::min(1.0, in.card)
                                           : in.distinct_tuple(n.group_by);
        flow.card = groups;
        for (const auto& g : n.group_by) flow.distinct[g] = in.distinct_of(g);
        if (n.udf) {
          nc.llm_calls = groups;
          nc.cost = nc.llm_calls * model.llm_cost_per_call(n.udf->output_kind.tag,
                                                           detail::udf_prompt_chars(*n.udf)) +
                    model.beta_aggregate * in.card;
        } else {
          nc.cost = model.beta_aggregate * in.card;
        }
        flow.cap(flow.card);
        break;
      }
    }
    nc.card_out = flow.card;
    flows[std::size_t(id)] = std::move(flow);
    est.per_node[id] = nc;
    est.total += nc.cost;
    est.llm_calls += nc.llm_calls;
  }
  return est;
}

}  // namespace hra
