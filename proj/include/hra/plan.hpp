#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hra/expr.hpp"
#include "hra/udf.hpp"

namespace hra {

enum class OpKind { Scan, Select, Project, Join, TopK, Aggregate };

inline std::string_view op_name(OpKind k) {
  switch (k) {
    case OpKind::Scan: return "Scan";
    case OpKind::Select: return "Select";
    case OpKind::Project: return "Project";
    case OpKind::Join: return "Join";
    case OpKind::TopK: return "TopK";
    case OpKind::Aggregate: return "Aggregate";
  }
  return "?";
}

enum class JoinKind { InnerEqui, Semantic };

/// Projection item in restrict mode: keep `column`, optionally renamed.
struct ProjectItem {
  std::string column;
  std::string alias;  // empty keeps the original name

  std::string out_name() const { return alias.empty() ? column : alias; }
  friend bool operator==(const ProjectItem&, const ProjectItem&) = default;
};

/// Projection item in extend mode with a relational expression: input columns
/// are retained and `name` is appended.
struct DerivedItem {
  ScalarPtr expr;
  std::string name;
  TypeTag type = TypeTag::Any;
};

struct OrderKey {
  std::string column;
  bool ascending = true;
  friend bool operator==(const OrderKey&, const OrderKey&) = default;
};

enum class AggFunc { Sum, Count, CountStar, Avg, Min, Max };

inline std::string_view agg_name(AggFunc f) {
  switch (f) {
    case AggFunc::Sum: return "sum";
    case AggFunc::Count: return "count";
    case AggFunc::CountStar: return "count";
    case AggFunc::Avg: return "avg";
    case AggFunc::Min: return "min";
    case AggFunc::Max: return "max";
  }
  return "?";
}

struct AggSpec {
  AggFunc func = AggFunc::Count;
  std::string column;  // empty for count(*)
  std::string alias;
  friend bool operator==(const AggSpec&, const AggSpec&) = default;
};

/// One operator of a query plan tree. Field usage depends on `kind`; a node
/// is semantic iff `udf` is set.
struct PlanNode {
  int id = -1;
  OpKind kind = OpKind::Scan;
  std::vector<int> children;

  // Scan
  std::string table;
  // Select (relational)
  PredPtr predicate;
  // Project
  std::vector<ProjectItem> columns;     // restrict mode
  std::optional<DerivedItem> derived;   // relational extend mode
  // Join
  JoinKind join_kind = JoinKind::InnerEqui;
  std::string left_key, right_key;
  // TopK
  std::vector<OrderKey> order;
  std::optional<std::int64_t> k;
  // Aggregate
  std::vector<std::string> group_by;
  std::optional<AggSpec> agg;

  // Semantic payload
  std::optional<LlmUdf> udf;

  bool is_semantic() const { return udf.has_value(); }
};

/// Rooted operator tree. Node ids are dense indexes into `nodes`, assigned at
/// build time and never reused within a plan.
struct QueryPlan {
  std::vector<PlanNode> nodes;
  int root = -1;

  const PlanNode& node(int id) const { return nodes.at(std::size_t(id)); }
  PlanNode& node(int id) { return nodes.at(std::size_t(id)); }
  bool empty() const { return nodes.empty(); }

  std::vector<int> semantic_nodes() const {
    std::vector<int> out;
    for (const auto& n : nodes)
      if (n.is_semantic()) out.push_back(n.id);
    return out;
  }

  /// Parent of each node (-1 for the root). Assumes tree shape.
  std::vector<int> parents() const {
    std::vector<int> par(nodes.size(), -1);
    for (const auto& n : nodes)
      for (int c : n.children) par.at(std::size_t(c)) = n.id;
    return par;
  }

  /// Nodes in postorder (children before parents), from the root.
  std::vector<int> postorder() const {
    std::vector<int> out;
    collect_post(root, out);
    return out;
  }

 private:
  void collect_post(int id, std::vector<int>& out) const {
    for (int c : node(id).children) collect_post(c, out);
    out.push_back(id);
  }
};

/// Incremental plan construction with dense id assignment.
class PlanBuilder {
 public:
  int add(PlanNode n) {
    n.id = int(nodes_.size());
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  int scan(std::string table) {
    PlanNode n;
    n.kind = OpKind::Scan;
    n.table = std::move(table);
    return add(std::move(n));
  }
  int select(PredPtr pred, int child) {
    PlanNode n;
    n.kind = OpKind::Select;
    n.predicate = std::move(pred);
    n.children = {child};
    return add(std::move(n));
  }
  int semantic_select(LlmUdf udf, int child) {
    PlanNode n;
    n.kind = OpKind::Select;
    n.udf = std::move(udf);
    n.children = {child};
    return add(std::move(n));
  }
  int project(std::vector<ProjectItem> cols, int child) {
    PlanNode n;
    n.kind = OpKind::Project;
    n.columns = std::move(cols);
    n.children = {child};
    return add(std::move(n));
  }
  int project_derived(DerivedItem item, int child) {
    PlanNode n;
    n.kind = OpKind::Project;
    n.derived = std::move(item);
    n.children = {child};
    return add(std::move(n));
  }
  int semantic_project(LlmUdf udf, int child) {
    PlanNode n;
    n.kind = OpKind::Project;
    n.udf = std::move(udf);
    n.children = {child};
    return add(std::move(n));
  }
  int join(int left, int right, std::string lkey, std::string rkey) {
    PlanNode n;
    n.kind = OpKind::Join;
    n.join_kind = JoinKind::InnerEqui;
    n.left_key = std::move(lkey);
    n.right_key = std::move(rkey);
    n.children = {left, right};
    return add(std::move(n));
  }
  int semantic_join(int left, int right, LlmUdf udf) {
    PlanNode n;
    n.kind = OpKind::Join;
    n.join_kind = JoinKind::Semantic;
    n.udf = std::move(udf);
    n.children = {left, right};
    return add(std::move(n));
  }
  int topk(std::vector<OrderKey> order, std::optional<std::int64_t> k, int child) {
    PlanNode n;
    n.kind = OpKind::TopK;
    n.order = std::move(order);
    n.k = k;
    n.children = {child};
    return add(std::move(n));
  }
  int semantic_topk(LlmUdf udf, std::optional<std::int64_t> k, int child) {
    PlanNode n;
    n.kind = OpKind::TopK;
    n.udf = std::move(udf);
    n.k = k;
    n.children = {child};
    return add(std::move(n));
  }
  int aggregate(AggSpec spec, std::vector<std::string> group_by, int child) {
    PlanNode n;
    n.kind = OpKind::Aggregate;
    n.agg = std::move(spec);
    n.group_by = std::move(group_by);
    n.children = {child};
    return add(std::move(n));
  }
  int semantic_aggregate(LlmUdf udf, std::vector<std::string> group_by, int child) {
    PlanNode n;
    n.kind = OpKind::Aggregate;
    n.udf = std::move(udf);
    n.group_by = std::move(group_by);
    n.children = {child};
    return add(std::move(n));
  }

  QueryPlan finish(int root) {
    QueryPlan p;
    p.nodes = std::move(nodes_);
    p.root = root;
    return p;
  }

 private:
  std::vector<PlanNode> nodes_;
};

// ---------------------------------------------------------------------------
// Structural equality (modulo node ids)

inline bool scalar_equal(const ScalarPtr& a, const ScalarPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Scalar::Kind::ColumnRef: return a->column == b->column;
    case Scalar::Kind::Literal: return a->literal == b->literal;
    case Scalar::Kind::Func: {
      if (a->func != b->func || a->args.size() != b->args.size()) return false;
      for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!scalar_equal(a->args[i], b->args[i])) return false;
      return true;
    }
  }
  return false;
}

inline bool pred_equal(const PredPtr& a, const PredPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Pred::Kind::Compare:
      return a->op == b->op && scalar_equal(a->lhs, b->lhs) && scalar_equal(a->rhs, b->rhs);
    case Pred::Kind::In:
      return scalar_equal(a->lhs, b->lhs) && a->in_list == b->in_list;
    case Pred::Kind::Const:
      return a->const_value == b->const_value;
    default: {
      if (a->children.size() != b->children.size()) return false;
      for (std::size_t i = 0; i < a->children.size(); ++i)
        if (!pred_equal(a->children[i], b->children[i])) return false;
      return true;
    }
  }
}

inline bool node_payload_equal(const PlanNode& a, const PlanNode& b) {
  if (a.kind != b.kind) return false;
  if (a.udf.has_value() != b.udf.has_value()) return false;
  if (a.udf && !(*a.udf == *b.udf)) return false;
  switch (a.kind) {
    case OpKind::Scan:
      return a.table == b.table;
    case OpKind::Select:
      return pred_equal(a.predicate, b.predicate);
    case OpKind::Project: {
      if (a.columns != b.columns) return false;
      if (a.derived.has_value() != b.derived.has_value()) return false;
      if (a.derived)
        return scalar_equal(a.derived->expr, b.derived->expr) && a.derived->name == b.derived->name &&
               a.derived->type == b.derived->type;
      return true;
    }
    case OpKind::Join:
      return a.join_kind == b.join_kind && a.left_key == b.left_key && a.right_key == b.right_key;
    case OpKind::TopK:
      return a.order == b.order && a.k == b.k;
    case OpKind::Aggregate:
      return a.agg == b.agg && a.group_by == b.group_by;
  }
  return false;
}

inline bool structurally_equal(const QueryPlan& pa, int a, const QueryPlan& pb, int b) {
  const PlanNode& na = pa.node(a);
  const PlanNode& nb = pb.node(b);
  if (!node_payload_equal(na, nb)) return false;
  if (na.children.size() != nb.children.size()) return false;
  for (std::size_t i = 0; i < na.children.size(); ++i)
    if (!structurally_equal(pa, na.children[i], pb, nb.children[i])) return false;
  return true;
}

inline bool structurally_equal(const QueryPlan& a, const QueryPlan& b) {
  if (a.empty() || b.empty()) return a.empty() && b.empty();
  return structurally_equal(a, a.root, b, b.root);
}

}  // namespace hra
