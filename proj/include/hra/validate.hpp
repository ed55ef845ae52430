#pragma once

#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hra/catalog.hpp"
#include "hra/plan.hpp"

namespace hra {

/// Table schema lookup shared by validation, the optimizer, and the executor.
using TableSchemaFn = std::function<std::optional<Schema>(const std::string&)>;

inline TableSchemaFn schema_source(const SemanticDataModel& model) {
  return [&model](const std::string& name) -> std::optional<Schema> {
    if (!model.find_table(name)) return std::nullopt;
    return model.table_schema(name);
  };
}

inline TableSchemaFn schema_source(const Database& db) {
  return [&db](const std::string& name) -> std::optional<Schema> {
    const Relation* r = db.find(name);
    if (!r) return std::nullopt;
    return r->schema();
  };
}

enum class IssueKind {
  UnknownTable,
  UnknownColumn,
  ArityViolation,
  KindMismatch,
  DuplicateColumn,
  BadUdf,
  BadStructure,
  TypeMismatch,
};

inline std::string_view issue_kind_name(IssueKind k) {
  switch (k) {
    case IssueKind::UnknownTable: return "unknown-table";
    case IssueKind::UnknownColumn: return "unknown-column";
    case IssueKind::ArityViolation: return "arity-violation";
    case IssueKind::KindMismatch: return "kind-mismatch";
    case IssueKind::DuplicateColumn: return "duplicate-column";
    case IssueKind::BadUdf: return "bad-udf";
    case IssueKind::BadStructure: return "bad-structure";
    case IssueKind::TypeMismatch: return "type-mismatch";
  }
  return "?";
}

struct Issue {
  IssueKind kind;
  int node_id = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const { return issues.empty(); }

  std::string render() const {
    std::ostringstream os;
    for (const auto& i : issues)
      os << issue_kind_name(i.kind) << " (node " << i.node_id << "): " << i.message << "\n";
    return os.str();
  }
};

namespace detail {

/// Declared output kind compatible with the hosting operator, per the
/// operator/UDF matrix: Select and Join predicates and TopK comparators are
/// boolean; Project produces scalar or tuple; Aggregate produces aggregate.
inline bool kind_compatible(OpKind op, OutputKindTag kind) {
  switch (op) {
    case OpKind::Select:
    case OpKind::Join:
    case OpKind::TopK:
      return kind == OutputKindTag::Boolean;
    case OpKind::Project:
      return kind == OutputKindTag::Scalar || kind == OutputKindTag::Tuple;
    case OpKind::Aggregate:
      return kind == OutputKindTag::Aggregate;
    case OpKind::Scan:
      return false;
  }
  return false;
}

inline std::size_t expected_children(OpKind k) {
  switch (k) {
    case OpKind::Scan: return 0;
    case OpKind::Join: return 2;
    default: return 1;
  }
}

}  // namespace detail

/// Output schema of a subtree. Throws on unknown tables/columns; callers that
/// need a report use validate_plan instead.
inline Schema schema_of(const QueryPlan& plan, int id, const TableSchemaFn& tables) {
  const PlanNode& n = plan.node(id);
  switch (n.kind) {
    case OpKind::Scan: {
      auto s = tables(n.table);
      if (!s) throw Error("unknown table: " + n.table);
      return *s;
    }
    case OpKind::Select:
      return schema_of(plan, n.children.at(0), tables);
    case OpKind::Project: {
      Schema in = schema_of(plan, n.children.at(0), tables);
      if (n.udf) {
        Schema out = in;
        for (const auto& f : n.udf->output_kind.fields) out.add({f.name, f.type, ""});
        return out;
      }
      if (n.derived) {
        Schema out = in;
        out.add({n.derived->name, n.derived->type, ""});
        return out;
      }
      Schema out;
      for (const auto& item : n.columns) {
        auto idx = in.index_of(item.column);
        if (!idx) throw Error("unknown column: " + item.column);
        out.add({item.out_name(), in.at(*idx).type, in.at(*idx).description});
      }
      return out;
    }
    case OpKind::Join: {
      Schema l = schema_of(plan, n.children.at(0), tables);
      Schema r = schema_of(plan, n.children.at(1), tables);
      Schema out = l;
      for (const auto& c : r.columns()) out.add(c);  // throws on duplicate names
      return out;
    }
    case OpKind::TopK:
      return schema_of(plan, n.children.at(0), tables);
    case OpKind::Aggregate: {
      Schema in = schema_of(plan, n.children.at(0), tables);
      Schema out;
      for (const auto& g : n.group_by) {
        auto idx = in.index_of(g);
        if (!idx) throw Error("unknown column: " + g);
        out.add(in.at(*idx));
      }
      if (n.udf) {
        for (const auto& f : n.udf->output_kind.fields) out.add({f.name, f.type, ""});
      } else if (n.agg) {
        TypeTag t = TypeTag::Integer;
        if (n.agg->func == AggFunc::Avg) {
          t = TypeTag::Float;
        } else if (n.agg->func == AggFunc::Sum || n.agg->func == AggFunc::Min ||
                   n.agg->func == AggFunc::Max) {
          auto idx = in.index_of(n.agg->column);
          if (!idx) throw Error("unknown column: " + n.agg->column);
          t = n.agg->func == AggFunc::Sum && in.at(*idx).type != TypeTag::Float
                  ? (in.at(*idx).type == TypeTag::Any ? TypeTag::Any : TypeTag::Integer)
                  : in.at(*idx).type;
        }
        out.add({n.agg->alias, t, ""});
      }
      return out;
    }
  }
  return {};
}

/// Checks a structurally well-formed plan against a catalog. Every problem
/// becomes a report entry; an empty report means valid.
inline ValidationReport validate_plan(const QueryPlan& plan, const SemanticDataModel& catalog) {
  ValidationReport report;
  if (plan.empty()) {
    report.issues.push_back({IssueKind::BadStructure, -1, "empty plan"});
    return report;
  }
  auto add = [&](IssueKind k, int node, std::string msg) {
    report.issues.push_back({k, node, std::move(msg)});
  };

  // tree shape: every node except the root has exactly one parent
  std::vector<int> indeg(plan.nodes.size(), 0);
  for (const auto& n : plan.nodes)
    for (int c : n.children) {
      if (c < 0 || std::size_t(c) >= plan.nodes.size()) {
        add(IssueKind::BadStructure, n.id, "child id out of range");
        return report;
      }
      ++indeg[std::size_t(c)];
    }
  for (const auto& n : plan.nodes) {
    bool reachable = n.id == plan.root || indeg[std::size_t(n.id)] > 0;
    if (indeg[std::size_t(n.id)] > 1)
      add(IssueKind::BadStructure, n.id, "node has multiple parents");
    if (!reachable) add(IssueKind::BadStructure, n.id, "node unreachable from root");
  }
  if (!report.ok()) return report;

  TableSchemaFn tables = schema_source(catalog);

  // bottom-up schema computation, collecting issues instead of throwing
  std::vector<std::optional<Schema>> schemas(plan.nodes.size());
  for (int id : plan.postorder()) {
    const PlanNode& n = plan.node(id);
    if (n.children.size() != detail::expected_children(n.kind)) {
      add(IssueKind::ArityViolation, id,
          std::string(op_name(n.kind)) + " expects " +
              std::to_string(detail::expected_children(n.kind)) + " children, has " +
              std::to_string(n.children.size()));
      continue;
    }
    bool kids_ok = true;
    for (int c : n.children) kids_ok = kids_ok && schemas[std::size_t(c)].has_value();

    if (n.udf) {
      if (!detail::kind_compatible(n.kind, n.udf->output_kind.tag))
        add(IssueKind::KindMismatch, id,
            std::string(op_name(n.kind)) + " cannot host a " +
                std::string(output_kind_name(n.udf->output_kind.tag)) + " UDF");
      for (const auto& p : n.udf->undeclared_placeholders())
        add(IssueKind::BadUdf, id, "placeholder {" + p + "} is not an input column of " +
                                       (n.udf->name.empty() ? "inline udf" : n.udf->name));
      if (n.kind == OpKind::Project && n.udf->output_kind.fields.empty())
        add(IssueKind::BadUdf, id, "projection UDF declares zero output columns");
    }

    if (!kids_ok) continue;

    auto check_cols = [&](const std::vector<std::string>& cols, const Schema& in) {
      for (const auto& c : cols)
        if (!in.has(c)) add(IssueKind::UnknownColumn, id, "unknown column: " + c);
    };

    switch (n.kind) {
      case OpKind::Scan: {
        if (!catalog.find_table(n.table)) {
          add(IssueKind::UnknownTable, id, "unknown table: " + n.table);
          continue;
        }
        break;
      }
      case OpKind::Select: {
        const Schema& in = *schemas[std::size_t(n.children[0])];
        if (n.udf) {
          check_cols(n.udf->input_columns, in);
        } else if (n.predicate) {
          std::vector<std::string> cols;
          collect_columns(n.predicate, cols);
          check_cols(cols, in);
          bool cols_ok = true;
          for (const auto& c : cols) cols_ok = cols_ok && in.has(c);
          if (cols_ok) {
            try {
              typecheck_pred(n.predicate, in);
            } catch (const TypeError& e) {
              add(IssueKind::TypeMismatch, id, e.what());
            }
          }
        } else {
          add(IssueKind::BadStructure, id, "select without predicate or UDF");
        }
        break;
      }
      case OpKind::Project: {
        const Schema& in = *schemas[std::size_t(n.children[0])];
        if (n.udf) {
          check_cols(n.udf->input_columns, in);
        } else if (n.derived) {
          std::vector<std::string> cols;
          collect_columns(n.derived->expr, cols);
          check_cols(cols, in);
        } else if (n.columns.empty()) {
          add(IssueKind::BadStructure, id, "projection with no columns");
        } else {
          for (const auto& item : n.columns)
            if (!in.has(item.column)) add(IssueKind::UnknownColumn, id, "unknown column: " + item.column);
        }
        break;
      }
      case OpKind::Join: {
        const Schema& l = *schemas[std::size_t(n.children[0])];
        const Schema& r = *schemas[std::size_t(n.children[1])];
        if (n.udf) {
          for (const auto& c : n.udf->input_columns)
            if (!l.has(c) && !r.has(c)) add(IssueKind::UnknownColumn, id, "unknown column: " + c);
        } else {
          if (!l.has(n.left_key)) add(IssueKind::UnknownColumn, id, "unknown column: " + n.left_key);
          if (!r.has(n.right_key))
            add(IssueKind::UnknownColumn, id, "unknown column: " + n.right_key);
        }
        for (const auto& c : r.columns())
          if (l.has(c.name))
            add(IssueKind::DuplicateColumn, id,
                "column " + c.name + " appears on both join sides; rename with Project first");
        break;
      }
      case OpKind::TopK: {
        const Schema& in = *schemas[std::size_t(n.children[0])];
        if (n.udf) {
          check_cols(n.udf->input_columns, in);
        } else {
          for (const auto& o : n.order)
            if (!in.has(o.column)) add(IssueKind::UnknownColumn, id, "unknown column: " + o.column);
        }
        if (n.k && *n.k <= 0) add(IssueKind::BadStructure, id, "k must be positive");
        break;
      }
      case OpKind::Aggregate: {
        const Schema& in = *schemas[std::size_t(n.children[0])];
        check_cols(n.group_by, in);
        if (n.udf) {
          check_cols(n.udf->input_columns, in);
        } else if (n.agg) {
          if (n.agg->func != AggFunc::CountStar && !in.has(n.agg->column))
            add(IssueKind::UnknownColumn, id, "unknown column: " + n.agg->column);
          if (n.agg->func == AggFunc::Sum || n.agg->func == AggFunc::Avg) {
            auto idx = in.index_of(n.agg->column);
            if (idx) {
              TypeTag t = in.at(*idx).type;
              if (t != TypeTag::Integer && t != TypeTag::Float && t != TypeTag::Any)
                add(IssueKind::TypeMismatch, id,
                    std::string(agg_name(n.agg->func)) + " over non-numeric column " +
                        n.agg->column);
            }
          }
        } else {
          add(IssueKind::BadStructure, id, "aggregate without spec or UDF");
        }
        break;
      }
    }

    // schema for the parent; failures here were already reported above
    try {
      schemas[std::size_t(id)] = schema_of(plan, id, tables);
    } catch (const Error&) {
      schemas[std::size_t(id)] = std::nullopt;
    }
  }
  return report;
}

}  // namespace hra
