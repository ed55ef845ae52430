#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hra/relation.hpp"

namespace hra {

// Scalar expressions and predicates used by relational Select/Project nodes.
// Semantic predicates are not expressible here; a semantic node carries its
// LLM UDF as the node payload instead (one UDF per operator).

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

inline std::string_view cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

struct Scalar;
using ScalarPtr = std::shared_ptr<const Scalar>;

/// Scalar expression: column reference, literal, or a builtin function call.
/// Builtins: substr(s, start, len) with 1-based start, strftime(fmt, s) for
/// fmt in {%m-%d, %m, %d, %Y} over ISO-style date text, lower(s), upper(s).
struct Scalar {
  enum class Kind { ColumnRef, Literal, Func };

  Kind kind;
  std::string column;            // ColumnRef: unqualified name
  Value literal;                 // Literal
  std::string func;              // Func: builtin name
  std::vector<ScalarPtr> args;   // Func

  static ScalarPtr column_ref(std::string name) {
    auto s = std::make_shared<Scalar>();
    s->kind = Kind::ColumnRef;
    s->column = std::move(name);
    return s;
  }
  static ScalarPtr lit(Value v) {
    auto s = std::make_shared<Scalar>();
    s->kind = Kind::Literal;
    s->literal = std::move(v);
    return s;
  }
  static ScalarPtr call(std::string name, std::vector<ScalarPtr> args) {
    auto s = std::make_shared<Scalar>();
    s->kind = Kind::Func;
    s->func = std::move(name);
    s->args = std::move(args);
    return s;
  }
};

struct Pred;
using PredPtr = std::shared_ptr<const Pred>;

struct Pred {
  enum class Kind { Compare, In, And, Or, Not, Const };

  Kind kind;
  // Compare
  CmpOp op = CmpOp::Eq;
  ScalarPtr lhs, rhs;
  bool lenient = false;  // set when either side is an Any-typed column: numeric
                         // values then compare across int/float tags
  // In
  std::vector<Value> in_list;
  // And / Or / Not
  std::vector<PredPtr> children;
  // Const
  bool const_value = false;

  static PredPtr compare(CmpOp op, ScalarPtr l, ScalarPtr r) {
    auto p = std::make_shared<Pred>();
    p->kind = Kind::Compare;
    p->op = op;
    p->lhs = std::move(l);
    p->rhs = std::move(r);
    return p;
  }
  static PredPtr in_list_of(ScalarPtr l, std::vector<Value> vals) {
    auto p = std::make_shared<Pred>();
    p->kind = Kind::In;
    p->lhs = std::move(l);
    p->in_list = std::move(vals);
    return p;
  }
  static PredPtr conj(std::vector<PredPtr> cs) {
    auto p = std::make_shared<Pred>();
    p->kind = Kind::And;
    p->children = std::move(cs);
    return p;
  }
  static PredPtr disj(std::vector<PredPtr> cs) {
    auto p = std::make_shared<Pred>();
    p->kind = Kind::Or;
    p->children = std::move(cs);
    return p;
  }
  static PredPtr negate(PredPtr c) {
    auto p = std::make_shared<Pred>();
    p->kind = Kind::Not;
    p->children = {std::move(c)};
    return p;
  }
  static PredPtr constant(bool v) {
    auto p = std::make_shared<Pred>();
    p->kind = Kind::Const;
    p->const_value = v;
    return p;
  }
};

// ---------------------------------------------------------------------------
// Column collection

inline void collect_columns(const ScalarPtr& s, std::vector<std::string>& out) {
  if (!s) return;
  if (s->kind == Scalar::Kind::ColumnRef) {
    for (const auto& c : out)
      if (c == s->column) return;
    out.push_back(s->column);
    return;
  }
  for (const auto& a : s->args) collect_columns(a, out);
}

inline void collect_columns(const PredPtr& p, std::vector<std::string>& out) {
  if (!p) return;
  collect_columns(p->lhs, out);
  collect_columns(p->rhs, out);
  for (const auto& c : p->children) collect_columns(c, out);
}

// ---------------------------------------------------------------------------
// Typing

/// Result type of a scalar expression over the given schema. Unknown columns
/// and ill-typed calls raise TypeError.
inline TypeTag scalar_type(const ScalarPtr& s, const Schema& schema) {
  switch (s->kind) {
    case Scalar::Kind::ColumnRef: {
      auto idx = schema.index_of(s->column);
      if (!idx) throw TypeError("unknown column: " + s->column);
      return schema.at(*idx).type;
    }
    case Scalar::Kind::Literal:
      return s->literal.tag();
    case Scalar::Kind::Func: {
      if (s->func == "substr") {
        if (s->args.size() != 3) throw TypeError("substr expects 3 arguments");
        return TypeTag::Text;
      }
      if (s->func == "strftime") {
        if (s->args.size() != 2) throw TypeError("strftime expects 2 arguments");
        return TypeTag::Text;
      }
      if (s->func == "lower" || s->func == "upper") {
        if (s->args.size() != 1) throw TypeError(s->func + " expects 1 argument");
        return TypeTag::Text;
      }
      throw TypeError("unknown function: " + s->func);
    }
  }
  return TypeTag::Text;
}

/// Type-checks a predicate against a schema. Integer literals compared
/// against Float columns are rewritten to Float in place; all other
/// cross-tag comparisons are errors, except that comparisons touching an
/// Any-typed column defer to runtime (marked lenient).
inline void typecheck_pred(const PredPtr& p, const Schema& schema) {
  auto check_compare = [&](const Pred& c) {
    TypeTag lt = scalar_type(c.lhs, schema);
    TypeTag rt = scalar_type(c.rhs, schema);
    if (lt == TypeTag::Any || rt == TypeTag::Any) {
      const_cast<Pred&>(c).lenient = true;
      return;
    }
    auto promote = [](const Pred& c, const ScalarPtr& side, TypeTag other) {
      // int literal against a float column becomes a float literal
      if (side->kind == Scalar::Kind::Literal && side->literal.tag() == TypeTag::Integer &&
          other == TypeTag::Float) {
        const_cast<Scalar&>(*side).literal = Value(double(side->literal.as_int()));
        return true;
      }
      return false;
    };
    if (lt != rt) {
      if (promote(c, c.lhs, rt) || promote(c, c.rhs, lt)) return;
      throw TypeError("cannot compare " + std::string(type_name(lt)) + " with " +
                      std::string(type_name(rt)));
    }
  };
  switch (p->kind) {
    case Pred::Kind::Compare:
      check_compare(*p);
      break;
    case Pred::Kind::In: {
      TypeTag lt = scalar_type(p->lhs, schema);
      if (lt == TypeTag::Any) {
        const_cast<Pred&>(*p).lenient = true;
        break;
      }
      for (const auto& v : p->in_list)
        if (v.tag() != lt)
          throw TypeError("IN list value tag " + std::string(type_name(v.tag())) +
                          " does not match " + std::string(type_name(lt)));
      break;
    }
    case Pred::Kind::And:
    case Pred::Kind::Or:
    case Pred::Kind::Not:
      for (const auto& c : p->children) typecheck_pred(c, schema);
      break;
    case Pred::Kind::Const:
      break;
  }
}

// ---------------------------------------------------------------------------
// Evaluation

inline Value eval_scalar(const ScalarPtr& s, const Row& row, const Schema& schema) {
  switch (s->kind) {
    case Scalar::Kind::ColumnRef: {
      auto idx = schema.index_of(s->column);
      if (!idx) throw Error("unknown column at eval: " + s->column);
      return row.at(*idx);
    }
    case Scalar::Kind::Literal:
      return s->literal;
    case Scalar::Kind::Func: {
      std::vector<Value> args;
      args.reserve(s->args.size());
      for (const auto& a : s->args) args.push_back(eval_scalar(a, row, schema));
      for (const auto& a : args)
        if (a.is_null()) return Value::null();
      if (s->func == "substr") {
        const std::string& str = args[0].as_text();
        auto start = std::size_t(std::max<std::int64_t>(args[1].as_int() - 1, 0));
        auto len = std::size_t(std::max<std::int64_t>(args[2].as_int(), 0));
        if (start >= str.size()) return Value(std::string());
        return Value(str.substr(start, len));
      }
      if (s->func == "strftime") {
        const std::string& fmt = args[0].as_text();
        const std::string& date = args[1].as_text();
        // ISO-style input: YYYY-MM-DD with optional time suffix
        if (date.size() < 10 || date[4] != '-' || date[7] != '-')
          return Value::null();
        std::string year = date.substr(0, 4), month = date.substr(5, 2), day = date.substr(8, 2);
        if (fmt == "%m-%d") return Value(month + "-" + day);
        if (fmt == "%m") return Value(month);
        if (fmt == "%d") return Value(day);
        if (fmt == "%Y") return Value(year);
        throw Error("unsupported strftime format: " + fmt);
      }
      if (s->func == "lower" || s->func == "upper") {
        std::string out = args[0].as_text();
        for (char& c : out)
          c = s->func == "lower" ? char(std::tolower(static_cast<unsigned char>(c)))
                                 : char(std::toupper(static_cast<unsigned char>(c)));
        return Value(std::move(out));
      }
      throw Error("unknown function at eval: " + s->func);
    }
  }
  return Value::null();
}

/// Comparison with nulls collapsing to false. Lenient comparisons (Any-typed
/// columns) compare numerically across int/float tags.
inline bool eval_compare(CmpOp op, const Value& a, const Value& b, bool lenient) {
  if (a.is_null() || b.is_null()) return false;
  int c;
  if (lenient && a.tag() != b.tag()) {
    bool an = a.tag() == TypeTag::Integer || a.tag() == TypeTag::Float;
    bool bn = b.tag() == TypeTag::Integer || b.tag() == TypeTag::Float;
    if (an && bn) {
      double x = a.numeric(), y = b.numeric();
      c = x < y ? -1 : x > y ? 1 : 0;
    } else {
      // e.g. text vs number out of an untyped derived column
      return op == CmpOp::Ne;
    }
  } else {
    c = Value::compare(a, b);
  }
  switch (op) {
    case CmpOp::Eq: return c == 0;
    case CmpOp::Ne: return c != 0;
    case CmpOp::Lt: return c < 0;
    case CmpOp::Le: return c <= 0;
    case CmpOp::Gt: return c > 0;
    case CmpOp::Ge: return c >= 0;
  }
  return false;
}

inline bool eval_pred(const PredPtr& p, const Row& row, const Schema& schema) {
  switch (p->kind) {
    case Pred::Kind::Compare:
      return eval_compare(p->op, eval_scalar(p->lhs, row, schema),
                          eval_scalar(p->rhs, row, schema), p->lenient);
    case Pred::Kind::In: {
      Value v = eval_scalar(p->lhs, row, schema);
      if (v.is_null()) return false;
      for (const auto& cand : p->in_list)
        if (eval_compare(CmpOp::Eq, v, cand, p->lenient)) return true;
      return false;
    }
    case Pred::Kind::And:
      for (const auto& c : p->children)
        if (!eval_pred(c, row, schema)) return false;
      return true;
    case Pred::Kind::Or:
      for (const auto& c : p->children)
        if (eval_pred(c, row, schema)) return true;
      return false;
    case Pred::Kind::Not:
      return !eval_pred(p->children[0], row, schema);
    case Pred::Kind::Const:
      return p->const_value;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Printing (canonical text, re-parseable)

inline std::string print_scalar(const ScalarPtr& s) {
  switch (s->kind) {
    case Scalar::Kind::ColumnRef:
      return s->column;
    case Scalar::Kind::Literal: {
      if (s->literal.tag() == TypeTag::Text) {
        std::string out = "'";
        for (char c : s->literal.as_text()) {
          if (c == '\'' || c == '\\') out.push_back('\\');
          out.push_back(c);
        }
        out.push_back('\'');
        return out;
      }
      if (s->literal.is_null()) return "null";
      return s->literal.render();
    }
    case Scalar::Kind::Func: {
      std::string out = s->func + "(";
      for (std::size_t i = 0; i < s->args.size(); ++i) {
        if (i) out += ", ";
        out += print_scalar(s->args[i]);
      }
      return out + ")";
    }
  }
  return "";
}

inline std::string print_pred(const PredPtr& p) {
  auto wrap = [](const PredPtr& c, const std::string& text) {
    if (c->kind == Pred::Kind::And || c->kind == Pred::Kind::Or) return "(" + text + ")";
    return text;
  };
  switch (p->kind) {
    case Pred::Kind::Compare:
      return print_scalar(p->lhs) + " " + std::string(cmp_text(p->op)) + " " +
             print_scalar(p->rhs);
    case Pred::Kind::In: {
      std::string out = print_scalar(p->lhs) + " in (";
      for (std::size_t i = 0; i < p->in_list.size(); ++i) {
        if (i) out += ", ";
        out += print_scalar(Scalar::lit(p->in_list[i]));
      }
      return out + ")";
    }
    case Pred::Kind::And: {
      std::string out;
      for (std::size_t i = 0; i < p->children.size(); ++i) {
        if (i) out += " and ";
        out += wrap(p->children[i], print_pred(p->children[i]));
      }
      return out;
    }
    case Pred::Kind::Or: {
      std::string out;
      for (std::size_t i = 0; i < p->children.size(); ++i) {
        if (i) out += " or ";
        out += wrap(p->children[i], print_pred(p->children[i]));
      }
      return out;
    }
    case Pred::Kind::Not:
      return "not " + wrap(p->children[0], print_pred(p->children[0]));
    case Pred::Kind::Const:
      return p->const_value ? "true" : "false";
  }
  return "";
}

}  // namespace hra
