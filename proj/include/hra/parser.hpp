#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hra/plan.hpp"
#include "hra/validate.hpp"

namespace hra {

// Concrete HRA grammar (see docs/grammar.md): functional prefix form
//   Scan            bare table name
//   Select(pred | Udf(cols), child)
//   Project(col [-> alias], ... | Udf(cols) -> name[:type] | expr -> name[:type], child)
//   Join(left, right, lcol = rcol | Udf(cols))
//   TopK(order | Udf(cols) [, k], child)
//   Aggregate(agg(col) -> alias | Udf(cols) -> alias[:type] [, by(cols)], child)
// with an optional prelude of `WITH UDF Name = "expression"` declarations and
// inline UDFs written llm("expression", cols...). Parsing never invokes a
// backend.

enum class ParseErrorCode {
  Syntax,
  UnknownTable,
  UnknownColumn,
  UdfPlaceholder,
  KindMismatch,
  Validation,
};

inline std::string_view parse_error_code_name(ParseErrorCode c) {
  switch (c) {
    case ParseErrorCode::Syntax: return "syntax-error";
    case ParseErrorCode::UnknownTable: return "unknown-table";
    case ParseErrorCode::UnknownColumn: return "unknown-column";
    case ParseErrorCode::UdfPlaceholder: return "udf-placeholder";
    case ParseErrorCode::KindMismatch: return "kind-mismatch";
    case ParseErrorCode::Validation: return "validation-error";
  }
  return "?";
}

struct ParseError : Error {
  ParseError(ParseErrorCode code, std::string msg, int line = 0, int col = 0)
      : Error(format(code, msg, line, col)), code(code), line(line), col(col) {}
  ParseErrorCode code;
  int line, col;

  static std::string format(ParseErrorCode code, const std::string& msg, int line, int col) {
    std::ostringstream os;
    os << parse_error_code_name(code);
    if (line > 0) os << " at " << line << ":" << col;
    os << ": " << msg;
    return os.str();
  }
};

namespace detail {

struct Token {
  enum class Kind { Ident, Number, String, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {
    advance();
    tok2_ = tok_;
    advance();
    std::swap(tok_, tok2_);
  }

  const Token& peek() const { return tok_; }
  const Token& peek2() const { return tok2_; }

  Token next() {
    Token t = tok_;
    tok_ = tok2_;
    advance();
    std::swap(tok_, tok2_);
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) step();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) return;
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      tok_.kind = Token::Kind::Ident;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        tok_.text.push_back(src_[pos_]);
        step();
      }
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok_.kind = Token::Kind::Number;
      bool dot = false;
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) || (!dot && src_[pos_] == '.'))) {
        // a dot must be followed by a digit to belong to the number
        if (src_[pos_] == '.') {
          if (pos_ + 1 >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))
            break;
          dot = true;
        }
        tok_.text.push_back(src_[pos_]);
        step();
      }
      return;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      step();
      tok_.kind = Token::Kind::String;
      while (pos_ < src_.size() && src_[pos_] != quote) {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
          step();
          char e = src_[pos_];
          tok_.text.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
          step();
          continue;
        }
        tok_.text.push_back(src_[pos_]);
        step();
      }
      if (pos_ >= src_.size())
        throw ParseError(ParseErrorCode::Syntax, "unterminated string literal", tok_.line, tok_.col);
      step();  // closing quote
      return;
    }
    tok_.kind = Token::Kind::Punct;
    auto two = src_.substr(pos_, 2);
    if (two == "->" || two == "!=" || two == "<=" || two == ">=" || two == "==") {
      tok_.text = std::string(two);
      step();
      step();
      return;
    }
    tok_.text = std::string(1, c);
    step();
  }

  void step() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
  Token tok2_;
};

inline bool ieq(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

class Parser {
 public:
  Parser(std::string_view src, const SemanticDataModel* catalog)
      : lex_(src), catalog_(catalog) {}

  QueryPlan parse() {
    parse_prelude();
    int root = parse_expr();
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      fail("unexpected trailing input '" + t.text + "'", t);
    QueryPlan plan = builder_.finish(root);
    if (catalog_) validate(plan);
    return plan;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, const Token& t) {
    throw ParseError(ParseErrorCode::Syntax, msg, t.line, t.col);
  }

  Token expect_punct(const std::string& p) {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Punct || t.text != p)
      fail("expected '" + p + "', found '" + t.text + "'", t);
    return t;
  }

  bool accept_punct(const std::string& p) {
    if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == p) {
      lex_.next();
      return true;
    }
    return false;
  }

  Token expect_ident() {
    Token t = lex_.next();
    if (t.kind != Token::Kind::Ident) fail("expected identifier, found '" + t.text + "'", t);
    return t;
  }

  bool peek_ident(std::string_view word) const {
    return lex_.peek().kind == Token::Kind::Ident && ieq(lex_.peek().text, word);
  }

  void parse_prelude() {
    while (peek_ident("with")) {
      lex_.next();
      Token kw = expect_ident();
      if (!ieq(kw.text, "udf")) fail("expected UDF after WITH", kw);
      Token name = expect_ident();
      expect_punct("=");
      Token expr = lex_.next();
      if (expr.kind != Token::Kind::String) fail("expected quoted UDF expression", expr);
      declared_[name.text] = expr.text;
    }
  }

  // ------- expressions (operators) -------

  int parse_expr() {
    Token t = lex_.peek();
    if (t.kind != Token::Kind::Ident) fail("expected operator or table name", t);
    const std::string& w = t.text;
    if (w == "Select") return parse_select();
    if (w == "Project") return parse_project();
    if (w == "Join") return parse_join();
    if (w == "TopK") return parse_topk();
    if (w == "Aggregate") return parse_aggregate();
    // bare table name = Scan
    lex_.next();
    if (lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == "(")
      fail("unknown operator '" + w + "'", t);
    return builder_.scan(w);
  }

  int parse_select() {
    lex_.next();
    expect_punct("(");
    if (auto udf = try_parse_udf_app(OutputKind::boolean())) {
      expect_punct(",");
      int child = parse_expr();
      expect_punct(")");
      return builder_.semantic_select(std::move(*udf), child);
    }
    PredPtr pred = parse_pred();
    expect_punct(",");
    int child = parse_expr();
    expect_punct(")");
    return builder_.select(std::move(pred), child);
  }

  int parse_project() {
    lex_.next();
    expect_punct("(");
    // extend mode: a UDF or function expression followed by ->
    if (auto udf = try_parse_udf_app(OutputKind::boolean())) {
      expect_punct("->");
      OutputKind kind = parse_output_spec(OutputKindTag::Scalar);
      udf->output_kind = kind;
      expect_punct(",");
      int child = parse_expr();
      expect_punct(")");
      return builder_.semantic_project(std::move(*udf), child);
    }
    if (is_builtin_call()) {
      ScalarPtr expr = parse_scalar();
      expect_punct("->");
      Token name = expect_ident();
      TypeTag type = accept_punct(":") ? parse_type() : TypeTag::Any;
      expect_punct(",");
      int child = parse_expr();
      expect_punct(")");
      return builder_.project_derived({std::move(expr), name.text, type}, child);
    }
    // restrict mode: column list with optional renames
    std::vector<ProjectItem> items;
    while (true) {
      Token col = expect_ident();
      ProjectItem item{column_name(col), ""};
      if (accept_punct("->")) item.alias = expect_ident().text;
      items.push_back(std::move(item));
      expect_punct(",");
      if (!is_operator_or_table_next()) continue;
      break;
    }
    int child = parse_expr();
    expect_punct(")");
    return builder_.project(std::move(items), child);
  }

  int parse_join() {
    lex_.next();
    expect_punct("(");
    int left = parse_expr();
    expect_punct(",");
    int right = parse_expr();
    expect_punct(",");
    if (auto udf = try_parse_udf_app(OutputKind::boolean())) {
      expect_punct(")");
      return builder_.semantic_join(left, right, std::move(*udf));
    }
    Token lcol = expect_ident();
    std::string lname = column_name(lcol);
    expect_punct("=");
    Token rcol = expect_ident();
    std::string rname = column_name(rcol);
    expect_punct(")");
    return builder_.join(left, right, lname, rname);
  }

  int parse_topk() {
    lex_.next();
    expect_punct("(");
    std::optional<LlmUdf> udf = try_parse_udf_app(OutputKind::boolean());
    std::vector<OrderKey> order;
    if (!udf) {
      while (true) {
        Token col = expect_ident();
        OrderKey key{column_name(col), true};
        if (peek_ident("asc")) {
          lex_.next();
        } else if (peek_ident("desc")) {
          lex_.next();
          key.ascending = false;
        }
        order.push_back(std::move(key));
        expect_punct(",");
        if (lex_.peek().kind == Token::Kind::Ident && !is_operator_or_table_next() &&
            !peek_number_next())
          continue;
        break;
      }
    } else {
      expect_punct(",");
    }
    std::optional<std::int64_t> k;
    if (lex_.peek().kind == Token::Kind::Number) {
      Token num = lex_.next();
      k = std::stoll(num.text);
      expect_punct(",");
    }
    int child = parse_expr();
    expect_punct(")");
    if (udf) return builder_.semantic_topk(std::move(*udf), k, child);
    return builder_.topk(std::move(order), k, child);
  }

  int parse_aggregate() {
    lex_.next();
    expect_punct("(");
    std::optional<LlmUdf> udf;
    AggSpec spec;
    if ((udf = try_parse_udf_app(OutputKind::boolean()))) {
      expect_punct("->");
      Token alias = expect_ident();
      TypeTag type = accept_punct(":") ? parse_type() : TypeTag::Any;
      udf->output_kind = OutputKind::aggregate(alias.text, type);
    } else {
      Token fn = expect_ident();
      if (ieq(fn.text, "sum")) spec.func = AggFunc::Sum;
      else if (ieq(fn.text, "count")) spec.func = AggFunc::Count;
      else if (ieq(fn.text, "avg")) spec.func = AggFunc::Avg;
      else if (ieq(fn.text, "min")) spec.func = AggFunc::Min;
      else if (ieq(fn.text, "max")) spec.func = AggFunc::Max;
      else fail("unknown aggregate function '" + fn.text + "'", fn);
      expect_punct("(");
      if (accept_punct("*")) {
        if (spec.func != AggFunc::Count) fail("only count accepts *", fn);
        spec.func = AggFunc::CountStar;
      } else {
        spec.column = column_name(expect_ident());
      }
      expect_punct(")");
      expect_punct("->");
      spec.alias = expect_ident().text;
    }
    std::vector<std::string> group_by;
    expect_punct(",");
    if (peek_ident("by")) {
      lex_.next();
      expect_punct("(");
      while (true) {
        group_by.push_back(column_name(expect_ident()));
        if (accept_punct(",")) continue;
        break;
      }
      expect_punct(")");
      expect_punct(",");
    }
    int child = parse_expr();
    expect_punct(")");
    if (udf) return builder_.semantic_aggregate(std::move(*udf), std::move(group_by), child);
    return builder_.aggregate(std::move(spec), std::move(group_by), child);
  }

  // ------- predicates and scalars -------

  PredPtr parse_pred() {
    PredPtr left = parse_and();
    std::vector<PredPtr> parts{left};
    while (peek_ident("or")) {
      lex_.next();
      parts.push_back(parse_and());
    }
    return parts.size() == 1 ? parts[0] : Pred::disj(std::move(parts));
  }

  PredPtr parse_and() {
    std::vector<PredPtr> parts{parse_unary()};
    while (peek_ident("and")) {
      lex_.next();
      parts.push_back(parse_unary());
    }
    return parts.size() == 1 ? parts[0] : Pred::conj(std::move(parts));
  }

  PredPtr parse_unary() {
    if (peek_ident("not")) {
      lex_.next();
      return Pred::negate(parse_unary());
    }
    if (accept_punct("(")) {
      PredPtr inner = parse_pred();
      expect_punct(")");
      return inner;
    }
    return parse_atom();
  }

  PredPtr parse_atom() {
    Token t = lex_.peek();
    if (t.kind == Token::Kind::Ident && ieq(t.text, "true")) {
      lex_.next();
      return Pred::constant(true);
    }
    if (t.kind == Token::Kind::Ident && ieq(t.text, "false")) {
      lex_.next();
      return Pred::constant(false);
    }
    if (t.kind == Token::Kind::Ident && (declared_.count(t.text) || ieq(t.text, "llm")))
      fail("semantic UDFs cannot be nested inside boolean expressions", t);
    ScalarPtr lhs = parse_scalar();
    Token op = lex_.peek();
    if (op.kind == Token::Kind::Ident && ieq(op.text, "in")) {
      lex_.next();
      expect_punct("(");
      std::vector<Value> vals;
      while (true) {
        vals.push_back(parse_literal());
        if (accept_punct(",")) continue;
        break;
      }
      expect_punct(")");
      return Pred::in_list_of(std::move(lhs), std::move(vals));
    }
    if (op.kind == Token::Kind::Ident && ieq(op.text, "between")) {
      lex_.next();
      Value lo = parse_literal();
      Token kw = expect_ident();
      if (!ieq(kw.text, "and")) fail("expected AND in BETWEEN", kw);
      Value hi = parse_literal();
      return Pred::conj({Pred::compare(CmpOp::Ge, lhs, Scalar::lit(lo)),
                         Pred::compare(CmpOp::Le, lhs, Scalar::lit(hi))});
    }
    if (op.kind != Token::Kind::Punct) fail("expected comparison operator", op);
    CmpOp cmp;
    if (op.text == "=" || op.text == "==") cmp = CmpOp::Eq;
    else if (op.text == "!=") cmp = CmpOp::Ne;
    else if (op.text == "<") cmp = CmpOp::Lt;
    else if (op.text == "<=") cmp = CmpOp::Le;
    else if (op.text == ">") cmp = CmpOp::Gt;
    else if (op.text == ">=") cmp = CmpOp::Ge;
    else fail("expected comparison operator, found '" + op.text + "'", op);
    lex_.next();
    ScalarPtr rhs = parse_scalar();
    return Pred::compare(cmp, std::move(lhs), std::move(rhs));
  }

  ScalarPtr parse_scalar() {
    Token t = lex_.peek();
    if (t.kind == Token::Kind::Number) {
      return Scalar::lit(parse_literal());
    }
    if (t.kind == Token::Kind::String) {
      lex_.next();
      return Scalar::lit(Value(t.text));
    }
    if (t.kind == Token::Kind::Punct && t.text == "-") {
      return Scalar::lit(parse_literal());
    }
    if (t.kind == Token::Kind::Ident) {
      if (ieq(t.text, "null")) {
        lex_.next();
        return Scalar::lit(Value::null());
      }
      if (is_builtin(t.text)) {
        lex_.next();
        expect_punct("(");
        std::vector<ScalarPtr> args;
        while (true) {
          args.push_back(parse_scalar());
          if (accept_punct(",")) continue;
          break;
        }
        expect_punct(")");
        return Scalar::call(t.text, std::move(args));
      }
      Token col = lex_.next();
      return Scalar::column_ref(column_name(col));
    }
    fail("expected scalar expression", t);
  }

  Value parse_literal() {
    Token t = lex_.next();
    bool neg = false;
    if (t.kind == Token::Kind::Punct && t.text == "-") {
      neg = true;
      t = lex_.next();
    }
    if (t.kind == Token::Kind::Number) {
      if (t.text.find('.') != std::string::npos) {
        double d = std::stod(t.text);
        return Value(neg ? -d : d);
      }
      std::int64_t i = std::stoll(t.text);
      return Value(neg ? -i : i);
    }
    if (t.kind == Token::Kind::String && !neg) return Value(t.text);
    if (t.kind == Token::Kind::Ident && ieq(t.text, "true") && !neg) return Value(true);
    if (t.kind == Token::Kind::Ident && ieq(t.text, "false") && !neg) return Value(false);
    fail("expected literal", t);
  }

  TypeTag parse_type() {
    Token t = expect_ident();
    try {
      return type_from_name(t.text);
    } catch (const Error&) {
      fail("unknown type '" + t.text + "'", t);
    }
  }

  // qualified column reference: name or table.name; the qualifier is
  // informational (output columns are uniquely named)
  std::string column_name(Token first) {
    if (accept_punct(".")) {
      Token second = expect_ident();
      return second.text;
    }
    return first.text;
  }

  // ------- UDF applications -------

  /// Parses `Name(col, ...)` for a declared name or `llm("expr", col, ...)`.
  /// Returns nullopt (consuming nothing) when the lookahead is not a UDF
  /// application.
  std::optional<LlmUdf> try_parse_udf_app(OutputKind kind) {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Ident) return std::nullopt;
    bool inline_udf = ieq(t.text, "llm");
    bool named = declared_.count(t.text) > 0;
    if (!inline_udf && !named) return std::nullopt;
    Token name = lex_.next();
    expect_punct("(");
    LlmUdf udf;
    udf.output_kind = std::move(kind);
    if (inline_udf) {
      Token expr = lex_.next();
      if (expr.kind != Token::Kind::String) fail("llm(...) expects a quoted expression first", expr);
      udf.expression = expr.text;
      if (!accept_punct(","))
        fail("llm(...) expects at least one input column", lex_.peek());
    } else {
      udf.name = name.text;
      udf.expression = declared_.at(name.text);
    }
    while (true) {
      udf.input_columns.push_back(column_name(expect_ident()));
      if (accept_punct(",")) continue;
      break;
    }
    expect_punct(")");
    for (const auto& p : udf.undeclared_placeholders())
      throw ParseError(ParseErrorCode::UdfPlaceholder,
                       "UDF placeholder {" + p + "} does not name an input column", name.line,
                       name.col);
    return udf;
  }

  OutputKind parse_output_spec(OutputKindTag want) {
    if (accept_punct("(")) {
      std::vector<OutputField> fields;
      while (true) {
        Token name = expect_ident();
        TypeTag type = accept_punct(":") ? parse_type() : TypeTag::Any;
        fields.push_back({name.text, type});
        if (accept_punct(",")) continue;
        break;
      }
      expect_punct(")");
      return OutputKind::tuple(std::move(fields));
    }
    Token name = expect_ident();
    TypeTag type = accept_punct(":") ? parse_type() : TypeTag::Any;
    if (want == OutputKindTag::Aggregate) return OutputKind::aggregate(name.text, type);
    return OutputKind::scalar(name.text, type);
  }

  bool is_builtin(const std::string& name) const {
    return name == "substr" || name == "strftime" || name == "lower" || name == "upper";
  }

  bool is_builtin_call() {
    return lex_.peek().kind == Token::Kind::Ident && is_builtin(lex_.peek().text);
  }

  /// Disambiguates a column-list element from the child expression that ends
  /// the argument list. An identifier starts the child when it is an operator
  /// name, a catalog table, or (syntax-only mode) a bare name followed by ')'.
  bool is_operator_or_table_next() {
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::Ident) return false;
    const Token& t2 = lex_.peek2();
    if (t2.kind == Token::Kind::Punct && t2.text == ".") return false;  // qualified column
    const std::string& w = t.text;
    if (w == "Select" || w == "Project" || w == "Join" || w == "TopK" || w == "Aggregate")
      return true;
    if (catalog_) return catalog_->find_table(w) != nullptr;
    return t2.kind == Token::Kind::Punct && t2.text == ")";
  }

  bool peek_number_next() { return lex_.peek().kind == Token::Kind::Number; }

  void validate(const QueryPlan& plan) {
    ValidationReport report = validate_plan(plan, *catalog_);
    if (report.ok()) return;
    const Issue& first = report.issues.front();
    ParseErrorCode code = ParseErrorCode::Validation;
    switch (first.kind) {
      case IssueKind::UnknownTable: code = ParseErrorCode::UnknownTable; break;
      case IssueKind::UnknownColumn: code = ParseErrorCode::UnknownColumn; break;
      case IssueKind::BadUdf: code = ParseErrorCode::UdfPlaceholder; break;
      case IssueKind::KindMismatch: code = ParseErrorCode::KindMismatch; break;
      default: break;
    }
    throw ParseError(code, trim_copy(report.render()));
  }

  Lexer lex_;
  const SemanticDataModel* catalog_;
  PlanBuilder builder_;
  std::map<std::string, std::string> declared_;
};

}  // namespace detail

/// Parses query text against a catalog. The returned plan passes
/// validate_plan with an empty report. Throws ParseError with a distinct code
/// per failure class; these feed the generation retry loop.
inline QueryPlan parse(const std::string& text, const SemanticDataModel& catalog) {
  return detail::Parser(text, &catalog).parse();
}

/// Syntax-only parse used to deserialize plan signatures and to inspect
/// exemplars; no catalog checks.
inline QueryPlan parse_unchecked(const std::string& text) {
  return detail::Parser(text, nullptr).parse();
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

struct Printer {
  const QueryPlan& plan;
  std::vector<std::pair<std::string, std::string>> udf_decls;  // name -> expression

  void note_udf(const LlmUdf& udf) {
    if (udf.name.empty()) return;
    for (auto& [n, e] : udf_decls)
      if (n == udf.name) return;
    udf_decls.emplace_back(udf.name, udf.expression);
  }

  void collect(int id) {
    const PlanNode& n = plan.node(id);
    if (n.udf) note_udf(*n.udf);
    for (int c : n.children) collect(c);
  }

  static std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out.push_back('\\');
      if (c == '\n') {
        out += "\\n";
        continue;
      }
      out.push_back(c);
    }
    return out + "\"";
  }

  std::string udf_app(const LlmUdf& udf) const {
    std::string out;
    if (udf.name.empty())
      out = "llm(" + quote(udf.expression) + ", ";
    else
      out = udf.name + "(";
    for (std::size_t i = 0; i < udf.input_columns.size(); ++i) {
      if (i) out += ", ";
      out += udf.input_columns[i];
    }
    return out + ")";
  }

  static std::string type_suffix(TypeTag t) {
    if (t == TypeTag::Any) return "";
    return ":" + std::string(type_name(t));
  }

  std::string output_spec(const OutputKind& kind) const {
    if (kind.fields.size() == 1)
      return kind.fields[0].name + type_suffix(kind.fields[0].type);
    std::string out = "(";
    for (std::size_t i = 0; i < kind.fields.size(); ++i) {
      if (i) out += ", ";
      out += kind.fields[i].name + type_suffix(kind.fields[i].type);
    }
    return out + ")";
  }

  std::string expr(int id) const {
    const PlanNode& n = plan.node(id);
    switch (n.kind) {
      case OpKind::Scan:
        return n.table;
      case OpKind::Select: {
        std::string pred = n.udf ? udf_app(*n.udf) : print_pred(n.predicate);
        return "Select(" + pred + ", " + expr(n.children[0]) + ")";
      }
      case OpKind::Project: {
        std::string items;
        if (n.udf) {
          items = udf_app(*n.udf) + " -> " + output_spec(n.udf->output_kind);
        } else if (n.derived) {
          items = print_scalar(n.derived->expr) + " -> " + n.derived->name +
                  type_suffix(n.derived->type);
        } else {
          for (std::size_t i = 0; i < n.columns.size(); ++i) {
            if (i) items += ", ";
            items += n.columns[i].column;
            if (!n.columns[i].alias.empty()) items += " -> " + n.columns[i].alias;
          }
        }
        return "Project(" + items + ", " + expr(n.children[0]) + ")";
      }
      case OpKind::Join: {
        std::string cond = n.udf ? udf_app(*n.udf) : n.left_key + " = " + n.right_key;
        return "Join(" + expr(n.children[0]) + ", " + expr(n.children[1]) + ", " + cond + ")";
      }
      case OpKind::TopK: {
        std::string order;
        if (n.udf) {
          order = udf_app(*n.udf);
        } else {
          for (std::size_t i = 0; i < n.order.size(); ++i) {
            if (i) order += ", ";
            order += n.order[i].column + (n.order[i].ascending ? "" : " desc");
          }
        }
        std::string mid = n.k ? ", " + std::to_string(*n.k) : "";
        return "TopK(" + order + mid + ", " + expr(n.children[0]) + ")";
      }
      case OpKind::Aggregate: {
        std::string item;
        if (n.udf) {
          const auto& f = n.udf->output_kind.fields.at(0);
          item = udf_app(*n.udf) + " -> " + f.name + type_suffix(f.type);
        } else if (n.agg) {
          item = std::string(agg_name(n.agg->func)) + "(" +
                 (n.agg->func == AggFunc::CountStar ? "*" : n.agg->column) + ") -> " +
                 n.agg->alias;
        }
        std::string by;
        if (!n.group_by.empty()) {
          by = ", by(";
          for (std::size_t i = 0; i < n.group_by.size(); ++i) {
            if (i) by += ", ";
            by += n.group_by[i];
          }
          by += ")";
        }
        return "Aggregate(" + item + by + ", " + expr(n.children[0]) + ")";
      }
    }
    return "";
  }
};

}  // namespace detail

/// Canonical text form; parse(print(p)) is structurally equal to p.
inline std::string print(const QueryPlan& plan) {
  detail::Printer pr{plan, {}};
  pr.collect(plan.root);
  std::string out;
  for (const auto& [name, expr] : pr.udf_decls)
    out += "WITH UDF " + name + " = " + detail::Printer::quote(expr) + "\n";
  out += pr.expr(plan.root);
  return out;
}

/// Stable serialization: equal plans (up to node-id renaming) yield equal
/// signatures; deserializable via parse_signature.
inline std::string plan_signature(const QueryPlan& plan) { return print(plan); }

inline QueryPlan parse_signature(const std::string& signature) {
  return parse_unchecked(signature);
}

}  // namespace hra
