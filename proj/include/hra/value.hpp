#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "hra/error.hpp"

namespace hra {

/// Tag of a cell value. `Any` never tags a concrete Value; it appears only in
/// schemas, for derived columns whose type was not declared and is resolved
/// per-value at runtime.
enum class TypeTag { Null, Boolean, Integer, Float, Text, Any };

inline std::string_view type_name(TypeTag t) {
  switch (t) {
    case TypeTag::Null: return "null";
    case TypeTag::Boolean: return "bool";
    case TypeTag::Integer: return "int";
    case TypeTag::Float: return "float";
    case TypeTag::Text: return "text";
    case TypeTag::Any: return "any";
  }
  return "?";
}

inline TypeTag type_from_name(std::string_view s) {
  if (s == "bool" || s == "boolean") return TypeTag::Boolean;
  if (s == "int" || s == "integer") return TypeTag::Integer;
  if (s == "float" || s == "real" || s == "double") return TypeTag::Float;
  if (s == "text" || s == "string" || s == "varchar") return TypeTag::Text;
  if (s == "any") return TypeTag::Any;
  if (s == "null") return TypeTag::Null;
  throw Error("unknown type name: " + std::string(s));
}

/// Tagged scalar cell. Text payloads are preserved byte-exact; prompt
/// construction depends on verbatim cell content.
class Value {
 public:
  Value() : v_(std::monostate{}) {}
  explicit Value(bool b) : v_(b) {}
  explicit Value(std::int64_t i) : v_(i) {}
  explicit Value(double d) : v_(d) {}
  explicit Value(std::string s) : v_(std::move(s)) {}
  explicit Value(const char* s) : v_(std::string(s)) {}

  static Value null() { return Value(); }

  TypeTag tag() const {
    switch (v_.index()) {
      case 0: return TypeTag::Null;
      case 1: return TypeTag::Boolean;
      case 2: return TypeTag::Integer;
      case 3: return TypeTag::Float;
      default: return TypeTag::Text;
    }
  }

  bool is_null() const { return v_.index() == 0; }

  bool as_bool() const { return get<bool>("bool"); }
  std::int64_t as_int() const { return get<std::int64_t>("int"); }
  double as_float() const { return get<double>("float"); }
  const std::string& as_text() const { return get<std::string>("text"); }

  /// Numeric view of an Integer or Float value.
  double numeric() const {
    if (tag() == TypeTag::Integer) return static_cast<double>(as_int());
    if (tag() == TypeTag::Float) return as_float();
    throw TypeError("value is not numeric (" + std::string(type_name(tag())) + ")");
  }

  /// Text rendering used for prompts and CSV output. Deterministic; floats use
  /// shortest round-trip form.
  std::string render() const {
    switch (tag()) {
      case TypeTag::Null: return "";
      case TypeTag::Boolean: return as_bool() ? "true" : "false";
      case TypeTag::Integer: return std::to_string(as_int());
      case TypeTag::Float: {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, as_float());
        return std::string(buf, p);
      }
      default: return as_text();
    }
  }

  /// Structural equality: tags and payloads identical. Nulls are equal to
  /// nulls. Used for dedup, group keys, and bag comparison, never for
  /// predicate semantics.
  friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

  /// Structural total order across tags (tag index first). Deterministic sort
  /// key; independent of predicate comparison rules.
  static bool ordered_before(const Value& a, const Value& b) {
    if (a.v_.index() != b.v_.index()) return a.v_.index() < b.v_.index();
    return a.v_ < b.v_;
  }

  /// Predicate comparison per the data-model rules: different non-null tags
  /// are a type error, never coerced. Returns <0, 0, >0. Callers handle nulls
  /// before calling.
  static int compare(const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) throw TypeError("compare called on null");
    if (a.tag() != b.tag())
      throw TypeError("cannot compare " + std::string(type_name(a.tag())) + " with " +
                      std::string(type_name(b.tag())));
    switch (a.tag()) {
      case TypeTag::Boolean: return int(a.as_bool()) - int(b.as_bool());
      case TypeTag::Integer: {
        auto x = a.as_int(), y = b.as_int();
        return x < y ? -1 : x > y ? 1 : 0;
      }
      case TypeTag::Float: {
        auto x = a.as_float(), y = b.as_float();
        return x < y ? -1 : x > y ? 1 : 0;
      }
      default: {
        int c = a.as_text().compare(b.as_text());
        return c < 0 ? -1 : c > 0 ? 1 : 0;
      }
    }
  }

  std::size_t hash() const {
    switch (tag()) {
      case TypeTag::Null: return 0x9e3779b9;
      case TypeTag::Boolean: return std::hash<bool>{}(as_bool());
      case TypeTag::Integer: return std::hash<std::int64_t>{}(as_int());
      case TypeTag::Float: return std::hash<double>{}(as_float());
      default: return std::hash<std::string>{}(as_text());
    }
  }

 private:
  template <class T>
  const T& get(const char* what) const {
    if (auto* p = std::get_if<T>(&v_)) return *p;
    throw TypeError("value is not " + std::string(what) + " (" +
                    std::string(type_name(tag())) + ")");
  }

  std::variant<std::monostate, bool, std::int64_t, double, std::string> v_;
};

/// Parses text into a value of the requested tag. Numeric parsing strips
/// thousands separators ("2,000,000" -> 2000000). `Any` tries int, then
/// float, then keeps text. Returns nullopt on failure.
inline std::optional<Value> parse_value(std::string_view raw, TypeTag want) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
      s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
      s.remove_suffix(1);
    return s;
  };
  std::string_view s = trim(raw);
  auto strip_commas = [](std::string_view v) {
    std::string out;
    out.reserve(v.size());
    for (char c : v)
      if (c != ',') out.push_back(c);
    return out;
  };
  auto try_int = [&](std::string_view v) -> std::optional<Value> {
    std::string t = strip_commas(v);
    std::int64_t x = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec == std::errc() && p == t.data() + t.size()) return Value(x);
    return std::nullopt;
  };
  auto try_float = [&](std::string_view v) -> std::optional<Value> {
    std::string t = strip_commas(v);
    double x = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec == std::errc() && p == t.data() + t.size()) return Value(x);
    return std::nullopt;
  };
  switch (want) {
    case TypeTag::Null: return s.empty() ? std::optional<Value>(Value::null()) : std::nullopt;
    case TypeTag::Boolean: {
      std::string low;
      for (char c : s) low.push_back(char(std::tolower(static_cast<unsigned char>(c))));
      if (low == "true" || low == "yes" || low == "1") return Value(true);
      if (low == "false" || low == "no" || low == "0") return Value(false);
      return std::nullopt;
    }
    case TypeTag::Integer: return try_int(s);
    case TypeTag::Float: {
      if (auto v = try_float(s)) return v;
      return std::nullopt;
    }
    case TypeTag::Text: return Value(std::string(raw));
    case TypeTag::Any: {
      if (auto v = try_int(s)) return v;
      if (auto v = try_float(s)) return v;
      return Value(std::string(raw));
    }
  }
  return std::nullopt;
}

}  // namespace hra
