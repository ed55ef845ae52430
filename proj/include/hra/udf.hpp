#pragma once

#include <string>
#include <vector>

#include "hra/value.hpp"

namespace hra {

enum class OutputKindTag { Boolean, Scalar, Tuple, Aggregate };

struct OutputField {
  std::string name;
  TypeTag type = TypeTag::Any;

  friend bool operator==(const OutputField& a, const OutputField& b) {
    return a.name == b.name && a.type == b.type;
  }
};

/// Declared output shape of an LLM UDF. Boolean carries no fields; Scalar and
/// Aggregate carry exactly one (the produced column); Tuple carries one per
/// produced column.
struct OutputKind {
  OutputKindTag tag = OutputKindTag::Boolean;
  std::vector<OutputField> fields;

  static OutputKind boolean() { return {OutputKindTag::Boolean, {}}; }
  static OutputKind scalar(std::string name, TypeTag t) {
    return {OutputKindTag::Scalar, {{std::move(name), t}}};
  }
  static OutputKind tuple(std::vector<OutputField> fields) {
    return {OutputKindTag::Tuple, std::move(fields)};
  }
  static OutputKind aggregate(std::string name, TypeTag t) {
    return {OutputKindTag::Aggregate, {{std::move(name), t}}};
  }

  friend bool operator==(const OutputKind& a, const OutputKind& b) {
    return a.tag == b.tag && a.fields == b.fields;
  }
};

inline std::string_view output_kind_name(OutputKindTag t) {
  switch (t) {
    case OutputKindTag::Boolean: return "boolean";
    case OutputKindTag::Scalar: return "scalar";
    case OutputKindTag::Tuple: return "tuple";
    case OutputKindTag::Aggregate: return "aggregate";
  }
  return "?";
}

/// LLM user-defined function: a natural-language expression evaluated by a
/// model over the named input columns. `{column}` placeholders inside the
/// expression are replaced by rendered cell values at prompt time.
struct LlmUdf {
  std::string name;        // empty for inline llm("...") udfs
  std::string expression;  // natural-language instruction
  std::vector<std::string> input_columns;
  std::string model_ref = "default";
  OutputKind output_kind = OutputKind::boolean();

  /// Placeholders appearing in the expression, in order of first occurrence.
  std::vector<std::string> placeholders() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < expression.size(); ++i) {
      if (expression[i] != '{') continue;
      auto end = expression.find('}', i + 1);
      if (end == std::string::npos) break;
      std::string name = expression.substr(i + 1, end - i - 1);
      bool seen = false;
      for (const auto& p : out) seen = seen || p == name;
      if (!seen && !name.empty()) out.push_back(name);
      i = end;
    }
    return out;
  }

  /// Placeholders that do not name an input column; non-empty means invalid.
  std::vector<std::string> undeclared_placeholders() const {
    std::vector<std::string> bad;
    for (const auto& p : placeholders()) {
      bool found = false;
      for (const auto& c : input_columns) found = found || c == p;
      if (!found) bad.push_back(p);
    }
    return bad;
  }

  friend bool operator==(const LlmUdf& a, const LlmUdf& b) {
    return a.name == b.name && a.expression == b.expression &&
           a.input_columns == b.input_columns && a.model_ref == b.model_ref &&
           a.output_kind == b.output_kind;
  }
};

}  // namespace hra
