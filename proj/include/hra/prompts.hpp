#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "hra/error.hpp"
#include "hra/udf.hpp"

namespace hra {

/// Per-operator prompt templates. Placeholders use ${name} syntax; everything
/// else is emitted verbatim (literal braces are common, matching the prompt
/// shapes the executor produces). The shipped copies live in data/prompts/.
struct PromptTemplates {
  std::string selection;
  std::string projection;
  std::string join_pair;
  std::string join_batch;
  std::string join_sizing;
  std::string topk;
  std::string aggregate;
  std::string aggregate_combine;
  std::string filter_model;
  std::string decompose;
  std::string udf_rewrite;

  static PromptTemplates defaults();
  static PromptTemplates load_dir(const std::string& dir);
};

inline std::string render_template(const std::string& tpl,
                                   const std::map<std::string, std::string>& fields) {
  std::string out;
  out.reserve(tpl.size());
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl[i] == '$' && i + 1 < tpl.size() && tpl[i + 1] == '{') {
      auto end = tpl.find('}', i + 2);
      if (end == std::string::npos) throw Error("unterminated ${ in template");
      std::string key = tpl.substr(i + 2, end - i - 2);
      auto it = fields.find(key);
      if (it == fields.end()) throw Error("template placeholder without value: " + key);
      out += it->second;
      i = end;
    } else {
      out.push_back(tpl[i]);
    }
  }
  return out;
}

/// Instantiates a UDF expression: each {column} placeholder becomes the
/// rendered cell value for that column. Expressions without placeholders are
/// returned verbatim.
inline std::string instantiate_expression(const LlmUdf& udf,
                                          const std::map<std::string, std::string>& values) {
  std::string out;
  const std::string& e = udf.expression;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == '{') {
      auto end = e.find('}', i + 1);
      if (end != std::string::npos) {
        std::string name = e.substr(i + 1, end - i - 1);
        auto it = values.find(name);
        if (it != values.end()) {
          out += it->second;
          i = end;
          continue;
        }
      }
    }
    out.push_back(e[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output parsing rules. These are the frozen response-normalization rules:
//  - yes/no answers match case-insensitively on the first word;
//  - numeric values drop thousands separators;
//  - structured pair lists must be well-formed or the call is retried.

inline std::string trim_copy(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::optional<bool> parse_yes_no(const std::string& text) {
  std::string t = trim_copy(text);
  std::string head;
  for (char c : t) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      head.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    else
      break;
  }
  if (head == "yes") return true;
  if (head == "no") return false;
  return std::nullopt;
}

/// "(L1,R3), (L2,R5)" or "(1,3),(2,5)" or "NONE" -> zero-based not applied;
/// indices are as written (1-based in our batch prompts). Duplicate pairs are
/// collapsed. Returns nullopt when no pair and no NONE marker is present.
inline std::optional<std::vector<std::pair<int, int>>> parse_pair_list(const std::string& text) {
  std::string t = trim_copy(text);
  std::string low;
  for (char c : t) low.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  std::vector<std::pair<int, int>> out;
  static const std::regex pair_re(R"(\(\s*L?(\d+)\s*,\s*R?(\d+)\s*\))");
  auto begin = std::sregex_iterator(t.begin(), t.end(), pair_re);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    int a = std::stoi((*it)[1].str());
    int b = std::stoi((*it)[2].str());
    bool seen = false;
    for (auto& p : out) seen = seen || (p.first == a && p.second == b);
    if (!seen) out.emplace_back(a, b);
  }
  if (out.empty() && low.find("none") == std::string::npos) return std::nullopt;
  return out;
}

/// "b1=10, b2=10" (or any text containing b1=...&b2=..., else the first two
/// integers). Returns nullopt when fewer than two sizes are present.
inline std::optional<std::pair<int, int>> parse_batch_sizes(const std::string& text) {
  static const std::regex named_re(R"(b1\s*=\s*(\d+).*?b2\s*=\s*(\d+))");
  std::smatch m;
  if (std::regex_search(text, m, named_re))
    return std::make_pair(std::stoi(m[1].str()), std::stoi(m[2].str()));
  static const std::regex int_re(R"((\d+))");
  std::vector<int> ints;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), int_re);
       it != std::sregex_iterator() && ints.size() < 2; ++it)
    ints.push_back(std::stoi((*it)[1].str()));
  if (ints.size() < 2) return std::nullopt;
  return std::make_pair(ints[0], ints[1]);
}

/// Splits a multi-field response into named fields: one "name: value" line per
/// declared field. Single-field outputs take the whole text.
inline std::optional<std::vector<std::string>> parse_tuple_fields(
    const std::string& text, const std::vector<OutputField>& fields) {
  if (fields.size() == 1) return std::vector<std::string>{trim_copy(text)};
  std::vector<std::string> out(fields.size());
  std::vector<bool> got(fields.size(), false);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string name = trim_copy(line.substr(0, colon));
    std::string value = trim_copy(line.substr(colon + 1));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].name == name) {
        out[i] = value;
        got[i] = true;
      }
    }
  }
  for (bool g : got)
    if (!g) return std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------

inline PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.selection =
      "Does {${values}} satisfy {${instruction}}? Answer: yes/no";
  t.projection =
      "${instruction}\n"
      "Input: {${values}}\n"
      "${output_spec}";
  t.join_pair =
      "Do {${left}} and {${right}} match according to: {${instruction}}? Answer: yes/no";
  t.join_batch =
      "Find all matching pairs between the two lists according to: {${instruction}}.\n"
      "Left items:\n${left_items}\n"
      "Right items:\n${right_items}\n"
      "Answer with a comma-separated list of pairs like (L1,R2). "
      "If nothing matches, answer NONE.";
  t.join_sizing =
      "You are choosing batch sizes for a semantic join executed by batched prompts.\n"
      "Join condition: {${instruction}}\n"
      "Left relation: ${left_count} distinct keys. Sample rows:\n${left_samples}\n"
      "Right relation: ${right_count} distinct keys. Sample rows:\n${right_samples}\n"
      "Consider the join complexity, the text length per row, and the data sizes. "
      "Use large batches (e.g. 10) for simple short-text matching and small batches "
      "(down to 1) for complex or lengthy text.\n"
      "Answer exactly in the form: b1=<n>, b2=<n>";
  t.topk =
      "Should {${left}} be ranked before {${right}} according to: {${instruction}}? "
      "Answer: yes/no";
  t.aggregate =
      "${instruction}\n"
      "Rows:\n${rows}\n"
      "${output_spec}";
  t.aggregate_combine =
      "${instruction}\n"
      "The following are partial results computed over chunks of the input. "
      "Combine them into a single final answer.\n"
      "Partial results:\n${rows}\n"
      "${output_spec}";
  t.filter_model =
      "TASK: Select the database columns needed to answer the question.\n"
      "Include columns the question names, columns needed by computation rules, and "
      "entity-identifying columns required for semantic reasoning even when the "
      "questioned attribute is absent from the schema.\n"
      "[DATABASE SCHEMA]\n${model}\n"
      "[QUESTION] ${question}\n"
      "Answer with one line per selected column in the form `column: <table>.<column>`, "
      "plus one line `note: <index>` for every domain note you relied on.";
  t.decompose =
      "TASK: Decompose the question into ordered reasoning steps over the operator "
      "catalog below. First identify the query intent (aggregation, filtering, ranking, "
      "or existence). Continue selecting operators until the intent is satisfied.\n"
      "[OPERATOR CATALOG]\n${operators}\n"
      "[DATABASE SCHEMA]\n${model}\n"
      "[QUESTION] ${question}\n"
      "Answer with a line `Intent: <intent>` followed by numbered steps, one per line, "
      "in the form `<n>. <Operator>: <what it does>`. For semantic operators append "
      "` Justification: <why an LLM is required>`.";
  t.udf_rewrite =
      "A query contains an LLM-backed function with this instruction:\n"
      "  ${instruction}\n"
      "Input columns:\n${columns}\n"
      "Decide whether the function is stateless and deterministic: it processes each "
      "row independently and always produces the same output for the same input using "
      "fixed world knowledge.\n"
      "If so, answer `REWRITE: <expression>` where <expression> is an equivalent "
      "predicate or scalar expression over the input columns using comparisons, "
      "and/or/not, in (...), between, substr(s,start,len), strftime(fmt,date), lower, "
      "upper. Otherwise answer `KEEP`.";
  return t;
}

inline PromptTemplates PromptTemplates::load_dir(const std::string& dir) {
  auto read = [&](const char* name) {
    std::filesystem::path p = std::filesystem::path(dir) / (std::string(name) + ".txt");
    std::ifstream in(p);
    if (!in) throw LoadError("missing prompt template: " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    std::string s = os.str();
    // editors append a trailing newline; templates are newline-exact
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
  };
  PromptTemplates t;
  t.selection = read("selection");
  t.projection = read("projection");
  t.join_pair = read("join_pair");
  t.join_batch = read("join_batch");
  t.join_sizing = read("join_sizing");
  t.topk = read("topk");
  t.aggregate = read("aggregate");
  t.aggregate_combine = read("aggregate_combine");
  t.filter_model = read("filter_model");
  t.decompose = read("decompose");
  t.udf_rewrite = read("udf_rewrite");
  return t;
}

}  // namespace hra
