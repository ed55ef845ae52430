#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "hra/backend.hpp"
#include "hra/prompts.hpp"
#include "hra/relation.hpp"

namespace hra {

struct ColumnSpec {
  std::string name;
  TypeTag type = TypeTag::Text;
  std::vector<std::string> sample_values;  // at most 3, drawn from actual data
  std::string description;
};

struct TableSpec {
  std::string name;
  std::string description;
  std::vector<ColumnSpec> columns;

  const ColumnSpec* find(std::string_view col) const {
    for (const auto& c : columns)
      if (c.name == col) return &c;
    return nullptr;
  }
};

enum class NoteKind { ComputationRule, SemanticMapping, Terminology };

inline std::string_view note_kind_name(NoteKind k) {
  switch (k) {
    case NoteKind::ComputationRule: return "computation_rule";
    case NoteKind::SemanticMapping: return "semantic_mapping";
    case NoteKind::Terminology: return "terminology";
  }
  return "?";
}

inline NoteKind note_kind_from(std::string_view s) {
  if (s == "computation_rule") return NoteKind::ComputationRule;
  if (s == "semantic_mapping") return NoteKind::SemanticMapping;
  if (s == "terminology") return NoteKind::Terminology;
  throw LoadError("unknown note kind: " + std::string(s));
}

struct DomainNote {
  NoteKind kind = NoteKind::Terminology;
  std::string text;
};

struct Relationship {
  std::string left_table, left_column, right_table, right_column;

  std::string render() const {
    return left_table + "." + left_column + " -> " + right_table + "." + right_column;
  }
  friend bool operator==(const Relationship&, const Relationship&) = default;
};

/// Hierarchical schema document grounding query generation and validation:
/// table specs with sampled values, declared relationships, and domain notes.
struct SemanticDataModel {
  std::vector<TableSpec> tables;
  std::vector<Relationship> relationships;
  std::vector<DomainNote> notes;

  const TableSpec* find_table(std::string_view name) const {
    for (const auto& t : tables)
      if (t.name == name) return &t;
    return nullptr;
  }

  Schema table_schema(std::string_view name) const {
    const TableSpec* t = find_table(name);
    if (!t) throw Error("unknown table: " + std::string(name));
    Schema s;
    for (const auto& c : t->columns) s.add({c.name, c.type, c.description});
    return s;
  }

  /// Users may extend the model with additional domain knowledge; notes are
  /// append-only.
  void add_note(DomainNote n) { notes.push_back(std::move(n)); }

  /// Structural invariants: unique table names, unique column names per
  /// table, relationship endpoints name existing table.columns.
  void check() const {
    std::set<std::string> tnames;
    for (const auto& t : tables) {
      if (!tnames.insert(t.name).second) throw LoadError("duplicate table: " + t.name);
      std::set<std::string> cnames;
      for (const auto& c : t.columns)
        if (!cnames.insert(c.name).second)
          throw LoadError("duplicate column " + c.name + " in table " + t.name);
    }
    for (const auto& r : relationships) {
      const TableSpec* lt = find_table(r.left_table);
      const TableSpec* rt = find_table(r.right_table);
      if (!lt || !lt->find(r.left_column))
        throw LoadError("relationship endpoint not found: " + r.left_table + "." + r.left_column);
      if (!rt || !rt->find(r.right_column))
        throw LoadError("relationship endpoint not found: " + r.right_table + "." + r.right_column);
    }
  }

  std::string to_yaml() const;
  static SemanticDataModel from_yaml(const std::string& text);
};

// ---------------------------------------------------------------------------
// YAML document (emitted manually for byte-stable goldens, parsed with
// yaml-cpp). Key names are frozen: tables/name/description/columns/type/
// samples, relationships ("a.b -> c.d"), notes/kind/text.

namespace detail {
inline std::string yaml_quote(const std::string& s) {
  bool plain = !s.empty();
  for (char c : s)
    plain = plain && (std::isalnum(static_cast<unsigned char>(c)) || c == ' ' || c == '_' ||
                      c == '-' || c == '.' || c == '/' || c == '(' || c == ')');
  if (plain && s.find("  ") == std::string::npos && s.front() != ' ' && s.back() != ' ')
    return s;
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
}  // namespace detail

inline std::string SemanticDataModel::to_yaml() const {
  std::ostringstream os;
  os << "tables:\n";
  for (const auto& t : tables) {
    os << "  - name: " << detail::yaml_quote(t.name) << "\n";
    if (!t.description.empty())
      os << "    description: " << detail::yaml_quote(t.description) << "\n";
    os << "    columns:\n";
    for (const auto& c : t.columns) {
      os << "      - name: " << detail::yaml_quote(c.name) << "\n";
      os << "        type: " << type_name(c.type) << "\n";
      if (!c.sample_values.empty()) {
        os << "        samples: [";
        for (std::size_t i = 0; i < c.sample_values.size(); ++i) {
          if (i) os << ", ";
          os << detail::yaml_quote(c.sample_values[i]);
        }
        os << "]\n";
      }
      if (!c.description.empty())
        os << "        description: " << detail::yaml_quote(c.description) << "\n";
    }
  }
  if (!relationships.empty()) {
    os << "relationships:\n";
    for (const auto& r : relationships) os << "  - " << detail::yaml_quote(r.render()) << "\n";
  }
  if (!notes.empty()) {
    os << "notes:\n";
    for (const auto& n : notes) {
      os << "  - kind: " << note_kind_name(n.kind) << "\n";
      os << "    text: " << detail::yaml_quote(n.text) << "\n";
    }
  }
  return os.str();
}

inline Relationship parse_relationship(const std::string& s) {
  auto arrow = s.find("->");
  if (arrow == std::string::npos) throw LoadError("relationship missing '->': " + s);
  auto split = [](std::string part) {
    part = trim_copy(part);
    auto dot = part.find('.');
    if (dot == std::string::npos) throw LoadError("relationship endpoint missing '.': " + part);
    return std::make_pair(part.substr(0, dot), part.substr(dot + 1));
  };
  auto [lt, lc] = split(s.substr(0, arrow));
  auto [rt, rc] = split(s.substr(arrow + 2));
  return {lt, lc, rt, rc};
}

inline SemanticDataModel SemanticDataModel::from_yaml(const std::string& text) {
  SemanticDataModel model;
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw LoadError("YAML parse error at line " + std::to_string(e.mark.line + 1) + ": " +
                        e.msg,
                    std::size_t(e.mark.line + 1));
  }
  for (const auto& t : doc["tables"]) {
    TableSpec spec;
    spec.name = t["name"].as<std::string>();
    if (t["description"]) spec.description = t["description"].as<std::string>();
    for (const auto& c : t["columns"]) {
      ColumnSpec col;
      col.name = c["name"].as<std::string>();
      if (c["type"]) col.type = type_from_name(c["type"].as<std::string>());
      if (c["samples"])
        for (const auto& s : c["samples"]) col.sample_values.push_back(s.as<std::string>());
      if (c["description"]) col.description = c["description"].as<std::string>();
      spec.columns.push_back(std::move(col));
    }
    model.tables.push_back(std::move(spec));
  }
  if (doc["relationships"])
    for (const auto& r : doc["relationships"])
      model.relationships.push_back(parse_relationship(r.as<std::string>()));
  if (doc["notes"])
    for (const auto& n : doc["notes"]) {
      DomainNote note;
      note.kind = note_kind_from(n["kind"].as<std::string>());
      note.text = n["text"].as<std::string>();
      model.notes.push_back(std::move(note));
    }
  model.check();
  return model;
}

// ---------------------------------------------------------------------------
// Description files: optional YAML documents carrying table/column
// descriptions, foreign-key declarations, and domain notes.

struct DescriptionDoc {
  std::map<std::string, std::string> table_descriptions;
  std::map<std::string, std::map<std::string, std::string>> column_descriptions;
  std::vector<Relationship> relationships;
  std::vector<DomainNote> notes;

  static DescriptionDoc from_yaml(const std::string& text) {
    DescriptionDoc d;
    YAML::Node doc;
    try {
      doc = YAML::Load(text);
    } catch (const YAML::Exception& e) {
      throw LoadError("description file error at line " + std::to_string(e.mark.line + 1) +
                          ": " + e.msg,
                      std::size_t(e.mark.line + 1));
    }
    for (const auto& t : doc["tables"]) {
      std::string name = t["name"].as<std::string>();
      if (t["description"]) d.table_descriptions[name] = t["description"].as<std::string>();
      for (const auto& c : t["columns"])
        d.column_descriptions[name][c["name"].as<std::string>()] =
            c["description"] ? c["description"].as<std::string>() : "";
    }
    if (doc["relationships"])
      for (const auto& r : doc["relationships"])
        d.relationships.push_back(parse_relationship(r.as<std::string>()));
    if (doc["notes"])
      for (const auto& n : doc["notes"])
        d.notes.push_back({note_kind_from(n["kind"].as<std::string>()),
                           n["text"].as<std::string>()});
    return d;
  }
};

/// Builds the model from loaded relations plus an optional description file.
/// Sample values are the first three distinct non-null values per column, in
/// first-seen order (determinism over representativeness).
inline SemanticDataModel build_model(const std::vector<Relation>& database,
                                     const DescriptionDoc* descriptions = nullptr) {
  if (database.empty()) throw Error("build_model: database has no relations");
  SemanticDataModel model;
  for (const auto& rel : database) {
    TableSpec t;
    t.name = rel.name();
    if (descriptions) {
      auto it = descriptions->table_descriptions.find(t.name);
      if (it != descriptions->table_descriptions.end()) t.description = it->second;
    }
    for (std::size_t ci = 0; ci < rel.schema().size(); ++ci) {
      ColumnSpec c;
      c.name = rel.schema().at(ci).name;
      c.type = rel.schema().at(ci).type;
      for (const auto& row : rel.rows()) {
        if (c.sample_values.size() >= 3) break;
        const Value& v = row[ci];
        if (v.is_null()) continue;
        std::string rendered = v.render();
        bool seen = false;
        for (const auto& s : c.sample_values) seen = seen || s == rendered;
        if (!seen) c.sample_values.push_back(std::move(rendered));
      }
      if (descriptions) {
        auto ti = descriptions->column_descriptions.find(t.name);
        if (ti != descriptions->column_descriptions.end()) {
          auto ci2 = ti->second.find(c.name);
          if (ci2 != ti->second.end()) c.description = ci2->second;
        }
      }
      t.columns.push_back(std::move(c));
    }
    model.tables.push_back(std::move(t));
  }
  if (descriptions) {
    model.relationships = descriptions->relationships;
    model.notes = descriptions->notes;
  }
  model.check();
  return model;
}

// ---------------------------------------------------------------------------
// Model filtering (schema linking)

struct FilterResult {
  SemanticDataModel model;
  std::vector<std::string> warnings;
  bool fell_back = false;  // retries exhausted; unfiltered model returned
};

/// Minimal relationship set connecting the retained tables: a spanning forest
/// over the declared relationship graph restricted to those tables, edges
/// considered in lexicographic order of (left, right) endpoint names.
inline std::vector<Relationship> spanning_relationships(
    const SemanticDataModel& model, const std::set<std::string>& tables) {
  std::vector<Relationship> edges;
  for (const auto& r : model.relationships)
    if (tables.count(r.left_table) && tables.count(r.right_table)) edges.push_back(r);
  std::sort(edges.begin(), edges.end(), [](const Relationship& a, const Relationship& b) {
    return a.render() < b.render();
  });
  std::map<std::string, std::string> parent;
  for (const auto& t : tables) parent[t] = t;
  std::function<std::string(const std::string&)> find_root = [&](const std::string& x) {
    return parent[x] == x ? x : parent[x] = find_root(parent[x]);
  };
  std::vector<Relationship> kept;
  for (const auto& e : edges) {
    std::string a = find_root(e.left_table), b = find_root(e.right_table);
    if (a == b) continue;
    parent[a] = b;
    kept.push_back(e);
  }
  return kept;
}

/// Identifies the sub-model relevant to a question by asking the backend for
/// the needed columns (including entity-identifying ones). The result is
/// always a sub-model of the input: unknown names cannot enlarge it. On
/// persistent parse failure the unfiltered model is returned.
inline FilterResult filter_model(const SemanticDataModel& model, const std::string& question,
                                 LlmBackend& backend,
                                 const PromptTemplates& templates = PromptTemplates::defaults(),
                                 int max_retries = 3) {
  FilterResult out;
  std::string prompt = render_template(
      templates.filter_model, {{"model", model.to_yaml()}, {"question", question}});

  auto has_column_line = [](const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
      if (trim_copy(line).rfind("column:", 0) == 0) return true;
    return false;
  };
  RetryOutcome r = complete_with_retry(backend, prompt, has_column_line, max_retries);
  if (!r.ok) {
    out.model = model;
    out.fell_back = true;
    out.warnings.push_back("model filtering fell back to the unfiltered model after " +
                           std::to_string(r.attempts) + " attempts");
    return out;
  }

  std::map<std::string, std::vector<std::string>> selected;  // table -> columns (ordered)
  std::set<std::size_t> note_refs;
  std::istringstream in(r.text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim_copy(line);
    if (line.rfind("column:", 0) == 0) {
      std::string ref = trim_copy(line.substr(7));
      auto dot = ref.find('.');
      if (dot == std::string::npos) {
        out.warnings.push_back("dropped malformed column reference: " + ref);
        continue;
      }
      std::string table = ref.substr(0, dot), col = ref.substr(dot + 1);
      const TableSpec* t = model.find_table(table);
      if (!t || !t->find(col)) {
        out.warnings.push_back("dropped unknown column: " + ref);
        continue;
      }
      auto& cols = selected[table];
      if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
    } else if (line.rfind("note:", 0) == 0) {
      std::string idx = trim_copy(line.substr(5));
      try {
        std::size_t i = std::stoul(idx);
        if (i < model.notes.size()) note_refs.insert(i);
      } catch (...) {
        out.warnings.push_back("dropped malformed note reference: " + idx);
      }
    }
  }

  if (selected.empty()) {
    out.model = model;
    out.fell_back = true;
    out.warnings.push_back("no valid column selected; returning the unfiltered model");
    return out;
  }

  std::set<std::string> tables;
  for (const auto& [t, _] : selected) tables.insert(t);
  std::vector<Relationship> rels = spanning_relationships(model, tables);
  // relationship endpoints must exist in the sub-model
  for (const auto& rel : rels) {
    for (auto [t, c] : {std::pair{rel.left_table, rel.left_column},
                        std::pair{rel.right_table, rel.right_column}}) {
      auto& cols = selected[t];
      if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
  }

  for (const auto& t : model.tables) {
    auto it = selected.find(t.name);
    if (it == selected.end()) continue;
    TableSpec sub;
    sub.name = t.name;
    sub.description = t.description;
    for (const auto& c : t.columns)
      if (std::find(it->second.begin(), it->second.end(), c.name) != it->second.end())
        sub.columns.push_back(c);
    out.model.tables.push_back(std::move(sub));
  }
  out.model.relationships = std::move(rels);
  for (std::size_t i = 0; i < model.notes.size(); ++i)
    if (note_refs.count(i)) out.model.notes.push_back(model.notes[i]);
  out.model.check();
  return out;
}

/// True when `sub` is a sub-model of `full` (tables, columns, relationships
/// all subsets).
inline bool is_sub_model(const SemanticDataModel& sub, const SemanticDataModel& full) {
  for (const auto& t : sub.tables) {
    const TableSpec* ft = full.find_table(t.name);
    if (!ft) return false;
    for (const auto& c : t.columns)
      if (!ft->find(c.name)) return false;
  }
  for (const auto& r : sub.relationships) {
    bool found = false;
    for (const auto& fr : full.relationships) found = found || fr == r;
    if (!found) return false;
  }
  return true;
}

}  // namespace hra
