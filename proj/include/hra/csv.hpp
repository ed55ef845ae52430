#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hra/relation.hpp"

namespace hra {

/// RFC-4180-style CSV: quoted fields may contain commas, quotes (doubled) and
/// newlines. Rows are vectors of raw strings; empty fields are nulls.
inline std::vector<std::vector<std::string>> read_csv_text(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (!field.empty() || field_started || !row.empty()) end_row();
  return rows;
}

/// Infers a column type from its non-empty cells: Integer if every cell
/// parses as a plain integer, else Float if every cell parses numerically,
/// else Text. All-empty columns default to Text.
inline TypeTag infer_column_type(const std::vector<std::vector<std::string>>& rows,
                                 std::size_t col) {
  bool all_int = true, all_float = true, any = false;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string& cell = rows[r].size() > col ? rows[r][col] : std::string();
    if (cell.empty()) continue;
    any = true;
    // plain digits only; parse_value's comma-stripping is for LLM output, not CSV
    std::size_t start = cell[0] == '-' ? 1 : 0;
    bool digits = start < cell.size();
    bool dot = false;
    for (std::size_t i = start; i < cell.size(); ++i) {
      if (cell[i] == '.' && !dot) {
        dot = true;
        continue;
      }
      digits = digits && std::isdigit(static_cast<unsigned char>(cell[i]));
    }
    all_int = all_int && digits && !dot;
    all_float = all_float && digits;
  }
  if (!any) return TypeTag::Text;
  if (all_int) return TypeTag::Integer;
  if (all_float) return TypeTag::Float;
  return TypeTag::Text;
}

/// Loads a CSV file into a relation. The header row provides column names.
/// Ragged rows raise CsvError carrying the 1-based row number.
inline Relation read_csv_file(const std::string& path, const std::string& table_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CSV file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  auto rows = read_csv_text(os.str());
  if (rows.empty()) throw CsvError("CSV file has no header row: " + path, 0);

  Schema schema;
  for (std::size_t c = 0; c < rows[0].size(); ++c)
    schema.add({rows[0][c], infer_column_type(rows, c), ""});

  Relation rel(table_name, schema);
  rel.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size())
      throw CsvError("row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                         " fields, expected " + std::to_string(schema.size()) + " in " + path,
                     r + 1);
    Row out;
    out.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& cell = rows[r][c];
      if (cell.empty()) {
        out.push_back(Value::null());
        continue;
      }
      auto v = parse_value(cell, schema.at(c).type);
      if (!v)
        throw CsvError("row " + std::to_string(r + 1) + ": cannot parse '" + cell + "' as " +
                           std::string(type_name(schema.at(c).type)) + " in " + path,
                       r + 1);
      out.push_back(std::move(*v));
    }
    rel.append(std::move(out));
  }
  return rel;
}

inline std::string csv_escape(const std::string& s) {
  bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

inline void write_csv(const Relation& rel, std::ostream& out) {
  for (std::size_t c = 0; c < rel.schema().size(); ++c) {
    if (c) out << ',';
    out << csv_escape(rel.schema().at(c).name);
  }
  out << '\n';
  for (const auto& row : rel.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      if (!row[c].is_null()) out << csv_escape(row[c].render());
    }
    out << '\n';
  }
}

}  // namespace hra
