#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hra/schema.hpp"

namespace hra {

using Row = std::vector<Value>;

/// Named in-memory table with bag semantics (duplicate rows permitted,
/// matching SQL). Row arity always equals schema arity.
class Relation {
 public:
  Relation() = default;
  Relation(std::string name, Schema schema) : name_(std::move(name)), schema_(std::move(schema)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  const Schema& schema() const { return schema_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }

  void append(Row row) {
    if (row.size() != schema_.size())
      throw Error("row arity " + std::to_string(row.size()) + " does not match schema arity " +
                  std::to_string(schema_.size()) + " in relation " + name_);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].is_null()) continue;
      TypeTag want = schema_.at(i).type;
      if (want != TypeTag::Any && row[i].tag() != want)
        throw TypeError("column " + schema_.at(i).name + " expects " +
                        std::string(type_name(want)) + ", got " +
                        std::string(type_name(row[i].tag())));
    }
    rows_.push_back(std::move(row));
  }

  void reserve(std::size_t n) { rows_.reserve(n); }

  std::size_t column_index(std::string_view col) const {
    auto idx = schema_.index_of(col);
    if (!idx) throw Error("relation " + name_ + " has no column " + std::string(col));
    return *idx;
  }

  const Value& cell(std::size_t row, std::string_view col) const {
    return rows_.at(row).at(column_index(col));
  }

 private:
  std::string name_;
  Schema schema_;
  std::vector<Row> rows_;
};

/// Bag equality: same schema (names and types, in order) and the same
/// multiset of rows. Row order is irrelevant.
inline bool bag_equal(const Relation& a, const Relation& b) {
  if (a.schema() != b.schema()) return false;
  if (a.row_count() != b.row_count()) return false;
  auto row_less = [](const Row& x, const Row& y) {
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
      if (x[i] == y[i]) continue;
      return Value::ordered_before(x[i], y[i]);
    }
    return x.size() < y.size();
  };
  std::vector<Row> ra = a.rows(), rb = b.rows();
  std::sort(ra.begin(), ra.end(), row_less);
  std::sort(rb.begin(), rb.end(), row_less);
  return ra == rb;
}

/// Plain-text table for terminal output. Deterministic.
inline std::string render_table(const Relation& rel) {
  std::vector<std::size_t> widths(rel.schema().size());
  std::vector<std::vector<std::string>> cells;
  for (std::size_t i = 0; i < rel.schema().size(); ++i)
    widths[i] = rel.schema().at(i).name.size();
  for (const auto& row : rel.rows()) {
    std::vector<std::string> line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line.push_back(row[i].is_null() ? "NULL" : row[i].render());
      widths[i] = std::max(widths[i], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  std::ostringstream os;
  auto pad = [&](const std::string& s, std::size_t w) {
    os << s << std::string(w - s.size() + 2, ' ');
  };
  for (std::size_t i = 0; i < rel.schema().size(); ++i) pad(rel.schema().at(i).name, widths[i]);
  os << '\n';
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) pad(line[i], widths[i]);
    os << '\n';
  }
  return os.str();
}

/// In-memory database: a set of named relations in load order.
class Database {
 public:
  void add(Relation rel) {
    if (find(rel.name())) throw Error("duplicate table: " + rel.name());
    tables_.push_back(std::move(rel));
  }

  const Relation* find(std::string_view name) const {
    for (const auto& t : tables_)
      if (t.name() == name) return &t;
    return nullptr;
  }

  const Relation& table(std::string_view name) const {
    if (const auto* t = find(name)) return *t;
    throw Error("unknown table: " + std::string(name));
  }

  const std::vector<Relation>& tables() const { return tables_; }
  bool empty() const { return tables_.empty(); }

  /// Copy limited to the first `n` rows per table (generation dry-runs).
  Database sample(std::size_t n) const {
    Database out;
    for (const auto& t : tables_) {
      Relation r(t.name(), t.schema());
      for (std::size_t i = 0; i < t.rows().size() && i < n; ++i) r.append(t.rows()[i]);
      out.add(std::move(r));
    }
    return out;
  }

 private:
  std::vector<Relation> tables_;
};

}  // namespace hra
