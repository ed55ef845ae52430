#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hra/value.hpp"

namespace hra {

struct Column {
  std::string name;
  TypeTag type = TypeTag::Text;
  std::string description;

  friend bool operator==(const Column& a, const Column& b) {
    return a.name == b.name && a.type == b.type;
  }
};

/// Ordered column list. Names are unique, case-sensitive.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Column> cols) {
    for (auto& c : cols) add(std::move(c));
  }

  void add(Column c) {
    if (index_of(c.name)) throw Error("duplicate column name: " + c.name);
    cols_.push_back(std::move(c));
  }

  std::size_t size() const { return cols_.size(); }
  bool empty() const { return cols_.empty(); }
  const Column& at(std::size_t i) const { return cols_.at(i); }
  const std::vector<Column>& columns() const { return cols_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < cols_.size(); ++i)
      if (cols_[i].name == name) return i;
    return std::nullopt;
  }

  bool has(std::string_view name) const { return index_of(name).has_value(); }

  /// Equality by names and types, in order. Descriptions are metadata.
  friend bool operator==(const Schema& a, const Schema& b) { return a.cols_ == b.cols_; }
  friend bool operator!=(const Schema& a, const Schema& b) { return !(a == b); }

  auto begin() const { return cols_.begin(); }
  auto end() const { return cols_.end(); }

 private:
  std::vector<Column> cols_;
};

}  // namespace hra
