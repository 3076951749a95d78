#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tradenet/error.hpp"

namespace tradenet {

struct AttributeColumn {
  std::string name;
  bool categorical{false};
  std::vector<std::optional<double>> cells;  // nullopt = missing

  std::size_t missing_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c; }));
  }
  double missing_fraction() const {
    return cells.empty() ? 0.0
                         : static_cast<double>(missing_count()) / static_cast<double>(cells.size());
  }
  double value(std::size_t row) const {
    const auto& c = cells.at(row);
    if (!c) throw DataError("attribute '" + name + "' is missing at row " + std::to_string(row));
    return *c;
  }

  friend bool operator==(const AttributeColumn&, const AttributeColumn&) = default;
};

/// Per-node covariates, one row per network node in node-index order.
class AttributeTable {
 public:
  AttributeTable() = default;
  explicit AttributeTable(std::vector<std::string> row_ids) : row_ids_(std::move(row_ids)) {}

  std::size_t rows() const noexcept { return row_ids_.size(); }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }
  const std::vector<AttributeColumn>& columns() const noexcept { return columns_; }
  std::vector<AttributeColumn>& columns() noexcept { return columns_; }

  void add_column(AttributeColumn col) {
    if (col.cells.size() != row_ids_.size()) {
      throw DataError("column '" + col.name + "' has " + std::to_string(col.cells.size()) +
                      " cells, expected " + std::to_string(row_ids_.size()));
    }
    if (find(col.name)) throw DataError("duplicate column '" + col.name + "'");
    columns_.push_back(std::move(col));
  }

  const AttributeColumn* find(std::string_view name) const {
    for (const auto& c : columns_) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  const AttributeColumn& column(std::string_view name) const {
    if (const auto* c = find(name)) return *c;
    throw DataError("unknown attribute '" + std::string(name) + "'");
  }

  bool complete() const {
    return std::all_of(columns_.begin(), columns_.end(),
                       [](const auto& c) { return c.missing_count() == 0; });
  }

  friend bool operator==(const AttributeTable&, const AttributeTable&) = default;

 private:
  std::vector<std::string> row_ids_;
  std::vector<AttributeColumn> columns_;
};

}  // namespace tradenet
