#pragma once

// A rectangular string table with numeric accessors, read from and written
// to CSV. Regression inputs are built from it.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/error.hpp"
#include "stylo/io.hpp"

namespace stylo {

class Table {
 public:
  Table() = default;

  static Table from_csv(std::string_view text) {
    Table t;
    const auto rows = csv::parse(text);
    if (rows.empty()) return t;
    for (const auto& name : rows.front().fields) t.add_column(name, {});
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& f = rows[r].fields;
      if (f.size() != t.names_.size())
        throw DataError("CSV line " + std::to_string(rows[r].line) + ": expected " + std::to_string(t.names_.size()) +
                        " fields, got " + std::to_string(f.size()));
      for (std::size_t c = 0; c < f.size(); ++c) t.cols_[c].push_back(f[c]);
    }
    return t;
  }

  static Table load(const std::filesystem::path& path) { return from_csv(read_file(path)); }

  std::string to_csv() const {
    std::string out = csv::join(names_);
    std::vector<std::string> row(names_.size());
    for (std::size_t r = 0; r < rows(); ++r) {
      for (std::size_t c = 0; c < names_.size(); ++c) row[c] = cols_[c][r];
      out += csv::join(row);
    }
    return out;
  }

  std::size_t rows() const { return cols_.empty() ? 0 : cols_.front().size(); }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool has(std::string_view name) const { return index_.find(name) != index_.end(); }

  std::size_t index(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw SpecError("unknown column '" + std::string(name) + "'");
    return it->second;
  }

  const std::vector<std::string>& column(std::string_view name) const { return cols_[index(name)]; }
  const std::string& cell(std::size_t row, std::string_view name) const { return column(name).at(row); }

  void add_column(std::string name, std::vector<std::string> values) {
    if (has(name)) throw SpecError("duplicate column '" + name + "'");
    if (!names_.empty() && values.size() != rows()) throw SpecError("column '" + name + "' has the wrong length");
    index_.emplace(name, names_.size());
    names_.push_back(std::move(name));
    cols_.push_back(std::move(values));
  }

  void add_numeric(std::string name, const std::vector<double>& values) {
    std::vector<std::string> s;
    s.reserve(values.size());
    for (double v : values) s.push_back(std::isnan(v) ? std::string() : format_double(v));
    add_column(std::move(name), std::move(s));
  }

  void rename_column(std::string_view from, std::string to) {
    const std::size_t i = index(from);
    if (from == to) return;
    if (has(to)) throw SpecError("duplicate column '" + to + "'");
    index_.erase(index_.find(from));
    index_.emplace(to, i);
    names_[i] = std::move(to);
  }

  static bool is_missing(std::string_view cell) {
    return cell.empty() || cell == "NA" || cell == "na" || cell == "nan" || cell == "NaN";
  }

  // NaN marks a missing cell; any other unparsable cell is an error.
  std::vector<double> numeric(std::string_view name) const {
    const auto& col = column(name);
    std::vector<double> out(col.size());
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (is_missing(col[r])) {
        out[r] = std::nan("");
        continue;
      }
      auto v = parse_double(col[r]);
      if (!v || !std::isfinite(*v))
        throw DataError("column '" + std::string(name) + "' row " + std::to_string(r + 1) + ": non-numeric value '" +
                        col[r] + "'");
      out[r] = *v;
    }
    return out;
  }

  Table select_rows(const std::vector<std::size_t>& rows) const {
    Table t;
    for (std::size_t c = 0; c < names_.size(); ++c) {
      std::vector<std::string> v;
      v.reserve(rows.size());
      for (auto r : rows) v.push_back(cols_[c].at(r));
      t.add_column(names_[c], std::move(v));
    }
    return t;
  }

  // Inner join on a key column; columns of `other` other than the key are
  // appended (name clashes get the suffix "_2").
  Table join(const Table& other, std::string_view key) const {
    const auto& mine = column(key);
    const auto& theirs = other.column(key);
    std::map<std::string, std::size_t, std::less<>> at;
    for (std::size_t r = 0; r < theirs.size(); ++r)
      if (!at.emplace(theirs[r], r).second) throw DataError("duplicate key '" + theirs[r] + "' in joined table");
    std::vector<std::size_t> left, right;
    for (std::size_t r = 0; r < mine.size(); ++r)
      if (auto it = at.find(mine[r]); it != at.end()) {
        left.push_back(r);
        right.push_back(it->second);
      }
    Table out = select_rows(left);
    for (const auto& name : other.names()) {
      if (name == key) continue;
      std::vector<std::string> v;
      v.reserve(right.size());
      for (auto r : right) v.push_back(other.column(name)[r]);
      out.add_column(out.has(name) ? name + "_2" : name, std::move(v));
    }
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> cols_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace stylo
