#pragma once

#include "nodal_atlas/experiments/config.hpp"

#include <fmt/format.h>

#include <iostream>
#include <algorithm>

namespace nodal_atlas::experiments {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

/// CSV builder; numbers are written with 12 significant digits, NaN/inf as empty.
class Table {
public:
  Table() = default;
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  template <class... Ts>
  std::size_t row(const Ts&... cells) {
    if (sizeof...(Ts) != columns_.size()) throw InvalidInput("table: row width differs from header");
    std::vector<std::string> r;
    (r.push_back(cell(cells)), ...);
    rows_.push_back(std::move(r));
    return rows_.size() - 1;
  }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw InvalidInput("table: no column '" + name + "'");
    return static_cast<std::size_t>(it - columns_.begin());
  }

  /// Cell as a number; empty cells (NaN, inf) read back as NaN.
  double number(std::size_t row, const std::string& col) const {
    const std::string& s = rows_.at(row).at(column(col));
    return s.empty() ? std::nan("") : std::stod(s);
  }
  const std::string& text(std::size_t row, const std::string& col) const { return rows_.at(row).at(column(col)); }

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
    s += "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
      s += "\n";
    }
    return s;
  }

private:
  static std::string cell(double v) { return doubling::fmt_num(v); }
  static std::string cell(float v) { return doubling::fmt_num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(unsigned v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct RowRef {
  std::string table;
  std::vector<std::size_t> rows;
};

struct Item {
  std::string name;
  std::string status;  // pass | fail | inconclusive | info
  double value = 0.0;
  std::string threshold;
  std::vector<RowRef> cites;
  std::string note;

  bool failed() const { return status == "fail"; }
};

struct Report {
  ExperimentConfig config;
  std::map<std::string, Table> tables;
  std::vector<Item> items;
  std::vector<std::string> figures;           // paths relative to output_dir
  std::map<std::string, std::string> svgs;    // file name -> content
  std::map<std::string, std::string> files;   // other outputs (JSON), file name -> content
  nlohmann::json extra = nlohmann::json::object();
  nlohmann::json error_budget = nlohmann::json::object();

  Table& table(const std::string& name, std::vector<std::string> columns) {
    return tables[name] = Table(std::move(columns));
  }

  Item& check(std::string name, bool ok, double value, std::string threshold, std::vector<RowRef> cites = {}) {
    items.push_back({std::move(name), ok ? "pass" : "fail", value, std::move(threshold), std::move(cites), {}});
    return items.back();
  }

  /// A check whose outcome is not decisive (e.g. a fit too noisy to judge).
  Item& inconclusive(std::string name, double value, std::string threshold, std::vector<RowRef> cites = {},
                     std::string note = {}) {
    items.push_back({std::move(name), "inconclusive", value, std::move(threshold), std::move(cites), std::move(note)});
    return items.back();
  }

  Item& info(std::string name, double value, std::vector<RowRef> cites = {}, std::string note = {}) {
    items.push_back({std::move(name), "info", value, {}, std::move(cites), std::move(note)});
    return items.back();
  }

  std::vector<std::string> figure_list() const {
    std::vector<std::string> f = figures;
    for (const auto& [name, svg] : svgs) f.push_back(name);
    return f;
  }

  bool passed() const {
    for (const auto& i : items)
      if (i.failed()) return false;
    return true;
  }

  std::map<std::string, std::string> table_hashes() const {
    std::map<std::string, std::string> h;
    for (const auto& [name, t] : tables) h[name + ".csv"] = hex64(fnv1a(t.csv()));
    return h;
  }

  nlohmann::json summary() const {
    nlohmann::json its = nlohmann::json::array();
    for (const auto& i : items) {
      nlohmann::json c = nlohmann::json::array();
      for (const auto& r : i.cites) c.push_back({{"table", r.table + ".csv"}, {"rows", r.rows}});
      nlohmann::json v = std::isfinite(i.value) ? nlohmann::json(i.value) : nlohmann::json(nullptr);
      nlohmann::json e{{"name", i.name}, {"status", i.status}, {"value", v}, {"cites", c}};
      if (!i.threshold.empty()) e["threshold"] = i.threshold;
      if (!i.note.empty()) e["note"] = i.note;
      its.push_back(e);
    }
    return {{"experiment", config.name},
            {"config", config.to_json()},
            {"pass", passed()},
            {"items", its},
            {"figures", figure_list()},
            {"tables", table_hashes()},
            {"error_budget", error_budget},
            {"extra", extra}};
  }

  /// Writes every table, figure and summary.json into dir.
  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, t] : tables) {
      std::ofstream out(dir / (name + ".csv"), std::ios::binary);
      if (!out) throw InvalidInput("cannot write into '" + dir.string() + "'");
      out << t.csv();
    }
    for (const auto* group : {&svgs, &files})
      for (const auto& [name, body] : *group) {
        const auto path = dir / name;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << body;
      }
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << summary().dump(2) << "\n";
  }
};

/// Machine-parsable stderr line: key=value pairs, values with spaces quoted.
inline void log_kv(std::initializer_list<std::pair<std::string, std::string>> kv) {
  std::string line;
  for (const auto& [k, v] : kv) {
    if (!line.empty()) line += ' ';
    const bool quote = v.find_first_of(" \t\"=") != std::string::npos || v.empty();
    line += k + "=" + (quote ? nlohmann::json(v).dump() : v);
  }
  std::cerr << line << "\n";
}

inline std::string num(double v) { return fmt::format("{:.6g}", v); }

}  // namespace nodal_atlas::experiments
