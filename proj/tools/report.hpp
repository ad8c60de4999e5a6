#pragma once

// Line-oriented key=value output followed by an aligned table.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace annzip::cli {

inline std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

class Report {
 public:
  template <class T>
  void kv(const std::string& key, const T& value) {
    std::ostringstream s;
    s << value;
    lines_.push_back(key + "=" + s.str());
  }
  void kv(const std::string& key, double value, int digits) { lines_.push_back(key + "=" + fmt(value, digits)); }

  void header(std::vector<std::string> cols) { header_ = std::move(cols); }
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  void print(std::ostream& out = std::cout) const {
    for (const auto& l : lines_) out << l << "\n";
    if (header_.empty()) return;
    std::vector<std::size_t> w(header_.size(), 0);
    for (std::size_t c = 0; c < header_.size(); ++c) w[c] = header_[c].size();
    for (const auto& r : rows_)
      for (std::size_t c = 0; c < r.size() && c < w.size(); ++c) w[c] = std::max(w[c], r[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
      out << "|";
      for (std::size_t c = 0; c < w.size(); ++c) {
        const std::string cell = c < cells.size() ? cells[c] : "";
        out << " " << cell << std::string(w[c] - cell.size(), ' ') << " |";
      }
      out << "\n";
    };
    out << "\n";
    line(header_);
    out << "|";
    for (auto x : w) out << std::string(x + 2, '-') << "|";
    out << "\n";
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> lines_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace annzip::cli
