#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dp2s/two_sample_test.hpp"

namespace dp2s {

namespace detail {
extern const std::string_view kThresholdTableCsv;
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto cut = text.find(sep);
    out.push_back(text.substr(0, cut));
    if (cut == std::string_view::npos) return out;
    text.remove_prefix(cut + 1);
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(ThresholdMode mode) {
  switch (mode) {
    case ThresholdMode::Auto: return "auto";
    case ThresholdMode::Simulate: return "simulate";
    case ThresholdMode::Table: return "table";
    case ThresholdMode::Formula: return "formula";
    case ThresholdMode::Fixed: return "fixed";
  }
  return "unknown";
}

ThresholdSpec ThresholdSpec::parse(std::string_view text) {
  if (text == "auto") return {ThresholdMode::Auto, 0.0};
  if (text == "simulate") return {ThresholdMode::Simulate, 0.0};
  if (text == "table") return {ThresholdMode::Table, 0.0};
  if (text == "formula") return {ThresholdMode::Formula, 0.0};
  if (text.starts_with("fixed:")) {
    const std::string value(text.substr(6));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size() || !std::isfinite(v)) {
      throw std::invalid_argument("threshold mode: bad fixed value '" + value + "'");
    }
    return {ThresholdMode::Fixed, v};
  }
  throw std::invalid_argument("threshold mode must be auto, simulate, table, formula or fixed:<value>");
}

std::string ThresholdSpec::describe() const {
  if (mode != ThresholdMode::Fixed) return std::string(to_string(mode));
  std::ostringstream os;
  os.precision(17);
  os << "fixed:" << fixed_value;
  return os.str();
}

ThresholdTable ThresholdTable::parse_csv(std::string_view csv) {
  ThresholdTable table;
  bool seen[kMaxSize][kMaxSize] = {};
  bool header = true;
  for (std::string_view line : split(csv, '\n')) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = split(line, ',');
    const std::size_t row = std::stoul(std::string(trim(cells[0])));
    if (row < 1 || row > kMaxSize) throw std::invalid_argument("threshold table: bad row label");
    for (std::size_t col = 1; col < cells.size(); ++col) {
      const auto cell = trim(cells[col]);
      if (cell.empty()) continue;
      if (col > row) throw std::invalid_argument("threshold table: entry above the diagonal");
      const double v = std::stod(std::string(cell));
      if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("threshold table: entry outside (0, 1)");
      table.values_[row - 1][col - 1] = v;
      seen[row - 1][col - 1] = true;
    }
  }
  for (std::size_t i = 0; i < kMaxSize; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (!seen[i][j]) throw std::invalid_argument("threshold table: missing entry");
    }
  }
  return table;
}

const ThresholdTable& ThresholdTable::builtin() {
  static const ThresholdTable table = parse_csv(detail::kThresholdTableCsv);
  return table;
}

double ThresholdTable::lookup(std::size_t m1, std::size_t m2) const {
  if (m1 < 1 || m2 < 1 || m1 > kMaxSize || m2 > kMaxSize) {
    throw std::out_of_range("threshold table covers sample sizes 1..20; use the formula or simulation");
  }
  const std::size_t hi = std::max(m1, m2);
  const std::size_t lo = std::min(m1, m2);
  return values_[hi - 1][lo - 1];
}

double threshold_table(std::size_t m1, std::size_t m2) { return ThresholdTable::builtin().lookup(m1, m2); }

double threshold_formula(std::size_t m1, std::size_t m2) {
  if (m1 == 0 || m2 == 0) throw std::invalid_argument("threshold formula: sample sizes must be positive");
  return 1.41 * std::sqrt(1.0 / static_cast<double>(m1) + 1.0 / static_cast<double>(m2));
}

bool formula_in_range(std::size_t m1, std::size_t m2) { return m1 >= 20 && m2 >= 20; }

}  // namespace dp2s
