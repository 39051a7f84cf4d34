#include "ordshift/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "ordshift/error.hpp"

namespace ordshift {

namespace {

std::vector<std::string> split_line(const std::string& line, int row) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError(fmt::format("row {}: unterminated quoted field", row));
  fields.push_back(std::move(field));
  for (auto& f : fields) {
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
  }
  return fields;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<std::string> needed_columns(const FormulaSpec& formula) {
  std::vector<std::string> names;
  const auto add = [&](const std::string& n) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  };
  for (const auto& t : formula.location) add(t.variable);
  for (const auto& t : formula.dispersion) add(t.variable);
  return names;
}

Column build_column(const std::string& name, const std::vector<std::string>& raw, bool forced,
                    bool smooth) {
  Column col;
  col.name = name;
  std::optional<std::size_t> first_text;
  std::size_t numeric_count = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].empty()) {
      throw DataError(fmt::format("row {}, column '{}': missing value", i + 2, name));
    }
    if (parse_number(raw[i])) {
      ++numeric_count;
    } else if (!first_text) {
      first_text = i;
    }
  }
  const bool all_text = numeric_count == 0;
  if (!forced && !all_text && first_text) {
    throw DataError(fmt::format("row {}, column '{}': numeric column contains text '{}'",
                                *first_text + 2, name, raw[*first_text]));
  }
  if (smooth && (forced || all_text)) {
    if (first_text) {
      throw DataError(fmt::format("row {}, column '{}': smooth term needs numeric values, got '{}'",
                                  *first_text + 2, name, raw[*first_text]));
    }
    throw DataError(fmt::format("column '{}' is declared categorical but used in s(...)", name));
  }
  if (!forced && !all_text) {
    col.numeric.reserve(raw.size());
    for (const auto& v : raw) col.numeric.push_back(*parse_number(v));
    return col;
  }
  col.categorical = true;
  col.values = raw;
  if (numeric_count == raw.size()) {
    std::map<double, std::string> by_value;
    for (const auto& v : raw) by_value.emplace(*parse_number(v), v);
    std::set<std::string> spellings(raw.begin(), raw.end());
    if (spellings.size() != by_value.size()) {
      throw DataError(fmt::format("column '{}': one level is spelled in several ways", name));
    }
    for (const auto& [value, spelling] : by_value) col.levels.push_back(spelling);
  } else {
    std::set<std::string> seen;
    for (const auto& v : raw) {
      if (seen.insert(v).second) col.levels.push_back(v);
    }
  }
  return col;
}

}  // namespace

OrdinalDataset read_csv(std::istream& in, const FormulaSpec& formula, const CsvOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty (no header row)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_line(line, 1);

  const auto index_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(fmt::format("missing column '{}'", name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t response_idx = index_of(formula.response);
  const std::vector<std::string> names = needed_columns(formula);
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(index_of(n));

  OrdinalDataset data;
  data.response_name = formula.response;
  std::vector<std::vector<std::string>> raw(names.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_line(line, row);
    if (fields.size() != header.size()) {
      throw DataError(fmt::format("row {}: expected {} fields, found {}", row, header.size(),
                                  fields.size()));
    }
    const std::string& y = fields[response_idx];
    int value = 0;
    const auto [ptr, ec] = std::from_chars(y.data(), y.data() + y.size(), value);
    if (y.empty() || ec != std::errc() || ptr != y.data() + y.size()) {
      throw DataError(fmt::format("row {}, column '{}': response '{}' is not an integer", row,
                                  formula.response, y));
    }
    if (value < 1 || (options.k && value > *options.k)) {
      throw DataError(fmt::format("row {}, column '{}': categories must be 1..k, got {}", row,
                                  formula.response, value));
    }
    data.response.push_back(value);
    for (std::size_t j = 0; j < names.size(); ++j) raw[j].push_back(fields[idx[j]]);
  }
  if (data.response.empty()) throw DataError("CSV input has no data rows");
  data.k = options.k ? *options.k : *std::max_element(data.response.begin(), data.response.end());

  for (std::size_t j = 0; j < names.size(); ++j) {
    const bool forced = std::find(options.categorical.begin(), options.categorical.end(),
                                  names[j]) != options.categorical.end();
    bool smooth = false;
    for (const auto* side : {&formula.location, &formula.dispersion}) {
      for (const auto& t : *side) smooth = smooth || (t.variable == names[j] && t.smooth);
    }
    data.columns.push_back(build_column(names[j], raw[j], forced, smooth));
  }
  return data;
}

OrdinalDataset load_csv(const std::string& path, const FormulaSpec& formula,
                        const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path));
  return read_csv(in, formula, options);
}

}  // namespace ordshift
