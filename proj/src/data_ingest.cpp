#include "cpscausal/data_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cpscausal/error.hpp"

namespace cpscausal {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  return lines;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Type-7 (linear interpolation) empirical quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view to_string(VariableKind kind) {
  return kind == VariableKind::Sensor ? "sensor" : "actuator";
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::size_t RawLog::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw Error(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> RawLog::column_values(std::string_view name) const {
  const auto idx = column_index(name);
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& row : rows) values.push_back(row[idx]);
  return values;
}

RawLog parse_log(std::string_view text) {
  auto lines = lines_of(text);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || trim(lines.front()).empty()) {
    throw Error(ErrorCode::EmptyInput, "historian log has no header");
  }

  const auto header = split(lines.front(), ',');
  std::optional<std::size_t> ts_col;
  RawLog log;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name.empty()) throw Error(ErrorCode::ParseError, "empty column name in header");
    if (iequals(name, "timestamp") && !ts_col) {
      ts_col = c;
      continue;
    }
    if (!seen.insert(std::string(name)).second) {
      throw Error(ErrorCode::ParseError, "duplicate column '" + std::string(name) + "'");
    }
    log.columns.emplace_back(name);
  }
  if (ts_col) log.timestamps.emplace();

  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (trim(lines[l]).empty()) continue;
    const auto cells = split(lines[l], ',');
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::RaggedRow, "line " + std::to_string(l + 1) + " has " +
                                            std::to_string(cells.size()) + " cells, expected " +
                                            std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(log.columns.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (ts_col && c == *ts_col) {
        log.timestamps->emplace_back(trim(cells[c]));
        continue;
      }
      const auto v = parse_number(cells[c]);
      if (!v) {
        throw Error(ErrorCode::NonNumericCell, "line " + std::to_string(l + 1) + ", column '" +
                                                   std::string(trim(header[c])) +
                                                   "': not a number: '" +
                                                   std::string(trim(cells[c])) + "'");
      }
      row.push_back(*v);
    }
    log.rows.push_back(std::move(row));
  }
  if (log.rows.empty()) throw Error(ErrorCode::EmptyInput, "historian log has no records");
  return log;
}

std::string format_log(const RawLog& log) {
  std::string out;
  const bool with_ts = log.timestamps.has_value();
  if (with_ts) out += "Timestamp";
  for (std::size_t c = 0; c < log.columns.size(); ++c) {
    if (with_ts || c > 0) out += ',';
    out += log.columns[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < log.rows.size(); ++r) {
    if (with_ts) out += (*log.timestamps)[r];
    for (std::size_t c = 0; c < log.rows[r].size(); ++c) {
      if (with_ts || c > 0) out += ',';
      out += format_double(log.rows[r][c]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> suggest_bins(const RawLog& log, std::string_view column, int n_bins,
                                 BinMethod method) {
  if (n_bins < 2) throw Error(ErrorCode::InvalidArgument, "n_bins must be at least 2");
  auto values = log.column_values(column);
  std::sort(values.begin(), values.end());
  const double lo = values.front();
  const double hi = values.back();
  if (lo == hi) {
    throw Error(ErrorCode::DegenerateColumn, "column '" + std::string(column) + "' is constant");
  }

  std::vector<double> edges;
  if (method == BinMethod::EqualWidth) {
    const double width = (hi - lo) / n_bins;
    for (int k = 1; k < n_bins; ++k) edges.push_back(lo + width * k);
  } else {
    std::vector<double> uniq = values;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (static_cast<int>(uniq.size()) < n_bins) {
      throw Error(ErrorCode::DegenerateColumn, "column '" + std::string(column) + "' has only " +
                                                   std::to_string(uniq.size()) +
                                                   " distinct values");
    }
    for (int k = 1; k < n_bins; ++k) {
      edges.push_back(quantile_sorted(values, static_cast<double>(k) / n_bins));
    }
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i - 1] < edges[i])) {
      throw Error(ErrorCode::DegenerateColumn,
                  "bin edges for '" + std::string(column) + "' collapse");
    }
  }
  return edges;
}

std::optional<std::size_t> VariableSpec::state_index(std::string_view label) const {
  const auto it = std::find(states.begin(), states.end(), label);
  if (it == states.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

void VariableSpec::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "variable '" + name + "': " + why);
  };
  if (name.empty()) fail("empty name");
  if (states.size() < 2) fail("needs at least two states");
  std::set<std::string> uniq(states.begin(), states.end());
  if (uniq.size() != states.size()) fail("duplicate state labels");
  if (std::any_of(states.begin(), states.end(), [](const auto& s) { return s.empty(); })) {
    fail("empty state label");
  }
  if (kind == VariableKind::Sensor) {
    if (bin_edges.size() + 1 != states.size()) fail("sensor needs states.len - 1 bin edges");
    for (std::size_t i = 1; i < bin_edges.size(); ++i) {
      if (!(bin_edges[i - 1] < bin_edges[i])) fail("bin edges must be strictly increasing");
    }
    if (!codes.empty()) fail("sensors take edges, not codes");
  } else {
    if (!bin_edges.empty()) fail("actuators take codes, not edges");
    if (!codes.empty()) {
      if (codes.size() != states.size()) fail("codes must list one code per state");
      std::set<std::int64_t> uc(codes.begin(), codes.end());
      if (uc.size() != codes.size()) fail("duplicate codes");
    }
  }
}

std::size_t VariableSpec::bin_of(double value) const {
  return static_cast<std::size_t>(std::upper_bound(bin_edges.begin(), bin_edges.end(), value) -
                                  bin_edges.begin());
}

bool operator==(const VariableSpec& a, const VariableSpec& b) {
  return a.name == b.name && a.kind == b.kind && a.states == b.states &&
         a.bin_edges == b.bin_edges && a.codes == b.codes;
}

DiscreteDataset::DiscreteDataset(std::vector<VariableSpec> specs,
                                 std::vector<std::vector<int>> columns)
    : specs_(std::move(specs)), columns_(std::move(columns)) {
  if (specs_.size() != columns_.size()) {
    throw Error(ErrorCode::InvalidArgument, "one column per variable spec required");
  }
  if (columns_.empty() || columns_.front().empty()) {
    throw Error(ErrorCode::EmptyDataset, "dataset needs at least one variable and one record");
  }
  std::set<std::string> names;
  for (std::size_t v = 0; v < specs_.size(); ++v) {
    if (!names.insert(specs_[v].name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate variable '" + specs_[v].name + "'");
    }
    if (columns_[v].size() != columns_.front().size()) {
      throw Error(ErrorCode::InvalidArgument, "column length mismatch for '" + specs_[v].name + "'");
    }
    const int card = static_cast<int>(specs_[v].cardinality());
    for (int cell : columns_[v]) {
      if (cell < 0 || cell >= card) {
        throw Error(ErrorCode::InvalidArgument,
                    "state index " + std::to_string(cell) + " out of range for '" +
                        specs_[v].name + "'");
      }
    }
  }
}

std::optional<std::size_t> DiscreteDataset::find(std::string_view name) const {
  for (std::size_t v = 0; v < specs_.size(); ++v) {
    if (specs_[v].name == name) return v;
  }
  return std::nullopt;
}

std::size_t DiscreteDataset::index_of(std::string_view name) const {
  const auto idx = find(name);
  if (!idx) throw Error(ErrorCode::UnknownColumn, "unknown column '" + std::string(name) + "'");
  return *idx;
}

std::vector<std::string> DiscreteDataset::names() const {
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const auto& s : specs_) out.push_back(s.name);
  return out;
}

DiscreteDataset discretize(const RawLog& log, const std::vector<VariableSpec>& specs) {
  std::vector<std::vector<int>> columns;
  columns.reserve(specs.size());
  for (const auto& spec : specs) {
    spec.validate();
    const auto it = std::find(log.columns.begin(), log.columns.end(), spec.name);
    if (it == log.columns.end()) {
      throw Error(ErrorCode::MissingColumn, "log has no column '" + spec.name + "'");
    }
    const auto c = static_cast<std::size_t>(it - log.columns.begin());
    std::vector<int> column;
    column.reserve(log.rows.size());

    if (spec.kind == VariableKind::Sensor) {
      for (const auto& row : log.rows) column.push_back(static_cast<int>(spec.bin_of(row[c])));
    } else {
      auto unmapped = [&](double v) {
        return Error(ErrorCode::UnmappedActuatorValue,
                     "actuator '" + spec.name + "' value " + format_double(v) +
                         " has no declared state");
      };
      std::map<std::int64_t, int> code_to_state;
      if (!spec.codes.empty()) {
        for (std::size_t s = 0; s < spec.codes.size(); ++s) {
          code_to_state[spec.codes[s]] = static_cast<int>(s);
        }
      } else {
        double lowest = log.rows.front()[c];
        for (const auto& row : log.rows) lowest = std::min(lowest, row[c]);
        if (lowest != std::floor(lowest)) throw unmapped(lowest);
        for (std::size_t s = 0; s < spec.states.size(); ++s) {
          code_to_state[static_cast<std::int64_t>(lowest) + static_cast<std::int64_t>(s)] =
              static_cast<int>(s);
        }
      }
      for (const auto& row : log.rows) {
        const double v = row[c];
        if (v != std::floor(v)) throw unmapped(v);
        const auto found = code_to_state.find(static_cast<std::int64_t>(v));
        if (found == code_to_state.end()) throw unmapped(v);
        column.push_back(found->second);
      }
    }
    columns.push_back(std::move(column));
  }
  return DiscreteDataset(specs, std::move(columns));
}

DiscreteDataset project(const DiscreteDataset& ds, const std::vector<std::string>& names) {
  std::vector<VariableSpec> specs;
  std::vector<std::vector<int>> columns;
  for (const auto& name : names) {
    const auto v = ds.index_of(name);
    specs.push_back(ds.spec(v));
    const auto col = ds.column(v);
    columns.emplace_back(col.begin(), col.end());
  }
  return DiscreteDataset(std::move(specs), std::move(columns));
}

std::vector<VariableSpec> parse_variable_specs(std::string_view text) {
  std::vector<VariableSpec> specs;
  std::set<std::string> names;
  const auto lines = lines_of(text);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    auto line = lines[l];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::istringstream in{std::string(line)};
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;

    const auto where = "spec line " + std::to_string(l + 1) + ": ";
    if (tokens.size() < 3 || tokens.size() > 4) {
      throw Error(ErrorCode::ParseError, where + "expected 'name kind states [edges=|codes=]'");
    }
    VariableSpec spec;
    spec.name = tokens[0];
    if (tokens[1] == "sensor") {
      spec.kind = VariableKind::Sensor;
    } else if (tokens[1] == "actuator") {
      spec.kind = VariableKind::Actuator;
    } else {
      throw Error(ErrorCode::ParseError, where + "kind must be sensor or actuator");
    }
    for (auto label : split(tokens[2], ',')) spec.states.emplace_back(label);

    if (tokens.size() == 4) {
      const std::string_view extra = tokens[3];
      const auto eq = extra.find('=');
      if (eq == std::string_view::npos) throw Error(ErrorCode::ParseError, where + "bad option");
      const auto key = extra.substr(0, eq);
      for (auto item : split(extra.substr(eq + 1), ',')) {
        const auto v = parse_number(item);
        if (!v) throw Error(ErrorCode::ParseError, where + "bad number '" + std::string(item) + "'");
        if (key == "edges") {
          spec.bin_edges.push_back(*v);
        } else if (key == "codes") {
          if (*v != std::floor(*v)) throw Error(ErrorCode::ParseError, where + "codes are integers");
          spec.codes.push_back(static_cast<std::int64_t>(*v));
        } else {
          throw Error(ErrorCode::ParseError, where + "unknown option '" + std::string(key) + "'");
        }
      }
    }
    try {
      spec.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + e.what());
    }
    if (!names.insert(spec.name).second) {
      throw Error(ErrorCode::ParseError, where + "duplicate variable '" + spec.name + "'");
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::string format_variable_specs(const std::vector<VariableSpec>& specs) {
  std::string out;
  for (const auto& spec : specs) {
    out += spec.name;
    out += ' ';
    out += to_string(spec.kind);
    out += ' ';
    for (std::size_t i = 0; i < spec.states.size(); ++i) {
      if (i) out += ',';
      out += spec.states[i];
    }
    if (!spec.bin_edges.empty()) {
      out += " edges=";
      for (std::size_t i = 0; i < spec.bin_edges.size(); ++i) {
        if (i) out += ',';
        out += format_double(spec.bin_edges[i]);
      }
    }
    if (!spec.codes.empty()) {
      out += " codes=";
      for (std::size_t i = 0; i < spec.codes.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(spec.codes[i]);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace cpscausal
