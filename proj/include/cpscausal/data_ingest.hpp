#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpscausal {

// A historian log as read from disk: one numeric column per design parameter.
struct RawLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  // Present only when the source had a "Timestamp" column; never used for learning.
  std::optional<std::vector<std::string>> timestamps;

  std::size_t column_index(std::string_view name) const;  // throws UnknownColumn
  std::vector<double> column_values(std::string_view name) const;
};

enum class VariableKind { Sensor, Actuator };

std::string_view to_string(VariableKind kind);

// Discretization of one design parameter.
//
// Sensors carry strictly increasing cut points; state i covers
// [bin_edges[i-1], bin_edges[i]) with open outer ends. Actuators optionally
// carry the raw code for each state; without codes the state index is the raw
// value minus the smallest value observed in the column.
struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::Sensor;
  std::vector<std::string> states;
  std::vector<double> bin_edges;
  std::vector<std::int64_t> codes;

  std::size_t cardinality() const { return states.size(); }
  std::optional<std::size_t> state_index(std::string_view label) const;

  // Throws InvalidArgument when the invariants do not hold.
  void validate() const;

  // Sensor value -> state index under the half-open bin convention.
  std::size_t bin_of(double value) const;
};

bool operator==(const VariableSpec& a, const VariableSpec& b);

// Records x variables table of state indices, stored column-major.
class DiscreteDataset {
 public:
  DiscreteDataset() = default;
  // Throws when a column length differs, a cell is out of range, or there are no records.
  DiscreteDataset(std::vector<VariableSpec> specs, std::vector<std::vector<int>> columns);

  const std::vector<VariableSpec>& specs() const { return specs_; }
  const VariableSpec& spec(std::size_t var) const { return specs_[var]; }
  std::size_t num_variables() const { return specs_.size(); }
  std::size_t num_records() const { return columns_.empty() ? 0 : columns_.front().size(); }

  std::span<const int> column(std::size_t var) const { return columns_[var]; }
  int at(std::size_t record, std::size_t var) const { return columns_[var][record]; }
  std::size_t cardinality(std::size_t var) const { return specs_[var].cardinality(); }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws UnknownColumn
  std::vector<std::string> names() const;

  friend bool operator==(const DiscreteDataset&, const DiscreteDataset&) = default;

 private:
  std::vector<VariableSpec> specs_;
  std::vector<std::vector<int>> columns_;
};

enum class BinMethod { EqualWidth, Quantile };

// Comma-separated historian text with a header row.
RawLog parse_log(std::string_view text);
std::string format_log(const RawLog& log);

std::vector<double> suggest_bins(const RawLog& log, std::string_view column, int n_bins,
                                 BinMethod method);

DiscreteDataset discretize(const RawLog& log, const std::vector<VariableSpec>& specs);

DiscreteDataset project(const DiscreteDataset& ds, const std::vector<std::string>& names);

// Variable spec files: one variable per line,
//   NAME sensor   LABEL,LABEL,...  edges=E1,E2,...
//   NAME actuator LABEL,LABEL,...  [codes=C1,C2,...]
// Blank lines and text after '#' are ignored.
std::vector<VariableSpec> parse_variable_specs(std::string_view text);
std::string format_variable_specs(const std::vector<VariableSpec>& specs);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace cpscausal
