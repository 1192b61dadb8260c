#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "cpscausal/data_ingest.hpp"
#include "cpscausal/error.hpp"

using namespace cpscausal;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

VariableSpec lit101() {
  VariableSpec s;
  s.name = "LIT101";
  s.kind = VariableKind::Sensor;
  s.states = {"Low", "Medium", "High"};
  s.bin_edges = {210, 750};
  return s;
}

VariableSpec mv101() {
  VariableSpec s;
  s.name = "MV101";
  s.kind = VariableKind::Actuator;
  s.states = {"Close", "Open"};
  s.codes = {1, 2};
  return s;
}

}  // namespace

TEST(ParseLog, MinimalInput) {
  const auto log = parse_log("LIT101,MV101\n500.5,1\n620,2\n");
  EXPECT_EQ(log.columns, (std::vector<std::string>{"LIT101", "MV101"}));
  ASSERT_EQ(log.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(log.rows[0][0], 500.5);
  EXPECT_DOUBLE_EQ(log.rows[1][1], 2.0);
  EXPECT_FALSE(log.timestamps.has_value());
}

TEST(ParseLog, HeaderOnlyIsEmpty) {
  EXPECT_EQ(code_of([] { parse_log("LIT101,MV101\n"); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { parse_log(""); }), ErrorCode::EmptyInput);
}

TEST(ParseLog, RaggedAndNonNumeric) {
  EXPECT_EQ(code_of([] { parse_log("A,B\n1,2,3\n"); }), ErrorCode::RaggedRow);
  EXPECT_EQ(code_of([] { parse_log("A,B\n1,abc\n"); }), ErrorCode::NonNumericCell);
}

TEST(ParseLog, TimestampKeptAside) {
  const auto log = parse_log(" Timestamp , LIT101\n22/12/2015 4:00:00 PM,124.3\n");
  EXPECT_EQ(log.columns, std::vector<std::string>{"LIT101"});
  ASSERT_TRUE(log.timestamps.has_value());
  EXPECT_EQ(log.timestamps->front(), "22/12/2015 4:00:00 PM");
}

TEST(ParseLog, FormatRoundTrip) {
  RawLog log;
  log.columns = {"A", "B"};
  log.rows = {{0.1, 2}, {1e-7, -3.25}};
  log.timestamps = std::vector<std::string>{"0", "1"};
  const auto back = parse_log(format_log(log));
  EXPECT_EQ(back.columns, log.columns);
  EXPECT_EQ(back.rows, log.rows);
  EXPECT_EQ(back.timestamps, log.timestamps);
}

TEST(SuggestBins, EqualWidthMidpoint) {
  RawLog log;
  log.columns = {"x"};
  for (int i = 0; i < 10; ++i) log.rows.push_back({static_cast<double>(i)});
  EXPECT_EQ(suggest_bins(log, "x", 2, BinMethod::EqualWidth), std::vector<double>{4.5});
}

TEST(SuggestBins, QuantileIsMedian) {
  RawLog log;
  log.columns = {"x"};
  std::vector<double> values{7, 2, 9, 0, 4, 1, 8, 3, 6, 5};
  for (double v : values) log.rows.push_back({v});
  std::sort(values.begin(), values.end());
  const double median = (values[4] + values[5]) / 2;
  EXPECT_EQ(suggest_bins(log, "x", 2, BinMethod::Quantile), std::vector<double>{median});
}

TEST(SuggestBins, Errors) {
  RawLog log;
  log.columns = {"x"};
  log.rows = {{3}, {3}, {3}};
  EXPECT_EQ(code_of([&] { suggest_bins(log, "x", 2, BinMethod::EqualWidth); }),
            ErrorCode::DegenerateColumn);
  EXPECT_EQ(code_of([&] { suggest_bins(log, "y", 2, BinMethod::Quantile); }),
            ErrorCode::UnknownColumn);
}

TEST(Discretize, SensorIntervalsAndEdges) {
  RawLog log;
  log.columns = {"LIT101"};
  log.rows = {{100}, {500}, {900}, {210}, {750}};
  const auto ds = discretize(log, {lit101()});
  const auto col = ds.column(0);
  EXPECT_EQ(std::vector<int>(col.begin(), col.end()), (std::vector<int>{0, 1, 2, 1, 2}));
}

TEST(Discretize, ActuatorCodes) {
  RawLog log;
  log.columns = {"MV101", "LIT101"};
  log.rows = {{1, 300}, {2, 300}, {1, 300}};
  const auto ds = discretize(log, {mv101()});
  EXPECT_EQ(ds.num_variables(), 1u);
  EXPECT_EQ(ds.at(0, 0), 0);
  EXPECT_EQ(ds.at(1, 0), 1);

  log.rows.push_back({0, 300});
  EXPECT_EQ(code_of([&] { discretize(log, {mv101()}); }), ErrorCode::UnmappedActuatorValue);
}

TEST(Discretize, ActuatorWithoutCodesUsesOffsetFromMinimum) {
  auto spec = mv101();
  spec.codes.clear();
  RawLog log;
  log.columns = {"MV101"};
  log.rows = {{1}, {2}, {2}};
  const auto ds = discretize(log, {spec});
  EXPECT_EQ(ds.at(0, 0), 0);
  EXPECT_EQ(ds.at(2, 0), 1);
}

TEST(Discretize, MissingColumn) {
  RawLog log;
  log.columns = {"FIT101"};
  log.rows = {{1.0}};
  EXPECT_EQ(code_of([&] { discretize(log, {lit101()}); }), ErrorCode::MissingColumn);
}

TEST(Project, IdentityAndSubset) {
  RawLog log;
  log.columns = {"LIT101", "MV101"};
  log.rows = {{100, 1}, {800, 2}};
  const auto ds = discretize(log, {lit101(), mv101()});
  EXPECT_EQ(project(ds, ds.names()), ds);
  const auto sub = project(ds, {"MV101"});
  EXPECT_EQ(sub.num_variables(), 1u);
  EXPECT_EQ(sub.num_records(), 2u);
  EXPECT_EQ(code_of([&] { project(ds, {"P101"}); }), ErrorCode::UnknownColumn);
}

TEST(VariableSpecs, ParseAndFormat) {
  const auto specs = parse_variable_specs(
      "# stage 1\n"
      "LIT101 sensor Low,Medium,High edges=210,750\n"
      "\n"
      "MV101 actuator Close,Open codes=1,2   # valve\n"
      "P101 actuator Off,On\n");
  ASSERT_EQ(specs.size(), 3u);
  EXPECT_EQ(specs[0], lit101());
  EXPECT_EQ(specs[1], mv101());
  EXPECT_TRUE(specs[2].codes.empty());
  EXPECT_EQ(parse_variable_specs(format_variable_specs(specs)), specs);
}

TEST(VariableSpecs, Invalid) {
  EXPECT_EQ(code_of([] { parse_variable_specs("LIT101 sensor Low,High edges=1,2\n"); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_variable_specs("LIT101 gauge Low,High\n"); }),
            ErrorCode::ParseError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(750), "750");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}
