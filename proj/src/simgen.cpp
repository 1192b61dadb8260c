#include "cpscausal/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpscausal/error.hpp"
#include "cpscausal/impact.hpp"

namespace cpscausal {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kRenderStream = 0xD1B54A32D192ED03ULL;
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64_mix(seed_ + (counter + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

namespace {

int draw(std::span<const double> row, double u) {
  double acc = 0.0;
  for (std::size_t s = 0; s < row.size(); ++s) {
    acc += row[s];
    if (u < acc) return static_cast<int>(s);
  }
  // Rounding left u above the cumulative sum; fall back to the last state with mass.
  for (std::size_t s = row.size(); s-- > 0;) {
    if (row[s] > 0.0) return static_cast<int>(s);
  }
  return 0;
}

}  // namespace

DiscreteDataset sample_with_clamp(const BayesNet& net, std::size_t n, std::uint64_t seed,
                                  const std::map<std::string, int>& clamp) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "record count must be at least 1");
  if (!is_dag(net.graph)) throw Error(ErrorCode::CyclicGraph, "network graph is not a DAG");
  const auto nodes = net.num_nodes();
  std::vector<int> clamped(nodes, -1);
  for (const auto& [name, state] : clamp) {
    const auto v = net.graph.find(name);
    if (!v) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
    if (state < 0 || static_cast<std::size_t>(state) >= net.cardinality(*v)) {
      throw Error(ErrorCode::UnknownState,
                  "state " + std::to_string(state) + " invalid for '" + name + "'");
    }
    clamped[*v] = state;
  }

  const auto order = topological_indices(net.graph);
  const CounterRng rng(seed);
  std::vector<std::vector<int>> columns(nodes, std::vector<int>(n));
  std::vector<int> record(nodes, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto v = order[k];
      if (clamped[v] >= 0) {
        record[v] = clamped[v];
      } else {
        const double u = rng.uniform(static_cast<std::uint64_t>(r) * nodes + k);
        record[v] = draw(net.cpts[v].row(parent_config(net, v, record)), u);
      }
      columns[v][r] = record[v];
    }
  }
  return DiscreteDataset(net.variables, std::move(columns));
}

DiscreteDataset forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed) {
  return sample_with_clamp(net, n, seed, {});
}

RawLog render_log(const DiscreteDataset& ds, std::uint64_t seed) {
  const CounterRng rng(seed ^ kRenderStream);
  const auto vars = ds.num_variables();
  RawLog log;
  log.columns = ds.names();
  log.timestamps.emplace();
  log.rows.assign(ds.num_records(), std::vector<double>(vars));
  for (std::size_t r = 0; r < ds.num_records(); ++r) {
    log.timestamps->push_back(std::to_string(r));
    for (std::size_t v = 0; v < vars; ++v) {
      const auto& spec = ds.spec(v);
      const auto s = static_cast<std::size_t>(ds.at(r, v));
      double value = 0.0;
      if (spec.kind == VariableKind::Actuator) {
        value = spec.codes.empty() ? static_cast<double>(s) : static_cast<double>(spec.codes[s]);
      } else {
        const auto& e = spec.bin_edges;
        const double spread = e.size() > 1 ? e.back() - e.front() : 1.0;
        const double lo = s == 0 ? e.front() - spread : e[s - 1];
        const double hi = s == e.size() ? e.back() + spread : e[s];
        const double u = rng.uniform(static_cast<std::uint64_t>(r) * vars + v);
        value = std::min(lo + u * (hi - lo), std::nextafter(hi, lo));
      }
      log.rows[r][v] = value;
    }
  }
  return log;
}

namespace {

VariableSpec sensor(std::string name, std::vector<std::string> states, std::vector<double> edges) {
  VariableSpec s;
  s.name = std::move(name);
  s.kind = VariableKind::Sensor;
  s.states = std::move(states);
  s.bin_edges = std::move(edges);
  return s;
}

VariableSpec actuator(std::string name, std::vector<std::string> states,
                      std::vector<std::int64_t> codes) {
  VariableSpec s;
  s.name = std::move(name);
  s.kind = VariableKind::Actuator;
  s.states = std::move(states);
  s.codes = std::move(codes);
  return s;
}

VariableSpec onoff(std::string name) { return actuator(std::move(name), {"Off", "On"}, {1, 2}); }
VariableSpec valve(std::string name) { return actuator(std::move(name), {"Close", "Open"}, {1, 2}); }
VariableSpec level(std::string name) {
  return sensor(std::move(name), {"Low", "Medium", "High"}, {210, 750});
}
VariableSpec flow(std::string name) { return sensor(std::move(name), {"Low", "High"}, {1.0}); }

struct EdgeDef {
  std::string src, dst;
  EdgeKind kind;
};

// `tables` holds each node's CPT rows flattened, parents in name order with the last
// parent varying fastest.
BayesNet build(std::vector<VariableSpec> vars, const std::vector<EdgeDef>& edges,
               const std::map<std::string, std::vector<double>>& tables) {
  std::vector<std::string> names;
  for (const auto& v : vars) names.push_back(v.name);
  BayesNet net;
  net.graph = CausalGraph(names);
  for (const auto& e : edges) net.graph.insert_edge(e.src, e.dst, e.kind);
  for (std::size_t v = 0; v < vars.size(); ++v) {
    Cpt cpt;
    cpt.child = vars[v].name;
    cpt.child_card = vars[v].cardinality();
    for (auto p : net.graph.parents(v)) cpt.parents.push_back(names[p]);
    std::sort(cpt.parents.begin(), cpt.parents.end());
    for (const auto& p : cpt.parents) cpt.parent_cards.push_back(vars[net.graph.index_of(p)].cardinality());
    cpt.table = tables.at(cpt.child);
    cpt.unseen_rows.assign(cpt.num_configs(), false);
    net.cpts.push_back(std::move(cpt));
  }
  net.variables = std::move(vars);
  net.validate();
  return net;
}

FixtureNet stage1() {
  FixtureNet f{"stage1", build({level("LIT101"), valve("MV101"), onoff("P101"), onoff("P102"),
                                flow("FIT101")},
                               {{"LIT101", "MV101", EdgeKind::Control},
                                {"LIT101", "P101", EdgeKind::Control},
                                {"LIT101", "P102", EdgeKind::Control},
                                {"MV101", "FIT101", EdgeKind::Physical}},
                               {{"LIT101", {0.3, 0.4, 0.3}},
                                {"MV101", {0.85, 0.15, 0.3, 0.7, 0.9, 0.1}},
                                {"P101", {0.9, 0.1, 0.4, 0.6, 0.1, 0.9}},
                                {"P102", {0.98, 0.02, 0.97, 0.03, 0.95, 0.05}},
                                {"FIT101", {0.95, 0.05, 0.05, 0.95}}}),
               {}};
  return f;
}

FixtureNet stage6() {
  return {"stage6",
          build({onoff("P602"), flow("FIT601")}, {{"P602", "FIT601", EdgeKind::Physical}},
                {{"P602", {0.6, 0.4}}, {"FIT601", {0.95, 0.05, 0.1, 0.9}}}),
          {}};
}

VariableSpec binary(std::string name) { return actuator(std::move(name), {"s0", "s1"}, {0, 1}); }

FixtureNet chain3() {
  return {"chain3",
          build({binary("A"), binary("B"), binary("C")},
                {{"A", "B", EdgeKind::Physical}, {"B", "C", EdgeKind::Physical}},
                {{"A", {0.6, 0.4}}, {"B", {0.8, 0.2, 0.3, 0.7}}, {"C", {0.9, 0.1, 0.25, 0.75}}}),
          {}};
}

FixtureNet fork3() {
  return {"fork3",
          build({binary("A"), binary("B"), binary("C")},
                {{"B", "A", EdgeKind::Physical}, {"B", "C", EdgeKind::Physical}},
                {{"B", {0.55, 0.45}}, {"A", {0.85, 0.15, 0.2, 0.8}}, {"C", {0.7, 0.3, 0.1, 0.9}}}),
          {}};
}

FixtureNet collider3() {
  return {"collider3",
          build({binary("A"), binary("B"), binary("C")},
                {{"A", "C", EdgeKind::Physical}, {"B", "C", EdgeKind::Physical}},
                {{"A", {0.5, 0.5}},
                 {"B", {0.65, 0.35}},
                 {"C", {0.95, 0.05, 0.4, 0.6, 0.3, 0.7, 0.05, 0.95}}}),
          {}};
}

// Stage 1 and Stage 2 joined through P101 -> MV201. Strong links are P101 -> MV201,
// P203 -> AIT201 and P203 -> FIT201; AIT202 -> P203 and P203 -> AIT203 stay below 0.9.
FixtureNet two_stage() {
  return {"two_stage",
          build({level("LIT101"), valve("MV101"), onoff("P101"), onoff("P102"), flow("FIT101"),
                 valve("MV201"), flow("FIT201"), level("AIT201"), level("AIT202"),
                 level("AIT203"), onoff("P201"), onoff("P203")},
                {{"LIT101", "MV101", EdgeKind::Control},
                 {"LIT101", "P101", EdgeKind::Control},
                 {"MV101", "FIT101", EdgeKind::Physical},
                 {"P101", "MV201", EdgeKind::Learnt},
                 {"AIT202", "P203", EdgeKind::Control},
                 {"P203", "AIT201", EdgeKind::Physical},
                 {"P203", "FIT201", EdgeKind::Physical},
                 {"P203", "AIT203", EdgeKind::Physical},
                 {"AIT201", "FIT201", EdgeKind::Learnt},
                 {"AIT201", "P201", EdgeKind::Control}},
                {{"LIT101", {0.3, 0.4, 0.3}},
                 {"MV101", {0.85, 0.15, 0.3, 0.7, 0.9, 0.1}},
                 {"P101", {0.9, 0.1, 0.4, 0.6, 0.1, 0.9}},
                 {"P102", {0.97, 0.03}},
                 {"FIT101", {0.95, 0.05, 0.05, 0.95}},
                 {"MV201", {0.95, 0.05, 0.04, 0.96}},
                 {"AIT202", {0.2, 0.5, 0.3}},
                 {"P203", {0.7, 0.3, 0.5, 0.5, 0.35, 0.65}},
                 {"AIT201", {0.94, 0.05, 0.01, 0.02, 0.08, 0.9}},
                 {"AIT203", {0.5, 0.3, 0.2, 0.2, 0.3, 0.5}},
                 // parents AIT201, P203
                 {"FIT201", {0.96, 0.04, 0.9, 0.1, 0.8, 0.2, 0.1, 0.9, 0.3, 0.7, 0.02, 0.98}},
                 {"P201", {0.8, 0.2, 0.5, 0.5, 0.2, 0.8}}}),
          {}};
}

// Walkthrough net for MV101: P(MV101=Close | FIT101=Low) = 0.98 and
// max P(MV101 | P101) = 0.8 by construction.
FixtureNet stage1_attack() {
  return {"stage1_attack",
          build({level("LIT101"), valve("MV101"), onoff("P101"), flow("FIT101")},
                {{"LIT101", "MV101", EdgeKind::Control},
                 {"MV101", "FIT101", EdgeKind::Physical},
                 {"MV101", "P101", EdgeKind::Learnt}},
                {{"LIT101", {0.25, 0.5, 0.25}},
                 {"MV101", {0.8, 0.2, 0.2, 0.8, 0.8, 0.2}},
                 {"FIT101", {0.98, 0.02, 0.02, 0.98}},
                 {"P101", {0.8, 0.2, 0.2, 0.8}}}),
          {}};
}

// LIT301 only receives edges, as in the learnt Stage-3 graph.
FixtureNet stage3() {
  return {"stage3",
          build({onoff("P301"), level("LIT301"), flow("FIT301")},
                {{"P301", "LIT301", EdgeKind::Learnt}, {"P301", "FIT301", EdgeKind::Physical}},
                {{"P301", {0.5, 0.5}},
                 {"LIT301", {0.6, 0.3, 0.1, 0.1, 0.3, 0.6}},
                 {"FIT301", {0.9, 0.1, 0.05, 0.95}}}),
          {}};
}

using Factory = FixtureNet (*)();
const std::map<std::string, Factory, std::less<>>& registry() {
  static const std::map<std::string, Factory, std::less<>> r = {
      {"chain3", chain3},   {"collider3", collider3},         {"fork3", fork3},
      {"stage1", stage1},   {"stage1_attack", stage1_attack}, {"stage3", stage3},
      {"stage6", stage6},   {"two_stage", two_stage}};
  return r;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

FixtureNet fixture(std::string_view name) {
  const auto it = registry().find(name);
  if (it == registry().end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + std::string(name) + "'");
  }
  auto f = it->second();
  for (const auto& n : f.net.graph.nodes()) {
    const auto s = stage_from_name(n);
    f.stage_of[n] = s ? *s : 1;
  }
  return f;
}

}  // namespace cpscausal
