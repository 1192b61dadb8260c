#include "cpscausal/serialization.hpp"

#include <algorithm>

#include "cpscausal/error.hpp"

namespace cpscausal {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::ParseError, "malformed document: " + what);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) malformed(std::string("missing field '") + key + "'");
  return j.at(key);
}

// nlohmann's own type errors become ParseError so callers see one error kind.
template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("field '") + key + "': " + e.what());
  }
}

Json pairs_to_json(const std::vector<NamePair>& pairs) {
  Json out = Json::array();
  for (const auto& [a, b] : pairs) out.push_back({a, b});
  return out;
}

}  // namespace

Json graph_to_json(const CausalGraph& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges()) {
    edges.push_back({{"src", e.src},
                     {"dst", e.dst},
                     {"kind", std::string(to_string(e.kind))},
                     {"directed", e.directed}});
  }
  return {{"nodes", g.nodes()}, {"edges", edges}};
}

CausalGraph graph_from_json(const Json& j) {
  CausalGraph g(get<std::vector<std::string>>(j, "nodes"));
  for (const auto& e : field(j, "edges")) {
    const auto kind = e.contains("kind") ? get<std::string>(e, "kind") : std::string("learnt");
    const bool directed = e.contains("directed") ? get<bool>(e, "directed") : true;
    g.insert_edge(get<std::string>(e, "src"), get<std::string>(e, "dst"),
                  edge_kind_from_string(kind), directed);
  }
  return g;
}

Json variable_to_json(const VariableSpec& spec) {
  Json j = {{"name", spec.name}, {"kind", std::string(to_string(spec.kind))}, {"states", spec.states}};
  if (spec.kind == VariableKind::Sensor) {
    j["bin_edges"] = spec.bin_edges;
  } else if (!spec.codes.empty()) {
    j["codes"] = spec.codes;
  }
  return j;
}

VariableSpec variable_from_json(const Json& j) {
  VariableSpec s;
  s.name = get<std::string>(j, "name");
  const auto kind = get<std::string>(j, "kind");
  if (kind == "sensor") {
    s.kind = VariableKind::Sensor;
  } else if (kind == "actuator") {
    s.kind = VariableKind::Actuator;
  } else {
    malformed("variable kind '" + kind + "'");
  }
  s.states = get<std::vector<std::string>>(j, "states");
  if (j.contains("bin_edges")) s.bin_edges = get<std::vector<double>>(j, "bin_edges");
  if (j.contains("codes")) s.codes = get<std::vector<std::int64_t>>(j, "codes");
  s.validate();
  return s;
}

Json dataset_to_json(const DiscreteDataset& ds) {
  Json vars = Json::array();
  Json cols = Json::array();
  for (std::size_t v = 0; v < ds.num_variables(); ++v) {
    vars.push_back(variable_to_json(ds.spec(v)));
    const auto c = ds.column(v);
    cols.push_back(std::vector<int>(c.begin(), c.end()));
  }
  return {{"variables", vars}, {"records", ds.num_records()}, {"columns", cols}};
}

DiscreteDataset dataset_from_json(const Json& j) {
  std::vector<VariableSpec> specs;
  for (const auto& v : field(j, "variables")) specs.push_back(variable_from_json(v));
  auto cols = get<std::vector<std::vector<int>>>(j, "columns");
  const auto records = get<std::size_t>(j, "records");
  for (const auto& c : cols) {
    if (c.size() != records) malformed("column length differs from 'records'");
  }
  return DiscreteDataset(std::move(specs), std::move(cols));
}

Json net_to_json(const BayesNet& net) {
  Json vars = Json::array();
  for (const auto& v : net.variables) vars.push_back(variable_to_json(v));
  Json cpts = Json::array();
  for (const auto& cpt : net.cpts) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < cpt.num_configs(); ++r) {
      const auto row = cpt.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    std::vector<std::size_t> unseen;
    for (std::size_t r = 0; r < cpt.unseen_rows.size(); ++r) {
      if (cpt.unseen_rows[r]) unseen.push_back(r);
    }
    cpts.push_back({{"child", cpt.child},
                    {"parents", cpt.parents},
                    {"table", rows},
                    {"unseen_rows", unseen}});
  }
  return {{"graph", graph_to_json(net.graph)}, {"variables", vars}, {"cpts", cpts}};
}

BayesNet net_from_json(const Json& j) {
  BayesNet net;
  net.graph = graph_from_json(field(j, "graph"));
  for (const auto& v : field(j, "variables")) net.variables.push_back(variable_from_json(v));
  for (const auto& c : field(j, "cpts")) {
    Cpt cpt;
    cpt.child = get<std::string>(c, "child");
    cpt.parents = get<std::vector<std::string>>(c, "parents");
    const auto rows = get<std::vector<std::vector<double>>>(c, "table");
    const auto v = net.graph.find(cpt.child);
    if (!v || *v >= net.variables.size()) malformed("CPT for unknown variable '" + cpt.child + "'");
    cpt.child_card = net.variables[*v].cardinality();
    for (const auto& p : cpt.parents) {
      const auto pv = net.graph.find(p);
      if (!pv || *pv >= net.variables.size()) malformed("unknown parent '" + p + "'");
      cpt.parent_cards.push_back(net.variables[*pv].cardinality());
    }
    for (const auto& row : rows) {
      if (row.size() != cpt.child_card) malformed("CPT row of '" + cpt.child + "' has wrong width");
      cpt.table.insert(cpt.table.end(), row.begin(), row.end());
    }
    cpt.unseen_rows.assign(rows.size(), false);
    if (c.contains("unseen_rows")) {
      for (auto r : get<std::vector<std::size_t>>(c, "unseen_rows")) {
        if (r >= rows.size()) malformed("unseen row index out of range");
        cpt.unseen_rows[r] = true;
      }
    }
    net.cpts.push_back(std::move(cpt));
  }
  net.validate();
  return net;
}

Json edge_diff_to_json(const EdgeDiff& diff) {
  return {{"common", pairs_to_json(diff.common)},
          {"reversed", pairs_to_json(diff.reversed)},
          {"only_left", pairs_to_json(diff.only_left)},
          {"only_right", pairs_to_json(diff.only_right)}};
}

Json attack_to_json(const AttackSpec& attack) {
  Json j = {{"id", attack.id},
            {"targeted", attack.targeted},
            {"preconditions", attack.preconditions},
            {"description", attack.description}};
  if (attack.theta) j["theta"] = *attack.theta;
  return j;
}

AttackSpec attack_from_json(const Json& j) {
  AttackSpec a;
  a.id = get<std::string>(j, "id");
  a.targeted = get<std::vector<std::string>>(j, "targeted");
  if (a.targeted.empty()) malformed("attack '" + a.id + "' has no targeted DPs");
  std::sort(a.targeted.begin(), a.targeted.end());
  if (j.contains("preconditions")) {
    a.preconditions = get<std::map<std::string, std::string>>(j, "preconditions");
  }
  if (j.contains("description")) a.description = get<std::string>(j, "description");
  if (j.contains("theta")) a.theta = get<double>(j, "theta");
  return a;
}

std::vector<AttackSpec> attacks_from_json(const Json& j) {
  if (!j.is_array()) malformed("attack file must be a JSON array");
  std::vector<AttackSpec> out;
  for (const auto& a : j) out.push_back(attack_from_json(a));
  return out;
}

Json report_to_json(const ImpactReport& report) {
  Json cands = Json::array();
  for (const auto& c : report.candidates) {
    Json entry = {{"candidate", c.candidate}, {"target", c.target}};
    entry["best_target_state"] = c.best_target_state ? Json(c.best_target_label) : Json();
    entry["best_candidate_state"] = c.best_candidate_state ? Json(c.best_candidate_label) : Json();
    entry["probability"] = c.probability;
    entry["included"] = c.included;
    cands.push_back(std::move(entry));
  }
  return {{"attack_id", report.attack_id},
          {"targeted", report.targeted},
          {"preconditions", report.preconditions},
          {"theta", report.theta},
          {"candidate_rule", std::string(to_string(report.candidate_rule))},
          {"candidates", cands},
          {"impacted", report.impacted},
          {"category", std::string(to_string(report.category))}};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace cpscausal
