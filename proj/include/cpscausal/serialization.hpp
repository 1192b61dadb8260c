#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cpscausal/causal_graph.hpp"
#include "cpscausal/data_ingest.hpp"
#include "cpscausal/estimation.hpp"
#include "cpscausal/impact.hpp"

namespace cpscausal {

using Json = nlohmann::ordered_json;

// Malformed documents raise Error(ParseError).
Json graph_to_json(const CausalGraph& g);
CausalGraph graph_from_json(const Json& j);

Json variable_to_json(const VariableSpec& spec);
VariableSpec variable_from_json(const Json& j);

// {"variables": [...], "records": n, "columns": [[state, ...], ...]}
Json dataset_to_json(const DiscreteDataset& ds);
DiscreteDataset dataset_from_json(const Json& j);

Json net_to_json(const BayesNet& net);
BayesNet net_from_json(const Json& j);

Json edge_diff_to_json(const EdgeDiff& diff);

Json attack_to_json(const AttackSpec& attack);
AttackSpec attack_from_json(const Json& j);
std::vector<AttackSpec> attacks_from_json(const Json& j);

Json report_to_json(const ImpactReport& report);

// Parses text, mapping syntax errors to Error(ParseError).
Json parse_json(const std::string& text);
// Two-space indented with a trailing newline.
std::string dump_json(const Json& j);

}  // namespace cpscausal
