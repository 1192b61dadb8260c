#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cpscausal/causal_graph.hpp"
#include "cpscausal/estimation.hpp"

namespace cpscausal {

struct AttackSpec {
  std::string id;
  std::vector<std::string> targeted;                  // sorted, non-empty
  std::map<std::string, std::string> preconditions;   // DP -> state label
  std::string description;
  std::optional<double> theta;                        // per-attack override
};

enum class CandidateRule { Children, UndirectedNeighbors };

std::string_view to_string(CandidateRule rule);
CandidateRule candidate_rule_from_string(std::string_view text);

struct ImpactConfig {
  double theta = 0.9;
  CandidateRule candidate_rule = CandidateRule::Children;
  // Experimental: add the attack's preconditions to every posterior query.
  bool condition_preconditions = false;

  void validate() const;  // throws InvalidArgument unless 0 < theta <= 1
};

enum class AttackCategory { TSIS, TSIM, TMIS, TMIM };

std::string_view to_string(AttackCategory category);

struct CandidateVerdict {
  std::string candidate;
  std::string target;  // the targeted DP the candidate neighbours
  // Maximizing pair; absent when every candidate state had zero probability.
  std::optional<int> best_target_state;
  std::optional<int> best_candidate_state;
  std::string best_target_label;
  std::string best_candidate_label;
  double probability = 0.0;
  bool included = false;
};

struct ImpactReport {
  std::string attack_id;
  std::vector<std::string> targeted;
  std::map<std::string, std::string> preconditions;
  double theta = 0.9;
  CandidateRule candidate_rule = CandidateRule::Children;
  std::vector<CandidateVerdict> candidates;  // sorted by candidate name
  std::vector<std::string> impacted;         // sorted
  AttackCategory category = AttackCategory::TSIS;
};

// Domain-graph text:
//   node NAME
//   edge SRC -> DST : control|physical
// with '#' comments. Cycles are allowed.
CausalGraph load_domain_graph(std::string_view text);

// Stage number taken from the first digit of the trailing number in a SWaT-style
// name (LIT101 -> 1, P602 -> 6).
std::optional<int> stage_from_name(std::string_view name);
std::map<std::string, int> stages_from_names(const std::vector<std::string>& names);

// An empty impacted set falls back to the targeted set when counting stages.
AttackCategory classify_attack(const AttackSpec& attack, const std::vector<std::string>& impacted,
                               const std::map<std::string, int>& stage_of);

// Threshold rule over one-hop candidates of each targeted DP.
ImpactReport discover_impact(const BayesNet& net, const AttackSpec& attack,
                             const ImpactConfig& cfg,
                             const std::map<std::string, int>& stage_of);
ImpactReport discover_impact(const BayesNet& net, const AttackSpec& attack,
                             const ImpactConfig& cfg = {});

// Out-neighbours of the targeted DPs in a domain graph, minus the targets.
std::vector<std::string> domain_impact(const CausalGraph& graph, const AttackSpec& attack);

}  // namespace cpscausal
