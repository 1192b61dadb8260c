#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpscausal/causal_graph.hpp"
#include "cpscausal/data_ingest.hpp"
#include "cpscausal/estimation.hpp"

namespace cpscausal {

struct PcConfig {
  double alpha = 0.01;
  // Largest conditioning set tried; unset means node count - 2.
  std::optional<int> max_cond_size;
};

struct PcResult {
  // Partially directed: edges left undirected where orientation is not identified.
  CausalGraph graph;
  // Separating set for every removed pair (first < second), names sorted.
  std::map<NamePair, std::vector<std::string>> sepsets;
};

PcResult learn_pc(const DiscreteDataset& ds, const PcConfig& cfg = {});

// Orients the remaining undirected edges without creating a directed cycle
// or a new v-structure.
CausalGraph extend_to_dag(const CausalGraph& pdag);

struct HcConfig {
  ScoreSpec score;
  int plateau_k = 1;
  int max_iter = 1000;
  std::optional<int> max_parents;
  // Skip add moves between pairs whose marginal chi-square p-value exceeds 0.5.
  bool candidate_filter = false;
};

struct HcResult {
  CausalGraph graph;
  std::vector<double> trace;  // trace[0] is the empty-graph score
};

HcResult learn_hc(const DiscreteDataset& ds, const HcConfig& cfg = {});

struct ClConfig {
  std::string root;
};

CausalGraph learn_cl(const DiscreteDataset& ds, const ClConfig& cfg);

}  // namespace cpscausal
