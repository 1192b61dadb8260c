#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpscausal/causal_graph.hpp"
#include "cpscausal/data_ingest.hpp"

namespace cpscausal {

// N(child_state, parent_config). Parent configurations are row-major over the
// parent state indices in the order the parents were given (last varies fastest).
struct Contingency {
  std::size_t child_card = 0;
  std::vector<std::size_t> parent_cards;
  std::size_t num_configs = 1;
  std::vector<std::int64_t> cells;  // cells[config * child_card + state]

  std::int64_t at(std::size_t config, std::size_t state) const {
    return cells[config * child_card + state];
  }
  std::int64_t row_total(std::size_t config) const;
  std::int64_t total() const;
};

Contingency counts(const DiscreteDataset& ds, std::size_t child,
                   std::span<const std::size_t> parents);
Contingency counts(const DiscreteDataset& ds, std::string_view child,
                   const std::vector<std::string>& parents);

// P(child | parents) with parents in lexicographic name order.
struct Cpt {
  std::string child;
  std::vector<std::string> parents;
  std::size_t child_card = 0;
  std::vector<std::size_t> parent_cards;
  std::vector<double> table;     // row-major, one row of child_card entries per config
  std::vector<bool> unseen_rows;  // rows whose parent configuration never occurred

  std::size_t num_configs() const { return child_card ? table.size() / child_card : 0; }
  double prob(std::size_t config, std::size_t state) const {
    return table[config * child_card + state];
  }
  std::span<const double> row(std::size_t config) const {
    return std::span<const double>(table).subspan(config * child_card, child_card);
  }
  // Throws InvalidArgument when shape or normalization is off.
  void validate() const;
};

// A DAG with one CPT per node. variables[v] and cpts[v] follow graph node v.
struct BayesNet {
  CausalGraph graph;
  std::vector<VariableSpec> variables;
  std::vector<Cpt> cpts;

  std::size_t num_nodes() const { return graph.num_nodes(); }
  std::size_t index_of(std::string_view name) const { return graph.index_of(name); }
  std::size_t cardinality(std::size_t v) const { return variables[v].cardinality(); }
  // Graph-index parents of v, in the order used by cpts[v].
  std::vector<std::size_t> cpt_parents(std::size_t v) const;

  void validate() const;
};

// Row index of the parent configuration in `assignment` (indexed by node).
std::size_t parent_config(const BayesNet& net, std::size_t v,
                          std::span<const int> assignment);

BayesNet fit_mle(const DiscreteDataset& ds, const CausalGraph& graph);
BayesNet fit_bayes(const DiscreteDataset& ds, const CausalGraph& graph, double ess = 1.0);

struct CiResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool independent = true;
};

// Pearson chi-square test of i _||_ j | given, stratified over the
// configurations of `given`; empty strata are skipped.
CiResult chi_square_ci(const DiscreteDataset& ds, std::size_t i, std::size_t j,
                       std::span<const std::size_t> given, double alpha);
CiResult chi_square_ci(const DiscreteDataset& ds, std::string_view i, std::string_view j,
                       const std::vector<std::string>& given, double alpha);

// Empirical mutual information in nats.
double mutual_information(const DiscreteDataset& ds, std::size_t i, std::size_t j);
double mutual_information(const DiscreteDataset& ds, std::string_view i, std::string_view j);

enum class ScoreMethod { Bic, K2, Bdeu };

struct ScoreSpec {
  ScoreMethod method = ScoreMethod::Bic;
  double ess = 1.0;  // bdeu only
};

std::string_view to_string(ScoreMethod method);
ScoreMethod score_method_from_string(std::string_view text);

// Log-space family score of `child` given `parents`; higher is better.
double family_score(const DiscreteDataset& ds, std::size_t child,
                    std::span<const std::size_t> parents, const ScoreSpec& spec);
double score(const DiscreteDataset& ds, const CausalGraph& graph, const ScoreSpec& spec);

}  // namespace cpscausal
