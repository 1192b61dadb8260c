#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cpscausal/estimation.hpp"

namespace cpscausal {

struct Query {
  std::string target;
  std::map<std::string, int> evidence;  // variable -> state index
};

// Product of CPT entries over all nodes, accumulated in log space.
double joint_prob(const BayesNet& net, const std::map<std::string, int>& assignment);
// `assignment` indexed by graph node.
double log_joint_prob(const BayesNet& net, std::span<const int> assignment);

// Exact P(target | evidence) by variable elimination.
std::vector<double> posterior(const BayesNet& net, const Query& q);

// Enumerates every joint assignment; limited to 1e7 configurations.
std::vector<double> brute_force_posterior(const BayesNet& net, const Query& q);

// Resolves `DP=label` pairs against the net's state labels.
std::map<std::string, int> resolve_evidence(const BayesNet& net,
                                            const std::map<std::string, std::string>& labelled);

}  // namespace cpscausal
