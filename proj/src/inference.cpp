#include "cpscausal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "cpscausal/error.hpp"

namespace cpscausal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Table over `vars` (ascending node indices) holding log values; the last
// variable varies fastest.
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::vector<double> logv;

  std::size_t size() const { return logv.size(); }
  bool contains(std::size_t v) const { return std::binary_search(vars.begin(), vars.end(), v); }
};

// Index of the entry of f consistent with the full assignment `states` (indexed by node).
std::size_t index_in(const Factor& f, const std::vector<std::size_t>& states) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < f.vars.size(); ++k) idx = idx * f.cards[k] + states[f.vars[k]];
  return idx;
}

// Visits every assignment of `vars`, writing states into the node-indexed buffer.
template <typename Fn>
void for_each_assignment(const std::vector<std::size_t>& vars,
                         const std::vector<std::size_t>& cards, std::vector<std::size_t>& states,
                         Fn&& fn) {
  for (auto v : vars) states[v] = 0;
  while (true) {
    fn();
    std::size_t k = vars.size();
    while (k > 0) {
      --k;
      if (++states[vars[k]] < cards[k]) break;
      states[vars[k]] = 0;
      if (k == 0) return;
    }
    if (vars.empty()) return;
  }
}

Factor multiply(const Factor& a, const Factor& b, std::size_t n_nodes) {
  Factor out;
  std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                 std::back_inserter(out.vars));
  for (auto v : out.vars) {
    const auto ia = std::lower_bound(a.vars.begin(), a.vars.end(), v);
    out.cards.push_back(ia != a.vars.end() && *ia == v
                            ? a.cards[static_cast<std::size_t>(ia - a.vars.begin())]
                            : b.cards[static_cast<std::size_t>(
                                  std::lower_bound(b.vars.begin(), b.vars.end(), v) -
                                  b.vars.begin())]);
  }
  std::vector<std::size_t> states(n_nodes, 0);
  for_each_assignment(out.vars, out.cards, states, [&] {
    out.logv.push_back(a.logv[index_in(a, states)] + b.logv[index_in(b, states)]);
  });
  return out;
}

Factor sum_out(const Factor& f, std::size_t var, std::size_t n_nodes) {
  Factor out;
  std::size_t var_card = 0;
  for (std::size_t k = 0; k < f.vars.size(); ++k) {
    if (f.vars[k] == var) {
      var_card = f.cards[k];
    } else {
      out.vars.push_back(f.vars[k]);
      out.cards.push_back(f.cards[k]);
    }
  }
  std::vector<std::size_t> states(n_nodes, 0);
  for_each_assignment(out.vars, out.cards, states, [&] {
    double acc = kNegInf;
    for (std::size_t s = 0; s < var_card; ++s) {
      states[var] = s;
      acc = log_add(acc, f.logv[index_in(f, states)]);
    }
    out.logv.push_back(acc);
  });
  return out;
}

Factor reduce(const Factor& f, const std::map<std::size_t, std::size_t>& evidence,
              std::size_t n_nodes) {
  Factor out;
  for (std::size_t k = 0; k < f.vars.size(); ++k) {
    if (!evidence.count(f.vars[k])) {
      out.vars.push_back(f.vars[k]);
      out.cards.push_back(f.cards[k]);
    }
  }
  if (out.vars.size() == f.vars.size()) return f;
  std::vector<std::size_t> states(n_nodes, 0);
  for (const auto& [v, s] : evidence) states[v] = s;
  for_each_assignment(out.vars, out.cards, states,
                      [&] { out.logv.push_back(f.logv[index_in(f, states)]); });
  return out;
}

Factor cpt_factor(const BayesNet& net, std::size_t v) {
  const auto parents = net.cpt_parents(v);
  const auto& cpt = net.cpts[v];
  Factor f;
  f.vars = parents;
  f.vars.push_back(v);
  std::sort(f.vars.begin(), f.vars.end());
  for (auto u : f.vars) f.cards.push_back(net.cardinality(u));

  std::vector<std::size_t> states(net.num_nodes(), 0);
  for_each_assignment(f.vars, f.cards, states, [&] {
    std::size_t config = 0;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      config = config * cpt.parent_cards[k] + states[parents[k]];
    }
    f.logv.push_back(safe_log(cpt.prob(config, states[v])));
  });
  return f;
}

struct ResolvedQuery {
  std::size_t target;
  std::map<std::size_t, std::size_t> evidence;
};

ResolvedQuery resolve(const BayesNet& net, const Query& q) {
  auto lookup = [&](const std::string& name) {
    const auto v = net.graph.find(name);
    if (!v) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
    return *v;
  };
  ResolvedQuery r;
  r.target = lookup(q.target);
  for (const auto& [name, state] : q.evidence) {
    const auto v = lookup(name);
    if (v == r.target) {
      throw Error(ErrorCode::InvalidArgument, "target '" + name + "' also appears as evidence");
    }
    if (state < 0 || static_cast<std::size_t>(state) >= net.cardinality(v)) {
      throw Error(ErrorCode::UnknownState,
                  "state " + std::to_string(state) + " invalid for '" + name + "'");
    }
    r.evidence[v] = static_cast<std::size_t>(state);
  }
  return r;
}

std::vector<double> normalize_log(const std::vector<double>& logv) {
  double total = kNegInf;
  for (double x : logv) total = log_add(total, x);
  if (total == kNegInf) {
    throw Error(ErrorCode::ZeroProbabilityEvidence, "evidence has probability zero");
  }
  std::vector<double> out;
  out.reserve(logv.size());
  for (double x : logv) out.push_back(std::exp(x - total));
  return out;
}

}  // namespace

double log_joint_prob(const BayesNet& net, std::span<const int> assignment) {
  double acc = 0.0;
  for (std::size_t v = 0; v < net.num_nodes(); ++v) {
    acc += safe_log(net.cpts[v].prob(parent_config(net, v, assignment),
                                     static_cast<std::size_t>(assignment[v])));
  }
  return acc;
}

double joint_prob(const BayesNet& net, const std::map<std::string, int>& assignment) {
  std::vector<int> states(net.num_nodes(), -1);
  for (const auto& [name, state] : assignment) {
    const auto v = net.graph.find(name);
    if (!v) throw Error(ErrorCode::IncompleteAssignment, "'" + name + "' is not in the net");
    if (state < 0 || static_cast<std::size_t>(state) >= net.cardinality(*v)) {
      throw Error(ErrorCode::UnknownState,
                  "state " + std::to_string(state) + " invalid for '" + name + "'");
    }
    states[*v] = state;
  }
  for (std::size_t v = 0; v < states.size(); ++v) {
    if (states[v] < 0) {
      throw Error(ErrorCode::IncompleteAssignment, "no state given for '" + net.graph.name(v) + "'");
    }
  }
  return std::exp(log_joint_prob(net, states));
}

std::vector<double> posterior(const BayesNet& net, const Query& q) {
  if (!is_dag(net.graph)) throw Error(ErrorCode::CyclicGraph, "network graph is not a DAG");
  const auto rq = resolve(net, q);
  const auto n = net.num_nodes();

  std::vector<Factor> factors;
  for (std::size_t v = 0; v < n; ++v) factors.push_back(reduce(cpt_factor(net, v), rq.evidence, n));

  std::set<std::size_t> pending;
  for (std::size_t v = 0; v < n; ++v) {
    if (v != rq.target && !rq.evidence.count(v)) pending.insert(v);
  }
  while (!pending.empty()) {
    // Min-degree in the current interaction graph, ties by name.
    std::size_t pick = *pending.begin();
    std::size_t pick_degree = SIZE_MAX;
    for (auto v : pending) {
      std::set<std::size_t> nbrs;
      for (const auto& f : factors) {
        if (!f.contains(v)) continue;
        for (auto u : f.vars) {
          if (u != v) nbrs.insert(u);
        }
      }
      if (nbrs.size() < pick_degree ||
          (nbrs.size() == pick_degree && net.graph.name(v) < net.graph.name(pick))) {
        pick = v;
        pick_degree = nbrs.size();
      }
    }

    std::vector<Factor> rest;
    std::optional<Factor> merged;
    for (auto& f : factors) {
      if (!f.contains(pick)) {
        rest.push_back(std::move(f));
      } else {
        merged = merged ? multiply(*merged, f, n) : std::move(f);
      }
    }
    if (merged) rest.push_back(sum_out(*merged, pick, n));
    factors = std::move(rest);
    pending.erase(pick);
  }

  Factor result;
  result.logv = {0.0};
  for (const auto& f : factors) result = multiply(result, f, n);
  if (result.vars.size() != 1 || result.vars.front() != rq.target) {
    throw Error(ErrorCode::InvalidArgument, "elimination left an unexpected scope");
  }
  return normalize_log(result.logv);
}

std::vector<double> brute_force_posterior(const BayesNet& net, const Query& q) {
  if (!is_dag(net.graph)) throw Error(ErrorCode::CyclicGraph, "network graph is not a DAG");
  const auto rq = resolve(net, q);
  const auto n = net.num_nodes();
  double space = 1.0;
  for (std::size_t v = 0; v < n; ++v) space *= static_cast<double>(net.cardinality(v));
  if (space > 1e7) {
    throw Error(ErrorCode::StateSpaceTooLarge, "joint state space exceeds 1e7 configurations");
  }

  std::vector<double> mass(net.cardinality(rq.target), 0.0);
  std::vector<int> states(n, 0);
  auto advance = [&] {
    for (std::size_t k = n; k-- > 0;) {
      if (static_cast<std::size_t>(++states[k]) < net.cardinality(k)) return true;
      states[k] = 0;
    }
    return false;
  };
  do {
    const bool consistent = std::all_of(rq.evidence.begin(), rq.evidence.end(), [&](const auto& e) {
      return static_cast<std::size_t>(states[e.first]) == e.second;
    });
    if (consistent) {
      mass[static_cast<std::size_t>(states[rq.target])] += std::exp(log_joint_prob(net, states));
    }
  } while (advance());

  double total = 0.0;
  for (double m : mass) total += m;
  if (total <= 0.0) throw Error(ErrorCode::ZeroProbabilityEvidence, "evidence has probability zero");
  for (double& m : mass) m /= total;
  return mass;
}

std::map<std::string, int> resolve_evidence(const BayesNet& net,
                                            const std::map<std::string, std::string>& labelled) {
  std::map<std::string, int> out;
  for (const auto& [name, label] : labelled) {
    const auto v = net.graph.find(name);
    if (!v) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + name + "'");
    const auto s = net.variables[*v].state_index(label);
    if (!s) {
      throw Error(ErrorCode::UnknownState, "'" + label + "' is not a state of '" + name + "'");
    }
    out[name] = static_cast<int>(*s);
  }
  return out;
}

}  // namespace cpscausal
