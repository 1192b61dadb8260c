#include "cpscausal/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

#include "cpscausal/error.hpp"

namespace cpscausal {

std::int64_t Contingency::row_total(std::size_t config) const {
  const auto first = cells.begin() + static_cast<std::ptrdiff_t>(config * child_card);
  return std::accumulate(first, first + static_cast<std::ptrdiff_t>(child_card), std::int64_t{0});
}

std::int64_t Contingency::total() const {
  return std::accumulate(cells.begin(), cells.end(), std::int64_t{0});
}

Contingency counts(const DiscreteDataset& ds, std::size_t child,
                   std::span<const std::size_t> parents) {
  const auto n_vars = ds.num_variables();
  if (child >= n_vars) throw Error(ErrorCode::UnknownColumn, "child index out of range");
  std::set<std::size_t> seen;
  for (auto p : parents) {
    if (p >= n_vars) throw Error(ErrorCode::UnknownColumn, "parent index out of range");
    if (p == child || !seen.insert(p).second) {
      throw Error(ErrorCode::DuplicateParent,
                  "parent '" + ds.spec(p).name + "' repeated or equal to child");
    }
  }

  Contingency t;
  t.child_card = ds.cardinality(child);
  for (auto p : parents) {
    t.parent_cards.push_back(ds.cardinality(p));
    t.num_configs *= ds.cardinality(p);
  }
  t.cells.assign(t.num_configs * t.child_card, 0);

  const auto child_col = ds.column(child);
  std::vector<std::span<const int>> parent_cols;
  for (auto p : parents) parent_cols.push_back(ds.column(p));
  for (std::size_t r = 0; r < ds.num_records(); ++r) {
    std::size_t config = 0;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      config = config * t.parent_cards[k] + static_cast<std::size_t>(parent_cols[k][r]);
    }
    ++t.cells[config * t.child_card + static_cast<std::size_t>(child_col[r])];
  }
  return t;
}

Contingency counts(const DiscreteDataset& ds, std::string_view child,
                   const std::vector<std::string>& parents) {
  std::vector<std::size_t> idx;
  for (const auto& p : parents) idx.push_back(ds.index_of(p));
  return counts(ds, ds.index_of(child), idx);
}

void Cpt::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "CPT of '" + child + "': " + why);
  };
  std::size_t configs = 1;
  for (auto c : parent_cards) configs *= c;
  if (parent_cards.size() != parents.size()) fail("parent cardinalities do not match parents");
  if (child_card < 2 || table.size() != configs * child_card) fail("table has the wrong shape");
  if (unseen_rows.size() != configs) fail("row flags have the wrong shape");
  for (std::size_t r = 0; r < configs; ++r) {
    double sum = 0.0;
    for (double p : row(r)) {
      if (!(p >= 0.0 && p <= 1.0)) fail("entry outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("row " + std::to_string(r) + " does not sum to 1");
  }
}

std::vector<std::size_t> BayesNet::cpt_parents(std::size_t v) const {
  std::vector<std::size_t> out;
  for (const auto& p : cpts[v].parents) out.push_back(graph.index_of(p));
  return out;
}

void BayesNet::validate() const {
  if (!is_dag(graph)) throw Error(ErrorCode::CyclicGraph, "network graph is not a DAG");
  if (variables.size() != graph.num_nodes() || cpts.size() != graph.num_nodes()) {
    throw Error(ErrorCode::InvalidArgument, "one variable and one CPT per node required");
  }
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    const auto& cpt = cpts[v];
    if (variables[v].name != graph.name(v) || cpt.child != graph.name(v)) {
      throw Error(ErrorCode::InvalidArgument, "CPT order does not follow the graph nodes");
    }
    std::vector<std::string> expected;
    for (auto p : graph.parents(v)) expected.push_back(graph.name(p));
    std::sort(expected.begin(), expected.end());
    if (cpt.parents != expected) {
      throw Error(ErrorCode::InvalidArgument,
                  "CPT parents of '" + cpt.child + "' differ from the graph");
    }
    if (cpt.child_card != variables[v].cardinality()) {
      throw Error(ErrorCode::InvalidArgument, "CPT of '" + cpt.child + "' has wrong cardinality");
    }
    for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
      if (cpt.parent_cards[k] != variables[graph.index_of(cpt.parents[k])].cardinality()) {
        throw Error(ErrorCode::InvalidArgument,
                    "CPT of '" + cpt.child + "' has wrong parent cardinality");
      }
    }
    cpt.validate();
  }
}

std::size_t parent_config(const BayesNet& net, std::size_t v, std::span<const int> assignment) {
  const auto& cpt = net.cpts[v];
  std::size_t config = 0;
  for (std::size_t k = 0; k < cpt.parents.size(); ++k) {
    const auto p = net.graph.index_of(cpt.parents[k]);
    config = config * cpt.parent_cards[k] + static_cast<std::size_t>(assignment[p]);
  }
  return config;
}

namespace {

// Dataset column of every graph node plus the sorted parent list per node.
struct FitPlan {
  std::vector<std::size_t> column;
  std::vector<std::vector<std::string>> parent_names;
};

FitPlan plan_fit(const DiscreteDataset& ds, const CausalGraph& graph) {
  if (!is_dag(graph)) throw Error(ErrorCode::CyclicGraph, "cannot fit parameters on a non-DAG");
  if (ds.num_records() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no records");
  FitPlan plan;
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    plan.column.push_back(ds.index_of(graph.name(v)));
    std::vector<std::string> parents;
    for (auto p : graph.parents(v)) parents.push_back(graph.name(p));
    std::sort(parents.begin(), parents.end());
    plan.parent_names.push_back(std::move(parents));
  }
  return plan;
}

template <typename RowFn>
BayesNet fit_with(const DiscreteDataset& ds, const CausalGraph& graph, RowFn&& fill_row) {
  const auto plan = plan_fit(ds, graph);
  BayesNet net;
  net.graph = graph;
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    net.variables.push_back(ds.spec(plan.column[v]));
    std::vector<std::size_t> parent_cols;
    for (const auto& p : plan.parent_names[v]) parent_cols.push_back(ds.index_of(p));
    const auto table = counts(ds, plan.column[v], parent_cols);

    Cpt cpt;
    cpt.child = graph.name(v);
    cpt.parents = plan.parent_names[v];
    cpt.child_card = table.child_card;
    cpt.parent_cards = table.parent_cards;
    cpt.table.resize(table.cells.size());
    cpt.unseen_rows.resize(table.num_configs);
    for (std::size_t r = 0; r < table.num_configs; ++r) {
      const auto n_r = table.row_total(r);
      cpt.unseen_rows[r] = n_r == 0;
      fill_row(table, r, n_r, std::span<double>(cpt.table).subspan(r * cpt.child_card,
                                                                    cpt.child_card));
    }
    net.cpts.push_back(std::move(cpt));
  }
  return net;
}

}  // namespace

BayesNet fit_mle(const DiscreteDataset& ds, const CausalGraph& graph) {
  return fit_with(ds, graph,
                  [](const Contingency& t, std::size_t r, std::int64_t n_r, std::span<double> out) {
                    for (std::size_t c = 0; c < t.child_card; ++c) {
                      out[c] = n_r == 0 ? 1.0 / static_cast<double>(t.child_card)
                                        : static_cast<double>(t.at(r, c)) /
                                              static_cast<double>(n_r);
                    }
                  });
}

BayesNet fit_bayes(const DiscreteDataset& ds, const CausalGraph& graph, double ess) {
  if (!(ess > 0.0) || !std::isfinite(ess)) {
    throw Error(ErrorCode::NonPositiveEss, "equivalent sample size must be positive");
  }
  return fit_with(ds, graph,
                  [ess](const Contingency& t, std::size_t r, std::int64_t n_r,
                        std::span<double> out) {
                    const auto q = static_cast<double>(t.num_configs);
                    const auto card = static_cast<double>(t.child_card);
                    const double row_prior = ess / q;
                    const double cell_prior = ess / (q * card);
                    for (std::size_t c = 0; c < t.child_card; ++c) {
                      out[c] = (static_cast<double>(t.at(r, c)) + cell_prior) /
                               (static_cast<double>(n_r) + row_prior);
                    }
                  });
}

CiResult chi_square_ci(const DiscreteDataset& ds, std::size_t i, std::size_t j,
                       std::span<const std::size_t> given, double alpha) {
  const auto n_vars = ds.num_variables();
  if (i >= n_vars || j >= n_vars) throw Error(ErrorCode::UnknownColumn, "index out of range");
  if (i == j) throw Error(ErrorCode::InvalidArgument, "CI test needs two distinct variables");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  for (auto s : given) {
    if (s >= n_vars) throw Error(ErrorCode::UnknownColumn, "index out of range");
    if (s == i || s == j) {
      throw Error(ErrorCode::InvalidArgument, "tested variables must not be conditioned on");
    }
  }
  // Canonical order keeps the statistic bit-identical under swapping i and j.
  if (i > j) std::swap(i, j);

  auto observed_states = [&](std::size_t v) {
    const auto col = ds.column(v);
    return std::set<int>(col.begin(), col.end()).size();
  };
  if (observed_states(i) < 2 || observed_states(j) < 2) {
    throw Error(ErrorCode::InsufficientData, "'" + ds.spec(i).name + "' or '" +
                                                 ds.spec(j).name + "' is constant");
  }

  const auto ci = ds.cardinality(i);
  const auto cj = ds.cardinality(j);
  const auto col_i = ds.column(i);
  const auto col_j = ds.column(j);
  std::vector<std::span<const int>> given_cols;
  for (auto s : given) given_cols.push_back(ds.column(s));

  std::map<std::uint64_t, std::vector<std::int64_t>> strata;
  for (std::size_t r = 0; r < ds.num_records(); ++r) {
    std::uint64_t key = 0;
    for (std::size_t k = 0; k < given.size(); ++k) {
      key = key * ds.cardinality(given[k]) + static_cast<std::uint64_t>(given_cols[k][r]);
    }
    auto& cells = strata[key];
    if (cells.empty()) cells.assign(ci * cj, 0);
    ++cells[static_cast<std::size_t>(col_i[r]) * cj + static_cast<std::size_t>(col_j[r])];
  }

  CiResult result;
  std::vector<double> row_sum(ci), col_sum(cj);
  for (const auto& [key, cells] : strata) {
    std::fill(row_sum.begin(), row_sum.end(), 0.0);
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    double n = 0.0;
    for (std::size_t a = 0; a < ci; ++a) {
      for (std::size_t b = 0; b < cj; ++b) {
        const auto o = static_cast<double>(cells[a * cj + b]);
        row_sum[a] += o;
        col_sum[b] += o;
        n += o;
      }
    }
    for (std::size_t a = 0; a < ci; ++a) {
      for (std::size_t b = 0; b < cj; ++b) {
        const double expected = row_sum[a] * col_sum[b] / n;
        if (expected <= 0.0) continue;
        const double d = static_cast<double>(cells[a * cj + b]) - expected;
        result.statistic += d * d / expected;
      }
    }
    result.dof += static_cast<int>((ci - 1) * (cj - 1));
  }
  result.p_value = result.statistic <= 0.0
                       ? 1.0
                       : boost::math::gamma_q(result.dof / 2.0, result.statistic / 2.0);
  result.independent = result.p_value > alpha;
  return result;
}

CiResult chi_square_ci(const DiscreteDataset& ds, std::string_view i, std::string_view j,
                       const std::vector<std::string>& given, double alpha) {
  std::vector<std::size_t> idx;
  for (const auto& s : given) idx.push_back(ds.index_of(s));
  return chi_square_ci(ds, ds.index_of(i), ds.index_of(j), idx, alpha);
}

double mutual_information(const DiscreteDataset& ds, std::size_t i, std::size_t j) {
  if (i >= ds.num_variables() || j >= ds.num_variables()) {
    throw Error(ErrorCode::UnknownColumn, "index out of range");
  }
  if (i == j) throw Error(ErrorCode::InvalidArgument, "mutual information needs i != j");
  if (i > j) std::swap(i, j);
  const std::size_t pi[] = {i};
  const auto table = counts(ds, j, pi);  // rows: states of i, columns: states of j
  const auto n = static_cast<double>(ds.num_records());
  std::vector<double> marg_j(table.child_card, 0.0);
  for (std::size_t a = 0; a < table.num_configs; ++a) {
    for (std::size_t b = 0; b < table.child_card; ++b) {
      marg_j[b] += static_cast<double>(table.at(a, b));
    }
  }
  double mi = 0.0;
  for (std::size_t a = 0; a < table.num_configs; ++a) {
    const auto n_a = static_cast<double>(table.row_total(a));
    for (std::size_t b = 0; b < table.child_card; ++b) {
      const auto n_ab = static_cast<double>(table.at(a, b));
      if (n_ab == 0.0) continue;
      mi += (n_ab / n) * std::log(n_ab * n / (n_a * marg_j[b]));
    }
  }
  return std::max(mi, 0.0);
}

double mutual_information(const DiscreteDataset& ds, std::string_view i, std::string_view j) {
  return mutual_information(ds, ds.index_of(i), ds.index_of(j));
}

std::string_view to_string(ScoreMethod method) {
  switch (method) {
    case ScoreMethod::Bic: return "bic";
    case ScoreMethod::K2: return "k2";
    case ScoreMethod::Bdeu: return "bdeu";
  }
  return "bic";
}

ScoreMethod score_method_from_string(std::string_view text) {
  if (text == "bic") return ScoreMethod::Bic;
  if (text == "k2") return ScoreMethod::K2;
  if (text == "bdeu") return ScoreMethod::Bdeu;
  throw Error(ErrorCode::InvalidArgument, "unknown score '" + std::string(text) + "'");
}

double family_score(const DiscreteDataset& ds, std::size_t child,
                    std::span<const std::size_t> parents, const ScoreSpec& spec) {
  if (ds.num_records() == 0) throw Error(ErrorCode::EmptyDataset, "dataset has no records");
  std::vector<std::size_t> sorted(parents.begin(), parents.end());
  std::sort(sorted.begin(), sorted.end());
  const auto t = counts(ds, child, sorted);
  const auto r = static_cast<double>(t.child_card);
  const auto q = static_cast<double>(t.num_configs);

  double total = 0.0;
  switch (spec.method) {
    case ScoreMethod::Bic: {
      double ll = 0.0;
      for (std::size_t row = 0; row < t.num_configs; ++row) {
        const auto n_r = static_cast<double>(t.row_total(row));
        for (std::size_t c = 0; c < t.child_card; ++c) {
          const auto n_rc = static_cast<double>(t.at(row, c));
          if (n_rc > 0.0) ll += n_rc * std::log(n_rc / n_r);
        }
      }
      const auto n = static_cast<double>(ds.num_records());
      total = ll - std::log(n) / 2.0 * (r - 1.0) * q;
      break;
    }
    case ScoreMethod::K2: {
      for (std::size_t row = 0; row < t.num_configs; ++row) {
        const auto n_r = static_cast<double>(t.row_total(row));
        total += std::lgamma(r) - std::lgamma(n_r + r);
        for (std::size_t c = 0; c < t.child_card; ++c) {
          total += std::lgamma(static_cast<double>(t.at(row, c)) + 1.0);
        }
      }
      break;
    }
    case ScoreMethod::Bdeu: {
      if (!(spec.ess > 0.0)) {
        throw Error(ErrorCode::NonPositiveEss, "equivalent sample size must be positive");
      }
      const double a_row = spec.ess / q;
      const double a_cell = spec.ess / (q * r);
      for (std::size_t row = 0; row < t.num_configs; ++row) {
        const auto n_r = static_cast<double>(t.row_total(row));
        total += std::lgamma(a_row) - std::lgamma(a_row + n_r);
        for (std::size_t c = 0; c < t.child_card; ++c) {
          total += std::lgamma(a_cell + static_cast<double>(t.at(row, c))) - std::lgamma(a_cell);
        }
      }
      break;
    }
  }
  return total;
}

double score(const DiscreteDataset& ds, const CausalGraph& graph, const ScoreSpec& spec) {
  if (!is_dag(graph)) throw Error(ErrorCode::CyclicGraph, "cannot score a non-DAG");
  double total = 0.0;
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    std::vector<std::size_t> parents;
    for (auto p : graph.parents(v)) parents.push_back(ds.index_of(graph.name(p)));
    total += family_score(ds, ds.index_of(graph.name(v)), parents, spec);
  }
  return total;
}

}  // namespace cpscausal
