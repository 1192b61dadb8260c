#include "cpscausal/structure_learning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "cpscausal/error.hpp"

namespace cpscausal {

namespace {

void require_learnable(const DiscreteDataset& ds) {
  if (ds.num_variables() < 2 || ds.num_records() == 0) {
    throw Error(ErrorCode::InsufficientData,
                "structure learning needs at least two variables and one record");
  }
}

// Dataset column indices sorted by variable name; every learner walks
// variables in this order so results do not depend on column order.
std::vector<std::size_t> name_order(const DiscreteDataset& ds) {
  std::vector<std::size_t> order(ds.num_variables());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ds.spec(a).name < ds.spec(b).name; });
  return order;
}

// Calls fn on every k-subset of items (lexicographic by position); stops when fn returns true.
bool for_each_subset(const std::vector<std::size_t>& items, std::size_t k,
                     const std::function<bool(const std::vector<std::size_t>&)>& fn) {
  if (k > items.size()) return false;
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<std::size_t> subset(k);
  while (true) {
    for (std::size_t a = 0; a < k; ++a) subset[a] = items[pick[a]];
    if (fn(subset)) return true;
    std::size_t pos = k;
    while (pos > 0 && pick[pos - 1] == items.size() - k + (pos - 1)) --pos;
    if (pos == 0) return false;
    ++pick[pos - 1];
    for (std::size_t a = pos; a < k; ++a) pick[a] = pick[a - 1] + 1;
  }
}

// Mixed graph on positions 0..n-1: adj symmetric, arrow[a][b] marks a definite a->b.
struct Pattern {
  std::size_t n;
  std::vector<std::vector<char>> adj;
  std::vector<std::vector<char>> arrow;

  explicit Pattern(std::size_t size)
      : n(size), adj(size, std::vector<char>(size, 0)), arrow(size, std::vector<char>(size, 0)) {}

  bool undirected(std::size_t a, std::size_t b) const {
    return adj[a][b] && !arrow[a][b] && !arrow[b][a];
  }
  bool directed(std::size_t a, std::size_t b) const { return adj[a][b] && arrow[a][b]; }
  void orient(std::size_t a, std::size_t b) { arrow[a][b] = 1; }
};

bool apply_meek_rules(Pattern& g) {
  bool changed = false;
  const auto n = g.n;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!g.undirected(a, b)) continue;
      bool orient = false;
      // R1: c -> a - b, c not adjacent to b  =>  a -> b
      for (std::size_t c = 0; c < n && !orient; ++c) {
        if (c != b && g.directed(c, a) && !g.adj[c][b]) orient = true;
      }
      // R2: a -> c -> b with a - b  =>  a -> b
      for (std::size_t c = 0; c < n && !orient; ++c) {
        if (g.directed(a, c) && g.directed(c, b)) orient = true;
      }
      // R3: a - c -> b, a - d -> b, c and d non-adjacent  =>  a -> b
      for (std::size_t c = 0; c < n && !orient; ++c) {
        if (!g.undirected(a, c) || !g.directed(c, b)) continue;
        for (std::size_t d = c + 1; d < n && !orient; ++d) {
          if (g.undirected(a, d) && g.directed(d, b) && !g.adj[c][d]) orient = true;
        }
      }
      // R4: a - d, a adjacent c, c -> d -> b, c not adjacent b  =>  a -> b
      for (std::size_t d = 0; d < n && !orient; ++d) {
        if (!g.undirected(a, d) || !g.directed(d, b)) continue;
        for (std::size_t c = 0; c < n && !orient; ++c) {
          if (c != a && c != b && g.adj[a][c] && g.directed(c, d) && !g.adj[c][b]) {
            orient = true;
          }
        }
      }
      if (orient) {
        g.orient(a, b);
        changed = true;
      }
    }
  }
  return changed;
}

}  // namespace

PcResult learn_pc(const DiscreteDataset& ds, const PcConfig& cfg) {
  require_learnable(ds);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  const auto order = name_order(ds);  // position -> dataset column
  const auto n = order.size();
  const int max_cond =
      cfg.max_cond_size.value_or(static_cast<int>(n) - 2);

  Pattern g(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) g.adj[a][b] = a != b;
  }
  std::vector<std::vector<std::vector<std::size_t>>> sepset(
      n, std::vector<std::vector<std::size_t>>(n));

  auto independent = [&](std::size_t a, std::size_t b, const std::vector<std::size_t>& s) {
    std::vector<std::size_t> cols;
    for (auto p : s) cols.push_back(order[p]);
    try {
      return chi_square_ci(ds, order[a], order[b], cols, cfg.alpha).independent;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InsufficientData) return true;  // constant column
      throw;
    }
  };

  // Skeleton phase; adjacency sets are frozen at the start of each level.
  for (int level = 0; level <= max_cond; ++level) {
    const auto frozen = g.adj;
    bool any_testable = false;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!g.adj[a][b]) continue;
        for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
          std::vector<std::size_t> pool;
          for (std::size_t c = 0; c < n; ++c) {
            if (c != y && frozen[x][c]) pool.push_back(c);
          }
          if (pool.size() < static_cast<std::size_t>(level)) continue;
          any_testable = true;
          const bool removed = for_each_subset(
              pool, static_cast<std::size_t>(level), [&](const std::vector<std::size_t>& s) {
                if (!independent(a, b, s)) return false;
                g.adj[a][b] = g.adj[b][a] = 0;
                sepset[a][b] = sepset[b][a] = s;
                return true;
              });
          if (removed) break;
        }
      }
    }
    if (!any_testable) break;
  }

  // v-structures a -> c <- b for non-adjacent a, b with c outside their sepset.
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (a == c || b == c || !g.adj[a][c] || !g.adj[b][c] || g.adj[a][b]) continue;
        const auto& s = sepset[a][b];
        if (std::find(s.begin(), s.end(), c) != s.end()) continue;
        if (!g.arrow[c][a]) g.orient(a, c);
        if (!g.arrow[c][b]) g.orient(b, c);
      }
    }
  }
  while (apply_meek_rules(g)) {
  }

  PcResult result;
  result.graph = CausalGraph(ds.names());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!g.adj[a][b]) {
        std::vector<std::string> names;
        for (auto p : sepset[a][b]) names.push_back(ds.spec(order[p]).name);
        std::sort(names.begin(), names.end());
        result.sepsets[{ds.spec(order[a]).name, ds.spec(order[b]).name}] = std::move(names);
        continue;
      }
      const bool ab = g.arrow[a][b] != 0;
      const bool ba = g.arrow[b][a] != 0;
      if (ab && !ba) {
        result.graph.insert_edge(order[a], order[b], EdgeKind::Learnt);
      } else if (ba && !ab) {
        result.graph.insert_edge(order[b], order[a], EdgeKind::Learnt);
      } else {
        result.graph.insert_edge(order[a], order[b], EdgeKind::Learnt, false);
      }
    }
  }
  return result;
}

CausalGraph extend_to_dag(const CausalGraph& pdag) {
  {
    CausalGraph directed_part(pdag.nodes());
    for (const auto& e : pdag.edges()) {
      if (e.directed) directed_part.insert_edge(e.src, e.dst, e.kind);
    }
    if (!is_dag(directed_part)) {
      throw Error(ErrorCode::CyclicGraph, "partially directed graph has a directed cycle");
    }
  }

  // Dor-Tarsi: repeatedly pick a sink whose undirected neighbours are
  // adjacent to all its other neighbours, and point those edges into it.
  CausalGraph out = pdag;
  const auto n = pdag.num_nodes();
  std::vector<char> removed(n, 0);
  for (std::size_t step = 0; step < n; ++step) {
    std::optional<std::size_t> pick;
    for (std::size_t x = 0; x < n; ++x) {
      if (removed[x]) continue;
      const bool sink = std::none_of(out.children(x).begin(), out.children(x).end(),
                                     [&](std::size_t c) { return !removed[c]; });
      if (!sink) continue;
      std::vector<std::size_t> nbrs;
      for (auto y : out.adjacent_nodes(x)) {
        if (!removed[y]) nbrs.push_back(y);
      }
      bool ok = true;
      for (auto y : nbrs) {
        if (!out.has_undirected(x, y)) continue;
        for (auto z : nbrs) {
          if (z != y && !out.adjacent(y, z)) ok = false;
        }
      }
      // Largest name wins so a lone edge A - B becomes A -> B.
      if (ok && (!pick || out.name(x) > out.name(*pick))) pick = x;
    }
    if (!pick) {
      throw Error(ErrorCode::NoConsistentExtension, "graph admits no consistent DAG extension");
    }
    for (auto y : std::vector<std::size_t>(out.undirected_neighbors(*pick))) {
      if (!removed[y]) out.orient(y, *pick);
    }
    removed[*pick] = 1;
  }
  return out;
}

HcResult learn_hc(const DiscreteDataset& ds, const HcConfig& cfg) {
  require_learnable(ds);
  if (cfg.plateau_k < 1 || cfg.max_iter < 1 || cfg.plateau_k > cfg.max_iter) {
    throw Error(ErrorCode::InvalidArgument, "need 1 <= plateau_k <= max_iter");
  }
  if (cfg.max_parents && *cfg.max_parents < 0) {
    throw Error(ErrorCode::InvalidArgument, "max_parents must be non-negative");
  }
  const auto order = name_order(ds);
  const auto n = order.size();

  std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> cache;
  auto fscore = [&](std::size_t child, std::vector<std::size_t> parents) {
    std::sort(parents.begin(), parents.end());
    const auto key = std::pair{child, parents};
    if (const auto it = cache.find(key); it != cache.end()) return it->second;
    std::vector<std::size_t> cols;
    for (auto p : parents) cols.push_back(order[p]);
    const double s = family_score(ds, order[child], cols, cfg.score);
    cache.emplace(key, s);
    return s;
  };

  std::vector<std::vector<char>> allowed(n, std::vector<char>(n, 1));
  if (cfg.candidate_filter) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        bool keep = false;
        try {
          keep = chi_square_ci(ds, order[a], order[b], {}, 0.5).p_value <= 0.5;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InsufficientData) throw;
        }
        allowed[a][b] = allowed[b][a] = keep;
      }
    }
  }

  std::vector<std::vector<std::size_t>> parents(n);
  std::vector<std::vector<char>> arc(n, std::vector<char>(n, 0));
  std::vector<double> family(n);
  for (std::size_t v = 0; v < n; ++v) family[v] = fscore(v, {});
  auto total = [&] { return std::accumulate(family.begin(), family.end(), 0.0); };

  auto reaches = [&](std::size_t from, std::size_t to, std::pair<std::size_t, std::size_t> skip) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{from};
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      if (v == to) return true;
      if (seen[v]) continue;
      seen[v] = 1;
      for (std::size_t w = 0; w < n; ++w) {
        if (arc[v][w] && !(v == skip.first && w == skip.second)) stack.push_back(w);
      }
    }
    return false;
  };
  auto without = [](std::vector<std::size_t> list, std::size_t v) {
    list.erase(std::remove(list.begin(), list.end(), v), list.end());
    return list;
  };
  auto with = [](std::vector<std::size_t> list, std::size_t v) {
    list.push_back(v);
    return list;
  };
  const auto parent_cap = cfg.max_parents.value_or(static_cast<int>(n));
  constexpr std::pair<std::size_t, std::size_t> kNoSkip{SIZE_MAX, SIZE_MAX};

  HcResult result;
  result.trace.push_back(total());
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    enum Kind { Add = 0, Remove = 1, Reverse = 2 };
    struct Move {
      Kind kind;
      std::size_t src, dst;
      double delta, new_dst, new_src;
    };
    std::optional<Move> best;
    auto consider = [&](const Move& m) {
      // Moves are generated in (kind, src, dst) order; ties keep the earlier one.
      if (!best || m.delta > best->delta) best = m;
    };

    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (u == v || arc[u][v] || arc[v][u] || !allowed[u][v]) continue;
        if (static_cast<int>(parents[v].size()) >= parent_cap) continue;
        if (reaches(v, u, kNoSkip)) continue;
        const double s = fscore(v, with(parents[v], u));
        consider({Add, u, v, s - family[v], s, 0.0});
      }
    }
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (!arc[u][v]) continue;
        const double s = fscore(v, without(parents[v], u));
        consider({Remove, u, v, s - family[v], s, 0.0});
      }
    }
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (!arc[u][v]) continue;
        if (static_cast<int>(parents[u].size()) >= parent_cap) continue;
        if (reaches(u, v, {u, v})) continue;  // v -> u would close a cycle
        const double s_v = fscore(v, without(parents[v], u));
        const double s_u = fscore(u, with(parents[u], v));
        consider({Reverse, u, v, (s_v - family[v]) + (s_u - family[u]), s_v, s_u});
      }
    }

    const double current = result.trace.back();
    const double eps = 1e-9 * std::max(1.0, std::abs(current));
    if (!best || best->delta <= eps) {
      // Without a move the graph is unchanged and re-evaluation is identical,
      // so the plateau is reached regardless of plateau_k.
      break;
    }
    const auto [kind, u, v, delta, s_dst, s_src] = *best;
    switch (kind) {
      case Add:
        arc[u][v] = 1;
        parents[v] = with(parents[v], u);
        family[v] = s_dst;
        break;
      case Remove:
        arc[u][v] = 0;
        parents[v] = without(parents[v], u);
        family[v] = s_dst;
        break;
      case Reverse:
        arc[u][v] = 0;
        arc[v][u] = 1;
        parents[v] = without(parents[v], u);
        parents[u] = with(parents[u], v);
        family[v] = s_dst;
        family[u] = s_src;
        break;
    }
    result.trace.push_back(total());
  }

  result.graph = CausalGraph(ds.names());
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (arc[u][v]) result.graph.insert_edge(order[u], order[v], EdgeKind::Learnt);
    }
  }
  return result;
}

CausalGraph learn_cl(const DiscreteDataset& ds, const ClConfig& cfg) {
  require_learnable(ds);
  const auto root_col = ds.find(cfg.root);
  if (!root_col) throw Error(ErrorCode::UnknownColumn, "root '" + cfg.root + "' not in dataset");
  const auto order = name_order(ds);
  const auto n = order.size();

  struct Candidate {
    double weight;
    std::size_t a, b;  // positions, a < b
  };
  std::vector<Candidate> candidates;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      candidates.push_back({mutual_information(ds, order[a], order[b]), a, b});
    }
  }
  // Heaviest first; equal weights fall back to the lexicographic name pair.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.weight > y.weight; });

  std::vector<std::size_t> component(n);
  std::iota(component.begin(), component.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return component[x] == x ? x : component[x] = find(component[x]);
  };
  std::vector<std::vector<std::size_t>> tree(n);
  std::size_t added = 0;
  for (const auto& c : candidates) {
    const auto ra = find(c.a);
    const auto rb = find(c.b);
    if (ra == rb) continue;
    component[ra] = rb;
    tree[c.a].push_back(c.b);
    tree[c.b].push_back(c.a);
    if (++added + 1 == n) break;
  }

  CausalGraph out(ds.names());
  const auto root = static_cast<std::size_t>(
      std::find(order.begin(), order.end(), *root_col) - order.begin());
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> queue{root};
  seen[root] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto v = queue[head];
    auto next = tree[v];
    std::sort(next.begin(), next.end());
    for (auto w : next) {
      if (seen[w]) continue;
      seen[w] = 1;
      out.insert_edge(order[v], order[w], EdgeKind::Learnt);
      queue.push_back(w);
    }
  }
  return out;
}

}  // namespace cpscausal
