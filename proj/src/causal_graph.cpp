#include "cpscausal/causal_graph.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <functional>
#include <queue>
#include <set>

#include "cpscausal/error.hpp"

namespace cpscausal {

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Control: return "control";
    case EdgeKind::Physical: return "physical";
    case EdgeKind::Learnt: return "learnt";
  }
  return "learnt";
}

EdgeKind edge_kind_from_string(std::string_view text) {
  if (text == "control") return EdgeKind::Control;
  if (text == "physical") return EdgeKind::Physical;
  if (text == "learnt") return EdgeKind::Learnt;
  throw Error(ErrorCode::ParseError, "unknown edge kind '" + std::string(text) + "'");
}

CausalGraph::CausalGraph(std::vector<std::string> nodes)
    : nodes_(std::move(nodes)),
      out_(nodes_.size()),
      in_(nodes_.size()),
      und_(nodes_.size()) {
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (nodes_[v].empty()) throw Error(ErrorCode::InvalidArgument, "empty node name");
    if (!index_.emplace(nodes_[v], v).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate node '" + nodes_[v] + "'");
    }
  }
}

std::optional<std::size_t> CausalGraph::find(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CausalGraph::index_of(std::string_view name) const {
  const auto v = find(name);
  if (!v) throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(name) + "'");
  return *v;
}

void CausalGraph::insert_sorted(std::vector<std::size_t>& list, std::size_t v) {
  list.insert(std::lower_bound(list.begin(), list.end(), v), v);
}

void CausalGraph::erase_value(std::vector<std::size_t>& list, std::size_t v) {
  const auto it = std::lower_bound(list.begin(), list.end(), v);
  if (it != list.end() && *it == v) list.erase(it);
}

void CausalGraph::insert_edge(std::size_t src, std::size_t dst, EdgeKind kind, bool directed) {
  if (src >= nodes_.size() || dst >= nodes_.size()) {
    throw Error(ErrorCode::UnknownNode, "node index out of range");
  }
  if (src == dst) throw Error(ErrorCode::SelfLoop, "self-loop on '" + nodes_[src] + "'");
  const bool clash_reverse =
      has_undirected(src, dst) || (!directed && edges_.count({dst, src}) != 0);
  if (has_edge(src, dst) || clash_reverse) {
    throw Error(ErrorCode::DuplicateEdge,
                "edge " + nodes_[src] + " -> " + nodes_[dst] + " already present");
  }
  edges_.emplace(std::pair{src, dst}, EdgeInfo{kind, directed});
  if (directed) {
    insert_sorted(out_[src], dst);
    insert_sorted(in_[dst], src);
  } else {
    insert_sorted(und_[src], dst);
    insert_sorted(und_[dst], src);
  }
}

void CausalGraph::insert_edge(std::string_view src, std::string_view dst, EdgeKind kind,
                              bool directed) {
  insert_edge(index_of(src), index_of(dst), kind, directed);
}

void CausalGraph::remove_edge(std::size_t src, std::size_t dst) {
  const auto it = edges_.find({src, dst});
  if (it == edges_.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "edge " + nodes_[src] + " -> " + nodes_[dst] + " not present");
  }
  if (it->second.directed) {
    erase_value(out_[src], dst);
    erase_value(in_[dst], src);
  } else {
    erase_value(und_[src], dst);
    erase_value(und_[dst], src);
  }
  edges_.erase(it);
}

void CausalGraph::orient(std::size_t u, std::size_t v) {
  std::optional<EdgeKind> kind;
  if (const auto it = edges_.find({u, v}); it != edges_.end() && !it->second.directed) {
    kind = it->second.kind;
    remove_edge(u, v);
  } else if (const auto jt = edges_.find({v, u}); jt != edges_.end() && !jt->second.directed) {
    kind = jt->second.kind;
    remove_edge(v, u);
  }
  if (!kind) {
    throw Error(ErrorCode::InvalidArgument,
                "no undirected edge between " + nodes_[u] + " and " + nodes_[v]);
  }
  insert_edge(u, v, *kind, true);
}

bool CausalGraph::has_edge(std::size_t src, std::size_t dst) const {
  return edges_.count({src, dst}) != 0;
}

bool CausalGraph::has_arc(std::size_t src, std::size_t dst) const {
  const auto it = edges_.find({src, dst});
  return it != edges_.end() && it->second.directed;
}

bool CausalGraph::has_undirected(std::size_t u, std::size_t v) const {
  const auto& list = und_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

bool CausalGraph::adjacent(std::size_t u, std::size_t v) const {
  return has_edge(u, v) || has_edge(v, u);
}

std::optional<EdgeKind> CausalGraph::kind_of(std::size_t src, std::size_t dst) const {
  const auto it = edges_.find({src, dst});
  if (it == edges_.end()) return std::nullopt;
  return it->second.kind;
}

std::vector<std::size_t> CausalGraph::adjacent_nodes(std::size_t v) const {
  std::vector<std::size_t> out;
  out.insert(out.end(), in_[v].begin(), in_[v].end());
  out.insert(out.end(), out_[v].begin(), out_[v].end());
  out.insert(out.end(), und_[v].begin(), und_[v].end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool CausalGraph::has_undirected_edges() const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [](const auto& e) { return !e.second.directed; });
}

std::vector<Edge> CausalGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [key, info] : edges_) {
    out.push_back(Edge{nodes_[key.first], nodes_[key.second], info.kind, info.directed});
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  });
  return out;
}

CausalGraph add_edge(const CausalGraph& g, std::string_view src, std::string_view dst,
                     EdgeKind kind) {
  CausalGraph out = g;
  out.insert_edge(src, dst, kind);
  return out;
}

namespace {

// Kahn's algorithm over directed edges; nullopt when a directed cycle exists.
std::optional<std::vector<std::size_t>> try_topological(const CausalGraph& g) {
  const auto n = g.num_nodes();
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = g.parents(v).size();
  auto later = [&g](std::size_t a, std::size_t b) { return g.name(a) > g.name(b); };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto c : g.children(v)) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

void require_dag(const CausalGraph& g) {
  if (!is_dag(g)) throw Error(ErrorCode::CyclicGraph, "graph is not a DAG");
}

std::set<std::string> node_set(const CausalGraph& g) {
  return {g.nodes().begin(), g.nodes().end()};
}

void require_same_nodes(const CausalGraph& a, const CausalGraph& b) {
  if (node_set(a) != node_set(b)) {
    throw Error(ErrorCode::NodeSetMismatch, "graphs are over different node sets");
  }
}

NamePair ordered_pair(const std::string& a, const std::string& b) {
  return a < b ? NamePair{a, b} : NamePair{b, a};
}

}  // namespace

bool is_dag(const CausalGraph& g) {
  return !g.has_undirected_edges() && try_topological(g).has_value();
}

std::vector<std::size_t> topological_indices(const CausalGraph& g) {
  if (g.has_undirected_edges()) {
    throw Error(ErrorCode::CyclicGraph, "graph has undirected edges");
  }
  auto order = try_topological(g);
  if (!order) throw Error(ErrorCode::CyclicGraph, "graph has a directed cycle");
  return *order;
}

std::vector<std::string> topological_order(const CausalGraph& g) {
  std::vector<std::string> out;
  for (auto v : topological_indices(g)) out.push_back(g.name(v));
  return out;
}

Structures structures(const CausalGraph& g) {
  require_dag(g);
  Structures out;
  auto sorted_names = [&g](const std::vector<std::size_t>& vs) {
    std::vector<std::string> names;
    for (auto v : vs) names.push_back(g.name(v));
    std::sort(names.begin(), names.end());
    return names;
  };
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    const auto parents = sorted_names(g.parents(v));
    const auto children = sorted_names(g.children(v));
    for (std::size_t a = 0; a < parents.size(); ++a) {
      for (std::size_t b = a + 1; b < parents.size(); ++b) {
        out.colliders.push_back({g.name(v), parents[a], parents[b]});
      }
    }
    for (std::size_t a = 0; a < children.size(); ++a) {
      for (std::size_t b = a + 1; b < children.size(); ++b) {
        out.forks.push_back({g.name(v), children[a], children[b]});
      }
    }
    for (const auto& p : parents) {
      for (const auto& c : children) {
        if (p != c) out.chains.push_back({p, g.name(v), c});
      }
    }
  }
  auto by_junction = [](const Junction& a, const Junction& b) {
    return std::tie(a.node, a.first, a.second) < std::tie(b.node, b.first, b.second);
  };
  std::sort(out.colliders.begin(), out.colliders.end(), by_junction);
  std::sort(out.forks.begin(), out.forks.end(), by_junction);
  std::sort(out.chains.begin(), out.chains.end(), [](const Chain& a, const Chain& b) {
    return std::tie(a.from, a.via, a.to) < std::tie(b.from, b.via, b.to);
  });
  return out;
}

bool d_separated(const CausalGraph& g, std::size_t i, std::size_t j,
                 const std::vector<std::size_t>& given) {
  require_dag(g);
  const auto n = g.num_nodes();
  if (i >= n || j >= n) throw Error(ErrorCode::UnknownNode, "node index out of range");
  if (i == j) throw Error(ErrorCode::InvalidArgument, "d-separation needs two distinct nodes");
  std::vector<char> observed(n, 0);
  for (auto s : given) {
    if (s >= n) throw Error(ErrorCode::UnknownNode, "node index out of range");
    observed[s] = 1;
  }
  if (observed[i] || observed[j]) {
    throw Error(ErrorCode::InvalidArgument, "queried nodes must not be in the conditioning set");
  }

  // Nodes that are in the conditioning set or have a descendant in it.
  std::vector<char> opens_collider(n, 0);
  std::deque<std::size_t> frontier(given.begin(), given.end());
  while (!frontier.empty()) {
    const auto v = frontier.front();
    frontier.pop_front();
    if (opens_collider[v]) continue;
    opens_collider[v] = 1;
    for (auto p : g.parents(v)) frontier.push_back(p);
  }

  // Reachability over (node, direction): `up` means the trail arrived from a child.
  enum Dir { Up = 0, Down = 1 };
  std::vector<std::array<char, 2>> visited(n, {0, 0});
  std::deque<std::pair<std::size_t, Dir>> queue{{i, Up}};
  while (!queue.empty()) {
    const auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = 1;
    if (v == j && !observed[v]) return false;
    if (dir == Up && !observed[v]) {
      for (auto p : g.parents(v)) queue.emplace_back(p, Up);
      for (auto c : g.children(v)) queue.emplace_back(c, Down);
    } else if (dir == Down) {
      if (!observed[v]) {
        for (auto c : g.children(v)) queue.emplace_back(c, Down);
      }
      if (opens_collider[v]) {
        for (auto p : g.parents(v)) queue.emplace_back(p, Up);
      }
    }
  }
  return true;
}

bool d_separated(const CausalGraph& g, std::string_view i, std::string_view j,
                 const std::vector<std::string>& given) {
  std::vector<std::size_t> idx;
  idx.reserve(given.size());
  for (const auto& s : given) idx.push_back(g.index_of(s));
  return d_separated(g, g.index_of(i), g.index_of(j), idx);
}

std::vector<std::tuple<std::string, std::string, std::string>> v_structures(
    const CausalGraph& g) {
  std::vector<std::tuple<std::string, std::string, std::string>> out;
  for (std::size_t c = 0; c < g.num_nodes(); ++c) {
    const auto& ps = g.parents(c);
    for (std::size_t a = 0; a < ps.size(); ++a) {
      for (std::size_t b = a + 1; b < ps.size(); ++b) {
        if (g.adjacent(ps[a], ps[b])) continue;
        auto [x, y] = ordered_pair(g.name(ps[a]), g.name(ps[b]));
        out.emplace_back(x, g.name(c), y);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool markov_equivalent(const CausalGraph& a, const CausalGraph& b) {
  require_same_nodes(a, b);
  require_dag(a);
  require_dag(b);
  auto skeleton = [](const CausalGraph& g) {
    std::set<NamePair> s;
    for (const auto& e : g.edges()) s.insert(ordered_pair(e.src, e.dst));
    return s;
  };
  return skeleton(a) == skeleton(b) && v_structures(a) == v_structures(b);
}

EdgeDiff compare(const CausalGraph& left, const CausalGraph& right) {
  require_same_nodes(left, right);
  auto lookup = [](const CausalGraph& g, const std::string& s, const std::string& d) {
    return g.has_edge(g.index_of(s), g.index_of(d));
  };
  auto undirected = [](const CausalGraph& g, const std::string& s, const std::string& d) {
    return g.has_undirected(g.index_of(s), g.index_of(d));
  };

  EdgeDiff diff;
  for (const auto& e : left.edges()) {
    if (lookup(right, e.src, e.dst)) {
      diff.common.emplace_back(e.src, e.dst);
    } else if (lookup(right, e.dst, e.src)) {
      if (!e.directed || undirected(right, e.dst, e.src)) {
        diff.common.emplace_back(e.src, e.dst);
      } else {
        diff.reversed.push_back(ordered_pair(e.src, e.dst));
      }
    } else {
      diff.only_left.emplace_back(e.src, e.dst);
    }
  }
  for (const auto& e : right.edges()) {
    if (!lookup(left, e.src, e.dst) && !lookup(left, e.dst, e.src)) {
      diff.only_right.emplace_back(e.src, e.dst);
    }
  }
  std::sort(diff.common.begin(), diff.common.end());
  std::sort(diff.reversed.begin(), diff.reversed.end());
  diff.reversed.erase(std::unique(diff.reversed.begin(), diff.reversed.end()),
                      diff.reversed.end());
  return diff;
}

namespace {

bool has_directed_cycle(const CausalGraph& g) { return !try_topological(g).has_value(); }

// Elementary directed cycles, each as its list of edges; stops after `limit` cycles.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> simple_cycles(
    const CausalGraph& g, std::size_t limit) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> cycles;
  const auto n = g.num_nodes();
  std::vector<char> on_path(n, 0);
  std::vector<std::size_t> path;

  // Each cycle is enumerated once, from its smallest node index.
  std::function<void(std::size_t, std::size_t)> extend = [&](std::size_t start, std::size_t v) {
    if (cycles.size() >= limit) return;
    for (auto w : g.children(v)) {
      if (w < start) continue;
      if (w == start) {
        std::vector<std::pair<std::size_t, std::size_t>> cyc;
        for (std::size_t k = 0; k + 1 < path.size(); ++k) cyc.emplace_back(path[k], path[k + 1]);
        cyc.emplace_back(v, start);
        cycles.push_back(std::move(cyc));
        if (cycles.size() >= limit) return;
      } else if (!on_path[w]) {
        on_path[w] = 1;
        path.push_back(w);
        extend(start, w);
        path.pop_back();
        on_path[w] = 0;
      }
    }
  };
  for (std::size_t s = 0; s < n && cycles.size() < limit; ++s) {
    on_path[s] = 1;
    path.assign(1, s);
    extend(s, s);
    on_path[s] = 0;
  }
  return cycles;
}

constexpr std::size_t kCycleEnumerationLimit = 200000;

}  // namespace

CycleBreakResult break_cycles(const CausalGraph& g, const std::vector<NamePair>& removals) {
  CycleBreakResult result{g, {}};
  for (const auto& [src, dst] : removals) {
    result.graph.remove_edge(g.index_of(src), g.index_of(dst));
    result.removed.emplace_back(src, dst);
  }
  if (has_directed_cycle(result.graph)) {
    throw Error(ErrorCode::StillCyclic, "graph still has a directed cycle after removals");
  }
  return result;
}

CycleBreakResult break_cycles(const CausalGraph& g) {
  CycleBreakResult result{g, {}};
  while (has_directed_cycle(result.graph)) {
    const auto cycles = simple_cycles(result.graph, kCycleEnumerationLimit);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> hits;
    for (const auto& cyc : cycles) {
      for (const auto& e : cyc) ++hits[e];
    }
    const bool any_learnt = std::any_of(hits.begin(), hits.end(), [&](const auto& h) {
      return result.graph.kind_of(h.first.first, h.first.second) == EdgeKind::Learnt;
    });

    std::optional<std::pair<std::size_t, std::size_t>> best;
    std::size_t best_hits = 0;
    for (const auto& [e, count] : hits) {
      if (any_learnt && result.graph.kind_of(e.first, e.second) != EdgeKind::Learnt) continue;
      const auto key = NamePair{result.graph.name(e.first), result.graph.name(e.second)};
      if (!best || count > best_hits ||
          (count == best_hits &&
           key < NamePair{result.graph.name(best->first), result.graph.name(best->second)})) {
        best = e;
        best_hits = count;
      }
    }
    result.graph.remove_edge(best->first, best->second);
    result.removed.emplace_back(result.graph.name(best->first), result.graph.name(best->second));
  }
  return result;
}

std::string to_dot(const CausalGraph& g) {
  std::vector<std::string> names = g.nodes();
  std::sort(names.begin(), names.end());
  std::string out = "digraph causal {\n";
  for (const auto& n : names) out += "  \"" + n + "\";\n";
  for (const auto& e : g.edges()) {
    std::string attrs;
    switch (e.kind) {
      case EdgeKind::Control: attrs = "style=dashed"; break;
      case EdgeKind::Physical: attrs = "style=solid"; break;
      case EdgeKind::Learnt: attrs = "style=solid, color=gray"; break;
    }
    if (!e.directed) attrs += ", dir=none";
    out += "  \"" + e.src + "\" -> \"" + e.dst + "\" [" + attrs + "];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace cpscausal
