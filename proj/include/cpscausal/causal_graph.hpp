#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace cpscausal {

// control: derived from controller logic; physical: actuator-to-sensor
// coupling; learnt: produced by a structure learner.
enum class EdgeKind { Control, Physical, Learnt };

std::string_view to_string(EdgeKind kind);
EdgeKind edge_kind_from_string(std::string_view text);

struct Edge {
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::Learnt;
  // false for the undirected edges of a partially directed (CPDAG) output.
  bool directed = true;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using NamePair = std::pair<std::string, std::string>;

// Directed graph over design-parameter names. Nodes keep their insertion
// order; every name-valued query returns names in lexicographic order.
// Acyclicity is not enforced on insertion.
class CausalGraph {
 public:
  CausalGraph() = default;
  explicit CausalGraph(std::vector<std::string> nodes);

  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::string& name(std::size_t v) const { return nodes_[v]; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws UnknownNode

  // In-place mutation; the free function add_edge() is the value-returning form.
  void insert_edge(std::size_t src, std::size_t dst, EdgeKind kind, bool directed = true);
  void insert_edge(std::string_view src, std::string_view dst, EdgeKind kind,
                   bool directed = true);
  void remove_edge(std::size_t src, std::size_t dst);
  // Replaces an undirected edge u-v (stored either way round) by u->v.
  void orient(std::size_t u, std::size_t v);

  // Exact stored pair (src, dst), directed or not.
  bool has_edge(std::size_t src, std::size_t dst) const;
  // Directed src->dst.
  bool has_arc(std::size_t src, std::size_t dst) const;
  // u-v stored as an undirected edge (either way round).
  bool has_undirected(std::size_t u, std::size_t v) const;
  // Any edge between u and v.
  bool adjacent(std::size_t u, std::size_t v) const;
  std::optional<EdgeKind> kind_of(std::size_t src, std::size_t dst) const;

  // Sorted by node index.
  const std::vector<std::size_t>& parents(std::size_t v) const { return in_[v]; }
  const std::vector<std::size_t>& children(std::size_t v) const { return out_[v]; }
  const std::vector<std::size_t>& undirected_neighbors(std::size_t v) const { return und_[v]; }
  std::vector<std::size_t> adjacent_nodes(std::size_t v) const;

  bool has_undirected_edges() const;

  // All edges, ordered lexicographically by (src, dst) name.
  std::vector<Edge> edges() const;

  friend bool operator==(const CausalGraph& a, const CausalGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  struct EdgeInfo {
    EdgeKind kind;
    bool directed;
    friend bool operator==(const EdgeInfo&, const EdgeInfo&) = default;
  };
  static void insert_sorted(std::vector<std::size_t>& list, std::size_t v);
  static void erase_value(std::vector<std::size_t>& list, std::size_t v);

  std::vector<std::string> nodes_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::pair<std::size_t, std::size_t>, EdgeInfo> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> und_;
};

CausalGraph add_edge(const CausalGraph& g, std::string_view src, std::string_view dst,
                     EdgeKind kind);

// True iff every edge is directed and a topological order exists.
bool is_dag(const CausalGraph& g);
// Ties broken by lexicographic node name. Throws CyclicGraph.
std::vector<std::string> topological_order(const CausalGraph& g);
std::vector<std::size_t> topological_indices(const CausalGraph& g);

struct Chain {
  std::string from, via, to;
  friend bool operator==(const Chain&, const Chain&) = default;
};
// A node together with an unordered pair of its parents (collider) or children (fork).
struct Junction {
  std::string node, first, second;
  friend bool operator==(const Junction&, const Junction&) = default;
};
struct Structures {
  std::vector<Chain> chains;
  std::vector<Junction> forks;
  std::vector<Junction> colliders;
};
Structures structures(const CausalGraph& g);

bool d_separated(const CausalGraph& g, std::string_view i, std::string_view j,
                 const std::vector<std::string>& given);
bool d_separated(const CausalGraph& g, std::size_t i, std::size_t j,
                 const std::vector<std::size_t>& given);

// Unshielded colliders as (parent_a, child, parent_b) with parent_a < parent_b.
std::vector<std::tuple<std::string, std::string, std::string>> v_structures(const CausalGraph& g);
bool markov_equivalent(const CausalGraph& a, const CausalGraph& b);

struct EdgeDiff {
  std::vector<NamePair> common;
  std::vector<NamePair> reversed;  // as the lexicographically ordered pair
  std::vector<NamePair> only_left;
  std::vector<NamePair> only_right;
};
EdgeDiff compare(const CausalGraph& left, const CausalGraph& right);

struct CycleBreakResult {
  CausalGraph graph;
  std::vector<NamePair> removed;
};
// Removes exactly the listed edges; throws StillCyclic if a directed cycle remains.
CycleBreakResult break_cycles(const CausalGraph& g, const std::vector<NamePair>& removals);
// Greedy repair: repeatedly removes the edge lying on the most directed cycles,
// choosing among learnt edges while any lie on a cycle.
CycleBreakResult break_cycles(const CausalGraph& g);

std::string to_dot(const CausalGraph& g);

}  // namespace cpscausal
