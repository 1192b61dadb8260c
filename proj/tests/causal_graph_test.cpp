#include <gtest/gtest.h>

#include <random>

#include "cpscausal/causal_graph.hpp"
#include "cpscausal/error.hpp"
#include "test_support.hpp"

using namespace cpscausal;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

CausalGraph graph(std::vector<std::string> nodes,
                  const std::vector<std::pair<std::string, std::string>>& arcs,
                  EdgeKind kind = EdgeKind::Learnt) {
  CausalGraph g(std::move(nodes));
  for (const auto& [a, b] : arcs) g.insert_edge(a, b, kind);
  return g;
}

CausalGraph stage1_domain() {
  CausalGraph g({"P101", "P102", "LIT101", "MV101", "FIT101"});
  g = add_edge(g, "LIT101", "MV101", EdgeKind::Control);
  g = add_edge(g, "LIT101", "P101", EdgeKind::Control);
  g = add_edge(g, "LIT101", "P102", EdgeKind::Control);
  g = add_edge(g, "MV101", "FIT101", EdgeKind::Physical);
  return g;
}

// Smallest number of edges whose removal leaves the graph acyclic.
std::size_t min_feedback_arc_set(const CausalGraph& g) {
  const auto edges = g.edges();
  for (std::size_t k = 0; k <= edges.size(); ++k) {
    std::vector<bool> pick(edges.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(k), true);
    std::sort(pick.begin(), pick.end());
    do {
      auto h = g;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (pick[e]) h.remove_edge(h.index_of(edges[e].src), h.index_of(edges[e].dst));
      }
      if (is_dag(h)) return k;
    } while (std::next_permutation(pick.begin(), pick.end()));
  }
  return edges.size();
}

}  // namespace

TEST(AddEdge, Stage1ControlEdge) {
  const auto g = add_edge(CausalGraph({"LIT101", "MV101"}), "LIT101", "MV101", EdgeKind::Control);
  ASSERT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(g.has_arc(g.index_of("LIT101"), g.index_of("MV101")));
  EXPECT_EQ(*g.kind_of(0, 1), EdgeKind::Control);
}

TEST(AddEdge, Errors) {
  const CausalGraph g({"A", "B"});
  EXPECT_EQ(code_of([&] { add_edge(g, "A", "A", EdgeKind::Learnt); }), ErrorCode::SelfLoop);
  EXPECT_EQ(code_of([&] { add_edge(g, "A", "C", EdgeKind::Learnt); }), ErrorCode::UnknownNode);
  const auto once = add_edge(g, "A", "B", EdgeKind::Learnt);
  EXPECT_EQ(code_of([&] { add_edge(once, "A", "B", EdgeKind::Physical); }),
            ErrorCode::DuplicateEdge);
  // the input graph is left alone
  EXPECT_EQ(g.num_edges(), 0u);
}

TEST(TopologicalOrder, Chain) {
  const auto g = graph({"x6", "x1", "x3"}, {{"x1", "x3"}, {"x3", "x6"}});
  EXPECT_TRUE(is_dag(g));
  EXPECT_EQ(topological_order(g), (std::vector<std::string>{"x1", "x3", "x6"}));
}

TEST(TopologicalOrder, CycleAndTies) {
  const auto cyc = graph({"A", "B"}, {{"A", "B"}, {"B", "A"}});
  EXPECT_FALSE(is_dag(cyc));
  EXPECT_EQ(code_of([&] { topological_order(cyc); }), ErrorCode::CyclicGraph);
  EXPECT_EQ(topological_order(CausalGraph({"B", "A"})), (std::vector<std::string>{"A", "B"}));
}

TEST(Structures, ColliderForkChain) {
  const auto g = graph({"x1", "x2", "x4", "x5"}, {{"x1", "x4"}, {"x2", "x4"}, {"x2", "x5"}});
  const auto s = structures(g);
  ASSERT_EQ(s.colliders.size(), 1u);
  EXPECT_EQ(s.colliders[0], (Junction{"x4", "x1", "x2"}));
  ASSERT_EQ(s.forks.size(), 1u);
  EXPECT_EQ(s.forks[0], (Junction{"x2", "x4", "x5"}));
  EXPECT_TRUE(s.chains.empty());

  const auto single = structures(graph({"A", "B"}, {{"A", "B"}}));
  EXPECT_TRUE(single.chains.empty() && single.forks.empty() && single.colliders.empty());

  const auto chain = structures(graph({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}));
  ASSERT_EQ(chain.chains.size(), 1u);
  EXPECT_EQ(chain.chains[0], (Chain{"A", "B", "C"}));
}

TEST(DSeparation, PaperExamples) {
  const auto chain = graph({"x1", "x3", "x6"}, {{"x1", "x3"}, {"x3", "x6"}});
  EXPECT_TRUE(d_separated(chain, "x1", "x6", {"x3"}));
  EXPECT_FALSE(d_separated(chain, "x1", "x6", {}));

  const auto collider = graph({"x1", "x2", "x4"}, {{"x1", "x4"}, {"x2", "x4"}});
  EXPECT_TRUE(d_separated(collider, "x1", "x2", {}));
  EXPECT_FALSE(d_separated(collider, "x1", "x2", {"x4"}));

  EXPECT_TRUE(d_separated(CausalGraph({"A", "B"}), "A", "B", {}));
}

TEST(DSeparation, DescendantOfColliderOpensPath) {
  const auto g = graph({"A", "B", "C", "D"}, {{"A", "C"}, {"B", "C"}, {"C", "D"}});
  EXPECT_FALSE(d_separated(g, "A", "B", {"D"}));
  EXPECT_EQ(code_of([&] { d_separated(g, "A", "E", {}); }), ErrorCode::UnknownNode);
  EXPECT_EQ(code_of([&] { d_separated(graph({"A", "B"}, {{"A", "B"}, {"B", "A"}}), "A", "B", {}); }),
            ErrorCode::CyclicGraph);
}

TEST(DSeparation, AgreesWithPathOracleOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = testsupport::random_dag(rng, 7, 0.35);
    std::bernoulli_distribution coin(0.3);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = i + 1; j < 7; ++j) {
        std::vector<std::size_t> z;
        for (std::size_t k = 0; k < 7; ++k) {
          if (k != i && k != j && coin(rng)) z.push_back(k);
        }
        EXPECT_EQ(d_separated(g, i, j, z), testsupport::dsep_oracle(g, i, j, z));
      }
    }
  }
}

TEST(MarkovEquivalence, ChainForkCollider) {
  const auto chain = graph({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
  const auto fork = graph({"A", "B", "C"}, {{"B", "A"}, {"B", "C"}});
  const auto collider = graph({"A", "B", "C"}, {{"A", "B"}, {"C", "B"}});
  EXPECT_TRUE(markov_equivalent(chain, fork));
  EXPECT_FALSE(markov_equivalent(chain, collider));
  EXPECT_TRUE(markov_equivalent(chain, chain));
  EXPECT_EQ(code_of([&] { markov_equivalent(chain, CausalGraph({"A", "B"})); }),
            ErrorCode::NodeSetMismatch);
}

// Markov equivalence must coincide with "same d-separation statements".
TEST(MarkovEquivalence, MatchesIndependenceEnumeration) {
  std::mt19937_64 rng(5);
  const std::size_t n = 4;
  for (int trial = 0; trial < 200; ++trial) {
    auto a = testsupport::random_dag(rng, n, 0.5);
    auto b = testsupport::random_dag(rng, n, 0.5);
    // put b on a's node order
    CausalGraph b2(a.nodes());
    for (const auto& e : b.edges()) b2.insert_edge(e.src, e.dst, e.kind);
    bool same = true;
    for (std::size_t i = 0; i < n && same; ++i) {
      for (std::size_t j = i + 1; j < n && same; ++j) {
        std::vector<std::size_t> rest;
        for (std::size_t k = 0; k < n; ++k) {
          if (k != i && k != j) rest.push_back(k);
        }
        for (unsigned mask = 0; mask < (1u << rest.size()) && same; ++mask) {
          std::vector<std::size_t> z;
          for (std::size_t k = 0; k < rest.size(); ++k) {
            if (mask & (1u << k)) z.push_back(rest[k]);
          }
          same = testsupport::dsep_oracle(a, i, j, z) == testsupport::dsep_oracle(b2, i, j, z);
        }
      }
    }
    EXPECT_EQ(markov_equivalent(a, b2), same);
  }
}

TEST(Compare, Basics) {
  const auto g = stage1_domain();
  const auto self = compare(g, g);
  EXPECT_EQ(self.common.size(), 4u);
  EXPECT_TRUE(self.reversed.empty() && self.only_left.empty() && self.only_right.empty());

  const auto ab = graph({"A", "B"}, {{"A", "B"}});
  const auto ba = graph({"A", "B"}, {{"B", "A"}});
  EXPECT_EQ(compare(ab, ba).reversed, (std::vector<NamePair>{{"A", "B"}}));
  EXPECT_EQ(compare(ba, ab).reversed, (std::vector<NamePair>{{"A", "B"}}));
  EXPECT_EQ(code_of([&] { compare(ab, CausalGraph({"A", "C"})); }), ErrorCode::NodeSetMismatch);
}

TEST(Compare, DomainVersusLearnt) {
  auto learnt = CausalGraph({"FIT101", "LIT101", "MV101", "P101", "P102"});
  learnt.insert_edge("LIT101", "P101", EdgeKind::Learnt);
  learnt.insert_edge("LIT101", "MV101", EdgeKind::Learnt);
  learnt.insert_edge("MV101", "FIT101", EdgeKind::Learnt);
  learnt.insert_edge("P101", "P102", EdgeKind::Learnt);
  const auto diff = compare(stage1_domain(), learnt);
  EXPECT_EQ(diff.common, (std::vector<NamePair>{{"LIT101", "MV101"}, {"LIT101", "P101"},
                                                {"MV101", "FIT101"}}));
  EXPECT_EQ(diff.only_left, (std::vector<NamePair>{{"LIT101", "P102"}}));
  EXPECT_EQ(diff.only_right, (std::vector<NamePair>{{"P101", "P102"}}));
}

TEST(Compare, UndirectedMatchesEitherOrientation) {
  auto cpdag = CausalGraph({"A", "B"});
  cpdag.insert_edge("B", "A", EdgeKind::Learnt, false);
  const auto diff = compare(graph({"A", "B"}, {{"A", "B"}}), cpdag);
  EXPECT_EQ(diff.common.size(), 1u);
  EXPECT_TRUE(diff.reversed.empty());
}

TEST(BreakCycles, ExplicitRemoval) {
  const auto g = graph({"AIT201", "AIT202", "FIT201"},
                       {{"AIT201", "FIT201"}, {"FIT201", "AIT202"}, {"AIT202", "AIT201"}});
  const auto fixed = break_cycles(g, {{"AIT202", "AIT201"}});
  EXPECT_TRUE(is_dag(fixed.graph));
  EXPECT_EQ(fixed.removed, (std::vector<NamePair>{{"AIT202", "AIT201"}}));
  EXPECT_EQ(code_of([&] { break_cycles(g, {}); }), ErrorCode::StillCyclic);

  const auto dag = graph({"A", "B"}, {{"A", "B"}});
  const auto same = break_cycles(dag);
  EXPECT_EQ(same.graph, dag);
  EXPECT_TRUE(same.removed.empty());
}

TEST(BreakCycles, HeuristicOnThreeCycle) {
  const auto g = graph({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"C", "A"}});
  const auto fixed = break_cycles(g);
  EXPECT_TRUE(is_dag(fixed.graph));
  EXPECT_EQ(fixed.removed.size(), min_feedback_arc_set(g));
  EXPECT_EQ(fixed.removed.size(), 1u);
}

TEST(BreakCycles, HeuristicPrefersLearntEdges) {
  CausalGraph g({"A", "B", "C"});
  g.insert_edge("A", "B", EdgeKind::Control);
  g.insert_edge("B", "C", EdgeKind::Physical);
  g.insert_edge("C", "A", EdgeKind::Learnt);
  EXPECT_EQ(break_cycles(g).removed, (std::vector<NamePair>{{"C", "A"}}));
}

TEST(BreakCycles, HeuristicAgainstExhaustiveMinimum) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.3);
  int exact = 0, total = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 4 + trial % 3;
    CausalGraph g(testsupport::node_names(n));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (a != b && !g.has_edge(b, a) && coin(rng)) g.insert_edge(a, b, EdgeKind::Learnt);
      }
    }
    if (is_dag(g)) continue;
    const auto fixed = break_cycles(g);
    EXPECT_TRUE(is_dag(fixed.graph));
    const auto best = min_feedback_arc_set(g);
    EXPECT_GE(fixed.removed.size(), best);
    exact += fixed.removed.size() == best;
    ++total;
  }
  // Greedy is not optimal in general but should be on most small graphs.
  EXPECT_GE(exact * 10, total * 7);
}

TEST(ToDot, StylesEncodeEdgeKind) {
  const auto dot = to_dot(stage1_domain());
  EXPECT_NE(dot.find("\"LIT101\" -> \"MV101\" [style=dashed]"), std::string::npos);
  EXPECT_NE(dot.find("\"MV101\" -> \"FIT101\" [style=solid]"), std::string::npos);
}
