#include <gtest/gtest.h>

#include <random>

#include "cpscausal/error.hpp"
#include "cpscausal/simgen.hpp"
#include "cpscausal/structure_learning.hpp"
#include "test_support.hpp"

using namespace cpscausal;
using testsupport::make_dataset;
using testsupport::skeleton;

namespace {

using Skel = std::set<std::pair<std::string, std::string>>;

DiscreteDataset independent_columns(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<int>> rows;
  for (std::size_t r = 0; r < n; ++r) rows.push_back({coin(rng), coin(rng), coin(rng)});
  return make_dataset({"A", "B", "C"}, {2, 2, 2}, rows);
}

// Noisy OR of A and B observed through C.
BayesNet noisy_or_collider() {
  auto net = fixture("collider3").net;
  net.cpts[net.index_of("C")].table = {0.95, 0.05, 0.2, 0.8, 0.2, 0.8, 0.04, 0.96};
  return net;
}

}  // namespace

TEST(LearnPc, ColliderRecovered) {
  const auto ds = forward_sample(noisy_or_collider(), 20000, 1);
  const auto res = learn_pc(ds);
  EXPECT_EQ(skeleton(res.graph), (Skel{{"A", "C"}, {"B", "C"}}));
  EXPECT_TRUE(res.graph.has_arc(res.graph.index_of("A"), res.graph.index_of("C")));
  EXPECT_TRUE(res.graph.has_arc(res.graph.index_of("B"), res.graph.index_of("C")));
  EXPECT_EQ(res.sepsets.at({"A", "B"}), std::vector<std::string>{});
}

TEST(LearnPc, IndependentColumnsGiveEmptyGraph) {
  EXPECT_EQ(learn_pc(independent_columns(5000, 3)).graph.num_edges(), 0u);
}

TEST(LearnPc, ChainStaysUndirected) {
  const auto ds = forward_sample(fixture("chain3").net, 20000, 2);
  const auto res = learn_pc(ds);
  EXPECT_EQ(skeleton(res.graph), (Skel{{"A", "B"}, {"B", "C"}}));
  EXPECT_TRUE(res.graph.has_undirected(0, 1));
  EXPECT_TRUE(res.graph.has_undirected(1, 2));
  EXPECT_EQ(res.sepsets.at({"A", "C"}), std::vector<std::string>{"B"});
}

TEST(LearnPc, SkeletonInvariantUnderColumnPermutation) {
  const auto ds = forward_sample(fixture("stage1").net, 20000, 5);
  const auto base = learn_pc(ds).graph;
  auto names = ds.names();
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    std::shuffle(names.begin(), names.end(), rng);
    const auto permuted = learn_pc(project(ds, names)).graph;
    EXPECT_EQ(skeleton(permuted), skeleton(base));
    EXPECT_EQ(permuted.edges(), base.edges());
  }
}

TEST(LearnPc, Deterministic) {
  const auto ds = forward_sample(fixture("stage1").net, 5000, 6);
  EXPECT_EQ(learn_pc(ds).graph, learn_pc(ds).graph);
}

TEST(ExtendToDag, Cases) {
  CausalGraph directed({"A", "B", "C"});
  directed.insert_edge("A", "B", EdgeKind::Learnt);
  EXPECT_EQ(extend_to_dag(directed), directed);

  CausalGraph single({"A", "B"});
  single.insert_edge("A", "B", EdgeKind::Learnt, false);
  const auto ext = extend_to_dag(single);
  EXPECT_TRUE(ext.has_arc(0, 1));
  EXPECT_TRUE(is_dag(ext));
}

TEST(ExtendToDag, ChainExtensionAddsNoVStructure) {
  CausalGraph pdag({"A", "B", "C"});
  pdag.insert_edge("A", "B", EdgeKind::Learnt, false);
  pdag.insert_edge("B", "C", EdgeKind::Learnt, false);
  const auto ext = extend_to_dag(pdag);
  ASSERT_TRUE(is_dag(ext));
  EXPECT_EQ(skeleton(ext), skeleton(pdag));
  // The consistent extensions are exactly the orientations Markov-equivalent to A->B->C.
  CausalGraph chain({"A", "B", "C"});
  chain.insert_edge("A", "B", EdgeKind::Learnt);
  chain.insert_edge("B", "C", EdgeKind::Learnt);
  int consistent = 0;
  for (int mask = 0; mask < 4; ++mask) {
    CausalGraph cand({"A", "B", "C"});
    mask & 1 ? cand.insert_edge("B", "A", EdgeKind::Learnt) : cand.insert_edge("A", "B", EdgeKind::Learnt);
    mask & 2 ? cand.insert_edge("C", "B", EdgeKind::Learnt) : cand.insert_edge("B", "C", EdgeKind::Learnt);
    if (markov_equivalent(cand, chain)) {
      ++consistent;
      if (cand.edges() == ext.edges()) EXPECT_TRUE(v_structures(ext).empty());
    }
  }
  EXPECT_EQ(consistent, 3);
  EXPECT_TRUE(markov_equivalent(ext, chain));
}

TEST(ExtendToDag, NoConsistentExtension) {
  // A - B - C - D - A cycle of undirected edges has no extension without a new v-structure
  CausalGraph pdag({"A", "B", "C", "D"});
  pdag.insert_edge("A", "B", EdgeKind::Learnt, false);
  pdag.insert_edge("B", "C", EdgeKind::Learnt, false);
  pdag.insert_edge("C", "D", EdgeKind::Learnt, false);
  pdag.insert_edge("D", "A", EdgeKind::Learnt, false);
  try {
    extend_to_dag(pdag);
    FAIL() << "expected NoConsistentExtension";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConsistentExtension);
  }
}

TEST(LearnHc, IndependentColumnsGiveEmptyGraph) {
  const auto ds = independent_columns(10000, 12);
  const auto res = learn_hc(ds);
  EXPECT_EQ(res.graph.num_edges(), 0u);
  // every single-edge graph scores lower than the empty graph
  const double empty = score(ds, CausalGraph(ds.names()), {});
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == b) continue;
      CausalGraph g(ds.names());
      g.insert_edge(a, b, EdgeKind::Learnt);
      EXPECT_LT(score(ds, g, {}), empty);
    }
  }
}

TEST(LearnHc, StrongPairGetsOneEdge) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5), agree(0.95);
  std::vector<std::vector<int>> rows;
  for (int r = 0; r < 5000; ++r) {
    const int a = coin(rng);
    rows.push_back({a, agree(rng) ? a : 1 - a});
  }
  const auto ds = make_dataset({"A", "B"}, {2, 2}, rows);
  const auto res = learn_hc(ds);
  ASSERT_EQ(res.graph.num_edges(), 1u);

  // exhaustive check over the three two-node graphs
  CausalGraph ab(ds.names()), ba(ds.names());
  ab.insert_edge("A", "B", EdgeKind::Learnt);
  ba.insert_edge("B", "A", EdgeKind::Learnt);
  const double s_empty = score(ds, CausalGraph(ds.names()), {});
  const double s_ab = score(ds, ab, {}), s_ba = score(ds, ba, {});
  EXPECT_NEAR(s_ab, s_ba, 1e-9);
  EXPECT_GT(s_ab, s_empty);
  EXPECT_NEAR(score(ds, res.graph, {}), s_ab, 1e-9);
}

TEST(LearnHc, TraceStrictlyIncreasesAndIsDeterministic) {
  const auto ds = forward_sample(fixture("stage1").net, 5000, 9);
  for (auto method : {ScoreMethod::Bic, ScoreMethod::K2, ScoreMethod::Bdeu}) {
    HcConfig cfg;
    cfg.score = {method, 1.0};
    const auto res = learn_hc(ds, cfg);
    ASSERT_FALSE(res.trace.empty());
    EXPECT_NEAR(res.trace.front(), score(ds, CausalGraph(ds.names()), cfg.score), 1e-9);
    for (std::size_t k = 1; k < res.trace.size(); ++k) EXPECT_GT(res.trace[k], res.trace[k - 1]);
    EXPECT_NEAR(res.trace.back(), score(ds, res.graph, cfg.score), 1e-9);
    EXPECT_TRUE(is_dag(res.graph));
    EXPECT_EQ(learn_hc(ds, cfg).graph, res.graph);
  }
}

TEST(LearnHc, MaxParentsRespected) {
  const auto ds = forward_sample(fixture("collider3").net, 5000, 10);
  HcConfig cfg;
  cfg.max_parents = 1;
  const auto g = learn_hc(ds, cfg).graph;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) EXPECT_LE(g.parents(v).size(), 1u);
}

TEST(LearnCl, CopyVariableJoinsItsSource) {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<int>> rows;
  for (int r = 0; r < 2000; ++r) {
    const int a = coin(rng);
    rows.push_back({a, coin(rng), a});
  }
  const auto ds = make_dataset({"A", "B", "C"}, {2, 2, 2}, rows);
  const auto g = learn_cl(ds, {"A"});
  EXPECT_TRUE(g.has_arc(0, 2));

  // all three spanning trees, by hand
  const double ab = mutual_information(ds, 0, 1), ac = mutual_information(ds, 0, 2),
               bc = mutual_information(ds, 1, 2);
  EXPECT_GT(ab + ac, ab + bc);
  EXPECT_GT(ac + bc, ab + bc);
  EXPECT_EQ(g.num_edges(), 2u);
}

TEST(LearnCl, TreeShape) {
  const auto ds = forward_sample(fixture("stage1").net, 3000, 3);
  const auto g = learn_cl(ds, {"LIT101"});
  EXPECT_EQ(g.num_edges(), ds.num_variables() - 1);
  for (std::size_t v = 0; v < g.num_nodes(); ++v) {
    EXPECT_EQ(g.parents(v).size(), g.name(v) == "LIT101" ? 0u : 1u);
  }
}

TEST(LearnCl, Stage6RootedAtPump) {
  const auto ds = forward_sample(fixture("stage6").net, 3000, 3);
  const auto g = learn_cl(ds, {"P602"});
  ASSERT_EQ(g.num_edges(), 1u);
  EXPECT_TRUE(g.has_arc(g.index_of("P602"), g.index_of("FIT601")));
}

TEST(LearnCl, MatchesExhaustiveSpanningTrees) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = testsupport::random_net(rng, 6, 3, 0.5);
    const auto ds = forward_sample(net, 500, static_cast<std::uint64_t>(trial));
    const auto n = ds.num_variables();
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) w[a][b] = w[b][a] = mutual_information(ds, a, b);
    }
    const auto g = learn_cl(ds, {ds.names().front()});
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& e : g.edges()) edges.emplace_back(ds.index_of(e.src), ds.index_of(e.dst));
    EXPECT_EQ(testsupport::tree_weight(edges, w), testsupport::brute_force_max_spanning_tree(w));
  }
}

TEST(LearnCl, UnknownRoot) {
  const auto ds = forward_sample(fixture("stage6").net, 100, 3);
  EXPECT_THROW(learn_cl(ds, {"LIT101"}), Error);
}
