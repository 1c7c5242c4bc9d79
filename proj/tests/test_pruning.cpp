#include <gtest/gtest.h>

#include <algorithm>

#include "logsynth/pruning.hpp"
#include "logsynth/text.hpp"
#include "oracles.hpp"

using namespace logsynth;

namespace {

std::vector<MethodId> random_subset(Rng& rng, std::size_t n, double rate) {
  std::vector<MethodId> out;
  for (MethodId m = 0; m < n; ++m) {
    if (uniform_unit(rng) < rate) out.push_back(m);
  }
  return out;
}

void check_against_oracle(const CallGraph& cg, const oracle::EdgeList& edges, const std::vector<MethodId>& logs,
                          const PrunedCallGraph& p) {
  const std::size_t n = cg.size();
  const auto reach = oracle::reaches_any(n, edges, logs);
  const std::set<MethodId> log_set(logs.begin(), logs.end());
  for (MethodId m = 0; m < n; ++m) {
    ASSERT_EQ(p.kept(m), reach[m]) << "node " << m;
    if (log_set.count(m)) {
      EXPECT_EQ(p.classification[m], NodeClass::kLogMethod);
    } else if (reach[m]) {
      EXPECT_EQ(p.classification[m], NodeClass::kLogInducing);
    } else {
      EXPECT_EQ(p.classification[m], NodeClass::kPruned);
      EXPECT_TRUE(p.successors[m].empty());
    }
  }
  std::vector<std::uint32_t> in(n, 0);
  for (MethodId m = 0; m < n; ++m) {
    for (auto s : p.successors[m]) {
      EXPECT_TRUE(p.kept(m) && p.kept(s));
      EXPECT_TRUE(std::binary_search(cg.successors[m].begin(), cg.successors[m].end(), s));
      ++in[s];
    }
    if (p.kept(m)) {
      for (auto s : cg.successors[m]) {
        if (p.kept(s)) {
          EXPECT_TRUE(std::count(p.successors[m].begin(), p.successors[m].end(), s));
        }
      }
    }
  }
  EXPECT_EQ(p.in_degree, in);
}

}  // namespace

TEST(Prune, Datanode) {
  Analysis a;
  oracle::analyze_text(read_file(oracle::fixture("datanode.ml")), a);
  const auto& c = a.pruned.classification;
  EXPECT_EQ(c[0], NodeClass::kLogMethod);
  EXPECT_EQ(c[1], NodeClass::kLogMethod);
  EXPECT_EQ(c[2], NodeClass::kLogInducing);
  EXPECT_EQ(c[3], NodeClass::kLogMethod);
  EXPECT_EQ(a.pruned.kept_count(), 4u);
  EXPECT_EQ(to_string(NodeClass::kLogInducing), "LOG_INDUCING");
}

TEST(Prune, NoLogMethodsKeepsNothing) {
  const CallGraph cg = CallGraph::from_edges(3, std::vector<std::pair<MethodId, MethodId>>{{0, 1}, {1, 2}});
  const PrunedCallGraph p = prune(cg, {});
  EXPECT_EQ(p.kept_count(), 0u);
  EXPECT_TRUE(p.kept_methods().empty());
}

TEST(Prune, CyclesAreKeptWhole) {
  // 0 <-> 1 -> 2 (log), 3 <-> 4 isolated.
  const oracle::EdgeList edges{{0, 1}, {1, 0}, {1, 2}, {3, 4}, {4, 3}};
  const CallGraph cg = CallGraph::from_edges(5, edges);
  const PrunedCallGraph p = prune(cg, std::vector<MethodId>{2});
  EXPECT_EQ(p.kept_methods(), (std::vector<MethodId>{0, 1, 2}));
  EXPECT_EQ(p.successors[0], std::vector<MethodId>{1});
  EXPECT_EQ(p.successors[1], (std::vector<MethodId>{0, 2}));
}

TEST(Prune, MatchesReachabilityOracle) {
  Rng rng = make_rng(11, 0);
  for (int round = 0; round < 40; ++round) {
    const std::size_t n = 1 + uniform_below(rng, 500);
    const auto edges = oracle::random_graph(rng, n, uniform_below(rng, 2 * n + 1));
    const auto logs = random_subset(rng, n, 0.05);
    const CallGraph cg = CallGraph::from_edges(n, edges);
    check_against_oracle(cg, edges, logs, prune(cg, logs));
    if (HasFatalFailure()) return;
  }
}

TEST(Prune, AddingLogMethodNeverShrinks) {
  Rng rng = make_rng(12, 0);
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 2 + uniform_below(rng, 300);
    const auto edges = oracle::random_graph(rng, n, uniform_below(rng, 2 * n));
    auto logs = random_subset(rng, n, 0.03);
    const CallGraph cg = CallGraph::from_edges(n, edges);
    const auto before = prune(cg, logs).kept_methods();
    logs.push_back(static_cast<MethodId>(uniform_below(rng, n)));
    std::sort(logs.begin(), logs.end());
    logs.erase(std::unique(logs.begin(), logs.end()), logs.end());
    const auto after = prune(cg, logs).kept_methods();
    EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()));
  }
}

TEST(Prune, Idempotent) {
  Rng rng = make_rng(13, 0);
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 1 + uniform_below(rng, 300);
    const auto edges = oracle::random_graph(rng, n, uniform_below(rng, 2 * n + 1));
    const auto logs = random_subset(rng, n, 0.05);
    const CallGraph cg = CallGraph::from_edges(n, edges);
    const PrunedCallGraph once = prune(cg, logs);

    oracle::EdgeList induced;
    for (MethodId m = 0; m < n; ++m) {
      for (auto s : once.successors[m]) induced.emplace_back(m, s);
    }
    const CallGraph sub = CallGraph::from_edges(n, induced);
    const PrunedCallGraph twice = prune(sub, logs);
    EXPECT_EQ(twice.kept_methods(), once.kept_methods());
    EXPECT_EQ(twice.classification, once.classification);
  }
}
