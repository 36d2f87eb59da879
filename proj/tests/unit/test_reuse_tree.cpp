#include <gtest/gtest.h>

#include <algorithm>

#include "reuseplan/error.hpp"
#include "reuseplan/figures.hpp"
#include "reuseplan/reuse_tree.hpp"
#include "test_support.hpp"

using namespace reuseplan;
using testing_support::all_members;
using testing_support::prefix_count;

TEST(ReuseTree, InsertionReusesTheSharedPrefix) {
  const auto before = generate_reuse_tree(figures::fig8(false));
  EXPECT_EQ(before.task_cost(), 9u);
  const auto pop = figures::fig8(true);
  ReuseTree tree(pop);
  for (std::size_t i = 0; i < 4; ++i) tree.insert(i);
  const auto depth1 = tree.find_path(std::vector<std::string_view>{"p1=8"});
  ASSERT_TRUE(depth1.has_value());
  tree.insert(4);
  EXPECT_EQ(tree.task_cost(), 11u);
  const auto leaf = tree.leaf_of(4);
  EXPECT_EQ(tree.node(tree.node(leaf).parent).parent, *depth1);
}

TEST(ReuseTree, CostMatchesPrefixOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pop = testing_support::random_population(rng, 1 + rng.below(30), 1 + rng.below(6), 2 + rng.below(2));
    const auto tree = generate_reuse_tree(pop);
    EXPECT_EQ(tree.task_cost(), prefix_count(*pop, all_members(*pop)));
    EXPECT_EQ(tree.stage_count(), pop->size());
    const auto n = static_cast<double>(pop->size() * pop->task_count());
    EXPECT_NEAR(max_fine_grain_reuse(pop), 1.0 - static_cast<double>(tree.task_cost()) / n, 1e-12);
  }
}

TEST(ReuseTree, RemovePrunesBackToTheOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pop = testing_support::random_population(rng, 2 + rng.below(20), 1 + rng.below(5));
    ReuseTree tree = generate_reuse_tree(pop);
    auto left = all_members(*pop);
    std::vector<std::size_t> order = left;
    rng.shuffle(order.begin(), order.end());
    for (auto m : order) {
      tree.remove(m);
      left.erase(std::find(left.begin(), left.end(), m));
      ASSERT_EQ(tree.task_cost(), prefix_count(*pop, left));
      EXPECT_FALSE(tree.contains(m));
    }
    EXPECT_TRUE(tree.empty());
    EXPECT_EQ(tree.task_cost(), 0u);
    EXPECT_TRUE(tree.live_nodes().empty());
  }
}

TEST(ReuseTree, ProjectionsMatchOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pop = testing_support::random_population(rng, 4 + rng.below(16), 1 + rng.below(4));
    std::vector<std::size_t> a_members;
    std::vector<std::size_t> b_members;
    for (std::size_t i = 0; i < pop->size(); ++i) (rng.below(2) ? a_members : b_members).push_back(i);
    const ReuseTree a(pop, a_members);
    const ReuseTree b(pop, b_members);
    for (auto v : a.live_nodes()) {
      const auto moved = a.stages_under(v);
      std::vector<std::size_t> rest;
      for (auto m : a_members) {
        if (std::find(moved.begin(), moved.end(), m) == moved.end()) rest.push_back(m);
      }
      auto joined = b_members;
      joined.insert(joined.end(), moved.begin(), moved.end());
      ASSERT_EQ(a.cost_without(v), prefix_count(*pop, rest));
      ASSERT_EQ(b.cost_with(a, v), prefix_count(*pop, joined));
    }
  }
}

TEST(ReuseTree, MembersAndPaths) {
  const auto pop = figures::fig9();
  const auto tree = generate_reuse_tree(pop);
  EXPECT_EQ(tree.members().size(), 12u);
  const auto n6 = tree.find_path(std::vector<std::string_view>{"n2", "n6"});
  ASSERT_TRUE(n6.has_value());
  EXPECT_EQ(tree.stages_under(*n6).size(), 4u);
  EXPECT_EQ(tree.path_keys(*n6), (std::vector<std::string_view>{"n2", "n6"}));
  EXPECT_FALSE(tree.find_path(std::vector<std::string_view>{"n2", "n9"}).has_value());
}

TEST(ReuseTree, DumpFormat) {
  const auto tree = generate_reuse_tree(figures::fig10());
  EXPECT_EQ(tree.dump(),
            "root cost=5 stages=3\n"
            "  n1\n"
            "    n4 : s1\n"
            "    n5 : s2\n"
            "  n2\n"
            "    n3 : s3\n");
}

TEST(ReuseDegree, LongestCommonPrefix) {
  StageEntry a{"a", {"x", "y", "z"}};
  StageEntry b{"b", {"x", "y", "w"}};
  StageEntry c{"c", {"q", "y", "z"}};
  EXPECT_EQ(reuse_degree(a, b), 2u);
  EXPECT_EQ(reuse_degree(a, c), 0u);
  EXPECT_EQ(reuse_degree(a, a), 3u);
  StageEntry short_one{"s", {"x"}};
  EXPECT_THROW(reuse_degree(a, short_one), Error);
}

TEST(LevelPopulation, RejectsRaggedKeys) {
  std::vector<StageEntry> entries{{"a", {"x", "y"}}, {"b", {"x"}}};
  EXPECT_THROW(make_population(0, "t", 2, entries), Error);
}
