#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

#include "reuseplan/error.hpp"
#include "reuseplan/figures.hpp"
#include "reuseplan/partitioners.hpp"
#include "test_support.hpp"

using namespace reuseplan;
using testing_support::prefix_count;
using testing_support::random_population;
using testing_support::set_partitions;

namespace {

std::uint64_t brute_min_cut(const WeightedGraph& g) {
  const std::size_t n = g.size();
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t mask = 1; mask + 1 < (1ULL << n); ++mask) {
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (((mask >> i) & 1) != ((mask >> j) & 1)) value += g.weight(i, j);
      }
    }
    best = std::min(best, value);
  }
  return best;
}

std::uint64_t cut_value(const WeightedGraph& g, const Cut& c) {
  std::uint64_t v = 0;
  for (auto i : c.smaller)
    for (auto j : c.larger) v += g.weight(i, j);
  return v;
}

}  // namespace

TEST(Naive, GroupsInPopulationOrder) {
  const auto pop = figures::fig9();
  const auto buckets = naive_buckets(pop, 5);
  ASSERT_EQ(buckets.size(), 3u);
  EXPECT_EQ(buckets[0].members, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(buckets[2].members, (std::vector<std::size_t>{10, 11}));
  EXPECT_TRUE(is_partition(buckets, pop->size()));
  EXPECT_THROW(naive_buckets(pop, 0), Error);
}

TEST(MinCut, MatchesBruteForce) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    WeightedGraph g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) g.set_weight(i, j, rng.below(5));
    const auto cut = min_cut_2(g);
    ASSERT_EQ(cut.value, brute_min_cut(g));
    EXPECT_EQ(cut_value(g, cut), cut.value);
    EXPECT_EQ(cut.smaller.size() + cut.larger.size(), n);
    EXPECT_FALSE(cut.smaller.empty());
    EXPECT_LE(cut.smaller.size(), cut.larger.size());
    EXPECT_TRUE(std::is_sorted(cut.smaller.begin(), cut.smaller.end()));
  }
  EXPECT_THROW(min_cut_2(WeightedGraph(1)), Error);
}

TEST(MinCut, ReuseDegreeWeights) {
  const auto pop = figures::fig9();
  const std::vector<std::size_t> members{0, 1, 3, 7};
  const auto g = reuse_degree_graph(*pop, members);
  EXPECT_EQ(g.weight(0, 1), 2u);  // a, b share n1/n5
  EXPECT_EQ(g.weight(0, 2), 0u);
  EXPECT_EQ(g.weight(2, 3), 1u);  // d, h share n2
  const auto cut = min_cut_2(g);
  EXPECT_EQ(cut.value, 0u);
  EXPECT_EQ(cut.smaller, (std::vector<std::size_t>{0, 1}));
}

TEST(Sca, ProducesValidBoundedBuckets) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const auto pop = random_population(rng, 1 + rng.below(25), 1 + rng.below(5));
    const std::size_t b = 1 + rng.below(6);
    const auto buckets = sca_buckets(pop, b);
    ASSERT_TRUE(is_partition(buckets, pop->size()));
    for (const auto& bucket : buckets) {
      EXPECT_LE(bucket.size(), b);
      EXPECT_FALSE(bucket.members.empty());
      EXPECT_EQ(bucket.task_cost(), prefix_count(*pop, bucket.members));
    }
  }
}

TEST(Sca, KeepsSubtreesTogether) {
  const auto buckets = sca_buckets(figures::fig9(), 3);
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& b : buckets) {
    auto m = b.members;
    std::sort(m.begin(), m.end());
    sets.push_back(m);
  }
  EXPECT_NE(std::find(sets.begin(), sets.end(), std::vector<std::size_t>{0, 1, 2}), sets.end());
}

TEST(Oracle, BlockCostMatchesPrefixCount) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pop = random_population(rng, 1 + rng.below(10), 1 + rng.below(4));
    const auto all = testing_support::all_members(*pop);
    EXPECT_EQ(oracle_block_cost(*pop, all), prefix_count(*pop, all));
  }
}

TEST(Oracle, AgreesWithEnumeration) {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(7);
    const auto pop = random_population(rng, n, 1 + rng.below(4));
    const std::size_t b = 1 + rng.below(n);
    const std::size_t mb = 1 + rng.below(n);
    std::size_t best_total = std::numeric_limits<std::size_t>::max();
    std::size_t best_span = std::numeric_limits<std::size_t>::max();
    for (const auto& p : set_partitions(n)) {
      std::size_t total = 0;
      std::size_t span = 0;
      bool fits = true;
      for (const auto& block : p) {
        const auto c = prefix_count(*pop, block);
        total += c;
        span = std::max(span, c);
        fits = fits && block.size() <= b;
      }
      if (fits) best_total = std::min(best_total, total);
      if (p.size() <= mb) best_span = std::min(best_span, span);
    }
    const auto total = oracle_min_total_cost(*pop, b);
    const auto span = oracle_min_makespan(*pop, mb);
    ASSERT_EQ(total.objective, best_total);
    ASSERT_EQ(span.objective, best_span);
    EXPECT_LE(span.blocks.size(), mb);
    for (const auto& block : total.blocks) EXPECT_LE(block.size(), b);
  }
}

TEST(Oracle, RejectsLargeInputs) {
  Rng rng(1);
  const auto pop = random_population(rng, kOracleLimit + 1, 2);
  EXPECT_THROW(oracle_min_total_cost(*pop, 2), Error);
  EXPECT_THROW(oracle_min_makespan(*pop, 2), Error);
}
