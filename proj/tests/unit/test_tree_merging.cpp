#include <gtest/gtest.h>

#include <algorithm>

#include "reuseplan/error.hpp"
#include "reuseplan/figures.hpp"
#include "reuseplan/partitioners.hpp"
#include "reuseplan/tree_merging.hpp"
#include "test_support.hpp"

using namespace reuseplan;
using testing_support::prefix_count;
using testing_support::random_population;

namespace {

std::vector<std::vector<std::string>> labels(const std::vector<Bucket>& buckets) {
  std::vector<std::vector<std::string>> out;
  for (const auto& b : buckets) {
    std::vector<std::string> l;
    for (auto m : b.members) l.push_back(b.tree.population()->entry(m).label);
    std::sort(l.begin(), l.end());
    out.push_back(l);
  }
  return out;
}

std::vector<Bucket> fixture_buckets(const figures::BalanceFixture& f) {
  std::vector<Bucket> out;
  for (const auto& m : f.buckets) out.emplace_back(f.population, m);
  return out;
}

}  // namespace

TEST(Rtma, CutsSiblingGroupsOfExactlyB) {
  const auto buckets = rtma(figures::fig9(), 3);
  const std::vector<std::vector<std::string>> expected{
      {"a", "b", "c"}, {"d", "e", "f"}, {"g", "h", "i"}, {"j"}, {"k"}, {"l"}};
  EXPECT_EQ(labels(buckets), expected);
}

TEST(Rtma, CoalescedLeftoversStayWithinB) {
  const auto buckets = rtma(figures::fig9(), 3, {.coalesce_leftovers = true});
  EXPECT_TRUE(is_partition(buckets, 12));
  EXPECT_EQ(buckets.size(), 4u);
}

TEST(Rtma, RandomInstancesArePartitions) {
  Rng rng(41);
  for (int trial = 0; trial < 80; ++trial) {
    const auto pop = random_population(rng, 1 + rng.below(40), 1 + rng.below(5), 2 + rng.below(3));
    const std::size_t b = 1 + rng.below(6);
    RtmaTrace trace;
    const auto buckets = rtma(pop, b, {}, &trace);
    ASSERT_TRUE(is_partition(buckets, pop->size()));
    std::size_t emitted = 0;
    for (const auto& it : trace.iterations) {
      for (const auto& e : it.emitted) {
        EXPECT_EQ(e.size(), b);
        ++emitted;
      }
    }
    for (const auto& bucket : buckets) {
      EXPECT_LE(bucket.size(), b);
      EXPECT_EQ(bucket.task_cost(), prefix_count(*pop, bucket.members));
    }
    EXPECT_EQ(buckets.size(), emitted + trace.leftovers.size());
  }
  EXPECT_THROW(rtma(figures::fig9(), 0), Error);
}

TEST(FullMerge, ExpandsUntilEnoughNodes) {
  const auto tree = generate_reuse_tree(figures::fig10());
  const auto merged = full_merge(tree, 3);
  std::vector<std::string_view> keys;
  for (auto v : merged.frontier) keys.push_back(tree.node(v).key);
  EXPECT_EQ(keys, (std::vector<std::string_view>{"n4", "n5", "n2"}));
  EXPECT_EQ(merged.buckets.size(), 3u);
}

TEST(FullMerge, OvershootIsFolded) {
  const auto tree = generate_reuse_tree(figures::fig11());
  auto merged = full_merge(tree, 3);
  EXPECT_EQ(merged.buckets.size(), 4u);
  sort_by_cost(merged.buckets);
  EXPECT_EQ(fold_merge(merged.buckets, 3).size(), 3u);
}

TEST(FoldPlan, PairsFromTheMiddle) {
  const auto ops = fold_plan(6, 4);
  ASSERT_EQ(ops.size(), 2u);
  EXPECT_EQ(ops[0].from, 4u);
  EXPECT_EQ(ops[0].into, 3u);
  EXPECT_EQ(ops[1].from, 5u);
  EXPECT_EQ(ops[1].into, 2u);
  EXPECT_TRUE(fold_plan(3, 4).empty());
}

TEST(FoldPlan, EveryPositionLandsInRange) {
  for (std::size_t mb = 1; mb <= 7; ++mb) {
    for (std::size_t b = mb; b <= 30; ++b) {
      const auto ops = fold_plan(b, mb);
      ASSERT_EQ(ops.size(), b - mb);
      std::vector<bool> seen(b, false);
      for (const auto& op : ops) {
        EXPECT_GE(op.from, mb);
        EXPECT_LT(op.into, mb);
        EXPECT_FALSE(seen[op.from]);
        seen[op.from] = true;
      }
    }
  }
}

TEST(Ledger, OrdersByCostThenInsertion) {
  const auto f = figures::fig12();
  BucketLedger ledger(fixture_buckets(f));
  EXPECT_EQ(ledger.costs(), (std::vector<std::size_t>{9, 8, 5}));
  EXPECT_EQ(ledger.makespan(), 9u);
  ledger.insert(Bucket(f.population, {0, 1, 2}));
  EXPECT_EQ(ledger.at(1).members, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(ledger.smallest().task_cost(), 5u);
  const auto top = ledger.extract(0);
  EXPECT_EQ(top.task_cost(), 9u);
  EXPECT_EQ(ledger.size(), 3u);
  EXPECT_EQ(ledger.release().size(), 3u);
  EXPECT_TRUE(ledger.empty());
}

TEST(SingleBalance, CandidateProjections) {
  const auto f = figures::fig12();
  const auto buckets = fixture_buckets(f);
  const auto& big = buckets[1];
  const auto& small = buckets[2];
  const auto node6 = big.tree.find_path(std::vector<std::string_view>{"A", "6"});
  const auto node7 = big.tree.find_path(std::vector<std::string_view>{"A", "7"});
  ASSERT_TRUE(node6 && node7);
  const auto i6 = evaluate_candidate(big, small, *node6);
  EXPECT_EQ(i6.new_big, 4u);
  EXPECT_EQ(i6.new_small, 11u);
  EXPECT_EQ(i6.imbalance(), 7u);
  const auto i7 = evaluate_candidate(big, small, *node7);
  EXPECT_EQ(i7.new_big, 6u);
  EXPECT_EQ(i7.new_small, 9u);
  EXPECT_TRUE(is_false_improvement(i7, big));
}

TEST(SingleBalance, PrunedSearchMatchesExhaustive) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pop = random_population(rng, 2 + rng.below(14), 1 + rng.below(4), 2 + rng.below(2));
    std::vector<std::size_t> a;
    std::vector<std::size_t> b;
    for (std::size_t i = 0; i < pop->size(); ++i) (rng.below(3) ? a : b).push_back(i);
    if (a.empty() || b.empty()) continue;
    const Bucket big(pop, a);
    const Bucket small(pop, b);
    if (big.task_cost() <= small.task_cost()) continue;
    const auto imbalance = big.task_cost() - small.task_cost();
    const auto pruned = single_balance(big, small, imbalance);
    const auto full = exhaustive_single_balance(big, small, imbalance);
    ASSERT_EQ(pruned.has_value(), full.has_value());
    if (pruned) {
      EXPECT_EQ(pruned->imbalance(), full->imbalance());
      EXPECT_EQ(pruned->makespan(), full->makespan());
      EXPECT_LT(pruned->imbalance(), imbalance);
    }
  }
}

TEST(SingleBalance, PruningSkipsDuplicateSubtrees) {
  const auto f = figures::fig18();
  const auto buckets = fixture_buckets(f);
  const auto imbalance = buckets[0].task_cost() - buckets[1].task_cost();
  SingleBalanceTrace pruned;
  SingleBalanceTrace plain;
  const auto a = single_balance(buckets[0], buckets[1], imbalance, {}, &pruned);
  const auto b = single_balance(buckets[0], buckets[1], imbalance, {false, false}, &plain);
  EXPECT_LT(pruned.evaluated.size(), plain.evaluated.size());
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->new_big, b->new_big);
  EXPECT_EQ(a->new_small, b->new_small);
}

TEST(Balance, EvensOutThreeBuckets) {
  const auto f = figures::fig12();
  BucketLedger ledger(fixture_buckets(f));
  BalanceTrace trace;
  balance(ledger, {}, &trace);
  EXPECT_EQ(ledger.costs(), (std::vector<std::size_t>{8, 8, 8}));
  ASSERT_FALSE(trace.applied.empty());
  EXPECT_EQ(trace.applied.front().moved, (std::vector<std::size_t>{3}));
  EXPECT_EQ(ledger.makespan(), oracle_min_makespan(*f.population, 3).objective);
}

TEST(Balance, SmallBucketSelection) {
  {
    BucketLedger ledger(fixture_buckets(figures::fig17a()));
    BalanceTrace trace;
    balance(ledger, {}, &trace);
    EXPECT_EQ(ledger.costs(), (std::vector<std::size_t>{6, 3, 3}));
    EXPECT_TRUE(trace.rejected.has_value());
  }
  {
    BucketLedger ledger(fixture_buckets(figures::fig17a()));
    balance(ledger, {.small_rt = SmallRtSelection::greatest_reuse});
    EXPECT_EQ(ledger.costs(), (std::vector<std::size_t>{5, 5, 3}));
  }
  {
    BucketLedger ledger(fixture_buckets(figures::fig17b()));
    balance(ledger);
    EXPECT_EQ(ledger.costs(), (std::vector<std::size_t>{8, 7, 5}));
  }
}

TEST(Trtma, EmitsExactlyMaxBuckets) {
  Rng rng(5);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    const auto pop = random_population(rng, n, 1 + rng.below(5), 2 + rng.below(3));
    const std::size_t mb = 1 + rng.below(8);
    const auto buckets = trtma(pop, mb);
    ASSERT_TRUE(is_partition(buckets, n));
    EXPECT_EQ(buckets.size(), std::min(mb, n));
    for (const auto& b : buckets) EXPECT_EQ(b.task_cost(), prefix_count(*pop, b.members));
  }
  EXPECT_THROW(trtma(figures::fig9(), 0), Error);
}

TEST(Trtma, NeverBeatsTheOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    const auto pop = random_population(rng, n, 1 + rng.below(4));
    const std::size_t mb = 1 + rng.below(4);
    const auto buckets = trtma(pop, mb);
    EXPECT_GE(max_task_cost(buckets), oracle_min_makespan(*pop, mb).objective);
  }
}
