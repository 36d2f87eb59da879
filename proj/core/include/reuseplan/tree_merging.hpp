#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reuseplan/bucket.hpp"

namespace reuseplan {

// ---------------------------------------------------------------- RTMA

struct RtmaOptions {
  /// Merge the siblings left at root level after the last move-up into
  /// buckets of up to B instead of emitting one-stage buckets.
  bool coalesce_leftovers = false;
};

/// Per-iteration record of the bucket-candidate selection step.
struct RtmaIteration {
  std::size_t leaf_parent_depth = 0;
  std::size_t leaf_parents = 0;
  std::vector<std::vector<std::size_t>> emitted;
};

struct RtmaTrace {
  std::vector<RtmaIteration> iterations;
  std::vector<std::vector<std::size_t>> leftovers;
};

/// Reuse-tree merging: k-1 rounds of (select leaf parents, cut buckets of
/// exactly B siblings, prune childless ancestors, move leaves up a level);
/// instances still unassigned afterwards become one-stage buckets.
std::vector<Bucket> rtma(const PopulationPtr& population, std::size_t max_bucket_size,
                         RtmaOptions options = {}, RtmaTrace* trace = nullptr);

// ---------------------------------------------------------------- TRTMA steps

struct FullMergeResult {
  std::vector<ReuseTree::NodeId> frontier;
  std::vector<Bucket> buckets;  // one per frontier node, frontier order
};

/// Top-down frontier expansion until it holds at least `max_buckets` nodes
/// (or only leaves). The expanded node is the one with most members, then
/// most children, then earliest in the frontier.
FullMergeResult full_merge(const ReuseTree& tree, std::size_t max_buckets);

/// Stable sort by descending task cost.
void sort_by_cost(std::vector<Bucket>& buckets);

/// Folds a descending-cost list onto `max_buckets` positions: the bucket at
/// position Mb+j joins position Mb+1-j, zig-zagging when b - Mb > Mb.
struct FoldOp {
  std::size_t from = 0;  // 0-based positions in the input list
  std::size_t into = 0;
};
std::vector<FoldOp> fold_plan(std::size_t bucket_count, std::size_t max_buckets);
std::vector<Bucket> fold_merge(std::vector<Bucket> buckets, std::size_t max_buckets);

/// Buckets ordered by descending task cost; equal costs keep insertion order.
class BucketLedger {
 public:
  BucketLedger() = default;
  explicit BucketLedger(std::vector<Bucket> buckets);

  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  void insert(Bucket bucket);
  const Bucket& at(std::size_t rank) const;
  const Bucket& biggest() const { return slot(*order_.begin()); }
  const Bucket& smallest() const { return slot(*order_.rbegin()); }
  std::size_t makespan() const { return empty() ? 0 : biggest().task_cost(); }

  /// Removes and returns the bucket at `rank` (0 = biggest).
  Bucket extract(std::size_t rank);
  std::vector<Bucket> release();
  std::vector<std::size_t> costs() const;

 private:
  struct Entry {
    std::size_t cost;
    std::uint64_t seq;
    std::size_t slot;
    bool operator<(const Entry& other) const {
      if (cost != other.cost) return cost > other.cost;
      return seq < other.seq;
    }
  };
  const Bucket& slot(const Entry& e) const { return *slots_[e.slot]; }

  std::multiset<Entry> order_;
  std::vector<std::optional<Bucket>> slots_;
  std::vector<std::size_t> free_slots_;
  std::uint64_t next_seq_ = 0;
};

/// A subtree of bigRT whose members would move to smallRT.
struct Improvement {
  ReuseTree::NodeId node = ReuseTree::kRoot;
  std::size_t new_big = 0;    // TaskCost(bigRT \ node)
  std::size_t new_small = 0;  // TaskCost(smallRT U node)

  std::size_t imbalance() const {
    return new_big > new_small ? new_big - new_small : new_small - new_big;
  }
  std::size_t makespan() const { return new_big > new_small ? new_big : new_small; }
};

/// Projected costs of moving `node`'s members from big to small.
Improvement evaluate_candidate(const Bucket& big, const Bucket& small, ReuseTree::NodeId node);

/// True when applying `imp` would not lower the pair's maximum cost.
bool is_false_improvement(const Improvement& imp, const Bucket& big);

struct SingleBalanceOptions {
  bool single_child_pruning = true;
  bool unique_sibling_selection = true;
};

struct SingleBalanceTrace {
  std::vector<Improvement> evaluated;  // every candidate projection, in order
};

/// Bottom-up, breadth-first search of bigRT for the move that minimises the
/// projected imbalance, strictly below `imbalance`. Ties prefer the lower
/// projected makespan, then the lower new_big, then traversal order.
std::optional<Improvement> single_balance(const Bucket& big, const Bucket& small,
                                          std::size_t imbalance,
                                          SingleBalanceOptions options = {},
                                          SingleBalanceTrace* trace = nullptr);

/// Reference search over every live node of bigRT, same ordering rule.
std::optional<Improvement> exhaustive_single_balance(const Bucket& big, const Bucket& small,
                                                     std::size_t imbalance);

enum class SmallRtSelection {
  last_bucket,     // lowest cost, latest in ledger order
  greatest_reuse,  // among the lowest-cost buckets, most shared nodes with bigRT
};

struct BalanceOptions {
  SmallRtSelection small_rt = SmallRtSelection::last_bucket;
  SingleBalanceOptions search;
};

struct AppliedImprovement {
  std::size_t big_before = 0;
  std::size_t small_before = 0;
  std::size_t big_after = 0;
  std::size_t small_after = 0;
  std::vector<std::size_t> moved;  // population indices
  std::size_t ledger_makespan = 0;  // after the move
};

struct BalanceTrace {
  std::vector<AppliedImprovement> applied;
  std::string stop_reason;
  std::optional<Improvement> rejected;  // last candidate, when it was a false improvement
  std::vector<SingleBalanceTrace> searches;
};

/// Moves subtrees from the biggest to the selected small bucket while each
/// move strictly lowers the pair's maximum cost.
void balance(BucketLedger& ledger, BalanceOptions options = {}, BalanceTrace* trace = nullptr);

struct TrtmaTrace {
  std::vector<ReuseTree::NodeId> frontier;
  std::vector<std::size_t> full_merge_costs;
  std::vector<FoldOp> folds;
  std::vector<std::size_t> fold_costs;
  BalanceTrace balance;
};

/// Full-Merge, Fold-Merge, then Balance; emits exactly min(Mb, n) buckets.
std::vector<Bucket> trtma(const PopulationPtr& population, std::size_t max_buckets,
                          BalanceOptions options = {}, TrtmaTrace* trace = nullptr);

}  // namespace reuseplan
