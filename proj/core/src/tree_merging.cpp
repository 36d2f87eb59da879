#include "reuseplan/tree_merging.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "reuseplan/error.hpp"

namespace reuseplan {
namespace {

// ---------------------------------------------------------------- RTMA

/// Working copy of a reuse tree for RTMA. Stage items are explicit leaves,
/// so they can be re-parented during move-up.
struct RtmaForest {
  struct Node {
    std::size_t parent = 0;
    std::vector<std::size_t> children;
    bool leaf = false;
    std::size_t stage = 0;
    bool alive = true;
  };
  std::vector<Node> nodes;

  explicit RtmaForest(const ReuseTree& tree) {
    const auto k = tree.depth();
    std::map<ReuseTree::NodeId, std::size_t> mapped{{ReuseTree::kRoot, 0}};
    nodes.emplace_back();
    std::vector<ReuseTree::NodeId> stack{ReuseTree::kRoot};
    // Pre-order walk keeping insertion order among children.
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      const auto& src = tree.node(v);
      if (src.depth == k) continue;
      const auto self = mapped.at(v);
      for (auto c : src.children) {
        const auto& child = tree.node(c);
        if (child.depth == k) {
          for (auto s : child.stages) {
            nodes[self].children.push_back(nodes.size());
            nodes.push_back({self, {}, true, s, true});
          }
        } else {
          nodes[self].children.push_back(nodes.size());
          mapped[c] = nodes.size();
          nodes.push_back({self, {}, false, 0, true});
        }
      }
      for (auto c = src.children.rbegin(); c != src.children.rend(); ++c) stack.push_back(*c);
    }
  }

  bool is_leaf_parent(std::size_t v) const {
    const auto& n = nodes[v];
    if (v == 0 || n.leaf || n.children.empty()) return false;
    return std::all_of(n.children.begin(), n.children.end(),
                       [&](std::size_t c) { return nodes[c].leaf; });
  }

  std::vector<std::size_t> leaf_parents() const {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      if (is_leaf_parent(v)) {
        out.push_back(v);
        continue;
      }
      const auto& ch = nodes[v].children;
      for (auto c = ch.rbegin(); c != ch.rend(); ++c) {
        if (!nodes[*c].leaf) stack.push_back(*c);
      }
    }
    return out;
  }

  std::size_t depth(std::size_t v) const {
    std::size_t d = 0;
    for (; v != 0; v = nodes[v].parent) ++d;
    return d;
  }

  void detach(std::size_t v) {
    auto& siblings = nodes[nodes[v].parent].children;
    siblings.erase(std::find(siblings.begin(), siblings.end(), v));
    nodes[v].alive = false;
  }

  /// Removes `v` and every ancestor left without children (root excluded).
  void prune_upwards(std::size_t v) {
    while (v != 0 && nodes[v].children.empty()) {
      const auto parent = nodes[v].parent;
      detach(v);
      v = parent;
    }
  }
};

}  // namespace

std::vector<Bucket> rtma(const PopulationPtr& population, std::size_t max_bucket_size,
                         RtmaOptions options, RtmaTrace* trace) {
  if (max_bucket_size < 1) fail(ErrorKind::config, "MaxBucketSize must be >= 1");
  const auto tree = generate_reuse_tree(population);
  RtmaForest forest(tree);
  std::vector<Bucket> out;
  const auto k = population->task_count();

  for (std::size_t iteration = 1; iteration < k; ++iteration) {
    const auto parents = forest.leaf_parents();
    RtmaIteration record;
    record.leaf_parents = parents.size();
    record.leaf_parent_depth = parents.empty() ? 0 : forest.depth(parents.front());

    // Bucket candidate selection: full groups of B siblings.
    for (auto p : parents) {
      auto& children = forest.nodes[p].children;
      std::size_t pos = 0;
      while (children.size() - pos >= max_bucket_size) {
        std::vector<std::size_t> members;
        for (std::size_t i = pos; i < pos + max_bucket_size; ++i) {
          members.push_back(forest.nodes[children[i]].stage);
          forest.nodes[children[i]].alive = false;
        }
        pos += max_bucket_size;
        record.emitted.push_back(members);
        out.emplace_back(population, std::move(members));
      }
      children.erase(children.begin(), children.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    // Tree pruning.
    for (auto p : parents) forest.prune_upwards(p);
    // Move-up: surviving leaves replace their parent under the grandparent.
    for (auto p : parents) {
      if (!forest.nodes[p].alive) continue;
      const auto grand = forest.nodes[p].parent;
      auto& siblings = forest.nodes[grand].children;
      auto at = std::find(siblings.begin(), siblings.end(), p);
      const auto moved = forest.nodes[p].children;
      for (auto leaf : moved) forest.nodes[leaf].parent = grand;
      at = siblings.erase(at);
      siblings.insert(at, moved.begin(), moved.end());
      forest.nodes[p].children.clear();
      forest.nodes[p].alive = false;
    }
    if (trace) trace->iterations.push_back(std::move(record));
  }

  // Whatever is left hangs off the root.
  std::vector<std::size_t> leftovers;
  std::vector<std::size_t> stack(forest.nodes[0].children.rbegin(), forest.nodes[0].children.rend());
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (forest.nodes[v].leaf) {
      leftovers.push_back(forest.nodes[v].stage);
      continue;
    }
    const auto& ch = forest.nodes[v].children;
    stack.insert(stack.end(), ch.rbegin(), ch.rend());
  }
  const auto group = options.coalesce_leftovers ? max_bucket_size : 1;
  for (std::size_t pos = 0; pos < leftovers.size(); pos += group) {
    std::vector<std::size_t> members(
        leftovers.begin() + static_cast<std::ptrdiff_t>(pos),
        leftovers.begin() + static_cast<std::ptrdiff_t>(std::min(leftovers.size(), pos + group)));
    if (trace) trace->leftovers.push_back(members);
    out.emplace_back(population, std::move(members));
  }
  return out;
}

// ---------------------------------------------------------------- TRTMA steps

FullMergeResult full_merge(const ReuseTree& tree, std::size_t max_buckets) {
  if (max_buckets < 1) fail(ErrorKind::config, "MaxBuckets must be >= 1");
  FullMergeResult out;
  out.frontier = tree.children(ReuseTree::kRoot);
  while (out.frontier.size() < max_buckets) {
    std::size_t pick = out.frontier.size();
    for (std::size_t i = 0; i < out.frontier.size(); ++i) {
      const auto& n = tree.node(out.frontier[i]);
      if (n.children.empty()) continue;
      if (pick == out.frontier.size()) {
        pick = i;
        continue;
      }
      const auto& best = tree.node(out.frontier[pick]);
      if (std::make_tuple(n.stage_count, n.children.size()) > std::make_tuple(best.stage_count, best.children.size())) {
        pick = i;
      }
    }
    if (pick == out.frontier.size()) break;
    const auto expanded = tree.children(out.frontier[pick]);
    out.frontier.erase(out.frontier.begin() + static_cast<std::ptrdiff_t>(pick));
    out.frontier.insert(out.frontier.begin() + static_cast<std::ptrdiff_t>(pick), expanded.begin(),
                        expanded.end());
  }
  for (auto v : out.frontier) out.buckets.emplace_back(tree.population(), tree.stages_under(v));
  return out;
}

void sort_by_cost(std::vector<Bucket>& buckets) {
  std::stable_sort(buckets.begin(), buckets.end(),
                   [](const Bucket& a, const Bucket& b) { return a.task_cost() > b.task_cost(); });
}

std::vector<FoldOp> fold_plan(std::size_t bucket_count, std::size_t max_buckets) {
  if (max_buckets < 1) fail(ErrorKind::config, "MaxBuckets must be >= 1");
  std::vector<FoldOp> ops;
  for (std::size_t j = 1; j + max_buckets <= bucket_count; ++j) {
    const auto t = (j - 1) % (2 * max_buckets);
    const auto into = t < max_buckets ? max_buckets - t : t - max_buckets + 1;  // 1-based
    ops.push_back({max_buckets + j - 1, into - 1});
  }
  return ops;
}

std::vector<Bucket> fold_merge(std::vector<Bucket> buckets, std::size_t max_buckets) {
  const auto ops = fold_plan(buckets.size(), max_buckets);
  if (ops.empty()) return buckets;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < max_buckets; ++i) members.push_back(buckets[i].members);
  for (const auto& op : ops) {
    const auto& extra = buckets[op.from].members;
    members[op.into].insert(members[op.into].end(), extra.begin(), extra.end());
  }
  const auto population = buckets.front().tree.population();
  std::vector<Bucket> out;
  for (auto& m : members) out.emplace_back(population, std::move(m));
  return out;
}

BucketLedger::BucketLedger(std::vector<Bucket> buckets) {
  for (auto& b : buckets) insert(std::move(b));
}

void BucketLedger::insert(Bucket bucket) {
  std::size_t index = 0;
  if (!free_slots_.empty()) {
    index = free_slots_.back();
    free_slots_.pop_back();
    slots_[index].emplace(std::move(bucket));
  } else {
    index = slots_.size();
    slots_.emplace_back(std::move(bucket));
  }
  order_.insert(Entry{slots_[index]->task_cost(), next_seq_++, index});
}

const Bucket& BucketLedger::at(std::size_t rank) const {
  if (rank >= order_.size()) fail(ErrorKind::validation, "ledger rank out of range");
  return slot(*std::next(order_.begin(), static_cast<std::ptrdiff_t>(rank)));
}

Bucket BucketLedger::extract(std::size_t rank) {
  if (rank >= order_.size()) fail(ErrorKind::validation, "ledger rank out of range");
  const auto it = std::next(order_.begin(), static_cast<std::ptrdiff_t>(rank));
  const auto index = it->slot;
  order_.erase(it);
  Bucket out = std::move(*slots_[index]);
  slots_[index].reset();
  free_slots_.push_back(index);
  return out;
}

std::vector<Bucket> BucketLedger::release() {
  std::vector<Bucket> out;
  for (const auto& e : order_) out.push_back(std::move(*slots_[e.slot]));
  order_.clear();
  slots_.clear();
  free_slots_.clear();
  return out;
}

std::vector<std::size_t> BucketLedger::costs() const {
  std::vector<std::size_t> out;
  for (const auto& e : order_) out.push_back(e.cost);
  return out;
}

Improvement evaluate_candidate(const Bucket& big, const Bucket& small, ReuseTree::NodeId node) {
  return {node, big.tree.cost_without(node), small.tree.cost_with(big.tree, node)};
}

bool is_false_improvement(const Improvement& imp, const Bucket& big) {
  return imp.makespan() >= big.task_cost();
}

namespace {

auto rank_key(const Improvement& imp) {
  return std::make_tuple(imp.imbalance(), imp.makespan(), imp.new_big);
}

/// Keeps the best candidate seen so far under the ordering rule.
struct BestImprovement {
  std::size_t threshold;
  std::optional<Improvement> best;
  SingleBalanceTrace* trace;

  void offer(const Improvement& imp) {
    if (trace) trace->evaluated.push_back(imp);
    if (imp.imbalance() >= threshold) return;
    if (!best || rank_key(imp) < rank_key(*best)) best = imp;
  }
};

/// Structural identity of a subtree: equal ids mean the same shape with the
/// same number of members at corresponding leaves.
class ShapeIndex {
 public:
  explicit ShapeIndex(const ReuseTree& tree) : tree_(tree) {}

  std::size_t id(ReuseTree::NodeId v) {
    if (const auto it = memo_.find(v); it != memo_.end()) return it->second;
    std::vector<std::size_t> key{tree_.node(v).stages.size()};
    std::vector<std::size_t> child_ids;
    for (auto c : tree_.children(v)) child_ids.push_back(id(c));
    std::sort(child_ids.begin(), child_ids.end());
    key.insert(key.end(), child_ids.begin(), child_ids.end());
    const auto found = interned_.try_emplace(std::move(key), interned_.size()).first->second;
    memo_.emplace(v, found);
    return found;
  }

 private:
  const ReuseTree& tree_;
  std::map<ReuseTree::NodeId, std::size_t> memo_;
  std::map<std::vector<std::size_t>, std::size_t> interned_;
};

struct SingleBalanceSearch {
  const Bucket& big;
  const Bucket& small;
  SingleBalanceOptions options;
  BestImprovement best;
  ShapeIndex shapes{big.tree};

  bool overlaps_small(ReuseTree::NodeId v) const {
    const auto keys = big.tree.path_keys(v);
    return small.tree.find_path(keys).has_value();
  }

  void visit(std::vector<ReuseTree::NodeId> current) {
    if (options.single_child_pruning) {
      while (current.size() == 1 && !big.tree.children(current.front()).empty()) {
        current = big.tree.children(current.front());
      }
    }
    std::vector<ReuseTree::NodeId> unique;
    std::vector<std::pair<std::size_t, std::size_t>> seen;  // (cost, shape)
    for (auto c : current) {
      if (options.unique_sibling_selection && !overlaps_small(c)) {
        const std::pair<std::size_t, std::size_t> key{big.tree.node(c).subtree_nodes, shapes.id(c)};
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
        seen.push_back(key);
      }
      if (!big.tree.children(c).empty()) visit(big.tree.children(c));
      unique.push_back(c);
    }
    for (auto c : unique) best.offer(evaluate_candidate(big, small, c));
  }
};

}  // namespace

std::optional<Improvement> single_balance(const Bucket& big, const Bucket& small, std::size_t imbalance,
                                          SingleBalanceOptions options, SingleBalanceTrace* trace) {
  SingleBalanceSearch search{big, small, options, BestImprovement{imbalance, std::nullopt, trace}};
  const auto& roots = big.tree.children(ReuseTree::kRoot);
  if (!roots.empty()) search.visit(roots);
  return search.best.best;
}

std::optional<Improvement> exhaustive_single_balance(const Bucket& big, const Bucket& small,
                                                     std::size_t imbalance) {
  BestImprovement best{imbalance, std::nullopt, nullptr};
  for (auto v : big.tree.live_nodes()) best.offer(evaluate_candidate(big, small, v));
  return best.best;
}

namespace {

std::size_t shared_nodes(const ReuseTree& a, ReuseTree::NodeId va, const ReuseTree& b, ReuseTree::NodeId vb) {
  std::size_t count = 0;
  const auto& index = b.node(vb).index;
  for (auto c : a.children(va)) {
    const auto it = index.find(a.node(c).key);
    if (it != index.end()) count += 1 + shared_nodes(a, c, b, it->second);
  }
  return count;
}

std::size_t select_small(const BucketLedger& ledger, SmallRtSelection selection) {
  const auto last = ledger.size() - 1;
  if (selection == SmallRtSelection::last_bucket) return last;
  const auto& big = ledger.biggest();
  const auto low = ledger.smallest().task_cost();
  std::size_t pick = last;
  std::size_t best = shared_nodes(ledger.at(last).tree, ReuseTree::kRoot, big.tree, ReuseTree::kRoot);
  for (std::size_t rank = last; rank-- > 1 && ledger.at(rank).task_cost() == low;) {
    const auto s = shared_nodes(ledger.at(rank).tree, ReuseTree::kRoot, big.tree, ReuseTree::kRoot);
    if (s > best) {
      best = s;
      pick = rank;
    }
  }
  return pick;
}

}  // namespace

void balance(BucketLedger& ledger, BalanceOptions options, BalanceTrace* trace) {
  std::size_t guard = 0;
  for (std::size_t i = 0; i < ledger.size(); ++i) guard += ledger.at(i).task_cost();
  auto stop = [&](const char* reason) {
    if (trace) trace->stop_reason = reason;
  };
  for (std::size_t step = 0;; ++step) {
    if (ledger.size() < 2) return stop("fewer than two buckets");
    if (step > guard) fail(ErrorKind::validation, "balance did not terminate");
    const auto small_rank = select_small(ledger, options.small_rt);
    const auto& big = ledger.biggest();
    const auto& small = ledger.at(small_rank);
    const auto imbalance = big.task_cost() - small.task_cost();
    if (imbalance == 0) return stop("balanced");

    SingleBalanceTrace search_trace;
    const auto imp = single_balance(big, small, imbalance, options.search, trace ? &search_trace : nullptr);
    if (trace) trace->searches.push_back(std::move(search_trace));
    if (!imp) return stop("no improvement");
    if (is_false_improvement(*imp, big)) {
      if (trace) trace->rejected = imp;
      return stop("false improvement");
    }

    AppliedImprovement applied;
    applied.big_before = big.task_cost();
    applied.small_before = small.task_cost();
    applied.moved = big.tree.stages_under(imp->node);
    Bucket small_bucket = ledger.extract(small_rank);
    Bucket big_bucket = ledger.extract(0);
    big_bucket.tree.remove_stages(applied.moved);
    std::erase_if(big_bucket.members, [&](std::size_t m) { return !big_bucket.tree.contains(m); });
    small_bucket.tree.add_stages(applied.moved);
    small_bucket.members.insert(small_bucket.members.end(), applied.moved.begin(), applied.moved.end());
    applied.big_after = big_bucket.task_cost();
    applied.small_after = small_bucket.task_cost();
    ledger.insert(std::move(small_bucket));
    ledger.insert(std::move(big_bucket));
    applied.ledger_makespan = ledger.makespan();
    if (trace) trace->applied.push_back(std::move(applied));
  }
}

std::vector<Bucket> trtma(const PopulationPtr& population, std::size_t max_buckets, BalanceOptions options,
                          TrtmaTrace* trace) {
  if (max_buckets < 1) fail(ErrorKind::config, "MaxBuckets must be >= 1");
  const auto n = population->size();
  if (n == 0) return {};
  const auto target = std::min(max_buckets, n);
  const auto tree = generate_reuse_tree(population);
  auto merged = full_merge(tree, target);
  auto buckets = std::move(merged.buckets);
  // Identical members share one leaf; split the fullest bucket until there
  // are enough buckets to fill every slot.
  while (buckets.size() < target) {
    auto fullest = std::max_element(buckets.begin(), buckets.end(),
                                    [](const Bucket& a, const Bucket& b) { return a.size() < b.size(); });
    auto members = fullest->members;
    const auto peeled = members.back();
    members.pop_back();
    *fullest = Bucket(population, std::move(members));
    buckets.emplace_back(population, std::vector<std::size_t>{peeled});
  }
  if (trace) {
    trace->frontier = merged.frontier;
    for (const auto& b : buckets) trace->full_merge_costs.push_back(b.task_cost());
  }
  sort_by_cost(buckets);
  if (trace) trace->folds = fold_plan(buckets.size(), target);
  buckets = fold_merge(std::move(buckets), target);
  if (trace) {
    for (const auto& b : buckets) trace->fold_costs.push_back(b.task_cost());
  }
  BucketLedger ledger(std::move(buckets));
  balance(ledger, options, trace ? &trace->balance : nullptr);
  return ledger.release();
}

}  // namespace reuseplan
