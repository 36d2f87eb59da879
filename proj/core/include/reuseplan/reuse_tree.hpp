#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace reuseplan {

/// A distinct stage instance as seen by the fine-grain planners: a label and
/// one key per task, in chain order.
struct StageEntry {
  std::string label;
  std::vector<std::string> task_keys;
  std::size_t vertex = static_cast<std::size_t>(-1);  // compact-graph vertex, if any
  std::size_t multiplicity = 1;
};

/// All distinct instances of one stage level. Immutable once built.
class LevelPopulation {
 public:
  LevelPopulation(std::size_t level, std::string template_name, std::size_t task_count,
                  std::vector<StageEntry> entries);

  std::size_t level() const { return level_; }
  const std::string& template_name() const { return template_name_; }
  std::size_t task_count() const { return task_count_; }
  std::size_t size() const { return entries_.size(); }
  const StageEntry& entry(std::size_t i) const { return entries_.at(i); }
  const std::vector<StageEntry>& entries() const { return entries_; }

 private:
  std::size_t level_;
  std::string template_name_;
  std::size_t task_count_;
  std::vector<StageEntry> entries_;
};

using PopulationPtr = std::shared_ptr<const LevelPopulation>;

PopulationPtr make_population(std::size_t level, std::string template_name,
                              std::size_t task_count, std::vector<StageEntry> entries);

/// Length of the longest common task-key prefix. Throws Error(validation)
/// when the two entries have different task counts.
std::size_t reuse_degree(const StageEntry& a, const StageEntry& b);

/// Prefix tree over task keys for one stage level. Node depth d holds the
/// key of task d; every member hangs off exactly one depth-k node.
///
/// Children are kept both in insertion order (deterministic traversal) and in
/// a hash index (constant-time match), so building a tree of n members with
/// k tasks is O(nk).
class ReuseTree {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  struct Node {
    NodeId parent = kRoot;
    std::uint32_t depth = 0;
    std::string_view key;  // points into the population
    std::vector<NodeId> children;
    std::unordered_map<std::string_view, NodeId> index;
    std::vector<std::size_t> stages;  // members at this leaf (depth k only)
    std::size_t stage_count = 0;      // members in the subtree
    std::size_t subtree_nodes = 0;    // nodes in the subtree, self included
    bool alive = true;
  };

  explicit ReuseTree(PopulationPtr population);
  ReuseTree(PopulationPtr population, std::span<const std::size_t> members);

  const PopulationPtr& population() const { return population_; }
  std::size_t depth() const { return population_->task_count(); }

  void insert(std::size_t member);
  /// Removes a member; nodes left without members are pruned recursively.
  void remove(std::size_t member);
  void add_stages(std::span<const std::size_t> members);
  void remove_stages(std::span<const std::size_t> members);

  bool contains(std::size_t member) const { return leaf_of_.contains(member); }
  std::size_t stage_count() const { return nodes_[kRoot].stage_count; }
  bool empty() const { return stage_count() == 0; }

  /// Unique task nodes (root excluded).
  std::size_t task_cost() const { return nodes_[kRoot].subtree_nodes - 1; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<NodeId>& children(NodeId id) const { return nodes_.at(id).children; }
  NodeId leaf_of(std::size_t member) const { return leaf_of_.at(member); }

  /// Members in depth-first, insertion-ordered traversal.
  std::vector<std::size_t> members() const;
  std::vector<std::size_t> stages_under(NodeId id) const;

  /// Task cost after removing every member below `id`.
  std::size_t cost_without(NodeId id) const;
  /// Task cost after inserting every member below `id` of `source`.
  std::size_t cost_with(const ReuseTree& source, NodeId id) const;

  /// Node reached by following `keys` from the root, if present.
  std::optional<NodeId> find_path(std::span<const std::string_view> keys) const;
  std::vector<std::string_view> path_keys(NodeId id) const;

  /// Live non-root nodes, breadth-first.
  std::vector<NodeId> live_nodes() const;

  /// Indented text dump: one node per line, leaves list member labels.
  std::string dump() const;

 private:
  std::size_t added_below(const ReuseTree& source, NodeId source_node, NodeId own_node) const;

  PopulationPtr population_;
  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, NodeId> leaf_of_;
};

ReuseTree generate_reuse_tree(PopulationPtr population);
ReuseTree generate_reuse_tree(PopulationPtr population, std::span<const std::size_t> members);

inline std::size_t task_cost(const ReuseTree& tree) { return tree.task_cost(); }

/// 1 - unique nodes / (n * k) for the whole population in one tree.
double max_fine_grain_reuse(const PopulationPtr& population);

}  // namespace reuseplan
