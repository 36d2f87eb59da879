#include "reuseplan/reuse_tree.hpp"

#include <algorithm>
#include <deque>

#include "reuseplan/error.hpp"

namespace reuseplan {

LevelPopulation::LevelPopulation(std::size_t level, std::string template_name,
                                 std::size_t task_count, std::vector<StageEntry> entries)
    : level_(level),
      template_name_(std::move(template_name)),
      task_count_(task_count),
      entries_(std::move(entries)) {
  if (task_count_ == 0) fail(ErrorKind::validation, "stage level without tasks");
  for (const auto& e : entries_) {
    if (e.task_keys.size() != task_count_) {
      fail(ErrorKind::validation, "instance '" + e.label + "' has " + std::to_string(e.task_keys.size()) +
                                      " tasks, expected " + std::to_string(task_count_));
    }
  }
}

PopulationPtr make_population(std::size_t level, std::string template_name, std::size_t task_count,
                              std::vector<StageEntry> entries) {
  return std::make_shared<const LevelPopulation>(level, std::move(template_name), task_count,
                                                 std::move(entries));
}

std::size_t reuse_degree(const StageEntry& a, const StageEntry& b) {
  if (a.task_keys.size() != b.task_keys.size()) {
    fail(ErrorKind::validation, "reuse degree of stages with different task counts");
  }
  std::size_t d = 0;
  while (d < a.task_keys.size() && a.task_keys[d] == b.task_keys[d]) ++d;
  return d;
}

ReuseTree::ReuseTree(PopulationPtr population) : population_(std::move(population)) {
  if (!population_) fail(ErrorKind::validation, "reuse tree without a population");
  nodes_.emplace_back();
  nodes_[kRoot].subtree_nodes = 1;
}

ReuseTree::ReuseTree(PopulationPtr population, std::span<const std::size_t> members)
    : ReuseTree(std::move(population)) {
  add_stages(members);
}

void ReuseTree::insert(std::size_t member) {
  if (member >= population_->size()) {
    fail(ErrorKind::validation, "member " + std::to_string(member) + " is outside the population");
  }
  if (contains(member)) {
    fail(ErrorKind::validation, "member '" + population_->entry(member).label + "' is already in the tree");
  }
  const auto& keys = population_->entry(member).task_keys;
  const auto k = keys.size();
  std::vector<NodeId> path{kRoot};
  std::vector<bool> created{false};
  path.reserve(k + 1);
  for (std::size_t d = 0; d < k; ++d) {
    const std::string_view key = keys[d];
    auto& parent = nodes_[path.back()];
    if (const auto it = parent.index.find(key); it != parent.index.end()) {
      path.push_back(it->second);
      created.push_back(false);
      continue;
    }
    const auto id = static_cast<NodeId>(nodes_.size());
    const auto parent_id = path.back();
    Node node;
    node.parent = parent_id;
    node.depth = static_cast<std::uint32_t>(d + 1);
    node.key = key;
    nodes_.push_back(std::move(node));
    nodes_[parent_id].children.push_back(id);
    nodes_[parent_id].index.emplace(key, id);
    path.push_back(id);
    created.push_back(true);
  }
  nodes_[path.back()].stages.push_back(member);
  std::size_t fresh = 0;
  for (std::size_t d = path.size(); d-- > 0;) {
    if (created[d]) ++fresh;
    nodes_[path[d]].subtree_nodes += fresh;
    ++nodes_[path[d]].stage_count;
  }
  leaf_of_.emplace(member, path.back());
}

void ReuseTree::remove(std::size_t member) {
  const auto it = leaf_of_.find(member);
  if (it == leaf_of_.end()) {
    fail(ErrorKind::validation, "member " + std::to_string(member) + " is not in the tree");
  }
  auto leaf = it->second;
  leaf_of_.erase(it);
  auto& stages = nodes_[leaf].stages;
  stages.erase(std::find(stages.begin(), stages.end(), member));

  std::size_t removed = 0;
  for (auto id = leaf;; id = nodes_[id].parent) {
    auto& node = nodes_[id];
    --node.stage_count;
    if (id != kRoot && node.stage_count == 0) {
      auto& parent = nodes_[node.parent];
      parent.children.erase(std::find(parent.children.begin(), parent.children.end(), id));
      parent.index.erase(node.key);
      node.alive = false;
      node.subtree_nodes = 0;
      ++removed;
    } else {
      node.subtree_nodes -= removed;
    }
    if (id == kRoot) break;
  }
}

void ReuseTree::add_stages(std::span<const std::size_t> members) {
  for (auto m : members) insert(m);
}

void ReuseTree::remove_stages(std::span<const std::size_t> members) {
  for (auto m : members) remove(m);
}

std::vector<std::size_t> ReuseTree::members() const { return stages_under(kRoot); }

std::vector<std::size_t> ReuseTree::stages_under(NodeId id) const {
  std::vector<std::size_t> out;
  std::vector<NodeId> stack{id};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    const auto& node = nodes_.at(v);
    out.insert(out.end(), node.stages.begin(), node.stages.end());
    for (auto c = node.children.rbegin(); c != node.children.rend(); ++c) stack.push_back(*c);
  }
  return out;
}

std::size_t ReuseTree::cost_without(NodeId id) const {
  if (id == kRoot) return 0;
  const auto& node = nodes_.at(id);
  std::size_t cost = task_cost() - node.subtree_nodes;
  for (auto a = node.parent; a != kRoot && nodes_[a].stage_count == node.stage_count; a = nodes_[a].parent) {
    --cost;
  }
  return cost;
}

std::size_t ReuseTree::added_below(const ReuseTree& source, NodeId source_node, NodeId own_node) const {
  std::size_t added = 0;
  const auto& own = nodes_[own_node];
  for (auto c : source.nodes_[source_node].children) {
    const auto& child = source.nodes_[c];
    if (const auto it = own.index.find(child.key); it != own.index.end()) {
      added += added_below(source, c, it->second);
    } else {
      added += child.subtree_nodes;
    }
  }
  return added;
}

std::size_t ReuseTree::cost_with(const ReuseTree& source, NodeId id) const {
  const auto keys = source.path_keys(id);
  NodeId own = kRoot;
  std::size_t matched = 0;
  for (const auto key : keys) {
    const auto it = nodes_[own].index.find(key);
    if (it == nodes_[own].index.end()) break;
    own = it->second;
    ++matched;
  }
  if (matched == keys.size()) return task_cost() + added_below(source, id, own);
  return task_cost() + (keys.size() - matched) + source.nodes_.at(id).subtree_nodes - 1;
}

std::optional<ReuseTree::NodeId> ReuseTree::find_path(std::span<const std::string_view> keys) const {
  NodeId v = kRoot;
  for (const auto key : keys) {
    const auto it = nodes_[v].index.find(key);
    if (it == nodes_[v].index.end()) return std::nullopt;
    v = it->second;
  }
  return v;
}

std::vector<std::string_view> ReuseTree::path_keys(NodeId id) const {
  std::vector<std::string_view> keys;
  for (auto v = id; v != kRoot; v = nodes_.at(v).parent) keys.push_back(nodes_[v].key);
  std::reverse(keys.begin(), keys.end());
  return keys;
}

std::vector<ReuseTree::NodeId> ReuseTree::live_nodes() const {
  std::vector<NodeId> out;
  std::deque<NodeId> queue(nodes_[kRoot].children.begin(), nodes_[kRoot].children.end());
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    out.push_back(v);
    for (auto c : nodes_[v].children) queue.push_back(c);
  }
  return out;
}

std::string ReuseTree::dump() const {
  std::string out = "root cost=" + std::to_string(task_cost()) +
                    " stages=" + std::to_string(stage_count()) + "\n";
  std::vector<NodeId> stack(nodes_[kRoot].children.rbegin(), nodes_[kRoot].children.rend());
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    const auto& node = nodes_[v];
    out.append(2 * node.depth, ' ');
    out += node.key;
    if (!node.stages.empty()) {
      out += " :";
      for (auto s : node.stages) {
        out.push_back(' ');
        out += population_->entry(s).label;
      }
    }
    out.push_back('\n');
    for (auto c = node.children.rbegin(); c != node.children.rend(); ++c) stack.push_back(*c);
  }
  return out;
}

ReuseTree generate_reuse_tree(PopulationPtr population) {
  ReuseTree tree(population);
  for (std::size_t i = 0; i < population->size(); ++i) tree.insert(i);
  return tree;
}

ReuseTree generate_reuse_tree(PopulationPtr population, std::span<const std::size_t> members) {
  return ReuseTree(std::move(population), members);
}

double max_fine_grain_reuse(const PopulationPtr& population) {
  if (population->size() == 0) return 0.0;
  const auto tree = generate_reuse_tree(population);
  return 1.0 - static_cast<double>(tree.task_cost()) /
                   static_cast<double>(population->size() * population->task_count());
}

}  // namespace reuseplan
