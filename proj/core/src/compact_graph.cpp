#include "reuseplan/compact_graph.hpp"

#include <algorithm>

#include "reuseplan/error.hpp"

namespace reuseplan {

CompactGraph::CompactGraph(const WorkflowTemplate& workflow)
    : workflow_(&workflow), stage_count_(workflow.stage_count()) {
  CompactVertex root;
  root.instance.signature = std::string(kRootSignature);
  vertices_.push_back(std::move(root));
}

std::optional<std::size_t> CompactGraph::find(const std::string& signature) const {
  const auto it = by_signature_.find(signature);
  if (it == by_signature_.end()) return std::nullopt;
  return it->second;
}

std::size_t CompactGraph::add_vertex(const StageInstance& instance) {
  const auto id = vertices_.size();
  if (!by_signature_.emplace(instance.signature, id).second) {
    fail(ErrorKind::validation, "stage instance created twice: " + instance.signature);
  }
  CompactVertex v;
  v.instance = instance;
  v.deps = std::max<std::size_t>(1, workflow_->upstream(instance.level).size());
  vertices_.push_back(std::move(v));
  return id;
}

void CompactGraph::insert(std::span<const StageInstance> replica) {
  if (replica.size() != stage_count_) {
    fail(ErrorKind::validation, "replica does not match the workflow stage count");
  }
  current_ = replica;
  merge(stage_count_, kRoot);
  current_ = {};
  for (const auto& inst : replica) ++vertices_[*find(inst.signature)].multiplicity;
  ++replicas_;
}

// `app_level == stage_count_` stands for the replica root.
void CompactGraph::merge(std::size_t app_level, std::size_t com_vertex) {
  std::vector<std::size_t> children;
  if (app_level == stage_count_) {
    for (std::size_t l = 0; l < stage_count_; ++l) {
      if (workflow_->upstream(l).empty()) children.push_back(l);
    }
  } else {
    children = workflow_->downstream(app_level);
  }
  for (auto level : children) {
    const auto& v = current_[level];
    const auto& index = vertices_[com_vertex].child_index;
    if (const auto found = index.find(v.signature); found != index.end()) {
      merge(level, found->second);
      continue;
    }
    std::size_t target = 0;
    if (const auto pending = pending_.find(v.signature); pending == pending_.end()) {
      target = add_vertex(v);
      vertices_[target].deps_solved = 1;
      if (vertices_[target].deps > 1) pending_.emplace(v.signature, target);
    } else {
      target = pending->second;
      if (++vertices_[target].deps_solved == vertices_[target].deps) pending_.erase(pending);
    }
    vertices_[com_vertex].children.push_back(target);
    vertices_[com_vertex].child_index.emplace(v.signature, target);
    merge(level, target);
  }
}

bool CompactGraph::contains_replica(std::span<const StageInstance> replica) const {
  if (replica.size() != stage_count_) return false;
  for (std::size_t l = 0; l < stage_count_; ++l) {
    const auto id = find(replica[l].signature);
    if (!id || vertices_[*id].instance.level != l) return false;
    const auto& ups = workflow_->upstream(l);
    if (ups.empty()) {
      if (!vertices_[kRoot].child_index.count(replica[l].signature)) return false;
    }
    for (auto u : ups) {
      const auto parent = find(replica[u].signature);
      if (!parent || !vertices_[*parent].child_index.count(replica[l].signature)) return false;
    }
  }
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> CompactGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t id = 1; id < vertices_.size(); ++id) {
    for (auto c : vertices_[id].children) out.emplace_back(id, c);
  }
  return out;
}

CompactGraph build_compact_graph(const WorkflowTemplate& workflow, std::span<const ParameterSet> sets,
                                 InstanceIdentity identity) {
  if (sets.empty()) fail(ErrorKind::validation, "no parameter sets to merge");
  CompactGraph graph(workflow);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto replica = instantiate(workflow, sets[i], i, identity);
    graph.insert(replica);
  }
  return graph;
}

double stage_reuse_ratio(const CompactGraph& graph, const WorkflowTemplate& workflow,
                         std::size_t n_sets) {
  const double replicas = static_cast<double>(n_sets) * static_cast<double>(workflow.stage_count());
  if (replicas == 0.0) return 0.0;
  return 1.0 - static_cast<double>(graph.vertex_count()) / replicas;
}

std::vector<std::vector<DistinctInstance>> distinct_instances(const CompactGraph& graph) {
  std::vector<std::vector<DistinctInstance>> out(graph.stage_count());
  for (std::size_t id = 1; id <= graph.vertex_count(); ++id) {
    const auto& v = graph.vertex(id);
    out[v.instance.level].push_back({id, v.multiplicity});
  }
  return out;
}

}  // namespace reuseplan
