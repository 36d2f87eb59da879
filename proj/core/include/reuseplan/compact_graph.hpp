#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "reuseplan/parameters.hpp"
#include "reuseplan/workflow.hpp"

namespace reuseplan {

struct CompactVertex {
  StageInstance instance;  // default-constructed for the root
  std::vector<std::size_t> children;
  std::unordered_map<std::string, std::size_t> child_index;  // signature -> vertex
  std::size_t deps = 0;         // declared dependency count
  std::size_t deps_solved = 0;  // parents linked so far
  std::size_t multiplicity = 0; // parameter sets mapping onto this vertex
};

/// Deduplicated DAG of stage instances across a batch of parameter sets.
///
/// Replicas are merged by walking the replica and the compact graph side by
/// side. Vertices with several producers are parked in a pending table until
/// every producer edge has been linked, so they are created exactly once.
class CompactGraph {
 public:
  static constexpr std::string_view kRootSignature = "<root>";
  static constexpr std::size_t kRoot = 0;

  explicit CompactGraph(const WorkflowTemplate& workflow);

  /// Merges one replica (as returned by instantiate()) into the graph.
  void insert(std::span<const StageInstance> replica);

  /// Vertices excluding the synthetic root.
  std::size_t vertex_count() const { return vertices_.size() - 1; }
  const CompactVertex& vertex(std::size_t id) const { return vertices_.at(id); }
  std::optional<std::size_t> find(const std::string& signature) const;
  std::size_t pending_count() const { return pending_.size(); }
  std::size_t replicas() const { return replicas_; }
  std::size_t stage_count() const { return stage_count_; }

  /// True when walking the graph reproduces every instance of `replica`
  /// along its producer edges.
  bool contains_replica(std::span<const StageInstance> replica) const;

  /// Producer -> consumer edges between real vertices.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

 private:
  void merge(std::size_t app_level, std::size_t com_vertex);
  std::size_t add_vertex(const StageInstance& instance);

  const WorkflowTemplate* workflow_;
  std::size_t stage_count_;
  std::vector<CompactVertex> vertices_;
  std::unordered_map<std::string, std::size_t> pending_;
  std::unordered_map<std::string, std::size_t> by_signature_;
  std::span<const StageInstance> current_;
  std::size_t replicas_ = 0;
};

CompactGraph build_compact_graph(const WorkflowTemplate& workflow,
                                 std::span<const ParameterSet> sets,
                                 InstanceIdentity identity = InstanceIdentity::shared);

/// 1 - vertices / (n_sets * stage count).
double stage_reuse_ratio(const CompactGraph& graph, const WorkflowTemplate& workflow,
                         std::size_t n_sets);

struct DistinctInstance {
  std::size_t vertex = 0;
  std::size_t multiplicity = 0;
};

/// Unique vertices grouped by stage level, in vertex creation order.
std::vector<std::vector<DistinctInstance>> distinct_instances(const CompactGraph& graph);

}  // namespace reuseplan
