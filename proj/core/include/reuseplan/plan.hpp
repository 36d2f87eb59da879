#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reuseplan/bucket.hpp"
#include "reuseplan/parameters.hpp"
#include "reuseplan/tree_merging.hpp"
#include "reuseplan/workflow.hpp"

namespace reuseplan {

enum class Algorithm {
  none,   // replica composition: no stage or task reuse
  stage,  // stage-level reuse only, one bucket per distinct instance
  naive,
  sca,
  rtma,
  trtma,
};

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);
bool needs_max_bucket_size(Algorithm algorithm);
bool needs_max_buckets(Algorithm algorithm);

std::string_view to_string(SmallRtSelection selection);
SmallRtSelection parse_small_rt(std::string_view text);

struct PlanOptions {
  Algorithm algorithm = Algorithm::rtma;
  std::optional<std::size_t> max_bucket_size;
  std::optional<std::size_t> max_buckets;
  RtmaOptions rtma;
  BalanceOptions balance;
  bool trace = false;
};

/// Throws Error(config) unless exactly the constraint the algorithm needs is set.
void validate_options(const PlanOptions& options);

struct PlanLevel {
  std::string stage_id;
  std::string template_name;
  std::vector<std::string> calls;
  std::vector<std::size_t> upstream_levels;
  PopulationPtr population;  // distinct instances of this level
};

struct PlanVertex {
  std::string signature;
  std::size_t level = 0;
  std::size_t index = 0;  // position in the level population
  std::size_t multiplicity = 0;
  std::vector<std::size_t> upstream;  // vertex ids
};

struct LevelMetrics {
  std::size_t level = 0;
  std::size_t distinct_instances = 0;
  std::size_t task_count = 0;
  std::size_t buckets = 0;
  std::size_t task_cost = 0;
  std::size_t max_bucket_cost = 0;
  double fine_grain_reuse = 0.0;
  double max_fine_grain_reuse = 0.0;
};

struct PlanMetrics {
  std::size_t sets = 0;
  std::size_t stage_count = 0;
  std::size_t replica_instances = 0;
  std::size_t distinct_instances = 0;
  std::size_t buckets = 0;
  std::size_t replica_tasks = 0;   // tasks without any reuse
  std::size_t distinct_tasks = 0;  // tasks after stage-level reuse
  std::size_t task_cost = 0;       // tasks actually planned
  double stage_reuse = 0.0;
  double fine_grain_reuse = 0.0;
  double max_fine_grain_reuse = 0.0;
  double overall_reuse = 0.0;  // 1 - task_cost / replica_tasks
  std::vector<LevelMetrics> levels;
};

struct Plan {
  std::string workflow_name;
  PlanOptions options;
  std::vector<PlanLevel> levels;
  std::vector<PlanVertex> vertices;
  std::vector<Bucket> buckets;  // grouped by level, level order
  PlanMetrics metrics;
  std::string trace_json;  // empty unless options.trace
};

/// Stage-level merge of all sets, then the selected fine-grain algorithm on
/// every stage level.
Plan make_plan(const WorkflowTemplate& workflow, std::span<const ParameterSet> sets,
               const PlanOptions& options);

/// Recomputes metrics from levels, vertices and buckets.
PlanMetrics compute_metrics(const Plan& plan, std::size_t sets, std::size_t replica_instances,
                            std::size_t replica_tasks);

/// 1 - sum(TaskCost) / sum(n' * k) over all levels.
double fine_grain_reuse(const Plan& plan);

std::string plan_to_json(const Plan& plan);
Plan parse_plan(std::string_view json_text);

}  // namespace reuseplan
