#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reuseplan/parameters.hpp"

namespace reuseplan {

struct TaskTemplate {
  std::string id;
  std::string call;
  std::string lib;
  std::vector<std::string> args;  // parameter names, in declared order
  std::vector<std::string> intertask_in;
  std::vector<std::string> intertask_out;
};

/// A named linear chain of tasks. Task i may only consume products of tasks
/// 1..i-1 or the stage's region-template inputs.
struct StageTemplate {
  std::string name;
  std::vector<std::string> inputs_rt;
  std::vector<TaskTemplate> tasks;

  std::size_t task_count() const { return tasks.size(); }
  /// Sorted union of every task's args.
  std::vector<std::string> consumed_params() const;
  /// Union of intertask_out labels, in first-seen order.
  std::vector<std::string> products() const;
};

struct WorkflowStage {
  std::string id;
  StageTemplate stage;
};

/// Validated stage DAG. Stages are kept in a topological order, so the
/// position of a stage doubles as its stage level.
class WorkflowTemplate {
 public:
  WorkflowTemplate(std::string name, std::vector<WorkflowStage> stages,
                   std::vector<std::pair<std::string, std::string>> edges,
                   std::vector<std::string> inputs = {});

  const std::string& name() const { return name_; }
  std::size_t stage_count() const { return stages_.size(); }
  const std::vector<WorkflowStage>& stages() const { return stages_; }
  const WorkflowStage& stage(std::size_t level) const { return stages_.at(level); }
  std::size_t level_of(std::string_view stage_id) const;
  /// Producer levels of `level`, in edge declaration order.
  const std::vector<std::size_t>& upstream(std::size_t level) const { return upstream_.at(level); }
  const std::vector<std::size_t>& downstream(std::size_t level) const { return downstream_.at(level); }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const std::vector<std::string>& inputs() const { return inputs_; }
  /// Sorted union of parameters consumed anywhere in the workflow.
  std::vector<std::string> consumed_params() const;

 private:
  std::string name_;
  std::vector<WorkflowStage> stages_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> upstream_;
  std::vector<std::vector<std::size_t>> downstream_;
  std::vector<std::string> inputs_;
};

/// Parses `{"name","inputs_rt":[...],"tasks":[{"id","call","lib","args",
/// "intertask_in","intertask_out"}]}`. Unknown fields are rejected.
StageTemplate parse_stage_descriptor(std::string_view json_text);

using DescriptorResolver = std::function<std::string(const std::string& path)>;

/// Parses `{"name","inputs":[...]?,"stages":[{"id","descriptor"}],"edges":[[a,b]]}`.
/// Descriptor paths are handed to `resolve`, which returns the document text.
WorkflowTemplate parse_workflow(std::string_view json_text, const DescriptorResolver& resolve);

/// Reads a workflow file; descriptor paths are relative to its directory.
WorkflowTemplate load_workflow(const std::filesystem::path& path);

/// Key of one task inside a stage instance. Two keys at the same depth match
/// iff call and bound args are byte-equal; the first task's key also carries
/// the identities of the upstream stage instances it reads from.
struct TaskSignature {
  std::size_t level = 0;
  std::size_t depth = 0;  // 1-based task index
  std::string call;
  std::string bound_args;  // ParameterSet::encode() of the task's args
  std::string inputs;      // upstream identity block, depth 1 only

  std::string key() const;
};

struct StageInstance {
  std::size_t level = 0;
  std::string template_name;
  ParameterSet bound;                 // exactly the stage's consumed params
  std::vector<std::string> upstream;  // producer signatures, edge order
  std::size_t origin = 0;             // index of the generating parameter set
  std::string signature;              // identity; equal => interchangeable

  std::vector<TaskSignature> task_signatures(const StageTemplate& stage) const;
  std::vector<std::string> task_keys(const StageTemplate& stage) const;
};

enum class InstanceIdentity {
  shared,   // identity = (template, bound params, upstream ids)
  replica,  // identity also carries the origin set index: nothing ever merges
};

/// One replica of the workflow bound to `set`, in stage-level order.
/// Throws Error(validation) when a consumed parameter has no value.
std::vector<StageInstance> instantiate(const WorkflowTemplate& workflow, const ParameterSet& set,
                                       std::size_t origin = 0,
                                       InstanceIdentity identity = InstanceIdentity::shared);

}  // namespace reuseplan
