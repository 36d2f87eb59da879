#include "reuseplan/workflow.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "io_util.hpp"
#include "json_util.hpp"
#include "reuseplan/error.hpp"

namespace reuseplan {
namespace {

std::string length_prefixed(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    out += std::to_string(item.size());
    out.push_back(':');
    out += item;
  }
  return out;
}

void validate_stage(const StageTemplate& stage) {
  if (stage.name.empty()) fail(ErrorKind::validation, "stage with empty name");
  if (stage.tasks.empty()) fail(ErrorKind::validation, "stage '" + stage.name + "' has no tasks");
  std::set<std::string> ids;
  std::set<std::string> available(stage.inputs_rt.begin(), stage.inputs_rt.end());
  for (const auto& task : stage.tasks) {
    if (task.id.empty() || task.call.empty()) {
      fail(ErrorKind::validation, "stage '" + stage.name + "': task needs an id and a call");
    }
    if (!ids.insert(task.id).second) {
      fail(ErrorKind::validation, "stage '" + stage.name + "': duplicate task id '" + task.id + "'");
    }
    std::set<std::string> args;
    for (const auto& a : task.args) {
      if (!args.insert(a).second) {
        fail(ErrorKind::validation, "task '" + task.id + "': duplicate arg '" + a + "'");
      }
    }
    for (const auto& label : task.intertask_in) {
      if (!available.count(label)) {
        fail(ErrorKind::validation, "task '" + task.id + "': input '" + label +
                                        "' is not produced by an earlier task");
      }
    }
    available.insert(task.intertask_out.begin(), task.intertask_out.end());
  }
}

}  // namespace

std::vector<std::string> StageTemplate::consumed_params() const {
  std::set<std::string> names;
  for (const auto& t : tasks) names.insert(t.args.begin(), t.args.end());
  return {names.begin(), names.end()};
}

std::vector<std::string> StageTemplate::products() const {
  std::vector<std::string> out;
  for (const auto& t : tasks) {
    for (const auto& label : t.intertask_out) {
      if (std::find(out.begin(), out.end(), label) == out.end()) out.push_back(label);
    }
  }
  return out;
}

WorkflowTemplate::WorkflowTemplate(std::string name, std::vector<WorkflowStage> stages,
                                   std::vector<std::pair<std::string, std::string>> edges,
                                   std::vector<std::string> inputs)
    : name_(std::move(name)), inputs_(std::move(inputs)) {
  if (stages.empty()) fail(ErrorKind::validation, "workflow '" + name_ + "' has no stages");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    validate_stage(stages[i].stage);
    if (stages[i].id.empty()) fail(ErrorKind::validation, "workflow stage with empty id");
    if (!index.emplace(stages[i].id, i).second) {
      fail(ErrorKind::validation, "duplicate stage id '" + stages[i].id + "'");
    }
  }
  const auto n = stages.size();
  std::vector<std::pair<std::size_t, std::size_t>> raw;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [from, to] : edges) {
    const auto a = index.find(from);
    const auto b = index.find(to);
    if (a == index.end() || b == index.end()) {
      fail(ErrorKind::validation, "edge " + from + "->" + to + " names an unknown stage");
    }
    if (a->second == b->second) fail(ErrorKind::validation, "cycle detected at stage '" + from + "'");
    if (!seen.insert({a->second, b->second}).second) {
      fail(ErrorKind::validation, "duplicate edge " + from + "->" + to);
    }
    raw.emplace_back(a->second, b->second);
  }

  // Kahn's algorithm, always taking the earliest declared ready stage.
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& e : raw) ++indegree[e.second];
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const auto v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (const auto& e : raw) {
      if (e.first == v && --indegree[e.second] == 0) ready.insert(e.second);
    }
  }
  if (order.size() != n) fail(ErrorKind::validation, "cycle detected in workflow '" + name_ + "'");

  std::vector<std::size_t> level(n);
  for (std::size_t l = 0; l < n; ++l) level[order[l]] = l;
  stages_.reserve(n);
  for (auto v : order) stages_.push_back(std::move(stages[v]));
  upstream_.assign(n, {});
  downstream_.assign(n, {});
  for (const auto& e : raw) {
    edges_.emplace_back(level[e.first], level[e.second]);
    upstream_[level[e.second]].push_back(level[e.first]);
    downstream_[level[e.first]].push_back(level[e.second]);
  }

  // Region-template inputs must come from an ancestor stage or the workflow.
  std::vector<std::set<std::string>> reachable(n);
  for (std::size_t l = 0; l < n; ++l) {
    reachable[l].insert(inputs_.begin(), inputs_.end());
    for (auto u : upstream_[l]) {
      reachable[l].insert(reachable[u].begin(), reachable[u].end());
      const auto products = stages_[u].stage.products();
      reachable[l].insert(products.begin(), products.end());
    }
    for (const auto& label : stages_[l].stage.inputs_rt) {
      if (!reachable[l].count(label)) {
        fail(ErrorKind::validation, "stage '" + stages_[l].id + "': input '" + label +
                                        "' is not produced upstream");
      }
    }
  }
}

std::size_t WorkflowTemplate::level_of(std::string_view stage_id) const {
  for (std::size_t l = 0; l < stages_.size(); ++l) {
    if (stages_[l].id == stage_id) return l;
  }
  fail(ErrorKind::validation, "unknown stage '" + std::string(stage_id) + "'");
}

std::vector<std::string> WorkflowTemplate::consumed_params() const {
  std::set<std::string> names;
  for (const auto& s : stages_) {
    const auto c = s.stage.consumed_params();
    names.insert(c.begin(), c.end());
  }
  return {names.begin(), names.end()};
}

StageTemplate parse_stage_descriptor(std::string_view json_text) {
  constexpr std::string_view what = "stage descriptor";
  const auto doc = detail::parse_json(json_text, what);
  detail::reject_unknown_fields(doc, {"name", "inputs_rt", "tasks"}, what);
  StageTemplate stage;
  stage.name = detail::required<std::string>(doc, "name", what);
  stage.inputs_rt = detail::optional_field<std::vector<std::string>>(doc, "inputs_rt", {}, what);
  if (!doc.contains("tasks") || !doc.at("tasks").is_array()) {
    fail(ErrorKind::parse, "stage descriptor: 'tasks' must be an array");
  }
  for (const auto& t : doc.at("tasks")) {
    detail::reject_unknown_fields(t, {"id", "call", "lib", "args", "intertask_in", "intertask_out"},
                                  what);
    TaskTemplate task;
    task.id = detail::required<std::string>(t, "id", what);
    task.call = detail::required<std::string>(t, "call", what);
    task.lib = detail::optional_field<std::string>(t, "lib", "", what);
    task.args = detail::optional_field<std::vector<std::string>>(t, "args", {}, what);
    task.intertask_in = detail::optional_field<std::vector<std::string>>(t, "intertask_in", {}, what);
    task.intertask_out = detail::optional_field<std::vector<std::string>>(t, "intertask_out", {}, what);
    stage.tasks.push_back(std::move(task));
  }
  validate_stage(stage);
  return stage;
}

WorkflowTemplate parse_workflow(std::string_view json_text, const DescriptorResolver& resolve) {
  constexpr std::string_view what = "workflow";
  const auto doc = detail::parse_json(json_text, what);
  detail::reject_unknown_fields(doc, {"name", "inputs", "stages", "edges"}, what);
  const auto name = detail::required<std::string>(doc, "name", what);
  const auto inputs = detail::optional_field<std::vector<std::string>>(doc, "inputs", {}, what);
  if (!doc.contains("stages") || !doc.at("stages").is_array()) {
    fail(ErrorKind::parse, "workflow: 'stages' must be an array");
  }
  std::vector<WorkflowStage> stages;
  for (const auto& s : doc.at("stages")) {
    detail::reject_unknown_fields(s, {"id", "descriptor"}, what);
    WorkflowStage stage;
    stage.id = detail::required<std::string>(s, "id", what);
    stage.stage = parse_stage_descriptor(resolve(detail::required<std::string>(s, "descriptor", what)));
    stages.push_back(std::move(stage));
  }
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& e : detail::optional_field<std::vector<std::vector<std::string>>>(doc, "edges", {}, what)) {
    if (e.size() != 2) fail(ErrorKind::parse, "workflow: each edge must be [producer, consumer]");
    edges.emplace_back(e[0], e[1]);
  }
  return WorkflowTemplate(name, std::move(stages), std::move(edges), inputs);
}

WorkflowTemplate load_workflow(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  const auto base = path.parent_path();
  return parse_workflow(text, [&](const std::string& rel) {
    const std::filesystem::path p(rel);
    return detail::read_file(p.is_absolute() ? p : base / p);
  });
}

std::string TaskSignature::key() const {
  std::string out = escape_token(call);
  out.push_back('(');
  out += bound_args;
  out.push_back(')');
  if (depth == 1) {
    out.push_back('<');
    out += inputs;
    out.push_back('>');
  }
  return out;
}

std::vector<TaskSignature> StageInstance::task_signatures(const StageTemplate& stage) const {
  std::vector<TaskSignature> out;
  out.reserve(stage.tasks.size());
  for (std::size_t i = 0; i < stage.tasks.size(); ++i) {
    TaskSignature sig;
    sig.level = level;
    sig.depth = i + 1;
    sig.call = stage.tasks[i].call;
    sig.bound_args = bound.restrict_to(stage.tasks[i].args).encode();
    if (i == 0) sig.inputs = length_prefixed(upstream);
    out.push_back(std::move(sig));
  }
  return out;
}

std::vector<std::string> StageInstance::task_keys(const StageTemplate& stage) const {
  std::vector<std::string> out;
  for (const auto& sig : task_signatures(stage)) out.push_back(sig.key());
  return out;
}

std::vector<StageInstance> instantiate(const WorkflowTemplate& workflow, const ParameterSet& set,
                                       std::size_t origin, InstanceIdentity identity) {
  std::vector<StageInstance> out;
  out.reserve(workflow.stage_count());
  for (std::size_t l = 0; l < workflow.stage_count(); ++l) {
    const auto& ws = workflow.stage(l);
    StageInstance inst;
    inst.level = l;
    inst.template_name = ws.stage.name;
    inst.origin = origin;
    for (const auto& name : ws.stage.consumed_params()) {
      const auto* value = set.find(name);
      if (value == nullptr) {
        fail(ErrorKind::validation, "stage '" + ws.id + "': no value for parameter '" + name + "'");
      }
      inst.bound.set(name, *value);
    }
    for (auto u : workflow.upstream(l)) inst.upstream.push_back(out[u].signature);
    inst.signature = escape_token(ws.id) + "{" + inst.bound.encode() + "}[" +
                     length_prefixed(inst.upstream) + "]";
    if (identity == InstanceIdentity::replica) inst.signature += "#" + std::to_string(origin);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace reuseplan
