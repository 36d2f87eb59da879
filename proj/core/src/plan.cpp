#include "reuseplan/plan.hpp"

#include <algorithm>
#include <map>

#include "json_util.hpp"
#include "reuseplan/compact_graph.hpp"
#include "reuseplan/error.hpp"
#include "reuseplan/partitioners.hpp"

namespace reuseplan {

std::string_view to_string(SmallRtSelection s) {
  return s == SmallRtSelection::last_bucket ? "last" : "greatest-reuse";
}

SmallRtSelection parse_small_rt(std::string_view text) {
  if (text == "last") return SmallRtSelection::last_bucket;
  if (text == "greatest-reuse") return SmallRtSelection::greatest_reuse;
  fail(ErrorKind::config, "unknown smallRT selection '" + std::string(text) + "'");
}

namespace {

using detail::json;

json rtma_trace_json(const RtmaTrace& t) {
  json iterations = json::array();
  for (const auto& it : t.iterations) {
    iterations.push_back({{"leaf_parent_depth", it.leaf_parent_depth},
                          {"leaf_parents", it.leaf_parents},
                          {"emitted", it.emitted}});
  }
  return {{"iterations", iterations}, {"leftovers", t.leftovers}};
}

json trtma_trace_json(const TrtmaTrace& t) {
  json folds = json::array();
  for (const auto& f : t.folds) folds.push_back({f.from, f.into});
  json applied = json::array();
  for (const auto& a : t.balance.applied) {
    applied.push_back({{"big", {a.big_before, a.big_after}},
                       {"small", {a.small_before, a.small_after}},
                       {"moved", a.moved},
                       {"makespan", a.ledger_makespan}});
  }
  json out = {{"frontier", t.frontier},
              {"full_merge_costs", t.full_merge_costs},
              {"folds", folds},
              {"fold_costs", t.fold_costs},
              {"applied", applied},
              {"stop", t.balance.stop_reason}};
  if (t.balance.rejected) {
    out["rejected"] = {{"new_big", t.balance.rejected->new_big},
                       {"new_small", t.balance.rejected->new_small}};
  }
  return out;
}

std::vector<Bucket> singleton_buckets(const PopulationPtr& population) {
  std::vector<Bucket> out;
  for (std::size_t i = 0; i < population->size(); ++i) out.emplace_back(population, std::vector<std::size_t>{i});
  return out;
}

json metrics_json(const PlanMetrics& m) {
  json levels = json::array();
  for (const auto& l : m.levels) {
    levels.push_back({{"level", l.level},
                      {"distinct_instances", l.distinct_instances},
                      {"task_count", l.task_count},
                      {"buckets", l.buckets},
                      {"task_cost", l.task_cost},
                      {"max_bucket_cost", l.max_bucket_cost},
                      {"fine_grain_reuse", l.fine_grain_reuse},
                      {"max_fine_grain_reuse", l.max_fine_grain_reuse}});
  }
  return {{"sets", m.sets},
          {"stage_count", m.stage_count},
          {"replica_instances", m.replica_instances},
          {"distinct_instances", m.distinct_instances},
          {"buckets", m.buckets},
          {"replica_tasks", m.replica_tasks},
          {"distinct_tasks", m.distinct_tasks},
          {"task_cost", m.task_cost},
          {"stage_reuse", m.stage_reuse},
          {"fine_grain_reuse", m.fine_grain_reuse},
          {"max_fine_grain_reuse", m.max_fine_grain_reuse},
          {"overall_reuse", m.overall_reuse},
          {"levels", levels}};
}

double ratio_complement(std::size_t part, std::size_t whole) {
  return whole == 0 ? 0.0 : 1.0 - static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::none: return "none";
    case Algorithm::stage: return "stage";
    case Algorithm::naive: return "naive";
    case Algorithm::sca: return "sca";
    case Algorithm::rtma: return "rtma";
    case Algorithm::trtma: return "trtma";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  for (auto a : {Algorithm::none, Algorithm::stage, Algorithm::naive, Algorithm::sca, Algorithm::rtma,
                 Algorithm::trtma}) {
    if (to_string(a) == text) return a;
  }
  fail(ErrorKind::config, "unknown algorithm '" + std::string(text) +
                              "' (expected none, stage, naive, sca, rtma or trtma)");
}

bool needs_max_bucket_size(Algorithm a) {
  return a == Algorithm::naive || a == Algorithm::sca || a == Algorithm::rtma;
}

bool needs_max_buckets(Algorithm a) { return a == Algorithm::trtma; }

void validate_options(const PlanOptions& options) {
  const auto name = std::string(to_string(options.algorithm));
  if (needs_max_bucket_size(options.algorithm)) {
    if (!options.max_bucket_size) fail(ErrorKind::config, name + " requires --max-bucket-size");
    if (*options.max_bucket_size < 1) fail(ErrorKind::config, "MaxBucketSize must be >= 1");
  } else if (options.max_bucket_size) {
    fail(ErrorKind::config, name + " does not take a MaxBucketSize");
  }
  if (needs_max_buckets(options.algorithm)) {
    if (!options.max_buckets) fail(ErrorKind::config, name + " requires --max-buckets");
    if (*options.max_buckets < 1) fail(ErrorKind::config, "MaxBuckets must be >= 1");
  } else if (options.max_buckets) {
    fail(ErrorKind::config, name + " does not take MaxBuckets");
  }
}

Plan make_plan(const WorkflowTemplate& workflow, std::span<const ParameterSet> sets, const PlanOptions& options) {
  validate_options(options);
  const auto identity =
      options.algorithm == Algorithm::none ? InstanceIdentity::replica : InstanceIdentity::shared;
  const auto graph = build_compact_graph(workflow, sets, identity);
  const auto groups = distinct_instances(graph);

  Plan plan;
  plan.workflow_name = workflow.name();
  plan.options = options;
  std::map<std::size_t, std::size_t> plan_vertex_of;  // graph id -> plan vertex id
  for (std::size_t id = 1; id <= graph.vertex_count(); ++id) plan_vertex_of[id] = id - 1;

  std::vector<std::size_t> position(graph.vertex_count() + 1, 0);
  for (std::size_t l = 0; l < workflow.stage_count(); ++l) {
    const auto& ws = workflow.stage(l);
    PlanLevel level;
    level.stage_id = ws.id;
    level.template_name = ws.stage.name;
    for (const auto& t : ws.stage.tasks) level.calls.push_back(t.call);
    level.upstream_levels = workflow.upstream(l);
    std::vector<StageEntry> entries;
    for (std::size_t i = 0; i < groups[l].size(); ++i) {
      const auto& v = graph.vertex(groups[l][i].vertex);
      position[groups[l][i].vertex] = i;
      entries.push_back({v.instance.signature, v.instance.task_keys(ws.stage),
                         plan_vertex_of[groups[l][i].vertex], v.multiplicity});
    }
    level.population = make_population(l, ws.stage.name, ws.stage.task_count(), std::move(entries));
    plan.levels.push_back(std::move(level));
  }
  for (std::size_t id = 1; id <= graph.vertex_count(); ++id) {
    const auto& v = graph.vertex(id);
    PlanVertex pv;
    pv.signature = v.instance.signature;
    pv.level = v.instance.level;
    pv.index = position[id];
    pv.multiplicity = v.multiplicity;
    for (const auto& up : v.instance.upstream) pv.upstream.push_back(plan_vertex_of[*graph.find(up)]);
    plan.vertices.push_back(std::move(pv));
  }

  json trace = json::array();
  for (const auto& level : plan.levels) {
    const auto& pop = level.population;
    std::vector<Bucket> buckets;
    json level_trace = {{"level", pop->level()}};
    switch (options.algorithm) {
      case Algorithm::none:
      case Algorithm::stage:
        buckets = singleton_buckets(pop);
        break;
      case Algorithm::naive:
        buckets = naive_buckets(pop, *options.max_bucket_size);
        break;
      case Algorithm::sca:
        buckets = sca_buckets(pop, *options.max_bucket_size);
        break;
      case Algorithm::rtma: {
        RtmaTrace t;
        buckets = rtma(pop, *options.max_bucket_size, options.rtma, options.trace ? &t : nullptr);
        level_trace["rtma"] = rtma_trace_json(t);
        break;
      }
      case Algorithm::trtma: {
        TrtmaTrace t;
        buckets = trtma(pop, *options.max_buckets, options.balance, options.trace ? &t : nullptr);
        level_trace["trtma"] = trtma_trace_json(t);
        break;
      }
    }
    trace.push_back(std::move(level_trace));
    for (auto& b : buckets) plan.buckets.push_back(std::move(b));
  }
  if (options.trace) plan.trace_json = trace.dump();

  std::size_t replica_tasks = 0;
  for (const auto& ws : workflow.stages()) replica_tasks += ws.stage.task_count() * sets.size();
  plan.metrics = compute_metrics(plan, sets.size(), sets.size() * workflow.stage_count(), replica_tasks);
  return plan;
}

PlanMetrics compute_metrics(const Plan& plan, std::size_t sets, std::size_t replica_instances,
                            std::size_t replica_tasks) {
  PlanMetrics m;
  m.sets = sets;
  m.stage_count = plan.levels.size();
  m.replica_instances = replica_instances;
  m.replica_tasks = replica_tasks;
  m.buckets = plan.buckets.size();
  std::size_t unique_nodes = 0;
  for (const auto& level : plan.levels) {
    const auto& pop = *level.population;
    LevelMetrics lm;
    lm.level = pop.level();
    lm.distinct_instances = pop.size();
    lm.task_count = pop.task_count();
    for (const auto& b : plan.buckets) {
      if (b.level() != lm.level) continue;
      ++lm.buckets;
      lm.task_cost += b.task_cost();
      lm.max_bucket_cost = std::max(lm.max_bucket_cost, b.task_cost());
    }
    const auto distinct_tasks = pop.size() * pop.task_count();
    const auto level_unique = pop.size() == 0 ? 0 : generate_reuse_tree(level.population).task_cost();
    lm.fine_grain_reuse = ratio_complement(lm.task_cost, distinct_tasks);
    lm.max_fine_grain_reuse = ratio_complement(level_unique, distinct_tasks);
    m.distinct_instances += pop.size();
    m.distinct_tasks += distinct_tasks;
    m.task_cost += lm.task_cost;
    unique_nodes += level_unique;
    m.levels.push_back(lm);
  }
  m.stage_reuse = ratio_complement(m.distinct_instances, m.replica_instances);
  m.fine_grain_reuse = ratio_complement(m.task_cost, m.distinct_tasks);
  m.max_fine_grain_reuse = ratio_complement(unique_nodes, m.distinct_tasks);
  m.overall_reuse = ratio_complement(m.task_cost, m.replica_tasks);
  return m;
}

double fine_grain_reuse(const Plan& plan) {
  std::size_t cost = 0;
  std::size_t total = 0;
  for (const auto& b : plan.buckets) cost += b.task_cost();
  for (const auto& l : plan.levels) total += l.population->size() * l.population->task_count();
  return ratio_complement(cost, total);
}

std::string plan_to_json(const Plan& plan) {
  json doc;
  doc["algorithm"] = to_string(plan.options.algorithm);
  doc["constraints"] = {
      {"max_bucket_size", plan.options.max_bucket_size ? json(*plan.options.max_bucket_size) : json(nullptr)},
      {"max_buckets", plan.options.max_buckets ? json(*plan.options.max_buckets) : json(nullptr)},
      {"coalesce_leftovers", plan.options.rtma.coalesce_leftovers},
      {"small_rt", to_string(plan.options.balance.small_rt)},
      {"single_child_pruning", plan.options.balance.search.single_child_pruning},
      {"unique_sibling_selection", plan.options.balance.search.unique_sibling_selection}};
  json levels = json::array();
  for (const auto& l : plan.levels) {
    levels.push_back({{"level", l.population->level()},
                      {"stage", l.stage_id},
                      {"template", l.template_name},
                      {"tasks", l.calls},
                      {"upstream", l.upstream_levels}});
  }
  doc["workflow"] = {{"name", plan.workflow_name}, {"levels", levels}};
  json vertices = json::array();
  json edges = json::array();
  for (std::size_t id = 0; id < plan.vertices.size(); ++id) {
    const auto& v = plan.vertices[id];
    const auto& entry = plan.levels[v.level].population->entry(v.index);
    vertices.push_back({{"id", id},
                        {"signature", v.signature},
                        {"level", v.level},
                        {"multiplicity", v.multiplicity},
                        {"upstream", v.upstream},
                        {"task_keys", entry.task_keys}});
    for (auto u : v.upstream) edges.push_back({u, id});
  }
  doc["vertices"] = std::move(vertices);
  doc["edges"] = std::move(edges);
  json buckets = json::array();
  for (const auto& b : plan.buckets) {
    json members = json::array();
    for (auto m : b.members) members.push_back(b.tree.population()->entry(m).label);
    buckets.push_back({{"level", b.level()}, {"members", members}, {"task_cost", b.task_cost()}});
  }
  doc["buckets"] = std::move(buckets);
  doc["metrics"] = metrics_json(plan.metrics);
  if (!plan.trace_json.empty()) doc["trace"] = json::parse(plan.trace_json);
  return detail::dump(doc);
}

Plan parse_plan(std::string_view json_text) {
  constexpr std::string_view what = "plan";
  const auto doc = detail::parse_json(json_text, what);
  detail::reject_unknown_fields(
      doc, {"algorithm", "constraints", "workflow", "vertices", "edges", "buckets", "metrics", "trace"}, what);
  Plan plan;
  plan.options.algorithm = parse_algorithm(detail::required<std::string>(doc, "algorithm", what));
  const auto& c = doc.at("constraints");
  if (!c.at("max_bucket_size").is_null()) plan.options.max_bucket_size = c.at("max_bucket_size").get<std::size_t>();
  if (!c.at("max_buckets").is_null()) plan.options.max_buckets = c.at("max_buckets").get<std::size_t>();
  plan.options.rtma.coalesce_leftovers = detail::optional_field<bool>(c, "coalesce_leftovers", false, what);
  plan.options.balance.small_rt = parse_small_rt(detail::optional_field<std::string>(c, "small_rt", "last", what));
  plan.options.balance.search.single_child_pruning =
      detail::optional_field<bool>(c, "single_child_pruning", true, what);
  plan.options.balance.search.unique_sibling_selection =
      detail::optional_field<bool>(c, "unique_sibling_selection", true, what);

  const auto& wf = doc.at("workflow");
  plan.workflow_name = detail::required<std::string>(wf, "name", what);
  struct LevelInfo {
    std::size_t task_count;
    std::string template_name;
    std::vector<StageEntry> entries;
  };
  std::vector<LevelInfo> infos;
  for (const auto& l : wf.at("levels")) {
    PlanLevel level;
    level.stage_id = detail::required<std::string>(l, "stage", what);
    level.template_name = detail::required<std::string>(l, "template", what);
    level.calls = detail::required<std::vector<std::string>>(l, "tasks", what);
    level.upstream_levels = detail::required<std::vector<std::size_t>>(l, "upstream", what);
    if (detail::required<std::size_t>(l, "level", what) != plan.levels.size()) {
      fail(ErrorKind::parse, "plan: levels must be listed in order");
    }
    infos.push_back({level.calls.size(), level.template_name, {}});
    plan.levels.push_back(std::move(level));
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> member_of;  // signature -> (level, index)
  for (const auto& v : doc.at("vertices")) {
    PlanVertex pv;
    pv.signature = detail::required<std::string>(v, "signature", what);
    pv.level = detail::required<std::size_t>(v, "level", what);
    if (pv.level >= infos.size()) fail(ErrorKind::parse, "plan: vertex level out of range");
    pv.multiplicity = detail::required<std::size_t>(v, "multiplicity", what);
    pv.upstream = detail::required<std::vector<std::size_t>>(v, "upstream", what);
    pv.index = infos[pv.level].entries.size();
    if (detail::required<std::size_t>(v, "id", what) != plan.vertices.size()) {
      fail(ErrorKind::parse, "plan: vertex ids must be dense and ordered");
    }
    infos[pv.level].entries.push_back({pv.signature, detail::required<std::vector<std::string>>(v, "task_keys", what),
                                       plan.vertices.size(), pv.multiplicity});
    if (!member_of.emplace(pv.signature, std::make_pair(pv.level, pv.index)).second) {
      fail(ErrorKind::parse, "plan: duplicate vertex signature");
    }
    plan.vertices.push_back(std::move(pv));
  }
  for (const auto& v : plan.vertices) {
    for (auto u : v.upstream) {
      if (u >= plan.vertices.size()) fail(ErrorKind::parse, "plan: upstream vertex out of range");
    }
  }
  for (std::size_t l = 0; l < infos.size(); ++l) {
    plan.levels[l].population =
        make_population(l, infos[l].template_name, infos[l].task_count, std::move(infos[l].entries));
  }
  for (const auto& b : doc.at("buckets")) {
    const auto level = detail::required<std::size_t>(b, "level", what);
    if (level >= plan.levels.size()) fail(ErrorKind::parse, "plan: bucket level out of range");
    std::vector<std::size_t> members;
    for (const auto& sig : detail::required<std::vector<std::string>>(b, "members", what)) {
      const auto it = member_of.find(sig);
      if (it == member_of.end() || it->second.first != level) {
        fail(ErrorKind::parse, "plan: bucket member is not a vertex of its level");
      }
      members.push_back(it->second.second);
    }
    plan.buckets.emplace_back(plan.levels[level].population, std::move(members));
    if (plan.buckets.back().task_cost() != detail::required<std::size_t>(b, "task_cost", what)) {
      fail(ErrorKind::validation, "plan: bucket task_cost does not match its members");
    }
  }
  for (std::size_t l = 0; l < plan.levels.size(); ++l) {
    std::vector<Bucket> level_buckets;
    for (const auto& b : plan.buckets) {
      if (b.level() == l) level_buckets.push_back(b);
    }
    if (!is_partition(level_buckets, plan.levels[l].population->size())) {
      fail(ErrorKind::validation, "plan: buckets of level " + std::to_string(l) + " are not a partition");
    }
  }
  const auto& metrics = doc.at("metrics");
  plan.metrics = compute_metrics(plan, detail::required<std::size_t>(metrics, "sets", what),
                                 detail::required<std::size_t>(metrics, "replica_instances", what),
                                 detail::required<std::size_t>(metrics, "replica_tasks", what));
  if (doc.contains("trace")) plan.trace_json = doc.at("trace").dump();
  return plan;
}

}  // namespace reuseplan
