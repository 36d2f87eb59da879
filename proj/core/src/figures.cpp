#include "reuseplan/figures.hpp"

#include "json_util.hpp"
#include "reuseplan/compact_graph.hpp"
#include "reuseplan/error.hpp"
#include "reuseplan/partitioners.hpp"
#include "reuseplan/simulator.hpp"
#include "reuseplan/tree_merging.hpp"

namespace reuseplan::figures {
namespace {

using detail::json;
using Paths = std::vector<std::pair<std::string, std::vector<std::string>>>;

std::vector<std::string> labels(const LevelPopulation& pop, const std::vector<std::size_t>& members) {
  std::vector<std::string> out;
  for (auto m : members) out.push_back(pop.entry(m).label);
  return out;
}

json bucket_labels(const std::vector<Bucket>& buckets) {
  json out = json::array();
  for (const auto& b : buckets) out.push_back(labels(*b.tree.population(), b.members));
  return out;
}

std::vector<Bucket> make_buckets(const BalanceFixture& f) {
  std::vector<Bucket> out;
  for (const auto& members : f.buckets) out.emplace_back(f.population, members);
  return out;
}

TaskTemplate task(const std::string& id, std::vector<std::string> args) {
  TaskTemplate t;
  t.id = id;
  t.call = id;
  t.lib = "fixture";
  t.args = std::move(args);
  return t;
}

json improvement_json(const Improvement& imp, const ReuseTree& tree) {
  json keys = json::array();
  for (auto k : tree.path_keys(imp.node)) keys.push_back(std::string(k));
  return {{"path", keys},
          {"new_big", imp.new_big},
          {"new_small", imp.new_small},
          {"imbalance", imp.imbalance()},
          {"makespan", imp.makespan()}};
}

json balance_report(const BalanceFixture& f, SmallRtSelection selection) {
  BucketLedger ledger(make_buckets(f));
  BalanceTrace trace;
  balance(ledger, {selection, {}}, &trace);
  json applied = json::array();
  for (const auto& a : trace.applied) {
    applied.push_back({{"big", {a.big_before, a.big_after}},
                       {"small", {a.small_before, a.small_after}},
                       {"moved", labels(*f.population, a.moved)}});
  }
  const auto final_buckets = ledger.release();
  return {{"applied", applied},
          {"stop", trace.stop_reason},
          {"costs", [&] {
             json c = json::array();
             for (const auto& b : final_buckets) c.push_back(b.task_cost());
             return c;
           }()},
          {"buckets", bucket_labels(final_buckets)}};
}

}  // namespace

PopulationPtr population_from_paths(const Paths& stages, const std::string& template_name) {
  if (stages.empty()) fail(ErrorKind::validation, "fixture without stages");
  std::vector<StageEntry> entries;
  for (const auto& [label, keys] : stages) entries.push_back({label, keys});
  const auto k = stages.front().second.size();
  return make_population(0, template_name, k, std::move(entries));
}

std::size_t index_of(const LevelPopulation& population, const std::string& label) {
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population.entry(i).label == label) return i;
  }
  fail(ErrorKind::validation, "no stage labelled '" + label + "'");
}

std::vector<std::size_t> indices_of(const LevelPopulation& population, const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  for (const auto& l : labels) out.push_back(index_of(population, l));
  return out;
}

DiamondFixture fig6() {
  auto stage = [](const std::string& name, std::vector<std::string> args) {
    StageTemplate s;
    s.name = name;
    s.tasks.push_back(task(name, std::move(args)));
    return WorkflowStage{name, s};
  };
  WorkflowTemplate wf("diamond",
                      {stage("A", {"a1", "a2"}), stage("B", {"b1", "b2"}), stage("C", {"c1", "c2"}),
                       stage("D", {"d1", "d2"})},
                      {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}});
  auto set = [](std::vector<std::string> v) {
    const char* names[] = {"a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"};
    ParameterSet s;
    for (std::size_t i = 0; i < v.size(); ++i) s.set(names[i], v[i]);
    return s;
  };
  return {std::move(wf),
          {set({"1", "5", "3", "8", "9", "2", "12", "14"}), set({"1", "5", "3", "8", "10", "2", "13", "14"}),
           set({"1", "5", "3", "8", "10", "2", "13", "15"})}};
}

PopulationPtr fig8(bool with_x) {
  Paths p = {{"a", {"p1=1", "p2=1", "p3=1"}},
             {"b", {"p1=1", "p2=1", "p3=2"}},
             {"c", {"p1=1", "p2=2", "p3=1"}},
             {"d", {"p1=8", "p2=5", "p3=2"}}};
  if (with_x) p.push_back({"x", {"p1=8", "p2=3", "p3=1"}});
  return population_from_paths(p);
}

PopulationPtr fig9() {
  Paths p;
  auto add = [&](const char* n1, const char* n2, std::initializer_list<const char*> leaves) {
    for (const char* l : leaves) p.push_back({l, {n1, n2, l}});
  };
  add("n1", "n5", {"a", "b", "c"});
  add("n2", "n6", {"d", "e", "f", "g"});
  add("n2", "n7", {"h", "i"});
  add("n3", "n8", {"j"});
  add("n4", "n9", {"k"});
  add("n4", "n10", {"l"});
  return population_from_paths(p);
}

PopulationPtr fig10() {
  return population_from_paths({{"s1", {"n1", "n4"}}, {"s2", {"n1", "n5"}}, {"s3", {"n2", "n3"}}});
}

PopulationPtr fig11() {
  return population_from_paths(
      {{"s1", {"n1", "n3"}}, {"s2", {"n1", "n4"}}, {"s3", {"n1", "n5"}}, {"s4", {"n2", "n6"}}});
}

BalanceFixture fig12() {
  auto pop = population_from_paths({{"S1", {"C", "D1", "S1"}},
                                    {"S2", {"C", "D2", "S2"}},
                                    {"S3", {"E", "D3", "S3"}},
                                    {"S4", {"A", "6", "S4"}},
                                    {"S5", {"A", "6", "S5"}},
                                    {"S6", {"A", "6", "S6"}},
                                    {"S7", {"A", "6", "S7"}},
                                    {"S8", {"A", "7", "S8"}},
                                    {"S9", {"A", "7", "S9"}},
                                    {"S10", {"B", "8", "S10"}},
                                    {"S11", {"B", "9", "S11"}}});
  return {pop, {{0, 1, 2}, {3, 4, 5, 6, 7, 8}, {9, 10}}};
}

BalanceFixture fig17a() {
  auto pop = population_from_paths({{"S1", {"X", "Y1", "S1"}},
                                    {"S2", {"X", "Y2", "S2"}},
                                    {"S3", {"X", "Y1", "S3"}},
                                    {"S4", {"X", "Z", "S4"}},
                                    {"S5", {"W", "V", "S5"}}});
  return {pop, {{0, 1, 2}, {3}, {4}}};
}

BalanceFixture fig17b() {
  auto pop = population_from_paths({{"S1", {"a", "e", "x", "y"}},
                                    {"S2", {"a", "e", "x", "z"}},
                                    {"S3", {"p", "q", "r", "s"}},
                                    {"S5", {"a", "b", "c", "d"}},
                                    {"S7", {"a", "e", "f'", "h"}},
                                    {"S6", {"a", "e", "f", "g"}}});
  return {pop, {{3, 4, 5}, {0, 1}, {2}}};
}

BalanceFixture fig18() {
  Paths p;
  auto add = [&](const char* n1, const char* n2, std::initializer_list<const char*> leaves) {
    for (const char* l : leaves) p.push_back({l, {n1, n2, l}});
  };
  add("1", "4", {"12"});
  add("1", "5", {"13"});
  add("1", "6", {"14"});
  add("2", "7", {"15", "16"});
  add("2", "8", {"17", "18"});
  add("2", "9", {"19", "20"});
  add("3", "10", {"21"});
  add("3", "11", {"22"});
  p.push_back({"z", {"Z1", "Z2", "Z3"}});
  auto pop = population_from_paths(p);
  std::vector<std::size_t> big;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) big.push_back(i);
  return {pop, {big, {p.size() - 1}}};
}

std::pair<Bucket, Bucket> fig16() {
  const std::vector<std::string> shared = {"t1", "t2", "t3", "t4", "t5"};
  auto path = [&](const std::string& t6, const std::string& t7) {
    auto keys = shared;
    keys.push_back(t6);
    keys.push_back(t7);
    return keys;
  };
  auto pop = population_from_paths({{"b1s1", path("t6", "t7a")},
                                    {"b1s2", path("t6", "t7b")},
                                    {"b1s3", path("t6", "t7c")},
                                    {"b2s1", path("t6a", "t7a")},
                                    {"b2s2", path("t6b", "t7b")}},
                                   "segmentation");
  return {Bucket(pop, {0, 1, 2}), Bucket(pop, {3, 4})};
}

std::string replay_figure(int figure) {
  json out;
  out["figure"] = figure;
  switch (figure) {
    case 6: {
      const auto f = fig6();
      const auto graph = build_compact_graph(f.workflow, f.sets);
      json d = json::array();
      const auto distinct = distinct_instances(graph);
      for (const auto& inst : distinct[f.workflow.level_of("D")]) {
        d.push_back(graph.vertex(inst.vertex).instance.bound.encode());
      }
      out["replica_instances"] = f.sets.size() * f.workflow.stage_count();
      out["vertices"] = graph.vertex_count();
      out["stage_reuse"] = stage_reuse_ratio(graph, f.workflow, f.sets.size());
      out["pending_after_build"] = graph.pending_count();
      out["level_D"] = d;
      break;
    }
    case 8: {
      const auto before = generate_reuse_tree(fig8(false));
      const auto pop = fig8(true);
      ReuseTree after(pop);
      for (std::size_t i = 0; i + 1 < pop->size(); ++i) after.insert(i);
      const auto reused = after.find_path(std::vector<std::string_view>{"p1=8"});
      const auto nodes_before = after.task_cost();
      after.insert(pop->size() - 1);
      out["cost_before"] = before.task_cost();
      out["cost_after"] = after.task_cost();
      out["created_nodes"] = after.task_cost() - nodes_before;
      out["depth1_reused"] = reused.has_value();
      out["tree"] = after.dump();
      break;
    }
    case 9: {
      RtmaTrace trace;
      const auto buckets = rtma(fig9(), 3, {}, &trace);
      out["buckets"] = bucket_labels(buckets);
      out["iterations"] = trace.iterations.size();
      break;
    }
    case 10:
    case 11: {
      const auto tree = generate_reuse_tree(figure == 10 ? fig10() : fig11());
      const auto merged = full_merge(tree, 3);
      json frontier = json::array();
      for (auto v : merged.frontier) frontier.push_back(std::string(tree.node(v).key));
      out["frontier"] = frontier;
      out["full_merge_buckets"] = bucket_labels(merged.buckets);
      auto sorted = merged.buckets;
      sort_by_cost(sorted);
      out["after_fold"] = bucket_labels(fold_merge(sorted, 3));
      if (figure == 11) {
        json folds = json::array();
        for (const auto& op : fold_plan(6, 4)) {
          folds.push_back({"b" + std::to_string(op.from + 1), "b" + std::to_string(op.into + 1)});
        }
        out["fold_b6_mb4"] = folds;
      }
      break;
    }
    case 12: {
      const auto f = fig12();
      const auto buckets = make_buckets(f);
      const auto& big = buckets[1];
      const auto& small = buckets[2];
      const auto node6 = big.tree.find_path(std::vector<std::string_view>{"A", "6"});
      const auto node7 = big.tree.find_path(std::vector<std::string_view>{"A", "7"});
      out["initial_costs"] = {buckets[0].task_cost(), big.task_cost(), small.task_cost()};
      out["node6"] = improvement_json(evaluate_candidate(big, small, *node6), big.tree);
      const auto imp7 = evaluate_candidate(big, small, *node7);
      out["node7"] = improvement_json(imp7, big.tree);
      out["node7_false_improvement"] = is_false_improvement(imp7, big);
      out["balance"] = balance_report(f, SmallRtSelection::last_bucket);
      out["oracle_min_makespan"] = oracle_min_makespan(*f.population, 3).objective;
      break;
    }
    case 16: {
      const auto [b1, b2] = fig16();
      const auto costs = CostModel::table5();
      auto time = [&](const Bucket& b) {
        std::vector<double> d(b.tree.live_nodes().size() + 1, 0.0);
        for (auto v : b.tree.live_nodes()) d.at(v) = costs.duration("segmentation", b.tree.node(v).depth);
        return schedule_tree(b.tree, 1, d);
      };
      out["task_costs"] = {b1.task_cost(), b2.task_cost()};
      out["times"] = {time(b1), time(b2)};
      out["ratio"] = time(b2) / time(b1);
      break;
    }
    case 17: {
      out["a_last_bucket"] = balance_report(fig17a(), SmallRtSelection::last_bucket);
      out["a_greatest_reuse"] = balance_report(fig17a(), SmallRtSelection::greatest_reuse);
      const auto f = fig17b();
      out["b_last_bucket"] = balance_report(f, SmallRtSelection::last_bucket);
      const auto buckets = make_buckets(f);
      const auto s7 = buckets[0].tree.leaf_of(index_of(*f.population, "S7"));
      out["b_alternative_with_b1"] = improvement_json(evaluate_candidate(buckets[0], buckets[1], s7), buckets[0].tree);
      break;
    }
    case 18: {
      const auto f = fig18();
      const auto buckets = make_buckets(f);
      const auto imbalance = buckets[0].task_cost() - buckets[1].task_cost();
      SingleBalanceTrace pruned;
      SingleBalanceTrace plain;
      const auto a = single_balance(buckets[0], buckets[1], imbalance, {}, &pruned);
      const auto b = single_balance(buckets[0], buckets[1], imbalance, {false, false}, &plain);
      json evaluated = json::array();
      for (const auto& imp : pruned.evaluated) {
        evaluated.push_back(std::string(buckets[0].tree.node(imp.node).key));
      }
      out["evaluated_pruned"] = evaluated;
      out["evaluated_count_pruned"] = pruned.evaluated.size();
      out["evaluated_count_unpruned"] = plain.evaluated.size();
      out["same_result"] = a.has_value() == b.has_value() &&
                           (!a || (a->new_big == b->new_big && a->new_small == b->new_small));
      break;
    }
    default:
      fail(ErrorKind::config, "no replay for figure " + std::to_string(figure));
  }
  return detail::dump(out);
}

}  // namespace reuseplan::figures
