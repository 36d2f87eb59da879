#include "reuseplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include "json_util.hpp"
#include "reuseplan/error.hpp"
#include "reuseplan/rng.hpp"

namespace reuseplan {
namespace {

using detail::json;

std::vector<double> node_durations(const Bucket& bucket, const PlanLevel& level, const CostModel& costs,
                                   std::uint64_t seed, std::size_t bucket_index) {
  const auto& tree = bucket.tree;
  std::vector<double> out;
  // Index by NodeId; dead nodes keep a zero entry.
  std::size_t max_id = 0;
  for (auto v : tree.live_nodes()) max_id = std::max<std::size_t>(max_id, v);
  out.assign(max_id + 1, 0.0);
  for (auto v : tree.live_nodes()) {
    double d = costs.duration(level.template_name, tree.node(v).depth);
    if (costs.noise_sigma > 0.0) {
      Rng rng(mix64(seed ^ mix64((static_cast<std::uint64_t>(bucket_index) << 32) ^ v)));
      const double s = costs.noise_sigma;
      d *= std::exp(s * rng.normal() - 0.5 * s * s);
    }
    out[v] = d;
  }
  return out;
}

}  // namespace

CostModel CostModel::table5() {
  CostModel m;
  m.durations["segmentation"] = {1.14, 1.99, 0.65, 0.33, 0.76, 3.76, 0.86};
  return m;
}

double CostModel::duration(const std::string& template_name, std::size_t depth) const {
  const auto it = durations.find(template_name);
  if (it == durations.end() || depth < 1 || depth > it->second.size()) return default_duration;
  return it->second[depth - 1];
}

CostModel parse_cost_model(std::string_view json_text) {
  constexpr std::string_view what = "cost model";
  const auto doc = detail::parse_json(json_text, what);
  detail::reject_unknown_fields(doc, {"durations", "default", "noise_sigma"}, what);
  CostModel m;
  m.durations = detail::optional_field<std::map<std::string, std::vector<double>>>(doc, "durations", {}, what);
  m.default_duration = detail::optional_field<double>(doc, "default", 1.0, what);
  m.noise_sigma = detail::optional_field<double>(doc, "noise_sigma", 0.0, what);
  if (!(m.default_duration > 0.0)) fail(ErrorKind::validation, "cost model: default duration must be > 0");
  if (!(m.noise_sigma >= 0.0)) fail(ErrorKind::validation, "cost model: noise_sigma must be >= 0");
  for (const auto& [name, values] : m.durations) {
    for (double v : values) {
      if (!(v > 0.0)) fail(ErrorKind::validation, "cost model: durations of '" + name + "' must be > 0");
    }
  }
  return m;
}

std::string_view to_string(Dispatch dispatch) {
  return dispatch == Dispatch::plan_order ? "plan" : "lpt";
}

Dispatch parse_dispatch(std::string_view text) {
  if (text == "plan") return Dispatch::plan_order;
  if (text == "lpt") return Dispatch::descending_cost;
  fail(ErrorKind::config, "unknown dispatch '" + std::string(text) + "' (expected plan or lpt)");
}

double schedule_tree(const ReuseTree& tree, std::size_t cores, std::span<const double> node_durations) {
  if (cores < 1) fail(ErrorKind::config, "a worker needs at least one core");
  // Ready nodes in FIFO order: (ready time, arrival sequence, node).
  using Ready = std::tuple<double, std::uint64_t, ReuseTree::NodeId>;
  std::priority_queue<Ready, std::vector<Ready>, std::greater<>> ready;
  std::priority_queue<std::pair<double, std::size_t>, std::vector<std::pair<double, std::size_t>>,
                      std::greater<>>
      free_cores;
  for (std::size_t c = 0; c < cores; ++c) free_cores.emplace(0.0, c);
  std::uint64_t seq = 0;
  for (auto c : tree.children(ReuseTree::kRoot)) ready.emplace(0.0, seq++, c);
  double makespan = 0.0;
  while (!ready.empty()) {
    const auto [at, order, node] = ready.top();
    ready.pop();
    auto [free_at, core] = free_cores.top();
    free_cores.pop();
    const double finish = std::max(at, free_at) + node_durations[node];
    makespan = std::max(makespan, finish);
    free_cores.emplace(finish, core);
    for (auto c : tree.children(node)) ready.emplace(finish, seq++, c);
  }
  return makespan;
}

double bucket_work(const Bucket& bucket, const PlanLevel& level, const CostModel& costs) {
  double total = 0.0;
  for (auto v : bucket.tree.live_nodes()) total += costs.duration(level.template_name, bucket.tree.node(v).depth);
  return total;
}

SimResult simulate(const Plan& plan, const SimConfig& config) {
  if (config.workers < 1 || config.cores < 1) fail(ErrorKind::config, "workers and cores must be >= 1");
  const auto nb = plan.buckets.size();

  // Bucket dependencies through the producers of every member.
  std::vector<std::vector<std::size_t>> bucket_of_index(plan.levels.size());
  for (std::size_t l = 0; l < plan.levels.size(); ++l) {
    bucket_of_index[l].assign(plan.levels[l].population->size(), nb);
  }
  for (std::size_t b = 0; b < nb; ++b) {
    for (auto m : plan.buckets[b].members) bucket_of_index[plan.buckets[b].level()][m] = b;
  }
  std::vector<std::vector<std::size_t>> dependents(nb);
  std::vector<std::size_t> waiting(nb, 0);
  for (std::size_t b = 0; b < nb; ++b) {
    std::set<std::size_t> producers;
    const auto& bucket = plan.buckets[b];
    for (auto m : bucket.members) {
      const auto& entry = bucket.tree.population()->entry(m);
      for (auto u : plan.vertices.at(entry.vertex).upstream) {
        const auto& uv = plan.vertices[u];
        const auto pb = bucket_of_index[uv.level][uv.index];
        if (pb == nb) fail(ErrorKind::validation, "vertex without a bucket");
        if (pb != b) producers.insert(pb);
      }
    }
    waiting[b] = producers.size();
    for (auto p : producers) dependents[p].push_back(b);
  }

  std::vector<double> duration(nb);
  std::vector<double> expected(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& level = plan.levels[plan.buckets[b].level()];
    const auto durations = node_durations(plan.buckets[b], level, config.costs, config.seed, b);
    duration[b] = schedule_tree(plan.buckets[b].tree, config.cores, durations);
    expected[b] = bucket_work(plan.buckets[b], level, config.costs);
  }

  // Ready queue: plan order, or longest expected work first.
  auto before = [&](std::size_t a, std::size_t b) {
    if (config.dispatch == Dispatch::descending_cost && expected[a] != expected[b]) return expected[a] > expected[b];
    return a < b;
  };
  std::set<std::size_t, decltype(before)> ready(before);
  for (std::size_t b = 0; b < nb; ++b) {
    if (waiting[b] == 0) ready.insert(b);
  }
  std::set<std::size_t> idle;
  for (std::size_t w = 0; w < config.workers; ++w) idle.insert(w);
  using Completion = std::tuple<double, std::size_t, std::size_t>;  // time, worker, bucket
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> running;

  SimResult result;
  result.algorithm = std::string(to_string(plan.options.algorithm));
  result.workers = config.workers;
  result.cores = config.cores;
  result.worker_busy.assign(config.workers, 0.0);
  result.buckets = nb;
  double now = 0.0;
  std::size_t done = 0;
  while (done < nb) {
    while (!idle.empty() && !ready.empty()) {
      const auto w = *idle.begin();
      const auto b = *ready.begin();
      idle.erase(idle.begin());
      ready.erase(ready.begin());
      running.emplace(now + duration[b], w, b);
      result.worker_busy[w] += duration[b];
    }
    if (running.empty()) fail(ErrorKind::validation, "bucket dependency cycle");
    now = std::get<0>(running.top());
    while (!running.empty() && std::get<0>(running.top()) == now) {
      const auto [t, w, b] = running.top();
      running.pop();
      idle.insert(w);
      ++done;
      for (auto d : dependents[b]) {
        if (--waiting[d] == 0) ready.insert(d);
      }
    }
  }
  result.makespan = now;
  for (const auto& b : plan.buckets) result.executed_tasks += b.task_cost();
  for (double busy : result.worker_busy) result.total_work += busy;
  result.fine_grain_reuse = plan.metrics.fine_grain_reuse;
  result.stage_reuse = plan.metrics.stage_reuse;
  result.stages_per_worker = static_cast<double>(nb) / static_cast<double>(config.workers);
  return result;
}

double parallel_efficiency(const SimResult& at_w, const SimResult& at_2w) {
  // Plans may differ between the two runs when MaxBuckets scales with W.
  if (at_2w.workers != 2 * at_w.workers || at_w.algorithm != at_2w.algorithm) {
    fail(ErrorKind::config, "parallel efficiency needs the same algorithm at W and 2W");
  }
  if (at_2w.makespan <= 0.0) return 0.0;
  return at_w.makespan / (2.0 * at_2w.makespan);
}

std::string sim_result_to_json(const SimResult& r) {
  json doc = {{"algorithm", r.algorithm},
              {"workers", r.workers},
              {"cores", r.cores},
              {"makespan", r.makespan},
              {"worker_busy", r.worker_busy},
              {"buckets", r.buckets},
              {"executed_tasks", r.executed_tasks},
              {"fine_grain_reuse", r.fine_grain_reuse},
              {"stage_reuse", r.stage_reuse},
              {"stages_per_worker", r.stages_per_worker},
              {"total_work", r.total_work}};
  return detail::dump(doc);
}

SimResult parse_sim_result(std::string_view json_text) {
  constexpr std::string_view what = "simulation result";
  const auto doc = detail::parse_json(json_text, what);
  SimResult r;
  r.algorithm = detail::required<std::string>(doc, "algorithm", what);
  r.workers = detail::required<std::size_t>(doc, "workers", what);
  r.cores = detail::required<std::size_t>(doc, "cores", what);
  r.makespan = detail::required<double>(doc, "makespan", what);
  r.worker_busy = detail::required<std::vector<double>>(doc, "worker_busy", what);
  r.buckets = detail::required<std::size_t>(doc, "buckets", what);
  r.executed_tasks = detail::required<std::size_t>(doc, "executed_tasks", what);
  r.fine_grain_reuse = detail::required<double>(doc, "fine_grain_reuse", what);
  r.stage_reuse = detail::required<double>(doc, "stage_reuse", what);
  r.stages_per_worker = detail::required<double>(doc, "stages_per_worker", what);
  r.total_work = detail::required<double>(doc, "total_work", what);
  return r;
}

std::string sim_csv_header() { return "workers,cores,algorithm,makespan,reuse,efficiency,s_per_w"; }

std::string sim_csv_row(const SimResult& r, double efficiency) {
  std::ostringstream out;
  out.precision(10);
  out << r.workers << ',' << r.cores << ',' << r.algorithm << ',' << r.makespan << ',' << r.fine_grain_reuse << ','
      << efficiency << ',' << r.stages_per_worker;
  return out.str();
}

}  // namespace reuseplan
