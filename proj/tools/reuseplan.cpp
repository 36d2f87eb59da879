// reuseplan: sample -> plan -> simulate -> report, plus oracle and figure replay.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "reuseplan/error.hpp"
#include "reuseplan/figures.hpp"
#include "reuseplan/parameters.hpp"
#include "reuseplan/partitioners.hpp"
#include "reuseplan/plan.hpp"
#include "reuseplan/sampling.hpp"
#include "reuseplan/simulator.hpp"
#include "reuseplan/workflow.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace reuseplan;

namespace {

constexpr const char* kVersion = REUSEPLAN_VERSION;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// FNV-1a, enough to tell two input files apart in a manifest.
std::string digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) fail(ErrorKind::io, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string dump(const json& j) { return j.dump(1, ' ') + "\n"; }

class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["tool"] = "reuseplan";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["inputs"] = json::object();
    doc_["seeds"] = json::object();
    doc_["settings"] = json::object();
  }

  std::string input(const std::string& role, const fs::path& path) {
    auto text = read_text(path);
    doc_["inputs"][role] = {{"path", path.string()}, {"digest", digest(text)}};
    return text;
  }
  void seed(const std::string& name, std::uint64_t value) { doc_["seeds"][name] = value; }
  json& settings() { return doc_["settings"]; }

  void start() { t0_ = std::chrono::steady_clock::now(); }
  void stop() {
    const auto dt = std::chrono::steady_clock::now() - t0_;
    doc_["timing_seconds"] = std::chrono::duration<double>(dt).count();
  }

  void write_with(const fs::path& out, const std::string& text) {
    json outputs = json::object();
    outputs["path"] = out.string();
    outputs["digest"] = digest(text);
    doc_["output"] = outputs;
    write_atomic(out, text);
    fs::path m = out;
    m += ".manifest.json";
    write_atomic(m, dump(doc_));
    spdlog::info("wrote {}", out.string());
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void emit(const std::string& out, const std::string& text, Manifest& manifest) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    manifest.write_with(out, text);
  }
}

// "12", "3W", "3xW" with W = workers.
std::size_t resolve_max_buckets(const std::string& text, std::optional<std::size_t> workers) {
  std::string s = text;
  if (!s.empty() && (s.back() == 'W' || s.back() == 'w')) {
    s.pop_back();
    if (!s.empty() && (s.back() == 'x' || s.back() == 'X')) s.pop_back();
    if (!workers) fail(ErrorKind::config, "--max-buckets " + text + " needs --workers");
    const std::size_t factor = s.empty() ? 1 : std::stoul(s);
    return factor * *workers;
  }
  std::size_t pos = 0;
  const auto v = std::stoul(s, &pos);
  if (pos != s.size()) fail(ErrorKind::config, "bad --max-buckets value '" + text + "'");
  return v;
}

struct PlanArgs {
  std::string workflow;
  std::string sets;
  std::string algorithm = "rtma";
  std::optional<std::size_t> max_bucket_size;
  std::string max_buckets;
  std::optional<std::size_t> workers;
  bool coalesce = false;
  std::string small_rt = "last";
  bool no_single_child = false;
  bool no_unique_sibling = false;
  bool trace = false;
};

void add_plan_options(CLI::App* cmd, PlanArgs& a) {
  cmd->add_option("--workflow", a.workflow, "Workflow template JSON")->required();
  cmd->add_option("--sets", a.sets, "Batch of parameter sets (output of sample)")->required();
  cmd->add_option("--algorithm", a.algorithm, "none|stage|naive|sca|rtma|trtma");
  cmd->add_option("--max-bucket-size", a.max_bucket_size, "MaxBucketSize for naive, sca and rtma");
  cmd->add_option("--max-buckets", a.max_buckets, "MaxBuckets for trtma (N or NxW)");
  cmd->add_flag("--coalesce-leftovers", a.coalesce, "RTMA: pack leftover stages into buckets of B");
  cmd->add_option("--small-rt", a.small_rt, "TRTMA smallRT selection: last|greatest-reuse");
  cmd->add_flag("--no-single-child-pruning", a.no_single_child);
  cmd->add_flag("--no-unique-sibling", a.no_unique_sibling);
  cmd->add_flag("--trace", a.trace, "Embed a planner trace in the plan");
}

PlanOptions plan_options(const PlanArgs& a, std::optional<std::size_t> workers) {
  PlanOptions o;
  o.algorithm = parse_algorithm(a.algorithm);
  o.max_bucket_size = a.max_bucket_size;
  if (!a.max_buckets.empty()) o.max_buckets = resolve_max_buckets(a.max_buckets, workers);
  o.rtma.coalesce_leftovers = a.coalesce;
  o.balance.small_rt = parse_small_rt(a.small_rt);
  o.balance.search.single_child_pruning = !a.no_single_child;
  o.balance.search.unique_sibling_selection = !a.no_unique_sibling;
  o.trace = a.trace;
  validate_options(o);
  return o;
}

json constraints_json(const PlanOptions& o) {
  json j;
  j["algorithm"] = std::string(to_string(o.algorithm));
  j["max_bucket_size"] = o.max_bucket_size ? json(*o.max_bucket_size) : json(nullptr);
  j["max_buckets"] = o.max_buckets ? json(*o.max_buckets) : json(nullptr);
  return j;
}

Plan run_plan(const PlanArgs& a, const PlanOptions& options, Manifest& manifest) {
  manifest.input("workflow", a.workflow);
  const auto workflow = load_workflow(a.workflow);
  const auto batch = parse_batch(manifest.input("sets", a.sets));
  manifest.settings()["plan"] = constraints_json(options);
  spdlog::info("planning {} sets with {}", batch.sets.size(), to_string(options.algorithm));
  manifest.start();
  auto plan = make_plan(workflow, batch.sets, options);
  manifest.stop();
  spdlog::info("{} buckets, task cost {}", plan.metrics.buckets, plan.metrics.task_cost);
  return plan;
}

struct SimArgs {
  std::size_t workers = 1;
  std::size_t cores = 1;
  std::string costs;
  std::optional<double> noise_sigma;
  std::uint64_t seed = 0;
  std::string dispatch = "plan";
};

void add_sim_options(CLI::App* cmd, SimArgs& a, bool with_workers) {
  if (with_workers) cmd->add_option("--workers", a.workers, "Worker processes")->check(CLI::PositiveNumber);
  cmd->add_option("--cores", a.cores, "Cores per worker")->check(CLI::PositiveNumber);
  cmd->add_option("--costs", a.costs, "Cost model JSON (default: profiled segmentation means)");
  cmd->add_option("--noise-sigma", a.noise_sigma, "Lognormal noise sigma per task");
  cmd->add_option("--seed", a.seed, "Noise seed");
  cmd->add_option("--dispatch", a.dispatch, "plan|lpt");
}

SimConfig sim_config(const SimArgs& a, Manifest& manifest) {
  SimConfig c;
  c.workers = a.workers;
  c.cores = a.cores;
  c.dispatch = parse_dispatch(a.dispatch);
  c.costs = a.costs.empty() ? CostModel::table5() : parse_cost_model(manifest.input("costs", a.costs));
  if (a.noise_sigma) c.costs.noise_sigma = *a.noise_sigma;
  if (c.costs.noise_sigma < 0) fail(ErrorKind::config, "noise sigma must be >= 0");
  c.seed = a.seed;
  manifest.seed("noise", a.seed);
  manifest.settings()["simulate"] = {{"cores", c.cores},
                                     {"dispatch", std::string(to_string(c.dispatch))},
                                     {"noise_sigma", c.costs.noise_sigma}};
  return c;
}

// ---------------------------------------------------------------- report

struct ReportRow {
  SimResult result;
  std::string file;
};

std::string report_csv(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::io, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && name.ends_with(".sim.json")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::pair<std::string, std::size_t>, SimResult> rows;
  for (const auto& f : files) {
    auto r = parse_sim_result(read_text(f));
    const auto key = std::make_pair(r.algorithm, r.workers);
    if (rows.contains(key)) fail(ErrorKind::validation, "duplicate result for " + r.algorithm + " at W=" +
                                                            std::to_string(r.workers));
    rows.emplace(key, std::move(r));
  }
  std::string out = sim_csv_header() + "\n";
  for (const auto& [key, r] : rows) {
    const auto twice = rows.find({key.first, key.second * 2});
    double eff = std::numeric_limits<double>::quiet_NaN();
    if (twice != rows.end()) eff = parallel_efficiency(r, twice->second);
    out += sim_csv_row(r, eff) + "\n";
  }
  return out;
}

int report_error(ErrorKind kind, const std::string& message) {
  json e;
  e["error"] = {{"kind", std::string(to_string(kind))}, {"message", message}};
  std::cerr << e.dump() << "\n";
  return kind == ErrorKind::io ? 3 : 2;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("reuseplan");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char* level = std::getenv("REUSEPLAN_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

std::vector<std::size_t> parse_worker_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    const auto v = std::stoul(item, &pos);
    if (pos != item.size() || v == 0) fail(ErrorKind::config, "bad worker count '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorKind::config, "--workers needs at least one value");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Computation-reuse planner for sensitivity-analysis workflows"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "Draw a MOAT or VBD batch of parameter sets");
  std::string space_path, method, generator = "mc", sample_out;
  std::size_t levels = 4, trajectories = 10, sample_size = 1000;
  std::uint64_t sample_seed = 0;
  sample->add_option("--space", space_path, "Parameter space JSON")->required();
  sample->add_option("--method", method, "moat|vbd")->required();
  sample->add_option("--generator", generator, "mc|lhs|qmc");
  sample->add_option("--levels", levels, "MOAT levels p");
  sample->add_option("--trajectories", trajectories, "MOAT trajectories r");
  sample->add_option("--sample-size", sample_size, "VBD sample size n");
  sample->add_option("--seed", sample_seed);
  sample->add_option("-o,--output", sample_out, "Output batch file (stdout if omitted)");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Merge a batch and build buckets");
  PlanArgs plan_args;
  std::string plan_out;
  add_plan_options(plan_cmd, plan_args);
  plan_cmd->add_option("--workers", plan_args.workers, "Resolves NxW in --max-buckets");
  plan_cmd->add_option("-o,--output", plan_out, "Output plan file (stdout if omitted)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Run a plan on the Manager-Worker simulator");
  SimArgs sim_args;
  std::string sim_plan, sim_out, sim_csv;
  sim_cmd->add_option("--plan", sim_plan, "Plan JSON")->required();
  add_sim_options(sim_cmd, sim_args, true);
  sim_cmd->add_option("-o,--output", sim_out, "Result JSON (stdout if omitted)");
  sim_cmd->add_option("--csv", sim_csv, "Also write a one-row CSV");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Plan and simulate one algorithm over several W");
  PlanArgs sweep_plan;
  SimArgs sweep_sim;
  std::string sweep_workers, sweep_dir;
  add_plan_options(sweep_cmd, sweep_plan);
  add_sim_options(sweep_cmd, sweep_sim, false);
  sweep_cmd->add_option("--workers", sweep_workers, "Comma-separated worker counts")->required();
  sweep_cmd->add_option("-o,--output-dir", sweep_dir, "Directory for <algorithm>-w<W>.sim.json")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Aggregate *.sim.json results into CSV");
  std::string report_dir, report_out;
  report_cmd->add_option("--dir", report_dir, "Sweep directory")->required();
  report_cmd->add_option("-o,--output", report_out, "CSV file (stdout if omitted)");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive optimum for one small plan level");
  std::string oracle_plan, oracle_out;
  std::size_t oracle_level = 0;
  std::optional<std::size_t> oracle_b, oracle_mb;
  oracle_cmd->add_option("--plan", oracle_plan, "Plan JSON")->required();
  oracle_cmd->add_option("--level", oracle_level, "Stage level");
  auto* ob = oracle_cmd->add_option("--max-bucket-size", oracle_b, "Minimise total cost under B");
  auto* om = oracle_cmd->add_option("--max-buckets", oracle_mb, "Minimise the largest bucket cost");
  ob->excludes(om);
  oracle_cmd->add_option("-o,--output", oracle_out, "Output JSON (stdout if omitted)");

  // replay-figure
  auto* replay_cmd = app.add_subcommand("replay-figure", "Replay a worked example");
  int figure = 0;
  replay_cmd->add_option("figure", figure, "6|8|9|10|11|12|16|17|18")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    json err;
    err["error"] = {{"kind", "usage"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  }

  try {
    if (*sample) {
      Manifest manifest("sample");
      const auto space = parse_parameter_space(manifest.input("space", space_path));
      manifest.seed("sample", sample_seed);
      const auto gen = parse_generator(generator);
      std::string text;
      manifest.start();
      if (method == "moat") {
        MoatConfig c;
        c.levels = levels;
        c.trajectories = trajectories;
        c.seed = sample_seed;
        c.generator = gen;
        text = moat_batch_json(space, c, moat_design(space, c));
      } else if (method == "vbd") {
        VbdConfig c;
        c.sample_size = sample_size;
        c.generator = gen;
        c.seed = sample_seed;
        text = vbd_batch_json(space, c, vbd_design(space, c));
      } else {
        fail(ErrorKind::config, "unknown method '" + method + "' (moat|vbd)");
      }
      manifest.stop();
      emit(sample_out, text, manifest);
    } else if (*plan_cmd) {
      Manifest manifest("plan");
      const auto options = plan_options(plan_args, plan_args.workers);
      const auto plan = run_plan(plan_args, options, manifest);
      emit(plan_out, plan_to_json(plan), manifest);
    } else if (*sim_cmd) {
      Manifest manifest("simulate");
      const auto plan = parse_plan(manifest.input("plan", sim_plan));
      const auto config = sim_config(sim_args, manifest);
      manifest.settings()["simulate"]["workers"] = config.workers;
      manifest.start();
      const auto result = simulate(plan, config);
      manifest.stop();
      emit(sim_out, sim_result_to_json(result), manifest);
      if (!sim_csv.empty()) {
        write_atomic(sim_csv, sim_csv_header() + "\n" +
                                  sim_csv_row(result, std::numeric_limits<double>::quiet_NaN()) + "\n");
      }
    } else if (*sweep_cmd) {
      const auto workers = parse_worker_list(sweep_workers);
      std::optional<Plan> shared;
      for (auto w : workers) {
        Manifest manifest("sweep");
        const auto options = plan_options(sweep_plan, w);
        // Only NxW constraints depend on W; everything else plans once.
        const bool per_w = !sweep_plan.max_buckets.empty() &&
                           (sweep_plan.max_buckets.back() == 'W' || sweep_plan.max_buckets.back() == 'w');
        if (per_w || !shared) shared = run_plan(sweep_plan, options, manifest);
        auto sim = sweep_sim;
        sim.workers = w;
        const auto config = sim_config(sim, manifest);
        manifest.settings()["simulate"]["workers"] = w;
        const auto result = simulate(*shared, config);
        const auto name = sweep_plan.algorithm + "-w" + std::to_string(w) + ".sim.json";
        manifest.write_with(fs::path(sweep_dir) / name, sim_result_to_json(result));
      }
    } else if (*report_cmd) {
      Manifest manifest("report");
      emit(report_out, report_csv(report_dir), manifest);
    } else if (*oracle_cmd) {
      Manifest manifest("oracle");
      const auto plan = parse_plan(manifest.input("plan", oracle_plan));
      if (oracle_level >= plan.levels.size()) fail(ErrorKind::config, "no such level");
      const auto& pop = *plan.levels[oracle_level].population;
      if (!oracle_b && !oracle_mb) fail(ErrorKind::config, "need --max-bucket-size or --max-buckets");
      manifest.start();
      const auto best = oracle_b ? oracle_min_total_cost(pop, *oracle_b) : oracle_min_makespan(pop, *oracle_mb);
      manifest.stop();
      std::size_t planned_total = 0;
      std::size_t planned_max = 0;
      for (const auto& b : plan.buckets) {
        if (b.level() != oracle_level) continue;
        planned_total += b.task_cost();
        planned_max = std::max(planned_max, b.task_cost());
      }
      json out;
      out["level"] = oracle_level;
      out["objective"] = oracle_b ? "min_total_cost" : "min_makespan";
      out["optimum"] = best.objective;
      out["planned"] = oracle_b ? planned_total : planned_max;
      json blocks = json::array();
      for (const auto& block : best.blocks) {
        json labels = json::array();
        for (auto m : block) labels.push_back(pop.entry(m).label);
        blocks.push_back(labels);
      }
      out["blocks"] = blocks;
      emit(oracle_out, dump(out), manifest);
    } else if (*replay_cmd) {
      std::cout << figures::replay_figure(figure);
    }
  } catch (const Error& e) {
    return report_error(e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(ErrorKind::io, e.what());
  } catch (const std::invalid_argument& e) {
    return report_error(ErrorKind::config, std::string("bad number: ") + e.what());
  } catch (const std::out_of_range& e) {
    return report_error(ErrorKind::config, std::string("number out of range: ") + e.what());
  }
  return 0;
}
