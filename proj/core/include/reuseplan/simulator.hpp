#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reuseplan/plan.hpp"
#include "reuseplan/reuse_tree.hpp"

namespace reuseplan {

/// Mean duration of each task of each stage template, plus optional
/// lognormal (mean-one) multiplicative noise per executed task.
struct CostModel {
  std::map<std::string, std::vector<double>> durations;  // template -> per task
  double default_duration = 1.0;  // tasks of templates not listed
  double noise_sigma = 0.0;

  /// Profiled segmentation task means t1..t7 (seconds), keyed "segmentation".
  static CostModel table5();
  double duration(const std::string& template_name, std::size_t depth) const;
};

/// `{"durations":{"<template>":[...]},"default":1.0,"noise_sigma":0.0}`
CostModel parse_cost_model(std::string_view json_text);

enum class Dispatch { plan_order, descending_cost };

std::string_view to_string(Dispatch dispatch);
Dispatch parse_dispatch(std::string_view text);

struct SimConfig {
  std::size_t workers = 1;
  std::size_t cores = 1;
  Dispatch dispatch = Dispatch::plan_order;
  CostModel costs;
  std::uint64_t seed = 0;
};

struct SimResult {
  std::string algorithm;
  std::size_t workers = 0;
  std::size_t cores = 0;
  double makespan = 0.0;
  std::vector<double> worker_busy;
  std::size_t buckets = 0;
  std::size_t executed_tasks = 0;
  double fine_grain_reuse = 0.0;
  double stage_reuse = 0.0;
  double stages_per_worker = 0.0;
  double total_work = 0.0;
};

/// List-schedules one merged reuse tree on `cores` cores: a node becomes
/// ready when its parent finishes, ready nodes start FIFO. Returns the
/// completion time of the last node. `node_durations` is indexed by NodeId.
double schedule_tree(const ReuseTree& tree, std::size_t cores,
                     std::span<const double> node_durations);

/// Zero-noise single-core time of a bucket: sum of node durations.
double bucket_work(const Bucket& bucket, const PlanLevel& level, const CostModel& costs);

/// Demand-driven Manager-Worker execution of a plan.
SimResult simulate(const Plan& plan, const SimConfig& config);

/// makespan(W) / (2 * makespan(2W)) for one algorithm.
double parallel_efficiency(const SimResult& at_w, const SimResult& at_2w);

std::string sim_result_to_json(const SimResult& result);
SimResult parse_sim_result(std::string_view json_text);
std::string sim_csv_header();
/// `workers,cores,algorithm,makespan,reuse,efficiency,s_per_w`
std::string sim_csv_row(const SimResult& result, double efficiency);

}  // namespace reuseplan
