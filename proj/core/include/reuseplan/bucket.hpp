#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "reuseplan/reuse_tree.hpp"

namespace reuseplan {

/// Stage instances of one level merged into a single schedulable unit.
struct Bucket {
  Bucket(PopulationPtr population, std::vector<std::size_t> members);

  std::size_t level() const { return tree.population()->level(); }
  std::size_t size() const { return members.size(); }
  std::size_t task_cost() const { return tree.task_cost(); }

  std::vector<std::size_t> members;  // population indices
  ReuseTree tree;                    // merged tree of the members
};

std::size_t total_task_cost(std::span<const Bucket> buckets);
std::size_t max_task_cost(std::span<const Bucket> buckets);

/// Every population index appears in exactly one bucket.
bool is_partition(std::span<const Bucket> buckets, std::size_t population_size);

/// 1 - sum(TaskCost) / (n * k) over one level's buckets.
double fine_grain_reuse(std::span<const Bucket> buckets, const LevelPopulation& population);

}  // namespace reuseplan
