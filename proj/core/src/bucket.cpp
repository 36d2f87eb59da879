#include "reuseplan/bucket.hpp"

#include <algorithm>

namespace reuseplan {

Bucket::Bucket(PopulationPtr population, std::vector<std::size_t> members_in)
    : members(std::move(members_in)), tree(std::move(population), members) {}

std::size_t total_task_cost(std::span<const Bucket> buckets) {
  std::size_t total = 0;
  for (const auto& b : buckets) total += b.task_cost();
  return total;
}

std::size_t max_task_cost(std::span<const Bucket> buckets) {
  std::size_t best = 0;
  for (const auto& b : buckets) best = std::max(best, b.task_cost());
  return best;
}

bool is_partition(std::span<const Bucket> buckets, std::size_t population_size) {
  std::vector<bool> seen(population_size, false);
  std::size_t count = 0;
  for (const auto& b : buckets) {
    for (auto m : b.members) {
      if (m >= population_size || seen[m]) return false;
      seen[m] = true;
      ++count;
    }
  }
  return count == population_size;
}

double fine_grain_reuse(std::span<const Bucket> buckets, const LevelPopulation& population) {
  const double total = static_cast<double>(population.size() * population.task_count());
  if (total == 0.0) return 0.0;
  return 1.0 - static_cast<double>(total_task_cost(buckets)) / total;
}

}  // namespace reuseplan
