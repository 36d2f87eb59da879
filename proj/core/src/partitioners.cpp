#include "reuseplan/partitioners.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>
#include <string>

#include "reuseplan/error.hpp"

namespace reuseplan {
namespace {

void check_bucket_size(std::size_t max_bucket_size) {
  if (max_bucket_size < 1) fail(ErrorKind::config, "MaxBucketSize must be >= 1");
}

std::vector<std::size_t> mask_members(std::uint32_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1U) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> all_block_costs(const LevelPopulation& population) {
  const auto n = population.size();
  if (n > kOracleLimit) {
    fail(ErrorKind::limit, "oracle limited to " + std::to_string(kOracleLimit) + " instances");
  }
  std::vector<std::size_t> cost(std::size_t{1} << n, 0);
  for (std::uint32_t mask = 1; mask < cost.size(); ++mask) {
    cost[mask] = oracle_block_cost(population, mask_members(mask));
  }
  return cost;
}

}  // namespace

std::vector<Bucket> naive_buckets(const PopulationPtr& population, std::size_t max_bucket_size) {
  check_bucket_size(max_bucket_size);
  std::vector<Bucket> out;
  const auto n = population->size();
  for (std::size_t start = 0; start < n; start += max_bucket_size) {
    std::vector<std::size_t> members;
    for (std::size_t i = start; i < std::min(n, start + max_bucket_size); ++i) members.push_back(i);
    out.emplace_back(population, std::move(members));
  }
  return out;
}

WeightedGraph WeightedGraph::induced(std::span<const std::size_t> vertices) const {
  WeightedGraph g(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      g.set_weight(i, j, weight(vertices[i], vertices[j]));
    }
  }
  return g;
}

WeightedGraph reuse_degree_graph(const LevelPopulation& population,
                                 std::span<const std::size_t> members) {
  WeightedGraph g(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      g.set_weight(i, j, reuse_degree(population.entry(members[i]), population.entry(members[j])));
    }
  }
  return g;
}

Cut min_cut_2(const WeightedGraph& graph) {
  const auto n = graph.size();
  if (n < 2) fail(ErrorKind::validation, "a 2-cut needs at least two vertices");
  std::vector<std::uint64_t> w(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) w[i * n + j] = i == j ? 0 : graph.weight(i, j);
  }
  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[i] = {i};
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;

  auto best_value = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::size_t> best_side;
  std::vector<std::uint64_t> attach(n);
  std::vector<bool> added(n);
  while (active.size() > 1) {
    // Maximum-adjacency ordering; ties go to the lowest vertex index.
    for (auto v : active) {
      attach[v] = 0;
      added[v] = false;
    }
    std::size_t prev = active.front();
    std::size_t last = active.front();
    for (std::size_t step = 0; step < active.size(); ++step) {
      std::size_t pick = n;
      for (auto v : active) {
        if (!added[v] && (pick == n || attach[v] > attach[pick])) pick = v;
      }
      added[pick] = true;
      prev = last;
      last = pick;
      for (auto v : active) {
        if (!added[v]) attach[v] += w[pick * n + v];
      }
    }
    if (attach[last] < best_value) {
      best_value = attach[last];
      best_side = groups[last];
    }
    // Contract `last` into `prev`.
    groups[prev].insert(groups[prev].end(), groups[last].begin(), groups[last].end());
    for (auto v : active) {
      w[prev * n + v] += w[last * n + v];
      w[v * n + prev] = w[prev * n + v];
    }
    w[prev * n + prev] = 0;
    active.erase(std::find(active.begin(), active.end(), last));
  }

  std::sort(best_side.begin(), best_side.end());
  std::vector<bool> in_side(n, false);
  for (auto v : best_side) in_side[v] = true;
  std::vector<std::size_t> other;
  for (std::size_t v = 0; v < n; ++v) {
    if (!in_side[v]) other.push_back(v);
  }
  Cut cut;
  cut.value = best_value;
  const bool side_first = best_side.size() < other.size() ||
                          (best_side.size() == other.size() && best_side.front() < other.front());
  cut.smaller = side_first ? best_side : other;
  cut.larger = side_first ? other : best_side;
  return cut;
}

std::vector<Bucket> sca_buckets(const PopulationPtr& population, std::size_t max_bucket_size) {
  check_bucket_size(max_bucket_size);
  std::vector<std::size_t> all(population->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto full = reuse_degree_graph(*population, all);

  std::vector<Bucket> out;
  std::vector<std::size_t> remaining = all;
  while (!remaining.empty()) {
    if (remaining.size() <= max_bucket_size) {
      out.emplace_back(population, remaining);
      break;
    }
    std::vector<std::size_t> s1 = remaining;
    while (s1.size() > max_bucket_size) {
      const auto cut = min_cut_2(full.induced(s1));
      // Equal sides: the side with the lowest index is reported as `smaller`.
      const auto& keep = cut.larger.size() > cut.smaller.size() ? cut.larger : cut.smaller;
      std::vector<std::size_t> next;
      next.reserve(keep.size());
      for (auto v : keep) next.push_back(s1[v]);
      s1 = std::move(next);
    }
    std::vector<bool> taken(population->size(), false);
    for (auto m : s1) taken[m] = true;
    std::erase_if(remaining, [&](std::size_t m) { return taken[m]; });
    out.emplace_back(population, std::move(s1));
  }
  return out;
}

std::size_t oracle_block_cost(const LevelPopulation& population, std::span<const std::size_t> members) {
  std::set<std::vector<std::string>> prefixes;
  for (auto m : members) {
    const auto& keys = population.entry(m).task_keys;
    for (std::size_t d = 1; d <= keys.size(); ++d) {
      prefixes.emplace(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(d));
    }
  }
  return prefixes.size();
}

OraclePartition oracle_min_total_cost(const LevelPopulation& population, std::size_t max_bucket_size) {
  check_bucket_size(max_bucket_size);
  const auto cost = all_block_costs(population);
  const std::uint32_t full = static_cast<std::uint32_t>(cost.size() - 1);
  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(cost.size(), kInf);
  std::vector<std::uint32_t> choice(cost.size(), 0);
  best[0] = 0;
  for (std::uint32_t mask = 1; mask <= full && full != 0; ++mask) {
    const std::uint32_t low = mask & (~mask + 1);
    for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
      if (!(sub & low) || static_cast<std::size_t>(std::popcount(sub)) > max_bucket_size) continue;
      const auto rest = best[mask ^ sub];
      if (rest == kInf) continue;
      if (cost[sub] + rest < best[mask]) {
        best[mask] = cost[sub] + rest;
        choice[mask] = sub;
      }
    }
  }
  OraclePartition out;
  out.objective = best[full];
  for (auto mask = full; mask != 0; mask ^= choice[mask]) out.blocks.push_back(mask_members(choice[mask]));
  return out;
}

OraclePartition oracle_min_makespan(const LevelPopulation& population, std::size_t max_buckets) {
  if (max_buckets < 1) fail(ErrorKind::config, "MaxBuckets must be >= 1");
  const auto cost = all_block_costs(population);
  const std::uint32_t full = static_cast<std::uint32_t>(cost.size() - 1);
  const auto n = population.size();
  const auto blocks = std::min(max_buckets, std::max<std::size_t>(n, 1));
  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  // best[j][mask]: smallest makespan covering `mask` with at most j blocks.
  std::vector<std::vector<std::size_t>> best(blocks + 1, std::vector<std::size_t>(cost.size(), kInf));
  std::vector<std::vector<std::uint32_t>> choice(blocks + 1, std::vector<std::uint32_t>(cost.size(), 0));
  for (std::size_t j = 0; j <= blocks; ++j) best[j][0] = 0;
  for (std::size_t j = 1; j <= blocks; ++j) {
    for (std::uint32_t mask = 1; mask <= full && full != 0; ++mask) {
      const std::uint32_t low = mask & (~mask + 1);
      for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
        if (!(sub & low)) continue;
        const auto rest = best[j - 1][mask ^ sub];
        if (rest == kInf) continue;
        const auto value = std::max(cost[sub], rest);
        if (value < best[j][mask]) {
          best[j][mask] = value;
          choice[j][mask] = sub;
        }
      }
    }
  }
  OraclePartition out;
  out.objective = best[blocks][full];
  auto j = blocks;
  for (auto mask = full; mask != 0; --j) {
    const auto sub = choice[j][mask];
    out.blocks.push_back(mask_members(sub));
    mask ^= sub;
  }
  return out;
}

}  // namespace reuseplan
