#pragma once

// Independent helpers for tests: brute-force counters that never touch the
// reuse tree, and small random inputs.

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "reuseplan/reuse_tree.hpp"
#include "reuseplan/rng.hpp"
#include "reuseplan/workflow.hpp"

namespace testing_support {

using reuseplan::LevelPopulation;
using reuseplan::PopulationPtr;

/// Distinct key prefixes of the given members: the task cost of merging them.
inline std::size_t prefix_count(const LevelPopulation& pop, const std::vector<std::size_t>& members) {
  std::set<std::vector<std::string>> prefixes;
  for (auto m : members) {
    const auto& keys = pop.entry(m).task_keys;
    for (std::size_t d = 1; d <= keys.size(); ++d) prefixes.emplace(keys.begin(), keys.begin() + d);
  }
  return prefixes.size();
}

inline std::vector<std::size_t> all_members(const LevelPopulation& pop) {
  std::vector<std::size_t> out(pop.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

/// n stages of k tasks whose keys come from a small alphabet, so prefixes
/// collide often. Duplicate key paths are allowed.
inline PopulationPtr random_population(reuseplan::Rng& rng, std::size_t n, std::size_t k,
                                       std::size_t alphabet = 2) {
  std::vector<reuseplan::StageEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    reuseplan::StageEntry e;
    e.label = "s" + std::to_string(i);
    for (std::size_t d = 0; d < k; ++d) e.task_keys.push_back("v" + std::to_string(rng.below(alphabet)));
    entries.push_back(std::move(e));
  }
  return reuseplan::make_population(0, "random", k, std::move(entries));
}

/// Every set partition of {0..n-1}, via restricted growth strings.
inline std::vector<std::vector<std::vector<std::size_t>>> set_partitions(std::size_t n) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  std::vector<std::size_t> a(n, 0);
  while (true) {
    std::size_t blocks = 0;
    for (auto x : a) blocks = std::max(blocks, x + 1);
    std::vector<std::vector<std::size_t>> p(blocks);
    for (std::size_t i = 0; i < n; ++i) p[a[i]].push_back(i);
    out.push_back(p);
    // Next restricted growth string.
    std::size_t i = n;
    while (i-- > 1) {
      std::size_t max_before = 0;
      for (std::size_t j = 0; j < i; ++j) max_before = std::max(max_before, a[j]);
      if (a[i] <= max_before) {
        ++a[i];
        for (std::size_t j = i + 1; j < n; ++j) a[j] = 0;
        break;
      }
    }
    if (i == 0 || n <= 1) break;
  }
  return out;
}

/// One stage template with `k` tasks; task d consumes parameter p<d>.
inline reuseplan::StageTemplate chain_stage(const std::string& name, std::size_t k) {
  reuseplan::StageTemplate s;
  s.name = name;
  for (std::size_t d = 1; d <= k; ++d) {
    reuseplan::TaskTemplate t;
    t.id = "t" + std::to_string(d);
    t.call = "op" + std::to_string(d);
    t.args = {"p" + std::to_string(d)};
    s.tasks.push_back(t);
  }
  return s;
}

}  // namespace testing_support
