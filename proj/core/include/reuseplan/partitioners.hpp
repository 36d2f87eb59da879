#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "reuseplan/bucket.hpp"

namespace reuseplan {

/// Groups the first B instances, the next B, ... in population order.
std::vector<Bucket> naive_buckets(const PopulationPtr& population, std::size_t max_bucket_size);

/// Dense symmetric weight matrix over n vertices.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n) : n_(n), weights_(n * n, 0) {}

  std::size_t size() const { return n_; }
  std::uint64_t weight(std::size_t i, std::size_t j) const { return weights_[i * n_ + j]; }
  void set_weight(std::size_t i, std::size_t j, std::uint64_t w) {
    weights_[i * n_ + j] = w;
    weights_[j * n_ + i] = w;
  }
  WeightedGraph induced(std::span<const std::size_t> vertices) const;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> weights_;
};

/// Complete graph over `members` weighted by pairwise reuse degree.
WeightedGraph reuse_degree_graph(const LevelPopulation& population,
                                 std::span<const std::size_t> members);

struct Cut {
  std::vector<std::size_t> smaller;  // vertex indices, ascending
  std::vector<std::size_t> larger;
  std::uint64_t value = 0;
};

/// Global minimum 2-cut (Stoer-Wagner). Equal-size sides: the one holding
/// the lowest vertex index is reported as `smaller`. Throws for n < 2.
Cut min_cut_2(const WeightedGraph& graph);

/// Smart Cut: repeatedly 2-cuts the larger side until it fits in a bucket,
/// emits it, removes it and starts over on the remaining instances.
std::vector<Bucket> sca_buckets(const PopulationPtr& population, std::size_t max_bucket_size);

// ---------------------------------------------------------------- oracles

struct OraclePartition {
  std::vector<std::vector<std::size_t>> blocks;
  std::size_t objective = 0;
};

/// Exhaustive optimum over set partitions (subset DP); n <= kOracleLimit.
inline constexpr std::size_t kOracleLimit = 12;

/// Unique task prefixes of a member set, counted without a reuse tree.
std::size_t oracle_block_cost(const LevelPopulation& population,
                              std::span<const std::size_t> members);

/// Minimum sum of bucket costs with every bucket holding <= B members.
OraclePartition oracle_min_total_cost(const LevelPopulation& population,
                                      std::size_t max_bucket_size);
/// Minimum largest bucket cost using at most `max_buckets` buckets.
OraclePartition oracle_min_makespan(const LevelPopulation& population, std::size_t max_buckets);

}  // namespace reuseplan
