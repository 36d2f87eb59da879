#pragma once

#include <string>
#include <utility>
#include <vector>

#include "reuseplan/bucket.hpp"
#include "reuseplan/parameters.hpp"
#include "reuseplan/reuse_tree.hpp"
#include "reuseplan/workflow.hpp"

/// Small hand-built inputs that mirror the worked examples used throughout
/// the test suite and by `reuseplan replay-figure`.
namespace reuseplan::figures {

/// Builds a population whose task keys are given verbatim.
PopulationPtr population_from_paths(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& stages,
    const std::string& template_name = "fixture");

/// Index of the stage labelled `label`; throws when absent.
std::size_t index_of(const LevelPopulation& population, const std::string& label);
std::vector<std::size_t> indices_of(const LevelPopulation& population,
                                    const std::vector<std::string>& labels);

/// Diamond A -> {B, C} -> D, one task per stage consuming two parameters,
/// and three parameter sets that share progressively more stages.
struct DiamondFixture {
  WorkflowTemplate workflow;
  std::vector<ParameterSet> sets;
};
DiamondFixture fig6();

/// Four stages a-d (3 tasks on p1, p2, p3) and the extra stage x.
PopulationPtr fig8(bool with_x);

/// 12 stages a-l, k = 3, grouped under depth-1 nodes n1..n4.
PopulationPtr fig9();

/// Three stages; two share their first task, so Full-Merge must descend once.
PopulationPtr fig10();

/// Root children with 3 and 1 stages: Full-Merge overshoots to 4 buckets.
PopulationPtr fig11();

/// Eleven stages S1..S11 and the three buckets of costs 8, 9 and 5.
struct BalanceFixture {
  PopulationPtr population;
  std::vector<std::vector<std::size_t>> buckets;
};
BalanceFixture fig12();
BalanceFixture fig17a();
BalanceFixture fig17b();

/// Sibling subtrees with identical shapes, plus a disjoint small bucket.
BalanceFixture fig18();

/// Two segmentation buckets with equal task counts and different topologies.
std::pair<Bucket, Bucket> fig16();

/// JSON report for `reuseplan replay-figure <n>`.
std::string replay_figure(int figure);
inline constexpr int kReplayableFigures[] = {6, 8, 9, 10, 11, 12, 16, 17, 18};

}  // namespace reuseplan::figures
