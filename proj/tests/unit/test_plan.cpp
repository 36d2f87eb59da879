#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "reuseplan/error.hpp"
#include "reuseplan/figures.hpp"
#include "reuseplan/plan.hpp"
#include "reuseplan/sampling.hpp"
#include "test_support.hpp"

using namespace reuseplan;

namespace {

const std::string kData = REUSEPLAN_DATA_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

PlanOptions options(Algorithm a, std::optional<std::size_t> b = {}, std::optional<std::size_t> mb = {}) {
  PlanOptions o;
  o.algorithm = a;
  o.max_bucket_size = b;
  o.max_buckets = mb;
  return o;
}

struct Reference {
  WorkflowTemplate workflow;
  std::vector<ParameterSet> sets;
};

const Reference& reference() {
  static const Reference r = [] {
    const auto space = parse_parameter_space(slurp(kData + "/reference/space_moat.json"));
    MoatConfig cfg;
    cfg.trajectories = 4;
    cfg.seed = 7;
    return Reference{load_workflow(kData + "/reference/workflow.json"), moat_sample(space, cfg)};
  }();
  return r;
}

}  // namespace

TEST(PlanOptions, ExactlyTheNeededConstraint) {
  EXPECT_NO_THROW(validate_options(options(Algorithm::rtma, 4)));
  EXPECT_NO_THROW(validate_options(options(Algorithm::trtma, {}, 4)));
  EXPECT_NO_THROW(validate_options(options(Algorithm::stage)));
  EXPECT_THROW(validate_options(options(Algorithm::rtma)), Error);
  EXPECT_THROW(validate_options(options(Algorithm::rtma, 4, 2)), Error);
  EXPECT_THROW(validate_options(options(Algorithm::trtma, 4)), Error);
  EXPECT_THROW(validate_options(options(Algorithm::stage, 4)), Error);
  EXPECT_THROW(validate_options(options(Algorithm::naive, 0)), Error);
  EXPECT_THROW(parse_algorithm("greedy"), Error);
  EXPECT_EQ(parse_algorithm("sca"), Algorithm::sca);
  EXPECT_EQ(parse_small_rt(to_string(SmallRtSelection::greatest_reuse)), SmallRtSelection::greatest_reuse);
}

TEST(Plan, DiamondStageAndReplicaPlans) {
  const auto f = figures::fig6();
  const auto stage = make_plan(f.workflow, f.sets, options(Algorithm::stage));
  EXPECT_EQ(stage.buckets.size(), 7u);
  EXPECT_EQ(stage.metrics.replica_instances, 12u);
  EXPECT_EQ(stage.metrics.distinct_instances, 7u);
  EXPECT_NEAR(stage.metrics.stage_reuse, 5.0 / 12.0, 1e-12);
  const auto none = make_plan(f.workflow, f.sets, options(Algorithm::none));
  EXPECT_EQ(none.buckets.size(), 12u);
  EXPECT_EQ(none.metrics.task_cost, none.metrics.replica_tasks);
  EXPECT_DOUBLE_EQ(none.metrics.overall_reuse, 0.0);
}

TEST(Plan, EveryAlgorithmCoversEveryInstance) {
  const auto& r = reference();
  for (const auto& o : {options(Algorithm::stage), options(Algorithm::naive, 5), options(Algorithm::sca, 5),
                        options(Algorithm::rtma, 5), options(Algorithm::trtma, {}, 6)}) {
    const auto plan = make_plan(r.workflow, r.sets, o);
    std::size_t cost = 0;
    for (std::size_t l = 0; l < plan.levels.size(); ++l) {
      std::vector<Bucket> level;
      for (const auto& b : plan.buckets) {
        if (b.level() == l) level.push_back(b);
      }
      ASSERT_TRUE(is_partition(level, plan.levels[l].population->size())) << to_string(o.algorithm);
      for (const auto& b : level) {
        EXPECT_EQ(b.task_cost(), testing_support::prefix_count(*plan.levels[l].population, b.members));
      }
      cost += total_task_cost(level);
    }
    EXPECT_EQ(plan.metrics.task_cost, cost);
    EXPECT_LE(plan.metrics.fine_grain_reuse, plan.metrics.max_fine_grain_reuse + 1e-12);
    EXPECT_NEAR(plan.metrics.overall_reuse,
                1.0 - static_cast<double>(cost) / static_cast<double>(plan.metrics.replica_tasks), 1e-12);
  }
}

TEST(Plan, JsonRoundTripIsByteIdentical) {
  const auto& r = reference();
  auto o = options(Algorithm::rtma, 4);
  o.trace = true;
  const auto plan = make_plan(r.workflow, r.sets, o);
  const auto text = plan_to_json(plan);
  EXPECT_EQ(text, plan_to_json(make_plan(r.workflow, r.sets, o)));
  const auto back = parse_plan(text);
  EXPECT_EQ(plan_to_json(back), text);
  EXPECT_EQ(back.buckets.size(), plan.buckets.size());
  EXPECT_EQ(back.metrics.task_cost, plan.metrics.task_cost);
}

TEST(Plan, ParseRejectsInconsistentDocuments) {
  const auto& r = reference();
  const auto text = plan_to_json(make_plan(r.workflow, r.sets, options(Algorithm::rtma, 4)));
  EXPECT_THROW(parse_plan("{"), Error);
  EXPECT_THROW(parse_plan("{}"), Error);
  auto tampered = text;
  const auto at = tampered.find("\"task_cost\": ");
  ASSERT_NE(at, std::string::npos);
  tampered.insert(at + 13, "1");
  EXPECT_THROW(parse_plan(tampered), Error);
}
