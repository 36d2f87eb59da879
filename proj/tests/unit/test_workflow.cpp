#include <gtest/gtest.h>

#include <string>

#include "reuseplan/error.hpp"
#include "reuseplan/workflow.hpp"
#include "test_support.hpp"

using namespace reuseplan;

namespace {

const std::string kData = REUSEPLAN_DATA_DIR;

WorkflowTemplate reference() { return load_workflow(kData + "/reference/workflow.json"); }

ParameterSet reference_set() {
  return ParameterSet({{"B", "220"}, {"G", "220"}, {"R", "220"}, {"T1", "5"}, {"T2", "5"},
                       {"G1", "40"}, {"G2", "20"}, {"minS", "10"}, {"maxS", "1000"},
                       {"minSPL", "40"}, {"minSS", "10"}, {"maxSS", "1000"}, {"FH", "4-conn"},
                       {"RC", "4-conn"}, {"WConn", "4-conn"}});
}

StageTemplate one_task(const std::string& name, std::vector<std::string> args) {
  StageTemplate s;
  s.name = name;
  TaskTemplate t;
  t.id = name + "_t";
  t.call = name;
  t.args = std::move(args);
  s.tasks.push_back(t);
  return s;
}

void expect_kind(ErrorKind kind, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(Workflow, ReferenceFixtureLoads) {
  const auto wf = reference();
  ASSERT_EQ(wf.stage_count(), 3u);
  EXPECT_EQ(wf.stage(0).id, "normalization");
  EXPECT_EQ(wf.stage(1).id, "segmentation");
  EXPECT_EQ(wf.stage(1).stage.task_count(), 7u);
  EXPECT_EQ(wf.consumed_params().size(), 15u);
  EXPECT_EQ(wf.upstream(2), std::vector<std::size_t>{1});
  EXPECT_EQ(wf.level_of("comparison"), 2u);
}

TEST(Workflow, StagesAreTopologicallyOrdered) {
  // Declared out of order: D first.
  WorkflowTemplate wf("w",
                      {{"D", one_task("D", {})}, {"A", one_task("A", {})}, {"B", one_task("B", {})}},
                      {{"A", "B"}, {"B", "D"}});
  EXPECT_EQ(wf.stage(0).id, "A");
  EXPECT_EQ(wf.stage(1).id, "B");
  EXPECT_EQ(wf.stage(2).id, "D");
}

TEST(Workflow, StructuralErrors) {
  expect_kind(ErrorKind::validation, [] {
    WorkflowTemplate("w", {{"A", one_task("A", {})}, {"B", one_task("B", {})}}, {{"A", "B"}, {"B", "A"}});
  });
  expect_kind(ErrorKind::validation,
              [] { WorkflowTemplate("w", {{"A", one_task("A", {})}}, {{"A", "Z"}}); });
  expect_kind(ErrorKind::validation, [] {
    WorkflowTemplate("w", {{"A", one_task("A", {})}, {"B", one_task("B", {})}}, {{"A", "B"}, {"A", "B"}});
  });
  expect_kind(ErrorKind::validation,
              [] { WorkflowTemplate("w", {{"A", one_task("A", {})}, {"A", one_task("A", {})}}, {}); });
}

TEST(StageDescriptor, TaskChainRules) {
  expect_kind(ErrorKind::validation, [] { parse_stage_descriptor(R"({"name":"s","tasks":[]})"); });
  expect_kind(ErrorKind::validation, [] {
    parse_stage_descriptor(R"({"name":"s","tasks":[{"id":"a","call":"f"},{"id":"a","call":"g"}]})");
  });
  // Consuming a product that only a later task makes.
  expect_kind(ErrorKind::validation, [] {
    parse_stage_descriptor(R"({"name":"s","tasks":[
      {"id":"a","call":"f","intertask_in":["x"]},{"id":"b","call":"g","intertask_out":["x"]}]})");
  });
  expect_kind(ErrorKind::parse,
              [] { parse_stage_descriptor(R"({"name":"s","tasks":[{"id":"a","call":"f","argz":[]}]})"); });
  const auto ok = parse_stage_descriptor(R"({"name":"s","inputs_rt":["img"],"tasks":[
      {"id":"a","call":"f","args":["p","q"],"intertask_in":["img"],"intertask_out":["x"]},
      {"id":"b","call":"g","args":["p"],"intertask_in":["x"]}]})");
  EXPECT_EQ(ok.consumed_params(), (std::vector<std::string>{"p", "q"}));
  EXPECT_EQ(ok.products(), std::vector<std::string>{"x"});
}

TEST(Instantiate, MissingParameterIsAValidationError) {
  const auto wf = reference();
  auto set = reference_set();
  ParameterSet partial;
  for (const auto& [k, v] : set.values()) {
    if (k != "G2") partial.set(k, v);
  }
  expect_kind(ErrorKind::validation, [&] { instantiate(wf, partial); });
}

TEST(Instantiate, SignaturesIgnoreUnconsumedParameters) {
  const auto wf = reference();
  auto a = reference_set();
  auto b = a;
  b.set("G2", "22");
  const auto ia = instantiate(wf, a);
  const auto ib = instantiate(wf, b);
  EXPECT_EQ(ia[0].signature, ib[0].signature);  // normalization reads no parameter
  EXPECT_NE(ia[1].signature, ib[1].signature);
  EXPECT_NE(ia[2].signature, ib[2].signature);  // comparison inherits upstream identity
}

TEST(Instantiate, TaskKeysChangeOnlyAtTheConsumer) {
  const auto wf = reference();
  const auto& seg = wf.stage(1).stage;
  auto a = reference_set();
  auto b = a;
  b.set("G2", "22");  // first consumed by t3
  const auto ka = instantiate(wf, a)[1].task_keys(seg);
  const auto kb = instantiate(wf, b)[1].task_keys(seg);
  ASSERT_EQ(ka.size(), 7u);
  EXPECT_EQ(ka[0], kb[0]);
  EXPECT_EQ(ka[1], kb[1]);
  EXPECT_NE(ka[2], kb[2]);
  for (std::size_t d = 3; d < 7; ++d) EXPECT_EQ(ka[d], kb[d]) << d;
}

TEST(Instantiate, ReplicaIdentityNeverMerges) {
  const auto wf = reference();
  const auto s = reference_set();
  const auto a = instantiate(wf, s, 0, InstanceIdentity::replica);
  const auto b = instantiate(wf, s, 1, InstanceIdentity::replica);
  for (std::size_t l = 0; l < a.size(); ++l) EXPECT_NE(a[l].signature, b[l].signature);
  const auto c = instantiate(wf, s, 1, InstanceIdentity::shared);
  EXPECT_EQ(instantiate(wf, s, 0)[1].signature, c[1].signature);
}

TEST(Instantiate, SignatureEscapingPreventsCollisions) {
  WorkflowTemplate wf("w", {{"A", one_task("A", {"x", "y"})}}, {});
  // Without escaping both would encode as x=1;y=2;... variants.
  const auto a = instantiate(wf, ParameterSet({{"x", "1;y=2"}, {"y", "3"}}));
  const auto b = instantiate(wf, ParameterSet({{"x", "1"}, {"y", "2;y=3"}}));
  EXPECT_NE(a[0].signature, b[0].signature);
}
