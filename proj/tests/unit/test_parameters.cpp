#include <gtest/gtest.h>

#include <cmath>

#include "reuseplan/error.hpp"
#include "reuseplan/parameters.hpp"

using namespace reuseplan;

TEST(CanonicalDecimal, ShortestRoundTrip) {
  EXPECT_EQ(canonical_decimal(0.1), "0.1");
  EXPECT_EQ(canonical_decimal(2.5), "2.5");
  EXPECT_EQ(canonical_decimal(210.0), "210");
  EXPECT_EQ(canonical_decimal(-0.0), "0");
  EXPECT_EQ(canonical_decimal(-3.25), "-3.25");
}

TEST(EscapeToken, SeparatorsAreEscaped) {
  EXPECT_EQ(escape_token("plain"), "plain");
  EXPECT_EQ(escape_token("a=b;c"), "a\\=b\\;c");
  EXPECT_EQ(escape_token("x\\y"), "x\\\\y");
}

TEST(ParameterSpec, GridLevelsAreRoundedToTheStep) {
  ParameterSpec t("T1", GridRange{2.5, 7.5, 0.5});
  ASSERT_EQ(t.level_count(), 11u);
  EXPECT_EQ(t.value_at(0), "2.5");
  EXPECT_EQ(t.value_at(1), "3");
  EXPECT_EQ(t.value_at(10), "7.5");
  EXPECT_EQ(t.index_of("5.5"), 6u);
  EXPECT_FALSE(t.index_of("5.25").has_value());
  EXPECT_DOUBLE_EQ(t.numeric_at(3), 4.0);

  ParameterSpec tenths("x", GridRange{0.1, 0.9, 0.1});
  EXPECT_EQ(tenths.level_count(), 9u);
  EXPECT_EQ(tenths.value_at(2), "0.3");
}

TEST(ParameterSpec, SnapTiesGoTowardMin) {
  ParameterSpec two("x", GridRange{0, 1, 1});
  EXPECT_EQ(two.snap_unit(0.5), 0u);
  EXPECT_EQ(two.snap_unit(0.5000001), 1u);
  ParameterSpec b("B", GridRange{210, 240, 10});
  EXPECT_EQ(b.snap_unit(0.0), 0u);
  EXPECT_EQ(b.snap_unit(1.0 / 3.0), 1u);
  EXPECT_EQ(b.snap_unit(2.0 / 3.0), 2u);
  EXPECT_EQ(b.snap_unit(1.0), 3u);
}

TEST(ParameterSpec, CategoricalSnapUsesFloor) {
  ParameterSpec fh("FH", CategoricalValues{{"4-conn", "8-conn"}});
  EXPECT_FALSE(fh.is_grid());
  EXPECT_EQ(fh.snap_unit(0.0), 0u);
  EXPECT_EQ(fh.snap_unit(0.49), 0u);
  EXPECT_EQ(fh.snap_unit(0.5), 1u);
  EXPECT_EQ(fh.snap_unit(1.0), 1u);
}

TEST(ParameterSpec, SingleValueIsNotVaried) {
  ParameterSpec c("B", GridRange{220, 220, 10});
  EXPECT_EQ(c.level_count(), 1u);
  EXPECT_FALSE(c.varied());
}

TEST(ParameterSpec, RejectsBadRanges) {
  EXPECT_THROW(ParameterSpec("x", GridRange{1, 0, 1}), Error);
  EXPECT_THROW(ParameterSpec("x", GridRange{0, 1, 0}), Error);
  EXPECT_THROW(ParameterSpec("x", CategoricalValues{}), Error);
}

TEST(ParameterSet, EncodeIsOrderedAndEscaped) {
  ParameterSet s;
  s.set("b", "2");
  s.set("a", "x;y");
  EXPECT_EQ(s.encode(), "a=x\\;y;b=2");
  const auto r = s.restrict_to({"b", "missing"});
  EXPECT_EQ(r.encode(), "b=2");
}

TEST(ParameterSpace, ValidateRejectsUnknownAndOffGrid) {
  ParameterSpace space({ParameterSpec("x", GridRange{0, 4, 2})});
  ParameterSet ok(std::map<std::string, std::string>{{"x", "2"}});
  EXPECT_NO_THROW(space.validate(ok));
  try {
    space.validate(ParameterSet(std::map<std::string, std::string>{{"x", "3"}}));
    FAIL() << "off-grid value accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
  }
  EXPECT_THROW(space.validate(ParameterSet(std::map<std::string, std::string>{{"y", "0"}})), Error);
}

TEST(ParameterSpace, ReferenceCardinalityIsAboutTwentyOneTrillion) {
  const char* text = R"({"params":[
    {"name":"B","kind":"grid","min":210,"max":240,"step":10},
    {"name":"G","kind":"grid","min":210,"max":240,"step":10},
    {"name":"R","kind":"grid","min":210,"max":240,"step":10},
    {"name":"T1","kind":"grid","min":2.5,"max":7.5,"step":0.5},
    {"name":"T2","kind":"grid","min":2.5,"max":7.5,"step":0.5},
    {"name":"G1","kind":"grid","min":5,"max":80,"step":5},
    {"name":"G2","kind":"grid","min":2,"max":40,"step":2},
    {"name":"minS","kind":"grid","min":2,"max":40,"step":2},
    {"name":"maxS","kind":"grid","min":900,"max":1500,"step":50},
    {"name":"minSPL","kind":"grid","min":5,"max":80,"step":5},
    {"name":"minSS","kind":"grid","min":2,"max":40,"step":2},
    {"name":"maxSS","kind":"grid","min":900,"max":1500,"step":50},
    {"name":"FH","kind":"categorical","values":["4-conn","8-conn"]},
    {"name":"RC","kind":"categorical","values":["4-conn","8-conn"]},
    {"name":"WConn","kind":"categorical","values":["4-conn","8-conn"]}]})";
  const auto space = parse_parameter_space(text);
  // 4^3 * 11^2 * 16 * 20 * 20 * 13 * 16 * 20 * 13 * 2^3
  const double expected = 64.0 * 121 * 16 * 20 * 20 * 13 * 16 * 20 * 13 * 8;
  EXPECT_DOUBLE_EQ(space.cardinality(), expected);
  EXPECT_GT(space.cardinality(), 2.0e13);
  EXPECT_LT(space.cardinality(), 2.2e13);
  EXPECT_EQ(space.varied_indices().size(), 15u);
}

TEST(ParameterSpace, JsonRoundTrip) {
  const auto space = parse_parameter_space(
      R"({"params":[{"name":"x","kind":"grid","min":0,"max":1,"step":0.25},
                    {"name":"c","kind":"categorical","values":["a","b"]}]})");
  const auto again = parse_parameter_space(parameter_space_to_json(space));
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again.params()[0].level_count(), 5u);
  EXPECT_EQ(again.params()[1].value_at(1), "b");
}

TEST(ParameterSpace, ParseErrorsAreTyped) {
  try {
    parse_parameter_space("{not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
  EXPECT_THROW(parse_parameter_space(R"({"params":[],"extra":1})"), Error);
  EXPECT_THROW(parse_parameter_space(R"({"params":[{"name":"x","kind":"ring"}]})"), Error);
  EXPECT_THROW(parse_parameter_space(
                   R"({"params":[{"name":"x","kind":"grid","min":0,"max":1,"step":1,"bogus":2}]})"),
               Error);
}
