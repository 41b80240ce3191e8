#include <gtest/gtest.h>

#include "patpoisson/errors.hpp"
#include "patpoisson/report_json.hpp"

using namespace patpoisson;

namespace {

template <typename T, typename Decode>
void expect_round_trip(const T& value, Decode decode) {
  const Json first = to_json(value);
  const Json again = to_json(decode(Json::parse(first.dump())));
  EXPECT_EQ(first.dump(), again.dump());
}

}  // namespace

TEST(ScalarJson, ExactAndLogForms) {
  const Json exact = to_json(BigScalar(Rational(-3, 8)));
  EXPECT_EQ(exact["display"], "-3.75000e-1");
  EXPECT_EQ(exact["exact"], "-3/8");
  EXPECT_EQ(big_scalar_from_json(exact), BigScalar(Rational(-3, 8)));

  const BigScalar huge = factorial(1000000);
  const Json j = to_json(huge);
  EXPECT_TRUE(j["exact"].is_null());
  EXPECT_EQ(j["display"], "8.26393e5565708");
  EXPECT_EQ(to_json(big_scalar_from_json(j)).dump(), j.dump());

  EXPECT_EQ(big_scalar_from_json(to_json(BigScalar())), BigScalar());
}

TEST(ScalarJson, MalformedInputIsInvalid) {
  EXPECT_THROW(big_scalar_from_json(Json::parse(R"({"display":"1"})")), InvalidInput);
}

TEST(ReportJson, UniformRoundTrip) {
  expect_round_trip(uniform_classical_bounds(1000, 133, D2Method::crude), uniform_report_from_json);
  expect_round_trip(uniform_classical_bounds(12, 3, D2Method::exact_overlap, Pattern::parse("132")), uniform_report_from_json);
  expect_round_trip(uniform_consecutive_bounds(1000000, 11, D2Method::crude), uniform_report_from_json);
}

TEST(ReportJson, MallowsRoundTrip) {
  expect_round_trip(mallows_consecutive_bounds(100, BigScalar(Rational(1, 2)), Pattern::parse("2341")),
                    mallows_report_from_json);
  expect_round_trip(monotone_mallows_bounds(100, 4, BigScalar(2), Monotone::decreasing), mallows_report_from_json);
}

TEST(ReportJson, OtherReportsRoundTrip) {
  expect_round_trip(fixed_point_bound(9), fixed_point_bound_from_json);
  expect_round_trip(sequential_overlap(Pattern::parse("2341"), 1), overlap_table_from_json);
  expect_round_trip(exact_distribution(6, Pattern::parse("123"), Mode::consecutive, Measure{Rational(2)}),
                    distribution_from_json);
  MonteCarloOptions mc;
  mc.samples = 1000;
  expect_round_trip(monte_carlo_distribution(20, Pattern::parse("123"), Mode::consecutive, {}, mc), distribution_from_json);
  expect_round_trip(certify_consecutive(6, Pattern::parse("132"), Rational(1)), certification_from_json);
  expect_round_trip(sampler_goodness_of_fit(3, Rational(1), Strategy::ordering, 1000, 1), stat_test_from_json);
}

TEST(ReportJson, OverlapDecodeChecksCount) {
  Json j = to_json(sequential_overlap(Pattern::parse("2341"), 1));
  j["count"] = 9;
  EXPECT_THROW(overlap_table_from_json(j), InvalidInput);
}
