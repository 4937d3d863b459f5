#include <catch2/catch_amalgamated.hpp>

#include "rsgd/statistics.hpp"

TEST_CASE("summary statistics over a small sample") {
  const std::vector<double> errors = {0.5, 0.1, 0.4, 0.2};
  const auto stats = rsgd::summarize_errors(errors, 0.25);
  CHECK_THAT(stats.mean, Catch::Matchers::WithinAbs(0.3, 1e-15));
  CHECK_THAT(stats.median, Catch::Matchers::WithinAbs(0.3, 1e-15));
  CHECK(stats.min == 0.1);
  CHECK(stats.max == 0.5);
  CHECK(stats.fraction_below_delta == 0.5);
  // sample variance with n - 1 denominator
  CHECK_THAT(stats.variance, Catch::Matchers::WithinAbs((0.04 + 0.04 + 0.01 + 0.01) / 3.0, 1e-15));
}

TEST_CASE("ordering invariant min <= median <= max") {
  const auto stats = rsgd::summarize_errors({3.0, 1.0, 2.0, 9.0, 5.0}, 2.5);
  CHECK(stats.min <= stats.median);
  CHECK(stats.median <= stats.max);
  CHECK(stats.median == 3.0);
  CHECK(stats.fraction_below_delta == 0.4);
}

TEST_CASE("degenerate samples") {
  const auto single = rsgd::summarize_errors({0.7}, 1.0);
  CHECK(single.mean == 0.7);
  CHECK(single.variance == 0.0);
  CHECK(single.fraction_below_delta == 1.0);
  CHECK_THROWS_AS(rsgd::summarize_errors({}, 1.0), std::invalid_argument);
}
