#include <catch2/catch_amalgamated.hpp>

#include "rsgd/restart.hpp"

using rsgd::RestartPolicy;
using rsgd::restart_trigger_iterations;

TEST_CASE("trigger sequence follows floor growth with strict-increase guard") {
  CHECK(restart_trigger_iterations(RestartPolicy(100, 1.56), 400) ==
        std::vector<std::int64_t>{100, 156, 243, 379});
  CHECK(restart_trigger_iterations(RestartPolicy(1, 2.0), 10) ==
        std::vector<std::int64_t>{1, 2, 4, 8});
}

TEST_CASE("trigger count at a long training horizon") {
  // 30 passes over 91044 examples; floor growth from 100 by a factor 1.56.
  const auto triggers = restart_trigger_iterations(RestartPolicy(100, 1.56), 30 * 91044);
  CHECK(triggers.size() == 23);
  CHECK(triggers.front() == 100);
  CHECK(triggers.back() == 1765999);
}

TEST_CASE("triggers are strictly increasing with non-decreasing gaps") {
  const auto triggers = restart_trigger_iterations(RestartPolicy(100, 1.56), 3'000'000);
  REQUIRE(triggers.size() > 3);
  std::int64_t prev_gap = 0;
  for (std::size_t i = 1; i < triggers.size(); ++i) {
    const std::int64_t gap = triggers[i] - triggers[i - 1];
    CHECK(gap > 0);
    CHECK(gap >= prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("growth barely above one still increases strictly") {
  const auto triggers = restart_trigger_iterations(RestartPolicy(1, 1.0001), 12);
  for (std::size_t i = 1; i < triggers.size(); ++i) CHECK(triggers[i] > triggers[i - 1]);
  CHECK(triggers.front() == 1);
}

TEST_CASE("invalid policies are rejected at construction") {
  CHECK_THROWS_AS(RestartPolicy(0, 1.56), std::invalid_argument);
  CHECK_THROWS_AS(RestartPolicy(-5, 1.56), std::invalid_argument);
  CHECK_THROWS_AS(RestartPolicy(100, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RestartPolicy(100, 0.9), std::invalid_argument);
}
