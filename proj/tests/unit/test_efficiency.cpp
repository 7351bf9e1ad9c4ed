#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "qdpillar/efficiency.hpp"
#include "qdpillar/error.hpp"

using namespace qdpillar;

TEST_CASE("nominal chain") {
  const auto s = nominal_stages();
  // 0.33 * 0.50 * 0.60 * 0.72 * 0.96 * 1.0, multiplied out by hand
  CHECK(chain_efficiency(s) == doctest::Approx(0.0684288).epsilon(1e-12));
  CHECK(chain_efficiency(std::span<const BudgetStage>{}) == 1.0);
  Budget b{s};
  CHECK(overall_system_efficiency(b) == doctest::Approx(3.7e6 / 81e6));
  CHECK(infer_extraction(b, s) == doctest::Approx(3.7e6 / 81e6 / 0.0684288));
  CHECK(round_significant(infer_extraction(b, s), 3) == doctest::Approx(0.668));
}

TEST_CASE("signal and background split") {
  const RateSplit r = signal_background_split(41.0, 40.0);
  CHECK(r.signal == doctest::Approx(40.0));
  CHECK(r.background == doctest::Approx(1.0));
  const RateSplit clean = signal_background_split(5.0, std::numeric_limits<double>::infinity());
  CHECK(clean.background == 0.0);
  CHECK(filtered_snr(40.0, 0.5, 0.02) == doctest::Approx(1000.0));
  CHECK_THROWS_AS(filtered_snr(40.0, 0.5, 0.0), Error);
}

TEST_CASE("invalid stages and zero references") {
  BudgetStage bad{"x", 1.5};
  CHECK_THROWS_AS(bad.validate(), Error);
  const BudgetStage zero[] = {{"dead", 0.0}};
  CHECK_THROWS_AS(chain_efficiency(zero), Error);
  Budget b;
  b.rep_rate = 0.0;
  CHECK_THROWS_AS(overall_system_efficiency(b), Error);
  CHECK(round_significant(0.045678901, 4) == doctest::Approx(0.04568));
}
