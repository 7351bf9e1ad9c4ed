#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qdpillar/error.hpp"
#include "qdpillar/physical_model.hpp"

using namespace qdpillar;

TEST_CASE("cavity linewidth from Q and wavelength") {
  CavityParams c;
  // omega / Q by hand: 2 pi * 299792458 / 897.44e-9 / 6124
  const double by_hand = 2.0 * 3.141592653589793 * 299792458.0 / 897.44e-9 / 6124.0;
  CHECK(cavity_linewidth(c) == doctest::Approx(by_hand).epsilon(1e-14));
  CHECK(cavity_linewidth(c) / (2.0 * 3.141592653589793) == doctest::Approx(54.55e9).epsilon(1e-3));
}

TEST_CASE("purcell rate: resonance, half width, far detuned") {
  CavityParams c;
  EmitterParams e;
  const double kappa = cavity_linewidth(c);
  CHECK(1.0 / purcell_rate(0.0, c, e) == doctest::Approx(587.8e-12 / 7.3).epsilon(1e-12));
  // Lorentzian is 1/2 at detuning kappa/2.
  CHECK(purcell_rate(0.5 * kappa, c, e) == doctest::Approx(e.gamma_bulk * (1.0 + 6.3 / 2.0)));
  CHECK(purcell_rate(1e6 * kappa, c, e) == doctest::Approx(e.gamma_bulk).epsilon(1e-9));
  CHECK(purcell_rate(0.3 * kappa, c, e) == doctest::Approx(purcell_rate(-0.3 * kappa, c, e)));
}

TEST_CASE("lifetime curve is the reciprocal of the rate") {
  CavityParams c;
  EmitterParams e;
  const double d[] = {-1e11, 0.0, 2e11};
  const auto curve = lifetime_curve(d, c, e);
  REQUIRE(curve.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(curve[i].lifetime * purcell_rate(d[i], c, e) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lifetime_curve(std::span<const double>{}, c, e), Error);
}

TEST_CASE("invalid parameters are rejected") {
  CavityParams c;
  c.quality_factor = -1.0;
  CHECK_THROWS_AS(cavity_linewidth(c), Error);
  EmitterParams e;
  e.gamma_bulk = 0.0;
  CHECK_THROWS_AS(purcell_rate(0.0, CavityParams{}, e), Error);
  e = {};
  e.diffusion.tau_c = 0.0;
  CHECK_THROWS_AS(e.validate(), Error);
}

TEST_CASE("detuning table interpolates and clamps") {
  DetuningTable t({{10.0, -1.0}, {20.0, 1.0}, {30.0, 5.0}});
  CHECK(t.detuning_at(5.0) == -1.0);
  CHECK(t.detuning_at(15.0) == doctest::Approx(0.0));
  CHECK(t.detuning_at(25.0) == doctest::Approx(3.0));
  CHECK(t.detuning_at(99.0) == 5.0);
  CHECK_THROWS_AS(DetuningTable({{10.0, 0.0}, {10.0, 1.0}}), Error);
  CHECK_THROWS_AS(DetuningTable().detuning_at(1.0), Error);
}
