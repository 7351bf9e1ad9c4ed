#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qdpillar/error.hpp"
#include "qdpillar/hom.hpp"

using namespace qdpillar;

TEST_CASE("pair overlap against the double time integral") {
  using boost::math::quadrature::gauss_kronrod;
  const double gamma = 1.0 / 83.9e-12;
  for (double gd : {0.0, 0.1 * gamma, gamma})
    for (double delta : {0.0, 0.7 * gamma, 3.0 * gamma}) {
      auto inner = [&](double t) {
        auto f = [&](double tau) {
          return 2.0 * gamma * gamma * std::exp(-gamma * (2.0 * t + tau) - 2.0 * gd * tau) *
                 std::cos(delta * tau);
        };
        return gauss_kronrod<double, 31>::integrate(f, 0.0, 60.0 / gamma, 8, 1e-11);
      };
      const double oracle = gauss_kronrod<double, 31>::integrate(inner, 0.0, 40.0 / gamma, 8, 1e-11);
      CHECK(pair_overlap(gamma, gd, delta) == doctest::Approx(oracle).epsilon(1e-6));
    }
  CHECK(pair_overlap(1.0, 0.0, 0.0) == 1.0);
}

TEST_CASE("Ornstein-Uhlenbeck path: stationary variance and autocorrelation") {
  const double tau_c = 1.0, sigma = 2.0, dt = 0.25;
  std::vector<double> t(200'000);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dt * static_cast<double>(i);
  const auto x = ou_path(tau_c, sigma, t, 77);
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.03));
  for (int lag : {1, 4, 8}) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < x.size(); ++i) c += (x[i] - mean) * (x[i + lag] - mean);
    c /= (n - lag) * var;
    CHECK(std::abs(c - std::exp(-lag * dt / tau_c)) < 0.02);
  }
  CHECK(ou_path(tau_c, sigma, t, 77) == x);
}

TEST_CASE("visibility arithmetic") {
  const double delay = 2e-9;
  Histogram par = Histogram::centered(2.5 * delay, 20e-12);
  Histogram cross = par;
  par.add(0.0, 10);
  cross.add(0.0, 100);
  for (double s : {-1.0, 1.0}) {
    par.add(s * delay, 200);
    cross.add(s * delay, 200);
  }
  const Visibility v = visibility_raw(par, cross, delay);
  CHECK(v.value == doctest::Approx(0.9));
  CHECK(v.stderr == doctest::Approx(std::sqrt(10.0 / 1e4 + 0.01 * 100.0 / 1e4)).epsilon(1e-9));
  CHECK(visibility_corrected(0.96, 0.012) == doctest::Approx(0.984));
  CHECK(visibility_corrected(0.96, 0.012, CorrectionStrategy::None) == 0.96);
  CHECK_THROWS_AS(visibility_raw(par, Histogram::centered(2.5 * delay, 20e-12), delay), Error);
  const auto peaks = cluster_peak_areas(cross, delay);
  REQUIRE(peaks.size() == 5);
  CHECK(peaks[2].area == 100.0);
  CHECK(peaks[1].area == 200.0);
}

TEST_CASE("ideal emitter: near-unity visibility, cross peaks balanced") {
  HomSource src;
  src.emission.pulse.fwhm = 0.3e-12;
  HomConfig cfg;
  cfg.n_pairs = 100'000;
  const HomRun run = run_hom(cfg, src, 0.0, HomSettings{}, 3, 0);
  CHECK(run.raw.value > 0.99);
  CHECK(std::abs(run.cross_central_z) < 3.0);
  // Unbalanced splitter: M = 1 leaves (T - R)^2 / (T^2 + R^2) of the cross rate.
  cfg.splitter_t = 0.7;
  cfg.splitter_r = 0.3;
  const HomRun skew = run_hom(cfg, src, 0.0, HomSettings{}, 3, 0);
  CHECK(skew.raw.value == doctest::Approx(1.0 - 0.16 / 0.58).epsilon(0.02));
}

TEST_CASE("dephasing lowers visibility toward gamma / (gamma + 2 gamma_d)") {
  HomSource src;
  src.emission.pulse.fwhm = 0.3e-12;
  src.emission.rates.gamma_dephasing = 0.25 * src.emission.rates.gamma;
  HomConfig cfg;
  cfg.n_pairs = 100'000;
  const HomRun run = run_hom(cfg, src, 0.0, HomSettings{}, 4, 0);
  CHECK(std::abs(run.raw.value - 1.0 / 1.5) < 4.0 * run.raw.stderr + 0.01);
}

TEST_CASE("HOM histograms independent of thread count") {
  HomSource src;
  HomConfig cfg;
  cfg.n_pairs = 20'000;
  const Histogram a = hom_histogram(cfg, src, 20e-12, 5e-9, 8, 1);
  const Histogram b = hom_histogram(cfg, src, 20e-12, 5e-9, 8, 4);
  CHECK(a == b);
  cfg.splitter_t = 0.8;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
