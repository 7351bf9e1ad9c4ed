#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qdpillar/error.hpp"
#include "qdpillar/fitting.hpp"
#include "qdpillar/least_squares.hpp"

using namespace qdpillar;

TEST_CASE("Rosenbrock valley") {
  auto r = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(2);
    out << 10.0 * (x(1) - x(0) * x(0)), 1.0 - x(0);
    return out;
  };
  const FitResult f = least_squares(r, Eigen::Vector2d(-1.2, 1.0), ParameterBounds::unbounded(2));
  CHECK(f.converged);
  CHECK(f.params(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(f.params(1) == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t i = 1; i < f.cost_history.size(); ++i)
    CHECK(f.cost_history[i] <= f.cost_history[i - 1]);
}

TEST_CASE("exponential fit agrees with a brute-force grid search") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<double> t, y;
  for (int i = 0; i < 40; ++i) {
    t.push_back(0.1 * i);
    y.push_back(1.5 * std::exp(-0.8 * t.back()) + noise(gen));
  }
  auto cost = [&](double a, double b) {
    double c = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) c += std::pow(a * std::exp(-b * t[i]) - y[i], 2);
    return c;
  };
  double best = std::numeric_limits<double>::infinity(), ba = 0.0, bb = 0.0;
  for (double a = 1.3; a <= 1.7; a += 0.0005)
    for (double b = 0.6; b <= 1.0; b += 0.0005)
      if (const double c = cost(a, b); c < best) best = c, ba = a, bb = b;
  auto r = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) out(static_cast<Eigen::Index>(i)) = p(0) * std::exp(-p(1) * t[i]) - y[i];
    return out;
  };
  const FitResult f = least_squares(r, Eigen::Vector2d(1.0, 0.3), ParameterBounds::unbounded(2));
  CHECK(f.converged);
  CHECK(2.0 * f.cost_history.back() <= best + 1e-12);
  CHECK(std::abs(f.params(0) - ba) <= 0.0005);
  CHECK(std::abs(f.params(1) - bb) <= 0.0005);
}

TEST_CASE("linear model covariance equals s^2 (X^T X)^-1") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> noise(0.0, 0.1);
  const int n = 30;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = i * 1e-9;  // strongly disparate parameter scales
    y(i) = 3.0 + 2e8 * X(i, 1) + noise(gen);
  }
  auto r = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd { return X * p - y; };
  const FitResult f = least_squares(r, Eigen::Vector2d(1.0, 1e8), ParameterBounds::unbounded(2));
  const Eigen::VectorXd exact = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  CHECK(f.params(0) == doctest::Approx(exact(0)).epsilon(1e-8));
  CHECK(f.params(1) == doctest::Approx(exact(1)).epsilon(1e-8));
  const double s2 = (X * exact - y).squaredNorm() / (n - 2);
  const Eigen::MatrixXd cov = s2 * (X.transpose() * X).inverse();
  CHECK(f.covariance(0, 0) == doctest::Approx(cov(0, 0)).epsilon(1e-5));
  CHECK(f.covariance(1, 1) == doctest::Approx(cov(1, 1)).epsilon(1e-5));
  CHECK(f.covariance(0, 1) == doctest::Approx(cov(0, 1)).epsilon(1e-5));
}

TEST_CASE("bounds are respected") {
  auto r = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x - Eigen::Vector2d(-1.0, 2.0); };
  ParameterBounds b{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(5.0, 5.0)};
  const FitResult f = least_squares(r, Eigen::Vector2d(1.0, 1.0), b);
  CHECK(f.params(0) == 0.0);
  CHECK(f.params(1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(least_squares(r, Eigen::Vector2d(-1.0, 1.0), b), Error);
  CHECK(f.value("p1") == f.params(1));
  CHECK_THROWS_AS(f.index_of("nope"), Error);
}

TEST_CASE("non-finite residuals are reported") {
  auto r = [](const Eigen::VectorXd&) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(2, std::numeric_limits<double>::quiet_NaN());
  };
  try {
    least_squares(r, Eigen::Vector2d(1.0, 1.0), ParameterBounds::unbounded(2));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteResidual);
  }
}

TEST_CASE("shape CDFs") {
  // Gaussian limit and pure exponential limit.
  CHECK(exp_gauss_cdf(1e-9, 100e-12, 1e-15) == doctest::Approx(1.0 - std::exp(-10.0)).epsilon(1e-9));
  CHECK(exp_gauss_cdf(-1e-9, 100e-12, 50e-12) < 1e-12);
  CHECK(exp_gauss_cdf(40e-12, 1e-15, 20e-12) == doctest::Approx(0.5 * std::erfc(-2.0 / std::sqrt(2.0))));
  CHECK(laplace_gauss_cdf(0.0, 80e-12, 60e-12) == doctest::Approx(0.5));
  CHECK(laplace_gauss_cdf(100e-12, 80e-12, 1e-15) == doctest::Approx(1.0 - 0.5 * std::exp(-1.25)));
  // Far tails stay monotone without cancellation.
  double prev = 0.0;
  for (double t = -1e-9; t < 3e-9; t += 10e-12) {
    const double f = exp_gauss_cdf(t, 83.9e-12, 63e-12);
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("Purcell fit errors") {
  CavityParams c;
  EmitterParams e;
  const double k = cavity_linewidth(c);
  const double far[] = {-20 * k, -15 * k, -10 * k, 10 * k, 15 * k, 20 * k};
  CHECK_THROWS_AS(fit_purcell(lifetime_curve(far, c, e), c), Error);
  const double few[] = {0.0, k, 2 * k};
  CHECK_THROWS_AS(fit_purcell(lifetime_curve(few, c, e), c), Error);
  std::vector<double> ok;
  for (int i = -5; i <= 5; ++i) ok.push_back(0.6 * i * k);
  PurcellFitOptions o;
  o.float_kappa = true;
  const FitResult f = fit_purcell(lifetime_curve(ok, c, e), c, o);
  CHECK(f.value("F_p") == doctest::Approx(6.3).epsilon(1e-6));
  CHECK(f.value("kappa") == doctest::Approx(k).epsilon(1e-6));
}

TEST_CASE("decay fit: noiseless histogram and degenerate data") {
  Histogram h = Histogram::uniform(-0.5e-9, 4e-12, 550);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lo = h.bin_low(i);
    h.counts[i] = std::llround(1e7 * (exp_gauss_cdf(lo + 4e-12, 80e-12, 63e-12) - exp_gauss_cdf(lo, 80e-12, 63e-12)));
  }
  const FitResult f = fit_decay_irf(h, 63e-12);
  CHECK(f.converged);
  CHECK(f.value("T1") == doctest::Approx(80e-12).epsilon(1e-3));
  Histogram flat = Histogram::uniform(-0.5e-9, 4e-12, 550);
  for (auto& c : flat.counts) c = 5;
  CHECK_THROWS_AS(fit_decay_irf(flat, 63e-12), Error);
  CHECK_THROWS_AS(fit_decay_irf(Histogram::uniform(0.0, 4e-12, 10), 63e-12), Error);
}

TEST_CASE("Voigt fit roundtrip and errors") {
  const auto grid = linear_grid(-20e9, 20e9, 2001);
  SpectrumTrace t;
  t.frequencies = grid;
  for (double x : grid) t.intensities.push_back(3.0 * voigt_profile(x - 0.2e9, 1.5e9, 0.8e9));
  const FitResult f = fit_voigt(t);
  CHECK(f.value("f_L") == doctest::Approx(1.5e9).epsilon(1e-5));
  CHECK(f.value("f_G") == doctest::Approx(0.8e9).epsilon(1e-5));
  CHECK(f.value("center") == doctest::Approx(0.2e9).epsilon(1e-5));
  CHECK(f.value("amplitude") == doctest::Approx(3.0).epsilon(1e-5));
  SpectrumTrace narrow;
  narrow.frequencies = linear_grid(-1e9, 1e9, 201);
  for (double x : narrow.frequencies) narrow.intensities.push_back(voigt_profile(x, 1.5e9, 0.8e9));
  CHECK_THROWS_AS(fit_voigt(narrow), Error);
}

TEST_CASE("HOM peak fit: areas of noiseless peaks and overlap guard") {
  Histogram h = Histogram::centered(6e-9, 20e-12);
  const double centers[] = {-2e-9, 0.0, 2e-9};
  const double areas[] = {4000.0, 500.0, 4000.0};
  const double s = 63e-12 * std::sqrt(2.0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    double m = 0.0;
    for (int k = 0; k < 3; ++k)
      m += areas[k] * (laplace_gauss_cdf(h.bin_low(i) + 20e-12 - centers[k], 83.9e-12, s) -
                       laplace_gauss_cdf(h.bin_low(i) - centers[k], 83.9e-12, s));
    h.counts[i] = std::llround(m * 100.0);
  }
  const HomPeakFit f = fit_hom_peaks(h, centers);
  REQUIRE(f.peaks.size() == 3);
  CHECK(f.peaks[1].area == doctest::Approx(50'000.0).epsilon(1e-3));
  CHECK(f.peaks[0].area == doctest::Approx(400'000.0).epsilon(1e-3));
  CHECK(f.fit.value("T1") == doctest::Approx(83.9e-12).epsilon(1e-3));
  const double close[] = {0.0, 0.2e-9};
  CHECK_THROWS_AS(fit_hom_peaks(h, close), Error);
}
