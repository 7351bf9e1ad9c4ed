#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "qdpillar/error.hpp"
#include "qdpillar/histogram.hpp"
#include "qdpillar/photon_statistics.hpp"

using namespace qdpillar;

namespace {

EmissionRecord rec(std::int64_t idx, std::vector<double> t) {
  EmissionRecord r;
  r.pulse_index = idx;
  r.sources.assign(t.size(), PhotonSource::Emitter);
  r.times = std::move(t);
  return r;
}

}  // namespace

TEST_CASE("histogram binning and window sums") {
  Histogram h = Histogram::centered(1.0, 0.1);
  CHECK(h.size() % 2 == 1);
  CHECK(h.bin_center(h.size() / 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(h.add(0.0));
  CHECK(h.add(0.33));
  CHECK_FALSE(h.add(5.0));
  CHECK(h.total() == 2);
  CHECK(h.window_sum(0.0, 0.05) == 1);
  CHECK(h.window_sum(0.3, 0.1) == 1);
  Histogram g = h;
  g += h;
  CHECK(g.total() == 4);
  CHECK_THROWS_AS(g += Histogram::centered(1.0, 0.2), Error);
}

TEST_CASE("histogram CSV roundtrip is lossless") {
  Histogram h = Histogram::uniform(-0.5e-9, 4e-12, 37);
  for (std::size_t i = 0; i < h.size(); ++i) h.counts[i] = static_cast<std::int64_t>(i * i);
  std::stringstream s;
  write_histogram_csv(s, h, 1234567890123ULL);
  const HistogramFile f = read_histogram_csv(s);
  CHECK(f.seed == 1234567890123ULL);
  CHECK(f.histogram == h);
  std::stringstream bad("# nonsense\n1,2\n");
  CHECK_THROWS_AS(read_histogram_csv(bad), Error);
}

TEST_CASE("hbt histogram counts every ordered pair on the absolute axis") {
  const double rep = 10e-9;
  std::vector<EmissionRecord> r{rec(0, {0.0, 1e-9}), rec(1, {0.5e-9})};
  const Histogram h = hbt_histogram(r, rep, 0.1e-9, 25e-9, 1);
  // Pairs: (0,1e-9) both orders, (0 -> 10.5 ns), (1 -> 9.5 ns), reversed.
  CHECK(h.total() == 6);
  for (double tau : {1e-9, -1e-9, 10.5e-9, -10.5e-9, 9.5e-9, -9.5e-9})
    CHECK(h.counts[*h.bin_of(tau)] == 1);
  CHECK(hbt_histogram(r, rep, 0.1e-9, 25e-9, 4) == h);
}

TEST_CASE("g2 from peak areas") {
  const double rep = 10e-9;
  Histogram h = Histogram::centered(4.5 * rep, 0.1e-9);
  h.add(0.0, 10);
  for (int k = 1; k <= 4; ++k) {
    h.add(k * rep, 100);
    h.add(-k * rep, 100);
  }
  const G2Estimate g = g2_from_histogram(h, rep);
  CHECK(g.g2 == doctest::Approx(0.1));
  CHECK(g.side_peaks == 4);
  CHECK(g.central_area == 10.0);
  // Poisson propagation: g2 sqrt(1/C + 1/(8 S))
  CHECK(g.stderr == doctest::Approx(0.1 * std::sqrt(1.0 / 10.0 + 1.0 / 800.0)).epsilon(1e-6));
  Histogram narrow = Histogram::centered(1.5 * rep, 0.1e-9);
  CHECK_THROWS_AS(g2_from_histogram(narrow, rep), Error);
}

TEST_CASE("single-photon source: g2 small and grows with pulse length") {
  EmissionModel m;
  HbtSettings s;
  s.pulses = 200'000;
  const HbtRun a = run_hbt(m, s, 1, 0);
  CHECK(a.g2.g2 > 0.0);
  CHECK(a.g2.g2 < 0.03);
  CHECK(a.mean_photons == doctest::Approx(1.0).epsilon(0.05));
  m.pulse.fwhm = 10e-12;
  const HbtRun b = run_hbt(m, s, 1, 0);
  CHECK(b.g2.g2 > a.g2.g2 + 3.0 * std::hypot(a.g2.stderr, b.g2.stderr));
  CHECK(run_hbt(m, s, 1, 3).histogram == b.histogram);
}

TEST_CASE("purity versus power") {
  EmissionModel m;
  HbtSettings s;
  s.pulses = 50'000;
  const double areas[] = {0.5 * constants::pi, constants::pi};
  const auto pts = purity_vs_power(areas, m, 0.66, s, 2, 0);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].photons_per_pulse < pts[1].photons_per_pulse);
  CHECK(pts[1].photons_per_pulse == doctest::Approx(0.66 * 0.95).epsilon(0.05));
  CHECK(pts[1].purity == doctest::Approx(1.0 - pts[1].g2));
}
