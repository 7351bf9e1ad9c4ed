#include "qdpillar/photon_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qdpillar/error.hpp"
#include "qdpillar/parallel.hpp"

namespace qdpillar {

Histogram hbt_histogram(std::span<const EmissionRecord> records, double rep_period,
                        double bin_width, double span, unsigned threads) {
  if (records.empty()) raise(ErrorKind::EmptyInput, "hbt_histogram: no records");
  if (!(rep_period > 0.0)) raise(ErrorKind::InvalidParameter, "rep_period must be > 0");
  if (!(bin_width > 0.0) || bin_width > rep_period / 50.0)
    raise(ErrorKind::Precondition, "hbt_histogram needs 0 < bin_width <= rep_period/50");
  if (!(span > 0.0)) raise(ErrorKind::InvalidParameter, "span must be > 0");

  std::vector<double> times;
  for (const auto& r : records)
    for (double t : r.times) times.push_back(static_cast<double>(r.pulse_index) * rep_period + t);
  std::sort(times.begin(), times.end());

  Histogram total = Histogram::centered(span, bin_width);
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), 64);
  std::vector<Histogram> partial(workers, total);
  const std::size_t n = times.size();
  const std::size_t chunk = (n + workers - 1) / std::max<std::size_t>(workers, 1);
  parallel_for(workers, static_cast<unsigned>(workers), [&](std::size_t wb, std::size_t we) {
    for (std::size_t w = wb; w < we; ++w) {
      Histogram& h = partial[w];
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double tau = times[j] - times[i];
          if (tau > span) break;
          h.add(tau);
          h.add(-tau);
        }
      }
    }
  });
  for (const auto& h : partial) total += h;
  return total;
}

G2Estimate g2_from_histogram(const Histogram& h, double rep_period, int side_peaks) {
  h.validate();
  if (!(rep_period > 0.0)) raise(ErrorKind::InvalidParameter, "rep_period must be > 0");
  if (side_peaks < 1) raise(ErrorKind::InvalidParameter, "side_peaks must be >= 1");
  const double half = 0.5 * rep_period;
  // Side peaks whose full window fits inside the histogram on both sides.
  const int available = static_cast<int>(
      std::floor(std::min(-h.t_min, h.t_max()) / rep_period - 0.5 + 1e-9));
  if (available < 3)
    raise(ErrorKind::InsufficientSpan,
          "g2 needs at least 3 side peaks per side, histogram covers " +
              std::to_string(std::max(available, 0)));
  const int k_used = std::min(side_peaks, available);

  G2Estimate est;
  est.side_peaks = k_used;
  est.central_area = static_cast<double>(h.window_sum(0.0, half));
  double side_total = 0.0;
  for (int k = 1; k <= k_used; ++k) {
    side_total += static_cast<double>(h.window_sum(k * rep_period, half));
    side_total += static_cast<double>(h.window_sum(-k * rep_period, half));
  }
  est.side_area_mean = side_total / (2.0 * k_used);
  if (!(est.side_area_mean > 0.0))
    raise(ErrorKind::ZeroReference, "g2: side peaks are empty");
  est.g2 = est.central_area / est.side_area_mean;
  // Poisson propagation; an empty central peak still carries one count of
  // uncertainty.
  const double rel_central = 1.0 / std::max(est.central_area, 1.0);
  const double rel_side = 1.0 / side_total;
  const double g_for_error = std::max(est.central_area, 1.0) / est.side_area_mean;
  est.stderr = g_for_error * std::sqrt(rel_central + rel_side);
  return est;
}

HbtRun run_hbt(const EmissionModel& model, const HbtSettings& settings, std::uint64_t seed,
               unsigned threads) {
  auto records = sample_emissions(settings.pulses, model, seed, threads);
  HbtRun run;
  std::size_t photons = 0;
  std::size_t multi = 0;
  for (const auto& r : records) {
    photons += r.size();
    if (r.size() >= 2) ++multi;
  }
  run.mean_photons = static_cast<double>(photons) / static_cast<double>(records.size());
  run.multi_photon_fraction = static_cast<double>(multi) / static_cast<double>(records.size());
  if (settings.jitter_sigma > 0.0)
    records = apply_timing_jitter(records, settings.jitter_sigma, seed, threads);
  const double rep = model.pulse.rep_period;
  run.histogram = hbt_histogram(records, rep, settings.bin_width, settings.span(rep), threads);
  run.g2 = g2_from_histogram(run.histogram, rep, settings.side_peaks);
  return run;
}

std::vector<PurityPoint> purity_vs_power(std::span<const double> areas, const EmissionModel& base,
                                         double extraction_efficiency,
                                         const HbtSettings& settings, std::uint64_t seed,
                                         unsigned threads) {
  if (areas.empty()) raise(ErrorKind::EmptyInput, "purity_vs_power: no pulse areas");
  if (!(extraction_efficiency >= 0.0 && extraction_efficiency <= 1.0))
    raise(ErrorKind::InvalidParameter, "extraction efficiency must lie in [0, 1]");
  std::vector<PurityPoint> out;
  out.reserve(areas.size());
  for (std::size_t i = 0; i < areas.size(); ++i) {
    PurityPoint p;
    p.area = areas[i];
    if (!(p.area > 0.0)) {
      p.g2 = p.g2_stderr = p.purity = std::numeric_limits<double>::quiet_NaN();
      out.push_back(p);
      continue;
    }
    EmissionModel model = base;
    model.pulse.area = p.area;
    p.photons_per_pulse = prep_efficiency(model.pulse, model.rates) * extraction_efficiency;
    const HbtRun run = run_hbt(model, settings, seed + i, threads);
    p.g2 = run.g2.g2;
    p.g2_stderr = run.g2.stderr;
    p.purity = 1.0 - p.g2;
    out.push_back(p);
  }
  return out;
}

}  // namespace qdpillar
