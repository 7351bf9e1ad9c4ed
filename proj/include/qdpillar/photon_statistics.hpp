#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdpillar/emission.hpp"
#include "qdpillar/histogram.hpp"

namespace qdpillar {

/// Integrated counts of one correlation peak.
struct PeakIntegration {
  double center = 0.0;
  double half_window = 0.0;
  double area = 0.0;
  double area_stderr = 0.0;
};

/// Start-stop correlation of every ordered photon pair (i != j) across the
/// records, delays taken on the absolute time axis
/// pulse_index * rep_period + t. Pairs with |tau| > span are dropped.
Histogram hbt_histogram(std::span<const EmissionRecord> records, double rep_period,
                        double bin_width, double span, unsigned threads = 0);

struct G2Estimate {
  double g2 = 0.0;
  double stderr = 0.0;
  double central_area = 0.0;
  double side_area_mean = 0.0;
  int side_peaks = 0;  // per side actually used
};

inline constexpr int kDefaultSidePeaks = 4;

/// Peak-area ratio: zero-delay peak over the mean of the first `side_peaks`
/// peaks on each side, windows of +-rep_period/2. Needs at least 3 side peaks
/// per side inside the histogram.
G2Estimate g2_from_histogram(const Histogram& h, double rep_period,
                             int side_peaks = kDefaultSidePeaks);

struct HbtSettings {
  std::int64_t pulses = 1'000'000;
  double bin_width = 50e-12;
  int side_peaks = kDefaultSidePeaks;
  double jitter_sigma = 0.0;

  double span(double rep_period) const { return (side_peaks + 0.5) * rep_period; }
};

struct HbtRun {
  Histogram histogram;
  G2Estimate g2;
  double mean_photons = 0.0;
  double multi_photon_fraction = 0.0;
};

/// Sample, jitter, histogram and reduce in one call.
HbtRun run_hbt(const EmissionModel& model, const HbtSettings& settings, std::uint64_t seed,
               unsigned threads = 0);

struct PurityPoint {
  double area = 0.0;
  double photons_per_pulse = 0.0;  // into the first lens
  double purity = 0.0;             // 1 - g2
  double g2 = 0.0;
  double g2_stderr = 0.0;
};

/// Efficiency into the first lens versus single-photon purity across pulse
/// areas. Purity comes from a simulated HBT run at each area.
std::vector<PurityPoint> purity_vs_power(std::span<const double> areas, const EmissionModel& base,
                                         double extraction_efficiency,
                                         const HbtSettings& settings, std::uint64_t seed,
                                         unsigned threads = 0);

}  // namespace qdpillar
