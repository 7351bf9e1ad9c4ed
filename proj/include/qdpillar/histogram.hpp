#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace qdpillar {

/// Uniform-bin counts over time delay. Bin i covers
/// [t_min + i*bin_width, t_min + (i+1)*bin_width).
struct Histogram {
  double bin_width = 1.0;
  double t_min = 0.0;
  std::vector<std::int64_t> counts;

  /// Odd number of bins with one bin centered on zero, covering [-span, span].
  static Histogram centered(double span, double bin_width);
  /// `bins` bins starting at t_min.
  static Histogram uniform(double t_min, double bin_width, std::size_t bins);

  std::size_t size() const noexcept { return counts.size(); }
  double bin_center(std::size_t i) const noexcept {
    return t_min + (static_cast<double>(i) + 0.5) * bin_width;
  }
  double bin_low(std::size_t i) const noexcept {
    return t_min + static_cast<double>(i) * bin_width;
  }
  double t_max() const noexcept { return t_min + static_cast<double>(counts.size()) * bin_width; }

  std::optional<std::size_t> bin_of(double t) const noexcept;
  /// Returns false when t falls outside the histogram range.
  bool add(double t, std::int64_t weight = 1) noexcept;
  std::int64_t total() const noexcept;

  /// Sum of bins whose centers lie in [center - half_window, center + half_window).
  std::int64_t window_sum(double center, double half_window) const noexcept;

  Histogram& operator+=(const Histogram& other);

  void validate() const;
};

bool operator==(const Histogram& a, const Histogram& b);

/// CSV with a comment line carrying bin_width and seed, then
/// `tau_seconds,counts` rows keyed by bin center. Doubles are written with 17
/// significant digits so reading back is lossless.
void write_histogram_csv(std::ostream& out, const Histogram& h, std::uint64_t seed);

struct HistogramFile {
  Histogram histogram;
  std::uint64_t seed = 0;
};

HistogramFile read_histogram_csv(std::istream& in);

}  // namespace qdpillar
