#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qdpillar {

struct BudgetStage {
  std::string name;
  double efficiency = 1.0;  // (0, 1]

  void validate() const;
};

struct Budget {
  std::vector<BudgetStage> stages;
  double rep_rate = 81e6;           // Hz
  double detected_rate = 3.7e6;     // counts per second
  double snr_pre_filter = 40.0;     // signal : background before the etalon
  double snr_post_filter = 0.0;     // 0 derives it from the etalon transmissions

  void validate() const;
};

/// Known losses between the first lens and the detector counts, plus
/// preparation and an explicit unit internal quantum efficiency.
std::vector<BudgetStage> nominal_stages();

/// Product of stage efficiencies; 1 for an empty chain.
double chain_efficiency(std::span<const BudgetStage> stages);

/// detected_rate / rep_rate.
double overall_system_efficiency(const Budget& budget);

/// Extraction into the first lens: overall efficiency divided by the chain.
double infer_extraction(const Budget& budget, std::span<const BudgetStage> known_stages);

struct RateSplit {
  double signal = 0.0;
  double background = 0.0;
};

RateSplit signal_background_split(double total_rate, double snr);

/// Signal-to-background ratio after a filter that passes `signal_transmission`
/// of the emitter line and `background_transmission` of the laser leakage.
double filtered_snr(double snr, double signal_transmission, double background_transmission);

/// Rounds to `digits` significant digits (reporting only).
double round_significant(double x, int digits = 4);

}  // namespace qdpillar
