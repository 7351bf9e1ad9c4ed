#include "qdpillar/efficiency.hpp"

#include <cmath>

#include "qdpillar/error.hpp"

namespace qdpillar {

void BudgetStage::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    raise(ErrorKind::InvalidParameter, "budget stage '" + name + "' efficiency must lie in (0, 1]");
}

void Budget::validate() const {
  for (const auto& s : stages) s.validate();
  if (!(rep_rate > 0.0) || !std::isfinite(rep_rate))
    raise(ErrorKind::InvalidParameter, "budget.rep_rate must be > 0");
  if (!(detected_rate >= 0.0) || !std::isfinite(detected_rate))
    raise(ErrorKind::InvalidParameter, "budget.detected_rate must be >= 0");
  if (!(snr_pre_filter > 0.0)) raise(ErrorKind::InvalidParameter, "budget.snr_pre_filter must be > 0");
  if (!(snr_post_filter >= 0.0)) raise(ErrorKind::InvalidParameter, "budget.snr_post_filter must be >= 0");
}

std::vector<BudgetStage> nominal_stages() {
  return {
      {"detection", 0.33},
      {"polarization", 0.50},
      {"transmission", 0.60},
      {"fiber_coupling", 0.72},
      {"preparation", 0.96},
      {"internal_quantum_efficiency", 1.0},
  };
}

double chain_efficiency(std::span<const BudgetStage> stages) {
  double product = 1.0;
  for (const auto& s : stages) {
    s.validate();
    product *= s.efficiency;
  }
  return product;
}

double overall_system_efficiency(const Budget& budget) {
  budget.validate();
  return budget.detected_rate / budget.rep_rate;
}

double infer_extraction(const Budget& budget, std::span<const BudgetStage> known_stages) {
  const double chain = chain_efficiency(known_stages);
  if (!(chain > 0.0)) raise(ErrorKind::ZeroReference, "infer_extraction: known chain efficiency is zero");
  return overall_system_efficiency(budget) / chain;
}

RateSplit signal_background_split(double total_rate, double snr) {
  if (!(snr > 0.0)) raise(ErrorKind::Precondition, "signal_background_split: snr must be > 0");
  if (!(total_rate >= 0.0)) raise(ErrorKind::InvalidParameter, "total rate must be >= 0");
  if (std::isinf(snr)) return {total_rate, 0.0};
  return {total_rate * snr / (snr + 1.0), total_rate / (snr + 1.0)};
}

double filtered_snr(double snr, double signal_transmission, double background_transmission) {
  if (!(snr > 0.0) || !(signal_transmission > 0.0) || !(background_transmission > 0.0))
    raise(ErrorKind::InvalidParameter, "filtered_snr: inputs must be > 0");
  return snr * signal_transmission / background_transmission;
}

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
  return std::round(x * scale) / scale;
}

}  // namespace qdpillar
