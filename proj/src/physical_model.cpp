#include "qdpillar/physical_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdpillar/error.hpp"

namespace qdpillar {

void CavityParams::validate() const {
  if (!(quality_factor > 0.0) || !std::isfinite(quality_factor))
    raise(ErrorKind::InvalidParameter, "cavity.quality_factor must be > 0");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength))
    raise(ErrorKind::InvalidParameter, "cavity.wavelength must be > 0");
  if (!(purcell_factor >= 0.0) || !std::isfinite(purcell_factor))
    raise(ErrorKind::InvalidParameter, "cavity.purcell_factor must be >= 0");
}

void SpectralDiffusionParams::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    raise(ErrorKind::InvalidParameter, "diffusion.sigma must be >= 0");
  if (!(tau_c > 0.0))
    raise(ErrorKind::InvalidParameter, "diffusion.tau_c must be > 0");
}

void EmitterParams::validate() const {
  if (!(gamma_bulk > 0.0) || !std::isfinite(gamma_bulk))
    raise(ErrorKind::InvalidParameter, "emitter.gamma_bulk must be > 0");
  if (!(gamma_dephasing >= 0.0) || !std::isfinite(gamma_dephasing))
    raise(ErrorKind::InvalidParameter, "emitter.gamma_dephasing must be >= 0");
  diffusion.validate();
}

double cavity_linewidth(const CavityParams& cavity) {
  cavity.validate();
  return cavity_linewidth(cavity.quality_factor, cavity.wavelength);
}

double purcell_rate(double detuning, const CavityParams& cavity, const EmitterParams& emitter) {
  if (!std::isfinite(detuning)) raise(ErrorKind::InvalidParameter, "detuning must be finite");
  emitter.validate();
  return purcell_rate(detuning, cavity_linewidth(cavity), cavity.purcell_factor,
                      emitter.gamma_bulk);
}

std::vector<LifetimePoint> lifetime_curve(std::span<const double> detunings,
                                          const CavityParams& cavity,
                                          const EmitterParams& emitter) {
  if (detunings.empty()) raise(ErrorKind::EmptyInput, "lifetime_curve: no detunings");
  std::vector<LifetimePoint> curve;
  curve.reserve(detunings.size());
  for (double d : detunings) curve.push_back({d, 1.0 / purcell_rate(d, cavity, emitter)});
  return curve;
}

DetuningTable::DetuningTable(std::vector<Knot> knots) : knots_(std::move(knots)) {
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i].temperature) || !std::isfinite(knots_[i].detuning))
      raise(ErrorKind::InvalidParameter, "detuning table entries must be finite");
    if (i > 0 && !(knots_[i].temperature > knots_[i - 1].temperature))
      raise(ErrorKind::InvalidParameter,
            "detuning table temperatures must be strictly increasing (entry " +
                std::to_string(i) + ")");
  }
}

double DetuningTable::detuning_at(double temperature) const {
  if (knots_.empty()) raise(ErrorKind::EmptyInput, "detuning table is empty");
  if (temperature <= knots_.front().temperature) return knots_.front().detuning;
  if (temperature >= knots_.back().temperature) return knots_.back().detuning;
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), temperature,
                             [](double t, const Knot& k) { return t < k.temperature; });
  auto lo = hi - 1;
  const double w = (temperature - lo->temperature) / (hi->temperature - lo->temperature);
  return lo->detuning + w * (hi->detuning - lo->detuning);
}

}  // namespace qdpillar
