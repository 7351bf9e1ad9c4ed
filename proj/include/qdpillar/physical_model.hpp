#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "qdpillar/constants.hpp"

namespace qdpillar {

/// Micropillar cavity. `wavelength` in meters.
struct CavityParams {
  double quality_factor = 6124.0;
  double wavelength = 897.44e-9;
  double purcell_factor = 6.3;

  void validate() const;
};

/// Ornstein-Uhlenbeck model of the emitter frequency offset.
/// `sigma` is the stationary standard deviation in rad/s.
struct SpectralDiffusionParams {
  double sigma = 0.0;
  double tau_c = 1e-6;

  void validate() const;
};

/// Rates in 1/s. `gamma_bulk` is the radiative rate far from the cavity mode.
struct EmitterParams {
  double gamma_bulk = 1.0 / 587.8e-12;
  double gamma_dephasing = 0.0;
  SpectralDiffusionParams diffusion{};

  void validate() const;
};

// Closed forms, templated so they can be evaluated on any real scalar type.

/// Cavity energy decay rate kappa = omega_c / Q (rad/s).
template <typename Scalar>
Scalar cavity_linewidth(Scalar quality_factor, Scalar wavelength) {
  return Scalar(constants::two_pi * constants::speed_of_light) / wavelength / quality_factor;
}

/// Lorentzian overlap of emitter and cavity mode, 1 at zero detuning.
template <typename Scalar>
Scalar cavity_lorentzian(Scalar detuning, Scalar kappa) {
  const Scalar x = Scalar(2) * detuning / kappa;
  return Scalar(1) / (Scalar(1) + x * x);
}

/// Weak-coupling decay rate Gamma(D) = Gamma_bulk [1 + F_p L(D)].
template <typename Scalar>
Scalar purcell_rate(Scalar detuning, Scalar kappa, Scalar purcell_factor, Scalar gamma_bulk) {
  return gamma_bulk * (Scalar(1) + purcell_factor * cavity_lorentzian(detuning, kappa));
}

double cavity_linewidth(const CavityParams& cavity);

double purcell_rate(double detuning, const CavityParams& cavity, const EmitterParams& emitter);

struct LifetimePoint {
  double detuning;  // rad/s
  double lifetime;  // s
};

std::vector<LifetimePoint> lifetime_curve(std::span<const double> detunings,
                                          const CavityParams& cavity,
                                          const EmitterParams& emitter);

/// Empirical temperature -> emitter/cavity detuning map, piecewise linear,
/// clamped to the end values outside the tabulated range.
class DetuningTable {
 public:
  struct Knot {
    double temperature;  // K
    double detuning;     // rad/s
  };

  DetuningTable() = default;
  explicit DetuningTable(std::vector<Knot> knots);

  double detuning_at(double temperature) const;

  const std::vector<Knot>& knots() const noexcept { return knots_; }
  bool empty() const noexcept { return knots_.empty(); }

 private:
  std::vector<Knot> knots_;
};

}  // namespace qdpillar
