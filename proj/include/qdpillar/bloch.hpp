#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qdpillar/constants.hpp"

namespace qdpillar {

/// Gaussian drive pulse. `area` is the integrated Rabi frequency (rad),
/// `fwhm` the full width at half maximum of the Rabi envelope.
struct PulseParams {
  double area = constants::pi;
  double fwhm = 3e-12;
  double center = 0.0;
  double rep_period = 1.0 / 81e6;

  double sigma() const noexcept { return fwhm / constants::fwhm_per_sigma; }
  double peak_rabi() const noexcept;
  void validate() const;
};

/// Rabi frequency Omega(t) in rad/s.
double rabi_frequency(double t, const PulseParams& pulse);

/// Damping and laser detuning for the optical Bloch equations.
/// Convention: rotating frame with H = -detuning |e><e| + Omega/2 (|e><g| + |g><e|),
/// detuning = omega_laser - omega_emitter. Populations decay at `gamma`,
/// coherences at gamma/2 + gamma_dephasing (+ eid_coefficient * Omega^2).
struct ObeRates {
  double gamma = 1.0 / 83.9e-12;
  double gamma_dephasing = 0.0;
  double detuning = 0.0;
  // Excitation-induced dephasing K: adds K * Omega(t)^2 to the coherence
  // decay while the pulse is on (phonon-assisted damping of Rabi rotations).
  double eid_coefficient = 0.0;

  double coherence_decay() const noexcept { return 0.5 * gamma + gamma_dephasing; }
  double coherence_decay(double rabi) const noexcept {
    return coherence_decay() + eid_coefficient * rabi * rabi;
  }
  void validate() const;
};

/// Two-level density matrix: excited population and rho_ge = <g|rho|e>.
struct BlochState {
  double rho_ee = 0.0;
  std::complex<double> rho_ge{0.0, 0.0};

  static BlochState ground() { return {}; }
  static BlochState excited() { return {1.0, {0.0, 0.0}}; }
};

/// (rho_ee, Re rho_ge, Im rho_ge).
template <typename Scalar>
using BlochVector = Eigen::Matrix<Scalar, 3, 1>;

/// Right-hand side of the optical Bloch equations at Rabi frequency `rabi`.
template <typename Scalar>
BlochVector<Scalar> bloch_derivative(const BlochVector<Scalar>& v, Scalar rabi,
                                     const ObeRates& rates) {
  const Scalar g2 = Scalar(rates.coherence_decay()) + Scalar(rates.eid_coefficient) * rabi * rabi;
  const Scalar d = Scalar(rates.detuning);
  BlochVector<Scalar> dv;
  dv(0) = rabi * v(2) - Scalar(rates.gamma) * v(0);
  dv(1) = d * v(2) - g2 * v(1);
  dv(2) = -d * v(1) + Scalar(0.5) * rabi * (Scalar(1) - Scalar(2) * v(0)) - g2 * v(2);
  return dv;
}

struct TrajectoryPoint {
  double t;
  BlochState state;
};

struct TimeSpan {
  double begin;
  double end;
};

using RabiDrive = std::function<double(double)>;

/// Fixed-step RK4 integration of the optical Bloch equations. Returns every
/// step including both end points. Throws step-size-too-large when dt is not
/// below min(1/gamma, 1/peak_rabi)/10 or when the density matrix leaves the
/// physical region by more than 1e-8.
std::vector<TrajectoryPoint> evolve_obe(const BlochState& initial, const PulseParams& pulse,
                                        const ObeRates& rates, TimeSpan span, double dt);

/// Same integrator under an arbitrary drive whose maximum is `peak_rabi`.
std::vector<TrajectoryPoint> evolve_obe(const BlochState& initial, const RabiDrive& drive,
                                        double peak_rabi, const ObeRates& rates, TimeSpan span,
                                        double dt);

/// Default step for a pulse: resolves the envelope, the Rabi period and decay.
double default_obe_step(const PulseParams& pulse, const ObeRates& rates);

/// Excited population a fixed number of envelope sigmas after the pulse
/// center, starting from the ground state 5 sigma before it.
inline constexpr double kPrepReadoutSigmas = 3.0;

double prep_efficiency(const PulseParams& pulse, const ObeRates& rates,
                       double readout_sigmas = kPrepReadoutSigmas);

struct RabiPoint {
  double sqrt_power;
  double area;
  double signal;  // excited population after the pulse, proportional to counts
};

std::vector<RabiPoint> rabi_curve(std::span<const double> sqrt_powers, double area_per_sqrt_power,
                                  const PulseParams& pulse_template, const ObeRates& rates);

}  // namespace qdpillar
