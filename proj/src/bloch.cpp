#include "qdpillar/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qdpillar/error.hpp"

namespace qdpillar {

namespace {

constexpr double kInvariantTolerance = 1e-8;

BlochVector<double> to_vector(const BlochState& s) {
  return {s.rho_ee, s.rho_ge.real(), s.rho_ge.imag()};
}

BlochState to_state(const BlochVector<double>& v) { return {v(0), {v(1), v(2)}}; }

void check_physical(const BlochVector<double>& v, double t) {
  const double coherence = v(1) * v(1) + v(2) * v(2);
  const bool ok = std::isfinite(v(0)) && v(0) >= -kInvariantTolerance &&
                  v(0) <= 1.0 + kInvariantTolerance &&
                  coherence <= v(0) * (1.0 - v(0)) + kInvariantTolerance;
  if (!ok) {
    std::ostringstream msg;
    msg << "density matrix left the physical region at t=" << t << " (rho_ee=" << v(0)
        << ", |rho_ge|^2=" << coherence << ")";
    raise(ErrorKind::StepSizeTooLarge, msg.str());
  }
}

}  // namespace

double PulseParams::peak_rabi() const noexcept {
  return area / (sigma() * std::sqrt(constants::two_pi));
}

void PulseParams::validate() const {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm))
    raise(ErrorKind::InvalidParameter, "pulse.fwhm must be > 0");
  if (!(rep_period > 0.0) || !std::isfinite(rep_period))
    raise(ErrorKind::InvalidParameter, "pulse.rep_period must be > 0");
  if (!(area >= 0.0) || !std::isfinite(area))
    raise(ErrorKind::InvalidParameter, "pulse.area must be >= 0");
  if (!std::isfinite(center)) raise(ErrorKind::InvalidParameter, "pulse.center must be finite");
}

void ObeRates::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma))
    raise(ErrorKind::InvalidParameter, "gamma must be >= 0");
  if (!(gamma_dephasing >= 0.0) || !std::isfinite(gamma_dephasing))
    raise(ErrorKind::InvalidParameter, "gamma_dephasing must be >= 0");
  if (!std::isfinite(detuning)) raise(ErrorKind::InvalidParameter, "detuning must be finite");
  if (!(eid_coefficient >= 0.0) || !std::isfinite(eid_coefficient))
    raise(ErrorKind::InvalidParameter, "eid_coefficient must be >= 0");
}

double rabi_frequency(double t, const PulseParams& pulse) {
  const double s = pulse.sigma();
  const double x = (t - pulse.center) / s;
  return pulse.peak_rabi() * std::exp(-0.5 * x * x);
}

std::vector<TrajectoryPoint> evolve_obe(const BlochState& initial, const RabiDrive& drive,
                                        double peak_rabi, const ObeRates& rates, TimeSpan span,
                                        double dt) {
  rates.validate();
  if (!(span.end >= span.begin)) raise(ErrorKind::InvalidParameter, "time span end < begin");
  if (!(dt > 0.0)) raise(ErrorKind::StepSizeTooLarge, "dt must be > 0");
  const double slowest = std::min(rates.gamma > 0 ? 1.0 / rates.gamma
                                                  : std::numeric_limits<double>::infinity(),
                                  peak_rabi > 0 ? 1.0 / std::abs(peak_rabi)
                                                : std::numeric_limits<double>::infinity());
  if (!(dt < slowest / 10.0)) {
    std::ostringstream msg;
    msg << "dt=" << dt << " is not below min(1/gamma, 1/peak_rabi)/10=" << slowest / 10.0;
    raise(ErrorKind::StepSizeTooLarge, msg.str());
  }

  const double length = span.end - span.begin;
  const auto steps = static_cast<std::size_t>(std::ceil(length / dt - 1e-9));
  const double h = steps > 0 ? length / static_cast<double>(steps) : 0.0;

  std::vector<TrajectoryPoint> out;
  out.reserve(steps + 1);
  BlochVector<double> v = to_vector(initial);
  check_physical(v, span.begin);
  out.push_back({span.begin, to_state(v)});

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = span.begin + static_cast<double>(k) * h;
    const double w0 = drive(t);
    const double wm = drive(t + 0.5 * h);
    const double w1 = drive(t + h);
    const BlochVector<double> k1 = bloch_derivative(v, w0, rates);
    const BlochVector<double> k2 = bloch_derivative<double>(v + 0.5 * h * k1, wm, rates);
    const BlochVector<double> k3 = bloch_derivative<double>(v + 0.5 * h * k2, wm, rates);
    const BlochVector<double> k4 = bloch_derivative<double>(v + h * k3, w1, rates);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t_next = span.begin + static_cast<double>(k + 1) * h;
    check_physical(v, t_next);
    out.push_back({t_next, to_state(v)});
  }
  return out;
}

std::vector<TrajectoryPoint> evolve_obe(const BlochState& initial, const PulseParams& pulse,
                                        const ObeRates& rates, TimeSpan span, double dt) {
  pulse.validate();
  return evolve_obe(
      initial, [&pulse](double t) { return rabi_frequency(t, pulse); }, pulse.peak_rabi(), rates,
      span, dt);
}

double default_obe_step(const PulseParams& pulse, const ObeRates& rates) {
  double dt = pulse.sigma() / 50.0;
  if (pulse.peak_rabi() > 0.0) dt = std::min(dt, 1.0 / (20.0 * pulse.peak_rabi()));
  const double damping = rates.gamma + rates.gamma_dephasing +
                         rates.eid_coefficient * pulse.peak_rabi() * pulse.peak_rabi();
  if (damping > 0.0) dt = std::min(dt, 1.0 / (20.0 * damping));
  return dt;
}

double prep_efficiency(const PulseParams& pulse, const ObeRates& rates, double readout_sigmas) {
  pulse.validate();
  if (!(pulse.area > 0.0)) raise(ErrorKind::Precondition, "prep_efficiency needs pulse.area > 0");
  const double s = pulse.sigma();
  const TimeSpan span{pulse.center - 5.0 * s, pulse.center + readout_sigmas * s};
  const auto trajectory =
      evolve_obe(BlochState::ground(), pulse, rates, span, default_obe_step(pulse, rates));
  return trajectory.back().state.rho_ee;
}

std::vector<RabiPoint> rabi_curve(std::span<const double> sqrt_powers, double area_per_sqrt_power,
                                  const PulseParams& pulse_template, const ObeRates& rates) {
  if (!(area_per_sqrt_power > 0.0))
    raise(ErrorKind::Precondition, "rabi calibration must be > 0");
  std::vector<RabiPoint> curve;
  curve.reserve(sqrt_powers.size());
  for (double root : sqrt_powers) {
    if (!(root >= 0.0)) raise(ErrorKind::InvalidParameter, "sqrt(power) must be >= 0");
    PulseParams pulse = pulse_template;
    pulse.area = area_per_sqrt_power * root;
    const double signal = pulse.area > 0.0 ? prep_efficiency(pulse, rates) : 0.0;
    curve.push_back({root, pulse.area, signal});
  }
  return curve;
}

}  // namespace qdpillar
