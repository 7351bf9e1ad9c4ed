#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qdpillar/bloch.hpp"
#include "qdpillar/rng.hpp"

namespace qdpillar {

enum class PhotonSource : std::uint8_t { Emitter, Background };

/// Photons attributed to one excitation pulse. Times are relative to the
/// pulse center and sorted ascending; `sources[i]` labels `times[i]`.
struct EmissionRecord {
  std::int64_t pulse_index = 0;
  std::vector<double> times;
  std::vector<PhotonSource> sources;

  std::size_t size() const noexcept { return times.size(); }
  std::size_t emitter_count() const noexcept;
};

enum class BackgroundTiming {
  Pulsed,   // laser leakage: arrives with the excitation envelope
  Uniform,  // spread uniformly over one repetition period
};

struct EmissionModel {
  PulseParams pulse{};
  ObeRates rates{};
  double background_rate = 0.0;  // photons per second, Poissonian
  BackgroundTiming background_timing = BackgroundTiming::Pulsed;
  double dt = 0.0;  // integrator step, 0 selects default_obe_step

  void validate() const;
};

/// Quantum-jump sampler for one pulse. Between jumps the emitter follows the
/// no-jump (trace-decreasing) Bloch evolution; a jump happens when the
/// survival probability exp(-int gamma rho_ee) falls below a uniform draw,
/// after which the emitter restarts in the ground state under the remaining
/// drive. After the pulse window the remaining survival curve is exponential
/// and is inverted in closed form.
class EmissionSampler {
 public:
  explicit EmissionSampler(const EmissionModel& model);

  EmissionRecord sample(std::int64_t pulse_index, Rng& rng) const;

  const EmissionModel& model() const noexcept { return model_; }

  /// Probability that the emitter has emitted at least once by the end of the
  /// drive window (diagnostic).
  double in_window_jump_probability() const;

 private:
  using State = Eigen::Vector4d;  // unnormalized (rho_ee, rho_gg, Re rho_ge, Im rho_ge)

  State derivative(const State& s, double t) const;
  State step(const State& s, double t, double h) const;
  // Emission time for a segment starting in the ground state at `t_start`,
  // or NaN when the segment ends without a photon.
  double next_jump(double t_start, double log_u) const;
  double tail_jump(const State& end_state, double log_u) const;

  EmissionModel model_;
  double window_begin_ = 0.0;
  double window_end_ = 0.0;
  double h_ = 0.0;
  std::vector<State> table_;
  std::vector<double> table_log_survival_;
};

std::vector<EmissionRecord> sample_emissions(std::int64_t n_pulses, const EmissionModel& model,
                                             std::uint64_t seed, unsigned threads = 0);

/// Adds independent Gaussian timing noise to every photon (detector jitter),
/// deterministically per record.
std::vector<EmissionRecord> apply_timing_jitter(std::span<const EmissionRecord> records,
                                                double sigma, std::uint64_t seed,
                                                unsigned threads = 0);

}  // namespace qdpillar
