#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdpillar/emission.hpp"
#include "qdpillar/fitting.hpp"
#include "qdpillar/histogram.hpp"
#include "qdpillar/photon_statistics.hpp"
#include "qdpillar/physical_model.hpp"
#include "qdpillar/rng.hpp"

namespace qdpillar {

enum class Polarization { Parallel, Cross };

/// Two-pulse Hong-Ou-Mandel run: pulses `delay` apart enter an unbalanced
/// Mach-Zehnder whose long arm is delayed by the same amount; the output
/// splitter has transmission T and reflection R.
struct HomConfig {
  double delay = 2.1e-9;
  Polarization polarization = Polarization::Parallel;
  double splitter_t = 0.5;
  double splitter_r = 0.5;
  std::int64_t n_pairs = 1'000'000;
  double detector_sigma = 63e-12;

  void validate() const;
};

enum class Arm { Early, Late };

struct PhotonLabel {
  double emission_time = 0.0;
  double frequency_offset = 0.0;  // rad/s
  Arm arm = Arm::Early;
};

/// Stationary Ornstein-Uhlenbeck samples at sorted `times` by the exact
/// recursion x' = x e^{-dt/tau_c} + sigma sqrt(1 - e^{-2 dt/tau_c}) xi.
std::vector<double> ou_path(double tau_c, double sigma, std::span<const double> times, Rng& rng);
std::vector<double> ou_path(double tau_c, double sigma, std::span<const double> times,
                            std::uint64_t seed);

/// Coincidence-suppression factor of two exponential photons with decay
/// rate gamma, pure dephasing gamma_d and mutual detuning delta (rad/s):
/// M = gamma (gamma + 2 gamma_d) / ((gamma + 2 gamma_d)^2 + delta^2).
template <typename Scalar>
Scalar pair_overlap(Scalar gamma, Scalar gamma_dephasing, Scalar delta) {
  const Scalar g = gamma + Scalar(2) * gamma_dephasing;
  return gamma * g / (g * g + delta * delta);
}

struct HomSource {
  EmissionModel emission{};
  SpectralDiffusionParams diffusion{};
};

/// Event-based Monte Carlo of the interferometer. Only pairs made of an
/// early-pulse emitter photon in the long arm and a late-pulse emitter photon
/// in the short arm interfere; everything else, background and extra photons
/// included, exits the splitter independently. Returns the histogram of
/// t_d - t_c over every detector-c/detector-d pair of each trial.
Histogram hom_histogram(const HomConfig& config, const HomSource& source, double bin_width,
                        double span, std::uint64_t seed, unsigned threads = 0);

enum class AreaMethod { Window, Fit };

struct Visibility {
  double value = 0.0;
  double stderr = 0.0;
};

/// V = 1 - A_par(0) / A_cross(0) with Poisson propagation. Window integrates
/// +-delay/2; Fit uses fit_hom_peaks over the five-peak cluster.
Visibility visibility_raw(const Histogram& parallel, const Histogram& cross, double delay,
                          AreaMethod method = AreaMethod::Window,
                          const HomPeakFitOptions& fit_options = {});

enum class CorrectionStrategy {
  AddTwiceG2,  // V_raw + 2 g2
  None,
};

double visibility_corrected(double v_raw, double g2,
                            CorrectionStrategy strategy = CorrectionStrategy::AddTwiceG2);

/// Window areas of the cluster peaks at 0, +-delay, +-2 delay (ascending
/// delay), each integrated over +-delay/2.
std::vector<PeakIntegration> cluster_peak_areas(const Histogram& h, double delay);

struct HomSettings {
  double bin_width = 20e-12;
  AreaMethod area_method = AreaMethod::Window;
  CorrectionStrategy correction = CorrectionStrategy::AddTwiceG2;

  double span(double delay) const { return 2.5 * delay; }
};

struct HomRun {
  Histogram parallel;
  Histogram cross;
  Visibility raw;
  double corrected = 0.0;
  double g2 = 0.0;
  double cross_central = 0.0;
  double cross_adjacent_mean = 0.0;
  double cross_central_z = 0.0;  // (central - adjacent mean) / combined Poisson sigma
};

/// Parallel and cross runs share the seed, so they see identical emission
/// and routing draws and differ only in the interference.
HomRun run_hom(const HomConfig& config, const HomSource& source, double g2,
               const HomSettings& settings, std::uint64_t seed, unsigned threads = 0);

struct DelayPoint {
  double delay = 0.0;
  Visibility raw;
};

std::vector<DelayPoint> delay_dependence(std::span<const double> delays, const HomConfig& config,
                                         const HomSource& source, const HomSettings& settings,
                                         std::uint64_t seed, unsigned threads = 0);

}  // namespace qdpillar
