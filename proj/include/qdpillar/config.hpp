#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qdpillar/bloch.hpp"
#include "qdpillar/efficiency.hpp"
#include "qdpillar/hom.hpp"
#include "qdpillar/physical_model.hpp"
#include "qdpillar/spectroscopy.hpp"

namespace qdpillar {

/// Sizes and grids of the figure-reproducing runs.
struct RunSettings {
  std::int64_t hbt_pulses = 1'000'000;
  double hbt_bin_width = 50e-12;
  std::int64_t decay_pulses = 200'000;
  double decay_bin_width = 4e-12;
  int lifetime_points = 15;
  double lifetime_max_detuning = 2.0 * constants::pi * 200e9;  // rad/s
  double lifetime_noise = 0.05;                                 // relative
  int rabi_points = 101;
  double rabi_max_area = 5.0 * constants::pi;
  double rabi_pi_power = 1e-9;  // W for a pi pulse
  int spectrum_points = 4001;
  double spectrum_half_span = 15e9;  // Hz, inside +-fsr/2 of the analyzer
  double spectrum_noise = 0.01;      // relative to peak
  double hom_bin_width = 20e-12;
  std::vector<double> hom_delays{2.1e-9, 12.4e-9};
};

struct ExperimentConfig {
  EmitterParams emitter{};
  double radiative_lifetime = 83.9e-12;  // measured T1 used for the dynamics
  double homogeneous_fwhm = 1.91e9;      // Hz, sets gamma_dephasing
  double inhomogeneous_fwhm = 1.14e9;    // Hz, sets the diffusion sigma
  double eid_coefficient = 10e-15;       // s, excitation-induced dephasing K
  bool dephasing_from_linewidth = true;  // false once gamma_dephasing is given
  bool sigma_from_linewidth = true;      // false once the diffusion sigma is given
  CavityParams cavity{};
  double cavity_detuning = 0.0;  // rad/s
  PulseParams pulse{};
  HomConfig hom{};
  FabryPerotParams fp{};
  Budget budget{};
  double assumed_extraction = 0.66;
  double etalon_linewidth = 3e9;  // Hz
  RunSettings run{};
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";

  /// Nominal device with derived rates filled in.
  static ExperimentConfig defaults();

  /// Recomputes gamma_dephasing and the diffusion sigma from the line widths.
  void derive();
  void validate() const;

  double decay_rate() const { return 1.0 / radiative_lifetime; }
  ObeRates obe_rates() const;
  /// Background photons per second relative to an emitted-photon rate
  /// `signal_rate`, at the post-etalon signal-to-background ratio.
  double background_rate(double signal_rate) const;
  double post_filter_snr() const;
};

/// Parses a config file: nested sections, values with unit suffixes, unknown
/// keys rejected. Throws Error(Parse) with the line on syntax or unit errors
/// and Error(Validation) naming the field on invalid values.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

}  // namespace qdpillar
