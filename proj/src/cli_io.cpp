#include "qdpillar/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>

#include <json.hpp>

#include "qdpillar/emission.hpp"
#include "qdpillar/error.hpp"
#include "qdpillar/fitting.hpp"
#include "qdpillar/histogram.hpp"
#include "qdpillar/hom.hpp"
#include "qdpillar/photon_statistics.hpp"
#include "qdpillar/spectroscopy.hpp"

namespace qdpillar {

namespace {

using Json = nlohmann::ordered_json;

std::ofstream open_output(const ExperimentConfig& c, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  std::ofstream out(c.output_dir / name);
  if (!out) raise(ErrorKind::Io, "cannot write '" + (c.output_dir / name).string() + "'");
  return out;
}

void write_json(const ExperimentConfig& c, const std::string& name, const Json& j) {
  auto out = open_output(c, name);
  out << j.dump(2) << "\n";
}

void write_histogram(const ExperimentConfig& c, const std::string& name, const Histogram& h) {
  auto out = open_output(c, name);
  write_histogram_csv(out, h, c.seed);
}

Json fit_entry(const std::string& model, const FitResult& fit) {
  Json params = Json::object();
  Json errors = Json::object();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    params[fit.names[i]] = fit.params(static_cast<Eigen::Index>(i));
    errors[fit.names[i]] = fit.stderr_of(fit.names[i]);
  }
  return {{"model", model},           {"params", params},
          {"stderr", errors},         {"residual_norm", fit.residual_norm},
          {"converged", fit.converged}, {"iterations", fit.iterations}};
}

EmissionModel emission_model(const ExperimentConfig& c) {
  EmissionModel m;
  m.pulse = c.pulse;
  m.rates = c.obe_rates();
  const double signal_rate = prep_efficiency(m.pulse, m.rates) / m.pulse.rep_period;
  m.background_rate = c.background_rate(signal_rate);
  m.background_timing = BackgroundTiming::Pulsed;
  return m;
}

double normal_draw(std::uint64_t seed, std::uint64_t index) {
  Rng rng = make_stream(seed, index, StreamTag::Synthetic);
  std::normal_distribution<double> normal;
  return normal(rng);
}

// Lifetime curve with multiplicative Gaussian noise, one stream per point.
std::vector<LifetimePoint> noisy_lifetimes(const ExperimentConfig& c, std::vector<double>& clean) {
  const auto detunings = linear_grid(-c.run.lifetime_max_detuning, c.run.lifetime_max_detuning,
                                     static_cast<std::size_t>(c.run.lifetime_points));
  auto curve = lifetime_curve(detunings, c.cavity, c.emitter);
  clean.clear();
  for (auto& p : curve) {
    clean.push_back(p.lifetime);
    const auto i = static_cast<std::uint64_t>(&p - curve.data());
    p.lifetime *= 1.0 + c.run.lifetime_noise * normal_draw(c.seed, i);
  }
  return curve;
}

Histogram synthetic_decay(const ExperimentConfig& c, double lifetime, double counts) {
  const double bw = c.run.decay_bin_width;
  const auto bins = static_cast<std::size_t>(std::ceil((20.0 * lifetime + 0.5e-9) / bw));
  Histogram h = Histogram::uniform(-0.5e-9, bw, bins);
  Rng rng = make_stream(c.seed, 1, StreamTag::Synthetic);
  const double offset = 2.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double lo = h.bin_low(i);
    const double mean = counts * (exp_gauss_cdf(lo + bw, lifetime, c.hom.detector_sigma) -
                                  exp_gauss_cdf(lo, lifetime, c.hom.detector_sigma)) + offset;
    std::poisson_distribution<std::int64_t> poisson(mean);
    h.counts[i] = poisson(rng);
  }
  return h;
}

// Photon-counting noise: the peak holds 1/noise^2 expected counts.
SpectrumTrace with_counting_noise(SpectrumTrace t, double noise, std::uint64_t seed,
                                  std::uint64_t index) {
  if (noise <= 0.0) return t;
  const double peak = *std::max_element(t.intensities.begin(), t.intensities.end());
  const double scale = 1.0 / (noise * noise * peak);
  Rng rng = make_stream(seed, index, StreamTag::Synthetic);
  for (double& y : t.intensities) {
    std::poisson_distribution<std::int64_t> poisson(y * scale);
    y = y > 0.0 ? static_cast<double>(poisson(rng)) / scale : 0.0;
  }
  return t;
}

SpectrumTrace noisy_voigt(const ExperimentConfig& c, std::span<const double> grid, double f_l,
                          double f_g) {
  SpectrumTrace t;
  t.frequencies.assign(grid.begin(), grid.end());
  const double peak = voigt_profile(0.0, f_l, f_g);
  for (double f : grid) t.intensities.push_back(voigt_profile(f, f_l, f_g) / peak);
  return with_counting_noise(t, c.run.spectrum_noise, c.seed, 3);
}

void run_lifetime(const ExperimentConfig& c, unsigned threads, std::ostream& log) {
  std::vector<double> clean;
  const auto points = noisy_lifetimes(c, clean);
  {
    auto out = open_output(c, "lifetime.csv");
    std::vector<double> det, noisy;
    for (const auto& p : points) {
      det.push_back(p.detuning);
      noisy.push_back(p.lifetime);
    }
    const std::vector<std::string> header{"detuning_rad_s", "lifetime_s", "lifetime_noisy_s"};
    const std::vector<std::vector<double>> cols{det, clean, noisy};
    write_csv(out, header, cols);
  }
  const FitResult purcell = fit_purcell(points, c.cavity);

  // Resonant decay from the quantum-jump sampler with detector jitter.
  EmissionModel model;
  model.pulse = c.pulse;
  model.rates.gamma = purcell_rate(c.cavity_detuning, c.cavity, c.emitter);
  model.rates.gamma_dephasing = c.emitter.gamma_dephasing;
  model.rates.eid_coefficient = c.eid_coefficient;
  const double t1_model = 1.0 / model.rates.gamma;
  auto records = sample_emissions(c.run.decay_pulses, model, c.seed, threads);
  records = apply_timing_jitter(records, c.hom.detector_sigma, c.seed, threads);
  const double bw = c.run.decay_bin_width;
  const auto bins = static_cast<std::size_t>(std::ceil((20.0 * t1_model + 0.5e-9) / bw));
  Histogram decay = Histogram::uniform(-0.5e-9, bw, bins);
  for (const auto& r : records)
    for (double t : r.times) decay.add(t);
  write_histogram(c, "lifetime_decay.csv", decay);
  const FitResult fit = fit_decay_irf(decay, c.hom.detector_sigma);

  Json j{{"kind", "lifetime"},
         {"seed", c.seed},
         {"kappa_rad_s", cavity_linewidth(c.cavity)},
         {"F_p", purcell.value("F_p")},
         {"F_p_stderr", purcell.stderr_of("F_p")},
         {"gamma_bulk", purcell.value("gamma_bulk")},
         {"gamma_bulk_stderr", purcell.stderr_of("gamma_bulk")},
         {"T1_model", t1_model},
         {"T1_fit", fit.value("T1")},
         {"T1_fit_stderr", fit.stderr_of("T1")},
         {"decay_pulses", c.run.decay_pulses}};
  write_json(c, "lifetime_summary.json", j);
  log << "lifetime: F_p = " << purcell.value("F_p") << ", T1 = " << fit.value("T1") * 1e12 << " ps\n";
}

void run_rabi(const ExperimentConfig& c, unsigned, std::ostream& log) {
  const auto areas = linear_grid(0.0, c.run.rabi_max_area, static_cast<std::size_t>(c.run.rabi_points));
  const double per_sqrt_power = constants::pi / std::sqrt(c.run.rabi_pi_power);
  std::vector<double> sqrt_powers;
  for (double a : areas) sqrt_powers.push_back(a / per_sqrt_power);
  const auto curve = rabi_curve(sqrt_powers, per_sqrt_power, c.pulse, c.obe_rates());
  std::vector<double> x, area, signal;
  for (const auto& p : curve) {
    x.push_back(p.sqrt_power);
    area.push_back(p.area);
    signal.push_back(p.signal);
  }
  {
    auto out = open_output(c, "rabi.csv");
    const std::vector<std::string> header{"sqrt_power_sqrtW", "area_rad", "signal"};
    const std::vector<std::vector<double>> cols{x, area, signal};
    write_csv(out, header, cols);
  }
  Json maxima = Json::array();
  for (std::size_t i = 1; i + 1 < signal.size(); ++i)
    if (signal[i] > signal[i - 1] && signal[i] >= signal[i + 1])
      maxima.push_back({{"area_over_pi", area[i] / constants::pi}, {"signal", signal[i]}});
  Json j{{"kind", "rabi"}, {"prep_efficiency", prep_efficiency(c.pulse, c.obe_rates())},
         {"maxima", maxima}};
  write_json(c, "rabi_summary.json", j);
  log << "rabi: " << maxima.size() << " maxima\n";
}

HbtSettings hbt_settings(const ExperimentConfig& c) {
  HbtSettings s;
  s.pulses = c.run.hbt_pulses;
  s.bin_width = c.run.hbt_bin_width;
  s.jitter_sigma = c.hom.detector_sigma;
  return s;
}

void run_hbt_cmd(const ExperimentConfig& c, unsigned threads, std::ostream& log) {
  const EmissionModel model = emission_model(c);
  const HbtSettings settings = hbt_settings(c);
  const HbtRun run = run_hbt(model, settings, c.seed, threads);
  write_histogram(c, "hbt_hist.csv", run.histogram);

  // Efficiency into the first lens against purity, smaller runs per area.
  HbtSettings small = settings;
  small.pulses = std::max<std::int64_t>(settings.pulses / 10, 1000);
  const std::vector<double> areas{0.25 * constants::pi, 0.5 * constants::pi, 0.75 * constants::pi,
                                  constants::pi};
  const auto purity = purity_vs_power(areas, model, c.assumed_extraction, small, c.seed + 1, threads);
  {
    auto out = open_output(c, "purity.csv");
    std::vector<double> a, eff, pur, err;
    for (const auto& p : purity) {
      a.push_back(p.area);
      eff.push_back(p.photons_per_pulse);
      pur.push_back(p.purity);
      err.push_back(p.g2_stderr);
    }
    const std::vector<std::string> header{"area_rad", "photons_per_pulse", "purity", "g2_stderr"};
    const std::vector<std::vector<double>> cols{a, eff, pur, err};
    write_csv(out, header, cols);
  }
  Json j{{"kind", "hbt"},
         {"seed", c.seed},
         {"pulses", settings.pulses},
         {"g2", run.g2.g2},
         {"g2_stderr", run.g2.stderr},
         {"central_area", run.g2.central_area},
         {"side_area_mean", run.g2.side_area_mean},
         {"side_peaks", run.g2.side_peaks},
         {"mean_photons", run.mean_photons},
         {"multi_photon_fraction", run.multi_photon_fraction},
         {"background_rate", model.background_rate}};
  write_json(c, "hbt_summary.json", j);
  log << "hbt: g2(0) = " << run.g2.g2 << " +- " << run.g2.stderr << "\n";
}

void run_hom_cmd(const ExperimentConfig& c, unsigned threads, std::ostream& log) {
  HomSource source{emission_model(c), c.emitter.diffusion};
  const HbtRun hbt = run_hbt(source.emission, hbt_settings(c), c.seed, threads);
  HomSettings settings;
  settings.bin_width = c.run.hom_bin_width;
  const HomRun run = run_hom(c.hom, source, hbt.g2.g2, settings, c.seed, threads);
  write_histogram(c, "hom_hist_parallel.csv", run.parallel);
  write_histogram(c, "hom_hist_cross.csv", run.cross);

  Json delays = Json::array();
  for (double d : c.run.hom_delays) {
    Visibility v = run.raw;
    if (d != c.hom.delay) {
      const double one[] = {d};
      v = delay_dependence(one, c.hom, source, settings, c.seed, threads).front().raw;
    }
    delays.push_back({{"delay", d}, {"V_raw", v.value}, {"stderr", v.stderr},
                      {"V_corr", visibility_corrected(std::clamp(v.value, 0.0, 1.0), hbt.g2.g2)}});
  }
  Json j{{"kind", "hom"},
         {"seed", c.seed},
         {"n_pairs", c.hom.n_pairs},
         {"V_raw", run.raw.value},
         {"V_corr", run.corrected},
         {"stderr", run.raw.stderr},
         {"delay", c.hom.delay},
         {"polarization", "parallel"},
         {"g2", hbt.g2.g2},
         {"cross_central", run.cross_central},
         {"cross_adjacent_mean", run.cross_adjacent_mean},
         {"cross_central_z", run.cross_central_z},
         {"delays", delays}};
  write_json(c, "hom_summary.json", j);
  log << "hom: V_raw = " << run.raw.value << " +- " << run.raw.stderr << ", V_corr = " << run.corrected
      << "\n";
}

void run_spectrum(const ExperimentConfig& c, unsigned, std::ostream& log) {
  const auto grid = linear_grid(-c.run.spectrum_half_span, c.run.spectrum_half_span,
                                static_cast<std::size_t>(c.run.spectrum_points));
  const ObeRates rates = c.obe_rates();
  const SpectrumTrace spectrum =
      emission_spectrum(rates.gamma, rates.gamma_dephasing, c.emitter.diffusion.sigma, grid);
  {
    auto out = open_output(c, "spectrum.csv");
    const std::vector<std::string> header{"freq_hz", "intensity"};
    const std::vector<std::vector<double>> cols{spectrum.frequencies, spectrum.intensities};
    write_csv(out, header, cols);
  }
  const SpectrumTrace clean_scan = fp_scan(spectrum, c.fp, grid);
  const std::vector<double>& clean = clean_scan.intensities;
  const SpectrumTrace scan = with_counting_noise(clean_scan, c.run.spectrum_noise, c.seed, 4);
  {
    auto out = open_output(c, "fp_scan.csv");
    const std::vector<std::string> header{"freq_hz", "transmission", "measured"};
    const std::vector<std::vector<double>> cols{scan.frequencies, clean, scan.intensities};
    write_csv(out, header, cols);
  }
  const FitResult fit = fit_voigt(scan);
  Json j{{"kind", "spectrum"},
         {"lifetime_limited_fwhm", homogeneous_fwhm(rates.gamma, 0.0)},
         {"homogeneous_fwhm", homogeneous_fwhm(rates.gamma, rates.gamma_dephasing)},
         {"inhomogeneous_fwhm", inhomogeneous_fwhm(c.emitter.diffusion.sigma)},
         {"f_L_fit", fit.value("f_L")},
         {"f_L_fit_stderr", fit.stderr_of("f_L")},
         {"f_L_minus_analyzer", fit.value("f_L") - c.fp.linewidth},
         {"f_G_fit", fit.value("f_G")},
         {"f_G_fit_stderr", fit.stderr_of("f_G")},
         {"measured_fwhm", measure_fwhm(SpectrumTrace{scan.frequencies, clean})}};
  write_json(c, "spectrum_summary.json", j);
  log << "spectrum: f_L = " << fit.value("f_L") * 1e-9 << " GHz, f_G = " << fit.value("f_G") * 1e-9
      << " GHz\n";
}

void run_fit(const ExperimentConfig& c, unsigned, std::ostream& log) {
  Json entries = Json::array();
  std::vector<double> clean;
  const auto points = noisy_lifetimes(c, clean);
  entries.push_back(fit_entry("purcell", fit_purcell(points, c.cavity)));

  const Histogram decay = synthetic_decay(c, c.radiative_lifetime, 1e5);
  entries.push_back(fit_entry("decay_irf", fit_decay_irf(decay, c.hom.detector_sigma)));

  const auto grid = linear_grid(-c.run.spectrum_half_span, c.run.spectrum_half_span,
                                static_cast<std::size_t>(c.run.spectrum_points));
  entries.push_back(
      fit_entry("voigt", fit_voigt(noisy_voigt(c, grid, c.homogeneous_fwhm, c.inhomogeneous_fwhm))));

  // Five-peak HOM cluster with the coincidence weights 1:2:2:2:1 and the
  // central peak suppressed by the mean two-photon overlap.
  const double delay = c.hom.delay;
  const double sigma_t = c.hom.detector_sigma * std::sqrt(2.0);
  const double m = pair_overlap(c.decay_rate(), c.emitter.gamma_dephasing, 0.0);
  const double weights[] = {1.0, 2.0, 2.0 * (1.0 - m), 2.0, 1.0};
  const double scale = 1e4;
  Histogram hom = Histogram::centered(2.5 * delay, c.run.hom_bin_width);
  Rng rng = make_stream(c.seed, 2, StreamTag::Synthetic);
  for (std::size_t i = 0; i < hom.size(); ++i) {
    const double lo = hom.bin_low(i);
    double mean = 0.0;
    for (int k = -2; k <= 2; ++k)
      mean += scale * weights[k + 2] *
              (laplace_gauss_cdf(lo + hom.bin_width - k * delay, c.radiative_lifetime, sigma_t) -
               laplace_gauss_cdf(lo - k * delay, c.radiative_lifetime, sigma_t));
    std::poisson_distribution<std::int64_t> poisson(mean);
    hom.counts[i] = mean > 0.0 ? poisson(rng) : 0;
  }
  const std::vector<double> centers{-2 * delay, -delay, 0.0, delay, 2 * delay};
  HomPeakFitOptions opts;
  opts.timing_sigma = sigma_t;
  opts.lifetime = c.radiative_lifetime;
  entries.push_back(fit_entry("hom_peaks", fit_hom_peaks(hom, centers, opts).fit));

  write_json(c, "fit_report.json", Json{{"kind", "fit"}, {"seed", c.seed}, {"fits", entries}});
  log << "fit: " << entries.size() << " models\n";
}

void run_budget(const ExperimentConfig& c, unsigned, std::ostream& log) {
  Json stages = Json::array();
  for (const auto& s : c.budget.stages) stages.push_back({{"name", s.name}, {"efficiency", s.efficiency}});
  const double chain = chain_efficiency(c.budget.stages);
  const double overall = overall_system_efficiency(c.budget);
  const double extraction = infer_extraction(c.budget, c.budget.stages);
  const RateSplit split = signal_background_split(c.budget.detected_rate, c.budget.snr_pre_filter);
  Json j{{"kind", "budget"},
         {"stages", stages},
         {"chain", chain},
         {"assumed_extraction", c.assumed_extraction},
         {"predicted_overall", chain * c.assumed_extraction},
         {"overall", overall},
         {"inferred_extraction", extraction},
         {"rounding", "4 significant digits"},
         {"overall_rounded", round_significant(overall)},
         {"inferred_extraction_rounded", round_significant(extraction)},
         {"snr_pre_filter", c.budget.snr_pre_filter},
         {"snr_post_filter", c.post_filter_snr()},
         {"signal_rate", split.signal},
         {"background_rate", split.background}};
  write_json(c, "budget_summary.json", j);
  log << "budget: overall = " << overall << ", inferred extraction = " << extraction << "\n";
}

}  // namespace

void write_csv(std::ostream& out, std::span<const std::string> header,
               std::span<const std::vector<double>> columns) {
  if (header.size() != columns.size()) raise(ErrorKind::InvalidParameter, "write_csv: header/column mismatch");
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << "\n" << std::setprecision(17);
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& col : columns)
    if (col.size() != rows) raise(ErrorKind::InvalidParameter, "write_csv: ragged columns");
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k][i];
    out << "\n";
  }
}

void apply_overrides(ExperimentConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.trials) {
    if (*o.trials < 1) raise(ErrorKind::Validation, "--trials must be >= 1");
    c.run.hbt_pulses = *o.trials;
    c.run.decay_pulses = *o.trials;
    c.hom.n_pairs = *o.trials;
  }
  if (o.bins) {
    if (*o.bins < 3) raise(ErrorKind::Validation, "--bins must be >= 3");
    const auto n = static_cast<double>(*o.bins);
    const double rep = c.pulse.rep_period;
    c.run.hbt_bin_width = 2.0 * HbtSettings{}.span(rep) / n;
    c.run.hom_bin_width = 2.0 * HomSettings{}.span(c.hom.delay) / n;
    c.run.decay_bin_width = (20.0 * c.radiative_lifetime + 0.5e-9) / n;
    c.run.spectrum_points = static_cast<int>(*o.bins);
  }
  c.validate();
}

void run_subcommand(const std::string& name, const ExperimentConfig& config, unsigned threads,
                    std::ostream& log) {
  using Runner = void (*)(const ExperimentConfig&, unsigned, std::ostream&);
  const std::pair<const char*, Runner> table[] = {
      {"lifetime", run_lifetime}, {"rabi", run_rabi}, {"hbt", run_hbt_cmd}, {"hom", run_hom_cmd},
      {"spectrum", run_spectrum}, {"fit", run_fit},   {"budget", run_budget}};
  for (const auto& [n, fn] : table) {
    if (name == n || name == "all") fn(config, threads, log);
    if (name == n) return;
  }
  if (name != "all") raise(ErrorKind::Validation, "unknown subcommand '" + name + "'");
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::Parse:
      case ErrorKind::Validation:
        return 2;
      default:
        return 3;
    }
  }
  return 3;
}

}  // namespace qdpillar
