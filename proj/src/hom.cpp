#include "qdpillar/hom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <random>

#include "qdpillar/error.hpp"
#include "qdpillar/parallel.hpp"

namespace qdpillar {

namespace {

struct Detection {
  double time;
  bool port_c;
};

// Everything one trial needs that does not change between trials.
struct TrialContext {
  const HomConfig& config;
  const HomSource& source;
  const EmissionSampler& sampler;
  std::uint64_t seed;
  double gamma;
  double gamma_dephasing;
};

struct RoutedPhoton {
  double arrival;
  bool long_arm;
  bool early_pulse;
  bool emitter;
};

void simulate_trial(const TrialContext& ctx, std::int64_t trial, std::vector<Detection>& out) {
  const HomConfig& cfg = ctx.config;
  const auto index = static_cast<std::uint64_t>(trial);
  Rng emit_a = make_stream(ctx.seed, 2 * index, StreamTag::Emission);
  Rng emit_b = make_stream(ctx.seed, 2 * index + 1, StreamTag::Emission);
  const EmissionRecord early = ctx.sampler.sample(2 * trial, emit_a);
  const EmissionRecord late = ctx.sampler.sample(2 * trial + 1, emit_b);

  Rng routing = make_stream(ctx.seed, index, StreamTag::Routing);
  Rng diffusion = make_stream(ctx.seed, index, StreamTag::Diffusion);
  Rng jitter = make_stream(ctx.seed, index, StreamTag::Jitter);

  // Frequency offsets at the two excitation epochs.
  const std::array<double, 2> epochs{0.0, cfg.delay};
  const auto offsets = ou_path(ctx.source.diffusion.tau_c, ctx.source.diffusion.sigma, epochs,
                               diffusion);
  const PhotonLabel label_early{0.0, offsets[0], Arm::Early};
  const PhotonLabel label_late{cfg.delay, offsets[1], Arm::Late};

  std::vector<RoutedPhoton> photons;
  photons.reserve(early.size() + late.size());
  auto route = [&](const EmissionRecord& rec, const PhotonLabel& label) {
    for (std::size_t k = 0; k < rec.size(); ++k) {
      const bool long_arm = uniform_open0(routing) <= 0.5;
      photons.push_back({label.emission_time + rec.times[k] + (long_arm ? cfg.delay : 0.0),
                         long_arm, label.arm == Arm::Early,
                         rec.sources[k] == PhotonSource::Emitter});
    }
  };
  route(early, label_early);
  route(late, label_late);

  // The interfering pair: first emitter photon of the early pulse that took
  // the long arm, first emitter photon of the late pulse in the short arm.
  std::ptrdiff_t pair_long = -1;
  std::ptrdiff_t pair_short = -1;
  for (std::size_t k = 0; k < photons.size(); ++k) {
    const auto& p = photons[k];
    if (!p.emitter) continue;
    if (pair_long < 0 && p.early_pulse && p.long_arm) pair_long = static_cast<std::ptrdiff_t>(k);
    if (pair_short < 0 && !p.early_pulse && !p.long_arm)
      pair_short = static_cast<std::ptrdiff_t>(k);
  }

  const double t = cfg.splitter_t;
  const double r = cfg.splitter_r;
  std::vector<char> port_c(photons.size());
  for (std::size_t k = 0; k < photons.size(); ++k) {
    // Long-arm photons are transmitted to c, short-arm photons reflected to c.
    const double p_c = photons[k].long_arm ? t : r;
    port_c[k] = uniform_open0(routing) <= p_c;
  }
  // Two draws always, so parallel and cross runs stay in lockstep.
  const double u_coincide = uniform_open0(routing);
  const double u_orient = uniform_open0(routing);
  if (pair_long >= 0 && pair_short >= 0) {
    const double m = cfg.polarization == Polarization::Cross
                         ? 0.0
                         : pair_overlap(ctx.gamma, ctx.gamma_dephasing,
                                        label_late.frequency_offset - label_early.frequency_offset);
    const double distinct = t * t + r * r;
    const double p_split = distinct - 2.0 * t * r * m;
    const auto il = static_cast<std::size_t>(pair_long);
    const auto is = static_cast<std::size_t>(pair_short);
    if (u_coincide <= p_split) {
      const bool long_to_c = u_orient <= t * t / distinct;
      port_c[il] = long_to_c;
      port_c[is] = !long_to_c;
    } else {
      const bool both_c = u_orient <= 0.5;
      port_c[il] = both_c;
      port_c[is] = both_c;
    }
  }

  std::normal_distribution<double> noise(0.0, cfg.detector_sigma);
  out.clear();
  for (std::size_t k = 0; k < photons.size(); ++k)
    out.push_back({photons[k].arrival + (cfg.detector_sigma > 0.0 ? noise(jitter) : 0.0),
                   port_c[k] != 0});
}

}  // namespace

void HomConfig::validate() const {
  if (!(delay > 0.0) || !std::isfinite(delay)) raise(ErrorKind::InvalidParameter, "hom.delay must be > 0");
  if (!(splitter_t > 0.0 && splitter_t < 1.0) || !(splitter_r > 0.0 && splitter_r < 1.0) ||
      std::abs(splitter_t + splitter_r - 1.0) > 1e-9)
    raise(ErrorKind::InvalidParameter, "hom splitter needs T + R = 1 with 0 < T < 1");
  if (n_pairs < 1) raise(ErrorKind::InvalidParameter, "hom.n_pairs must be >= 1");
  if (!(detector_sigma >= 0.0) || !std::isfinite(detector_sigma))
    raise(ErrorKind::InvalidParameter, "hom.detector_sigma must be >= 0");
}

std::vector<double> ou_path(double tau_c, double sigma, std::span<const double> times, Rng& rng) {
  if (!(tau_c > 0.0)) raise(ErrorKind::InvalidParameter, "ou_path: tau_c must be > 0");
  if (!(sigma >= 0.0)) raise(ErrorKind::InvalidParameter, "ou_path: sigma must be >= 0");
  std::vector<double> x(times.size());
  if (times.empty()) return x;
  std::normal_distribution<double> normal;
  x[0] = sigma * normal(rng);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    if (dt < 0.0) raise(ErrorKind::Precondition, "ou_path: times must be sorted");
    const double decay = std::exp(-dt / tau_c);
    x[k] = x[k - 1] * decay + sigma * std::sqrt(-std::expm1(-2.0 * dt / tau_c)) * normal(rng);
  }
  return x;
}

std::vector<double> ou_path(double tau_c, double sigma, std::span<const double> times,
                            std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, StreamTag::Diffusion);
  return ou_path(tau_c, sigma, times, rng);
}

Histogram hom_histogram(const HomConfig& config, const HomSource& source, double bin_width,
                        double span, std::uint64_t seed, unsigned threads) {
  config.validate();
  source.emission.validate();
  source.diffusion.validate();
  if (!(bin_width > 0.0) || !(span > bin_width))
    raise(ErrorKind::InvalidParameter, "hom_histogram needs 0 < bin_width < span");

  const EmissionSampler sampler(source.emission);
  const TrialContext ctx{config, source, sampler, seed, source.emission.rates.gamma,
                         source.emission.rates.gamma_dephasing};
  Histogram total = Histogram::centered(span, bin_width);
  std::mutex merge;
  parallel_for(static_cast<std::size_t>(config.n_pairs), threads,
               [&](std::size_t begin, std::size_t end) {
                 Histogram local = Histogram::centered(span, bin_width);
                 std::vector<Detection> det;
                 for (std::size_t i = begin; i < end; ++i) {
                   simulate_trial(ctx, static_cast<std::int64_t>(i), det);
                   for (const auto& start : det) {
                     if (!start.port_c) continue;
                     for (const auto& stop : det)
                       if (!stop.port_c) local.add(stop.time - start.time);
                   }
                 }
                 std::lock_guard lock(merge);
                 total += local;
               });
  return total;
}

Visibility visibility_raw(const Histogram& parallel, const Histogram& cross, double delay,
                          AreaMethod method, const HomPeakFitOptions& fit_options) {
  parallel.validate();
  cross.validate();
  if (!(delay > 0.0)) raise(ErrorKind::InvalidParameter, "visibility_raw: delay must be > 0");
  if (parallel.t_min > -0.5 * delay || cross.t_min > -0.5 * delay ||
      parallel.t_max() < 0.5 * delay || cross.t_max() < 0.5 * delay)
    raise(ErrorKind::InsufficientSpan, "visibility_raw: histograms must cover the zero-delay peak");

  double a_par = 0.0;
  double a_cross = 0.0;
  double var_par = 0.0;
  double var_cross = 0.0;
  if (method == AreaMethod::Window) {
    a_par = static_cast<double>(parallel.window_sum(0.0, 0.5 * delay));
    a_cross = static_cast<double>(cross.window_sum(0.0, 0.5 * delay));
    var_par = std::max(a_par, 1.0);
    var_cross = std::max(a_cross, 1.0);
  } else {
    std::vector<double> centers;
    for (int k = -2; k <= 2; ++k) {
      const double c = k * delay;
      if (c - 0.5 * delay >= parallel.t_min && c + 0.5 * delay <= parallel.t_max()) centers.push_back(c);
    }
    const auto central = static_cast<std::size_t>(
        std::find(centers.begin(), centers.end(), 0.0) - centers.begin());
    const HomPeakFit fp = fit_hom_peaks(parallel, centers, fit_options);
    const HomPeakFit fc = fit_hom_peaks(cross, centers, fit_options);
    a_par = fp.peaks[central].area;
    a_cross = fc.peaks[central].area;
    var_par = std::max(fp.peaks[central].area_stderr * fp.peaks[central].area_stderr, 1.0);
    var_cross = std::max(fc.peaks[central].area_stderr * fc.peaks[central].area_stderr, 1.0);
  }
  if (!(a_cross > 0.0)) raise(ErrorKind::ZeroReference, "visibility_raw: cross-polarized central peak is empty");
  const double ratio = a_par / a_cross;
  // Delta method; an empty parallel peak still carries one count of variance.
  const double var = var_par / (a_cross * a_cross) + ratio * ratio * var_cross / (a_cross * a_cross);
  return {1.0 - ratio, std::sqrt(var)};
}

double visibility_corrected(double v_raw, double g2, CorrectionStrategy strategy) {
  if (!(v_raw >= 0.0 && v_raw <= 1.0)) raise(ErrorKind::OutOfRange, "visibility_corrected: V_raw outside [0, 1]");
  if (!(g2 >= 0.0 && g2 < 0.5)) raise(ErrorKind::OutOfRange, "visibility_corrected: g2 outside [0, 0.5)");
  switch (strategy) {
    case CorrectionStrategy::AddTwiceG2:
      return v_raw + 2.0 * g2;
    case CorrectionStrategy::None:
      return v_raw;
  }
  return v_raw;
}

std::vector<PeakIntegration> cluster_peak_areas(const Histogram& h, double delay) {
  h.validate();
  if (!(delay > 0.0)) raise(ErrorKind::InvalidParameter, "cluster_peak_areas: delay must be > 0");
  std::vector<PeakIntegration> out;
  for (int k = -2; k <= 2; ++k) {
    const double c = k * delay;
    const double a = static_cast<double>(h.window_sum(c, 0.5 * delay));
    out.push_back({c, 0.5 * delay, a, std::sqrt(a)});
  }
  return out;
}

HomRun run_hom(const HomConfig& config, const HomSource& source, double g2,
               const HomSettings& settings, std::uint64_t seed, unsigned threads) {
  HomRun run;
  HomConfig cfg = config;
  const double span = settings.span(cfg.delay);
  cfg.polarization = Polarization::Parallel;
  run.parallel = hom_histogram(cfg, source, settings.bin_width, span, seed, threads);
  cfg.polarization = Polarization::Cross;
  run.cross = hom_histogram(cfg, source, settings.bin_width, span, seed, threads);

  HomPeakFitOptions fit;
  fit.timing_sigma = std::max(config.detector_sigma * std::sqrt(2.0), 1e-13);
  fit.lifetime = 1.0 / source.emission.rates.gamma;
  run.raw = visibility_raw(run.parallel, run.cross, cfg.delay, settings.area_method, fit);
  run.g2 = g2;
  run.corrected = visibility_corrected(std::clamp(run.raw.value, 0.0, 1.0), g2, settings.correction);

  const auto peaks = cluster_peak_areas(run.cross, cfg.delay);
  run.cross_central = peaks[2].area;
  run.cross_adjacent_mean = 0.5 * (peaks[1].area + peaks[3].area);
  const double sigma = std::sqrt(std::max(run.cross_central, 1.0) + 0.5 * std::max(run.cross_adjacent_mean, 1.0));
  run.cross_central_z = (run.cross_central - run.cross_adjacent_mean) / sigma;
  return run;
}

std::vector<DelayPoint> delay_dependence(std::span<const double> delays, const HomConfig& config,
                                         const HomSource& source, const HomSettings& settings,
                                         std::uint64_t seed, unsigned threads) {
  if (delays.empty()) raise(ErrorKind::EmptyInput, "delay_dependence: no delays");
  std::vector<DelayPoint> out;
  for (double d : delays) {
    if (!(d > 0.0)) raise(ErrorKind::Precondition, "delay_dependence: delays must be positive");
    HomConfig cfg = config;
    cfg.delay = d;
    const double span = settings.span(d);
    cfg.polarization = Polarization::Parallel;
    const Histogram par = hom_histogram(cfg, source, settings.bin_width, span, seed, threads);
    cfg.polarization = Polarization::Cross;
    const Histogram cross = hom_histogram(cfg, source, settings.bin_width, span, seed, threads);
    HomPeakFitOptions fit;
    fit.timing_sigma = std::max(config.detector_sigma * std::sqrt(2.0), 1e-13);
    fit.lifetime = 1.0 / source.emission.rates.gamma;
    out.push_back({d, visibility_raw(par, cross, d, settings.area_method, fit)});
  }
  return out;
}

}  // namespace qdpillar
