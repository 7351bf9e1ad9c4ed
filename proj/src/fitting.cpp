#include "qdpillar/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qdpillar/error.hpp"

namespace qdpillar {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrtPi = 0.5641895835477563;

// exp(z^2) erfc(z) for z >= 0.
double erfcx(double z) {
  if (z < 25.0) return std::exp(z * z) * std::erfc(z);
  const double iz2 = 1.0 / (z * z);
  return kInvSqrtPi / z * (1.0 - 0.5 * iz2 + 0.75 * iz2 * iz2 - 1.875 * iz2 * iz2 * iz2);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double weight_of(double count, Weighting w) {
  return w == Weighting::Poisson ? 1.0 / std::sqrt(std::max(count, 1.0)) : 1.0;
}

// Signed Poisson deviance residual: its square sums to twice the negative
// log-likelihood ratio, so the least-squares minimum is the Poisson MLE
// (chi-square with observed-count weights biases sparse tails low).
double count_residual(double model, double count, Weighting w) {
  if (w == Weighting::Uniform) return model - count;
  const double m = std::max(model, 1e-300);
  const double d = count > 0.0 ? m - count + count * std::log(count / m) : m;
  return std::copysign(std::sqrt(2.0 * std::max(d, 0.0)), m - count);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

double exp_gauss_cdf(double t, double lifetime, double sigma) {
  if (sigma <= 0.0) return t <= 0.0 ? 0.0 : -std::expm1(-t / lifetime);
  const double z = (sigma / lifetime - t / sigma) / kSqrt2;
  double tail;
  if (z > 0.0) {
    tail = 0.5 * erfcx(z) * std::exp(-0.5 * t * t / (sigma * sigma));
  } else {
    tail = 0.5 * std::exp(-t / lifetime + 0.5 * sigma * sigma / (lifetime * lifetime)) * std::erfc(z);
  }
  return normal_cdf(t / sigma) - tail;
}

double laplace_gauss_cdf(double t, double lifetime, double sigma) {
  return 0.5 * (exp_gauss_cdf(t, lifetime, sigma) + 1.0 - exp_gauss_cdf(-t, lifetime, sigma));
}

FitResult fit_decay_irf(const Histogram& h, double irf_sigma, const DecayFitOptions& options) {
  h.validate();
  if (!(irf_sigma >= 0.0)) raise(ErrorKind::InvalidParameter, "irf_sigma must be >= 0");
  if (h.size() < 30) raise(ErrorKind::Precondition, "fit_decay_irf needs at least 30 bins");

  const std::size_t n = h.size();
  std::vector<double> pre;
  for (std::size_t i = 0; i < n; ++i)
    if (h.bin_center(i) < options.t0 - 3.0 * irf_sigma - h.bin_width)
      pre.push_back(static_cast<double>(h.counts[i]));
  const double min_count = static_cast<double>(*std::min_element(h.counts.begin(), h.counts.end()));
  const double offset0 = pre.size() >= 3 ? median(pre) : min_count;

  double excess_sum = 0.0;
  double moment = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::max(static_cast<double>(h.counts[i]) - offset0, 0.0);
    peak = std::max(peak, e);
    excess_sum += e;
    const double dt = h.bin_center(i) - options.t0;
    if (dt > 0.0) moment += e * dt;
  }
  if (!(excess_sum > 0.0) || peak < 3.0 * std::sqrt(offset0 + 1.0))
    raise(ErrorKind::DegenerateData, "fit_decay_irf: no decay above the background");
  const double lifetime0 = std::max(moment / excess_sum, h.bin_width);
  if (h.t_max() - options.t0 < 3.0 * lifetime0)
    raise(ErrorKind::Precondition, "fit_decay_irf: histogram must extend over >= 3 lifetimes");

  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = static_cast<double>(h.counts[i]);
  auto residuals = [&](const Eigen::VectorXd& p) {
    const double lifetime = p(0);
    const double amplitude = p(1);
    const double offset = p(2);
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    double lower = exp_gauss_cdf(h.bin_low(0) - options.t0, lifetime, irf_sigma);
    for (std::size_t i = 0; i < n; ++i) {
      const double upper = exp_gauss_cdf(h.bin_low(i) + h.bin_width - options.t0, lifetime, irf_sigma);
      const auto k = static_cast<Eigen::Index>(i);
      r(k) = count_residual(amplitude * (upper - lower) + offset, y(k), options.weighting);
      lower = upper;
    }
    return r;
  };

  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{Eigen::Vector3d(1e-3 * h.bin_width, 0.0, 0.0), Eigen::Vector3d(inf, inf, inf)};
  LeastSquaresOptions ls;
  ls.scale_covariance = options.weighting == Weighting::Uniform;
  ls.typical_scale = Eigen::Vector3d(lifetime0, excess_sum, std::max(offset0, 1.0));
  return least_squares(residuals, Eigen::Vector3d(lifetime0, excess_sum, offset0), bounds, ls,
                       {"T1", "amplitude", "offset"});
}

FitResult fit_purcell(std::span<const LifetimePoint> points, const CavityParams& cavity,
                      const PurcellFitOptions& options) {
  cavity.validate();
  if (points.size() < 5) raise(ErrorKind::Precondition, "fit_purcell needs at least 5 points");
  const double kappa = cavity_linewidth(cavity);
  bool all_near = true;
  bool all_far = true;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.detuning) || !(pt.lifetime > 0.0))
      raise(ErrorKind::InvalidParameter, "fit_purcell: lifetimes must be > 0, detunings finite");
    if (std::abs(pt.detuning) >= kappa) all_near = false;
    if (std::abs(pt.detuning) <= 5.0 * kappa) all_far = false;
  }
  if (all_near || all_far)
    raise(ErrorKind::InsufficientSpan, "fit_purcell: detunings must span on and off resonance");

  double t_min = std::numeric_limits<double>::infinity();
  double t_max = 0.0;
  for (const auto& pt : points) {
    t_min = std::min(t_min, pt.lifetime);
    t_max = std::max(t_max, pt.lifetime);
  }
  const Eigen::Index p = options.float_kappa ? 3 : 2;
  Eigen::VectorXd init(p);
  init(0) = std::max(t_max / t_min - 1.0, 0.0);
  init(1) = 1.0 / t_max;
  if (options.float_kappa) init(2) = kappa;

  auto residuals = [&](const Eigen::VectorXd& x) {
    const double k = options.float_kappa ? x(2) : kappa;
    Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double model = 1.0 / purcell_rate(points[i].detuning, k, x(0), x(1));
      r(static_cast<Eigen::Index>(i)) = (model - points[i].lifetime) / points[i].lifetime;
    }
    return r;
  };
  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Constant(p, inf)};
  bounds.lower(1) = 1e-12 * init(1);
  if (options.float_kappa) bounds.lower(2) = 1e-6 * kappa;
  std::vector<std::string> names{"F_p", "gamma_bulk"};
  if (options.float_kappa) names.emplace_back("kappa");
  LeastSquaresOptions ls;
  ls.typical_scale = init.cwiseAbs().cwiseMax(1.0);
  ls.typical_scale(1) = init(1);
  if (options.float_kappa) ls.typical_scale(2) = kappa;
  return least_squares(residuals, init, bounds, ls, std::move(names));
}

FitResult fit_voigt(const SpectrumTrace& trace, const VoigtFitOptions& options) {
  trace.validate();
  double fwhm0 = 0.0;
  try {
    fwhm0 = measure_fwhm(trace);
  } catch (const Error&) {
    raise(ErrorKind::DegenerateData, "fit_voigt: no resolvable line in the trace");
  }
  if (!(fwhm0 > 0.0)) raise(ErrorKind::DegenerateData, "fit_voigt: zero-width line");
  const auto& f = trace.frequencies;
  if (f.back() - f.front() < 5.0 * fwhm0)
    raise(ErrorKind::Precondition, "fit_voigt: trace must span at least 5 line widths");
  const auto peak_it = std::max_element(trace.intensities.begin(), trace.intensities.end());
  const double center0 = f[static_cast<std::size_t>(peak_it - trace.intensities.begin())];
  const double width0 = fwhm0 / voigt_fwhm_approx(1.0, 1.0);
  const double area0 = trace.integral();

  const auto n = static_cast<Eigen::Index>(trace.size());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i)
    w(i) = weight_of(trace.intensities[static_cast<std::size_t>(i)], options.weighting);
  auto residuals = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      r(i) = (x(3) * voigt_profile(f[k] - x(2), x(0), x(1)) - trace.intensities[k]) * w(i);
    }
    return r;
  };
  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{Eigen::Vector4d(0.0, 0.0, -inf, 0.0), Eigen::Vector4d(inf, inf, inf, inf)};
  LeastSquaresOptions ls;
  ls.scale_covariance = options.weighting == Weighting::Uniform;
  ls.typical_scale = Eigen::Vector4d(width0, width0, fwhm0, std::abs(area0));
  return least_squares(residuals, Eigen::Vector4d(width0, width0, center0, area0), bounds, ls,
                       {"f_L", "f_G", "center", "amplitude"});
}

HomPeakFit fit_hom_peaks(const Histogram& h, std::span<const double> peak_centers,
                         const HomPeakFitOptions& options) {
  h.validate();
  if (peak_centers.empty()) raise(ErrorKind::EmptyInput, "fit_hom_peaks: no peak centers");
  if (!(options.timing_sigma > 0.0) || !(options.lifetime > 0.0))
    raise(ErrorKind::InvalidParameter, "fit_hom_peaks: timing_sigma and lifetime must be > 0");
  std::vector<double> sorted(peak_centers.begin(), peak_centers.end());
  std::sort(sorted.begin(), sorted.end());
  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) spacing = std::min(spacing, sorted[i] - sorted[i - 1]);
  if (sorted.size() > 1 && !(spacing > 5.0 * options.timing_sigma))
    raise(ErrorKind::OverlappingPeaks, "fit_hom_peaks: peaks closer than 5 timing sigmas");
  const double half = sorted.size() > 1 ? 0.5 * spacing
                                        : 10.0 * std::max(options.timing_sigma, options.lifetime);

  std::vector<std::size_t> bins;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double c = h.bin_center(i);
    for (double pc : peak_centers)
      if (c >= pc - half && c < pc + half) {
        bins.push_back(i);
        break;
      }
  }
  if (bins.empty()) raise(ErrorKind::InsufficientSpan, "fit_hom_peaks: histogram misses the peaks");

  const auto n_peaks = static_cast<Eigen::Index>(peak_centers.size());
  const Eigen::Index p = n_peaks + (options.fit_lifetime ? 1 : 0);
  Eigen::VectorXd init(p);
  for (Eigen::Index k = 0; k < n_peaks; ++k)
    init(k) = static_cast<double>(h.window_sum(peak_centers[static_cast<std::size_t>(k)], half));
  if (options.fit_lifetime) init(n_peaks) = options.lifetime;

  const auto n = static_cast<Eigen::Index>(bins.size());
  auto residuals = [&](const Eigen::VectorXd& x) {
    const double lifetime = options.fit_lifetime ? x(n_peaks) : options.lifetime;
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::size_t b = bins[static_cast<std::size_t>(i)];
      const double lo = h.bin_low(b);
      const double hi = lo + h.bin_width;
      double model = 0.0;
      for (Eigen::Index k = 0; k < n_peaks; ++k) {
        const double c = peak_centers[static_cast<std::size_t>(k)];
        model += x(k) * (laplace_gauss_cdf(hi - c, lifetime, options.timing_sigma) -
                         laplace_gauss_cdf(lo - c, lifetime, options.timing_sigma));
      }
      r(i) = count_residual(model, static_cast<double>(h.counts[b]), Weighting::Poisson);
    }
    return r;
  };
  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Constant(p, inf)};
  if (options.fit_lifetime) bounds.lower(n_peaks) = 1e-3 * h.bin_width;
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < n_peaks; ++k) names.push_back("area_" + std::to_string(k));
  if (options.fit_lifetime) names.emplace_back("T1");
  LeastSquaresOptions ls;
  ls.scale_covariance = false;
  ls.typical_scale = init.cwiseAbs().cwiseMax(1.0);
  if (options.fit_lifetime) ls.typical_scale(n_peaks) = options.lifetime;

  HomPeakFit out;
  out.fit = least_squares(residuals, init, bounds, ls, std::move(names));
  for (Eigen::Index k = 0; k < n_peaks; ++k)
    out.peaks.push_back({peak_centers[static_cast<std::size_t>(k)], half, out.fit.params(k),
                         std::sqrt(std::max(out.fit.covariance(k, k), 0.0))});
  return out;
}

}  // namespace qdpillar
