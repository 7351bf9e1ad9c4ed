#include "qdpillar/spectroscopy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>

#include "qdpillar/constants.hpp"
#include "qdpillar/error.hpp"

namespace qdpillar {

namespace {

constexpr int kWeidemanTerms = 32;

struct WeidemanCoefficients {
  double L;
  std::array<double, kWeidemanTerms> a;  // a[n-1] multiplies Z^(n-1)

  WeidemanCoefficients() {
    constexpr int N = kWeidemanTerms;
    constexpr int M = 2 * N;
    L = std::sqrt(N / std::sqrt(2.0));
    std::array<double, M> f{};  // f[k] for k = 0..M-1, even in k
    for (int k = 0; k < M; ++k) {
      const double t = L * std::tan(0.5 * k * constants::pi / M);
      f[k] = std::exp(-t * t) * (L * L + t * t);
    }
    for (int n = 1; n <= N; ++n) {
      double sum = f[0];
      for (int k = 1; k < M; ++k) sum += 2.0 * f[k] * std::cos(constants::pi * k * n / M);
      a[n - 1] = sum / (2.0 * M);
    }
  }
};

const WeidemanCoefficients& weideman() {
  static const WeidemanCoefficients coefficients;
  return coefficients;
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

void check_increasing(std::span<const double> grid, const char* what) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      raise(ErrorKind::InvalidParameter, std::string(what) + " must be strictly increasing");
}

}  // namespace

void FabryPerotParams::validate() const {
  if (!(finesse > 0.0 && fsr > 0.0 && linewidth > 0.0))
    raise(ErrorKind::InvalidParameter, "fabry-perot finesse, fsr and linewidth must be > 0");
  if (!(transmission_peak > 0.0 && transmission_peak <= 1.0))
    raise(ErrorKind::InvalidParameter, "fabry-perot transmission must lie in (0, 1]");
  if (std::abs(fsr / linewidth - finesse) > 0.1 * finesse)
    raise(ErrorKind::InvalidParameter, "fabry-perot finesse must match fsr/linewidth within 10%");
}

void SpectrumTrace::validate() const {
  if (frequencies.size() != intensities.size())
    raise(ErrorKind::InvalidParameter, "spectrum frequency/intensity length mismatch");
  if (frequencies.empty()) raise(ErrorKind::EmptyInput, "spectrum is empty");
  check_increasing(frequencies, "spectrum frequencies");
  for (double v : intensities)
    if (!(v >= 0.0) || !std::isfinite(v))
      raise(ErrorKind::InvalidParameter, "spectrum intensities must be finite and >= 0");
}

SpectrumTrace& SpectrumTrace::normalize_peak() {
  const double peak = intensities.empty() ? 0.0
                                          : *std::max_element(intensities.begin(), intensities.end());
  if (peak > 0.0)
    for (double& v : intensities) v /= peak;
  return *this;
}

double SpectrumTrace::integral() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < frequencies.size(); ++i)
    sum += 0.5 * (intensities[i] + intensities[i - 1]) * (frequencies[i] - frequencies[i - 1]);
  return sum;
}

double inhomogeneous_fwhm(double sigma) {
  return constants::fwhm_per_sigma * sigma / constants::two_pi;
}

std::complex<double> faddeeva(std::complex<double> z) {
  const auto& c = weideman();
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> denom = c.L - i * z;
  const std::complex<double> Z = (c.L + i * z) / denom;
  std::complex<double> p = c.a[kWeidemanTerms - 1];
  for (int n = kWeidemanTerms - 2; n >= 0; --n) p = p * Z + c.a[n];
  return 2.0 * p / (denom * denom) + (1.0 / std::sqrt(constants::pi)) / denom;
}

double voigt_profile(double x, double fwhm_lorentz, double fwhm_gauss) {
  const double hwhm = 0.5 * std::max(fwhm_lorentz, 0.0);
  const double sigma = std::max(fwhm_gauss, 0.0) / constants::fwhm_per_sigma;
  if (sigma <= 1e-9 * hwhm || sigma == 0.0) {
    if (hwhm == 0.0) return x == 0.0 ? INFINITY : 0.0;
    return hwhm / (constants::pi * (x * x + hwhm * hwhm));
  }
  const double scale = sigma * std::sqrt(2.0);
  if (hwhm == 0.0) return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(constants::two_pi));
  const std::complex<double> z(std::abs(x) / scale, hwhm / scale);
  return faddeeva(z).real() / (sigma * std::sqrt(constants::two_pi));
}

double voigt_fwhm_approx(double fwhm_lorentz, double fwhm_gauss) {
  return 0.5346 * fwhm_lorentz +
         std::sqrt(0.2166 * fwhm_lorentz * fwhm_lorentz + fwhm_gauss * fwhm_gauss);
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) raise(ErrorKind::InvalidParameter, "linear_grid needs n >= 2 and hi > lo");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

SpectrumTrace emission_spectrum(double gamma, double gamma_d, double sigma,
                                std::span<const double> grid) {
  if (!(gamma > 0.0)) raise(ErrorKind::InvalidParameter, "emission_spectrum needs gamma > 0");
  if (!(gamma_d >= 0.0) || !(sigma >= 0.0))
    raise(ErrorKind::InvalidParameter, "gamma_d and sigma must be >= 0");
  if (grid.size() < 2) raise(ErrorKind::Precondition, "spectrum grid needs at least 2 points");
  check_increasing(grid, "spectrum grid");

  const double linewidth = voigt_fwhm_approx(homogeneous_fwhm(gamma, gamma_d), inhomogeneous_fwhm(sigma));
  if (grid.back() - grid.front() < 10.0 * linewidth)
    raise(ErrorKind::Precondition, "spectrum grid must span at least 10 linewidths");
  double max_step = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) max_step = std::max(max_step, grid[i] - grid[i - 1]);
  if (max_step > linewidth / 20.0)
    raise(ErrorKind::GridTooCoarse, "spectrum grid spacing exceeds linewidth/20");

  // Sample g1 on [0, T] with g1(T) ~ e^-40 and a step resolving its curvature.
  const double a = 0.5 * gamma + gamma_d;
  const double b = 0.5 * sigma * sigma;
  const double t_max = b > 0.0 ? (-a + std::sqrt(a * a + 160.0 * b)) / (2.0 * b) : 40.0 / a;
  const double t_char = b > 0.0 ? std::min(1.0 / a, 1.0 / std::sqrt(2.0 * b)) : 1.0 / a;
  const auto n = static_cast<std::size_t>(std::ceil(t_max / (t_char / 400.0)));
  const double h = t_max / static_cast<double>(n);
  std::vector<double> dg(n);
  double prev = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = g1_magnitude(static_cast<double>(k + 1) * h, gamma, gamma_d, sigma);
    dg[k] = next - prev;
    prev = next;
  }
  const double g_end = prev;

  SpectrumTrace trace;
  trace.frequencies.assign(grid.begin(), grid.end());
  trace.intensities.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = constants::two_pi * grid[i];
    double integral = 0.0;
    if (std::abs(w) * t_max < 1e-12) {
      for (std::size_t k = 0; k < n; ++k) integral -= dg[k] * (static_cast<double>(k) + 0.5) * h;
      integral += g_end * t_max;
    } else {
      // sum_k dg_k sin(w m_k), m_k = (k + 1/2) h, by rotation with periodic resync.
      const std::complex<double> rot = std::polar(1.0, w * h);
      std::complex<double> phase;
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k % 512 == 0) phase = std::polar(1.0, w * (static_cast<double>(k) + 0.5) * h);
        acc += dg[k] * phase.imag();
        phase *= rot;
      }
      integral = g_end * std::sin(w * t_max) / w - sinc(0.5 * w * h) * acc / w;
    }
    trace.intensities[i] = std::max(2.0 * integral, 0.0);
  }
  return trace;
}

double fabry_perot_kernel(double detuning, const FabryPerotParams& fp, FabryPerotShape shape) {
  const double theta = constants::two_pi * detuning / fp.fsr;
  if (shape == FabryPerotShape::LorentzianComb) {
    // Closed-form sum over m of area-normalized Lorentzians centred at m*fsr.
    const double a = constants::pi * fp.linewidth / fp.fsr;
    return std::sinh(a) / (fp.fsr * (std::cosh(a) - std::cos(theta)));
  }
  const double coeff = std::pow(2.0 * fp.finesse / constants::pi, 2);
  const double s = std::sin(0.5 * theta);
  return std::sqrt(1.0 + coeff) / (fp.fsr * (1.0 + coeff * s * s));
}

SpectrumTrace fp_scan(const SpectrumTrace& spectrum, const FabryPerotParams& fp,
                      std::span<const double> scan_grid, FabryPerotShape shape) {
  spectrum.validate();
  fp.validate();
  if (scan_grid.empty()) raise(ErrorKind::EmptyInput, "fp_scan: empty scan grid");
  check_increasing(scan_grid, "scan grid");
  if (scan_grid.front() < -0.5 * fp.fsr - 1e-9 * fp.fsr || scan_grid.back() > 0.5 * fp.fsr + 1e-9 * fp.fsr)
    raise(ErrorKind::Precondition, "scan range must lie within +-fsr/2");

  // Trapezoid weights of the input samples; a single sample is a delta line.
  const std::size_t m = spectrum.size();
  std::vector<double> weight(m, 1.0);
  if (m > 1) {
    for (std::size_t i = 0; i < m; ++i) {
      const double left = i > 0 ? spectrum.frequencies[i] - spectrum.frequencies[i - 1] : 0.0;
      const double right = i + 1 < m ? spectrum.frequencies[i + 1] - spectrum.frequencies[i] : 0.0;
      weight[i] = 0.5 * (left + right);
    }
  }

  SpectrumTrace out;
  out.frequencies.assign(scan_grid.begin(), scan_grid.end());
  out.intensities.resize(scan_grid.size());
  for (std::size_t j = 0; j < scan_grid.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = spectrum.intensities[i] * weight[i];
      if (s != 0.0) sum += s * fabry_perot_kernel(scan_grid[j] - spectrum.frequencies[i], fp, shape);
    }
    out.intensities[j] = fp.transmission_peak * sum;
  }
  return out;
}

double measure_fwhm(const SpectrumTrace& trace) {
  trace.validate();
  const auto peak_it = std::max_element(trace.intensities.begin(), trace.intensities.end());
  const auto peak = static_cast<std::size_t>(peak_it - trace.intensities.begin());
  const double half = 0.5 * *peak_it;
  if (!(half > 0.0)) raise(ErrorKind::DegenerateData, "measure_fwhm: no positive peak");
  const auto& f = trace.frequencies;
  const auto& y = trace.intensities;
  std::size_t lo = peak;
  while (lo > 0 && y[lo] > half) --lo;
  std::size_t hi = peak;
  while (hi + 1 < y.size() && y[hi] > half) ++hi;
  if (y[lo] > half || y[hi] > half)
    raise(ErrorKind::InsufficientSpan, "measure_fwhm: half maximum not reached inside the trace");
  const double left = f[lo] + (half - y[lo]) * (f[lo + 1] - f[lo]) / (y[lo + 1] - y[lo]);
  const double right = f[hi - 1] + (y[hi - 1] - half) * (f[hi] - f[hi - 1]) / (y[hi - 1] - y[hi]);
  return right - left;
}

double lorentzian_filter_transmission(double fwhm_lorentz, double fwhm_gauss, double filter_fwhm) {
  if (!(filter_fwhm > 0.0)) raise(ErrorKind::InvalidParameter, "filter fwhm must be > 0");
  // Voigt times unit-peak Lorentzian integrates to pi*(f/2) * Voigt(0) with the
  // Lorentzian widths added.
  return 0.5 * constants::pi * filter_fwhm *
         voigt_profile(0.0, fwhm_lorentz + filter_fwhm, fwhm_gauss);
}

}  // namespace qdpillar
