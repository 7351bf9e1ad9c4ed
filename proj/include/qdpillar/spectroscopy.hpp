#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace qdpillar {

/// Scanning Fabry-Perot analyzer, frequencies in Hz.
struct FabryPerotParams {
  double finesse = 170.0;
  double fsr = 37.4e9;
  double linewidth = 220e6;
  double transmission_peak = 0.61;

  void validate() const;
};

/// Intensities sampled on strictly increasing frequency offsets (Hz).
struct SpectrumTrace {
  std::vector<double> frequencies;
  std::vector<double> intensities;

  std::size_t size() const noexcept { return frequencies.size(); }
  void validate() const;
  SpectrumTrace& normalize_peak();
  double integral() const;  // trapezoid
};

/// |g1(tau)| for radiative decay, pure dephasing and static Gaussian
/// inhomogeneity: exp(-(gamma/2 + gamma_d)|tau|) exp(-sigma^2 tau^2 / 2).
template <typename Scalar>
Scalar g1_magnitude(Scalar tau, Scalar gamma, Scalar gamma_d, Scalar sigma) {
  using std::abs;
  using std::exp;
  const Scalar a = abs(tau);
  return exp(-(Scalar(0.5) * gamma + gamma_d) * a) * exp(-Scalar(0.5) * sigma * sigma * a * a);
}

/// Lorentzian FWHM (Hz) of the homogeneous line.
inline double homogeneous_fwhm(double gamma, double gamma_d) {
  return (gamma + 2.0 * gamma_d) / (2.0 * 3.14159265358979323846);
}

/// Gaussian FWHM (Hz) of a static angular-frequency spread `sigma`.
double inhomogeneous_fwhm(double sigma);

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0, via
/// Weideman's rational expansion with 32 terms (|error| below 1e-12 in the
/// upper half plane for the arguments used here).
std::complex<double> faddeeva(std::complex<double> z);

/// Area-normalized Voigt profile in frequency units.
double voigt_profile(double x, double fwhm_lorentz, double fwhm_gauss);

/// Olivero-Longbothum estimate of the Voigt FWHM (accurate to ~0.02%).
double voigt_fwhm_approx(double fwhm_lorentz, double fwhm_gauss);

std::vector<double> linear_grid(double lo, double hi, std::size_t n);

/// Spectral density (1/Hz, unit integral) from the cosine transform of
/// g1_magnitude, computed numerically (piecewise-linear Filon rule) so it is
/// independent of the Voigt evaluation. Throws precondition if the grid spans
/// fewer than 10 linewidths and grid-too-coarse if any spacing exceeds a
/// twentieth of the linewidth.
SpectrumTrace emission_spectrum(double gamma, double gamma_d, double sigma,
                                std::span<const double> grid);

enum class FabryPerotShape {
  LorentzianComb,  // periodic Lorentzians of FWHM `linewidth`
  Airy,            // exact Airy function with the stated finesse
};

/// Area-normalized instrument kernel (1/Hz), periodic in fsr.
double fabry_perot_kernel(double detuning, const FabryPerotParams& fp,
                          FabryPerotShape shape = FabryPerotShape::LorentzianComb);

/// Transmitted intensity while scanning the analyzer across `scan_grid`:
/// the input spectrum convolved with the instrument kernel, times the peak
/// transmission.
SpectrumTrace fp_scan(const SpectrumTrace& spectrum, const FabryPerotParams& fp,
                      std::span<const double> scan_grid,
                      FabryPerotShape shape = FabryPerotShape::LorentzianComb);

/// Full width at half maximum by linear interpolation of the half-maximum
/// crossings around the global peak.
double measure_fwhm(const SpectrumTrace& trace);

/// Fraction of a Voigt line passed by a centered Lorentzian filter of
/// FWHM `filter_fwhm` with unit peak transmission.
double lorentzian_filter_transmission(double fwhm_lorentz, double fwhm_gauss, double filter_fwhm);

}  // namespace qdpillar
