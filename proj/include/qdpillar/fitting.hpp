#pragma once

#include <span>
#include <vector>

#include "qdpillar/histogram.hpp"
#include "qdpillar/least_squares.hpp"
#include "qdpillar/photon_statistics.hpp"
#include "qdpillar/physical_model.hpp"
#include "qdpillar/spectroscopy.hpp"

namespace qdpillar {

enum class Weighting {
  Uniform,
  Poisson,  // counts: deviance residuals (likelihood); traces: 1 / sqrt(max(y, 1))
};

// Shapes shared by the fitters and by synthetic-data generators.

/// CDF of an exponential (lifetime T) convolved with a zero-mean Gaussian.
double exp_gauss_cdf(double t, double lifetime, double sigma);

/// CDF of a two-sided exponential (lifetime T) convolved with a Gaussian:
/// the delay distribution of two independent exponential photons.
double laplace_gauss_cdf(double t, double lifetime, double sigma);

struct DecayFitOptions {
  double t0 = 0.0;  // excitation time on the histogram axis
  Weighting weighting = Weighting::Poisson;
};

/// amplitude * (exponential(T1) (*) Gaussian(irf_sigma)) + offset per bin,
/// integrated over each bin. Parameters: T1, amplitude, offset.
FitResult fit_decay_irf(const Histogram& h, double irf_sigma, const DecayFitOptions& options = {});

struct PurcellFitOptions {
  bool float_kappa = false;
};

/// Fits T1(detuning) = 1 / purcell_rate with kappa from the cavity Q and
/// wavelength (or free). Residuals are relative, (model - T1) / T1.
/// Parameters: F_p, gamma_bulk (and kappa when floated).
FitResult fit_purcell(std::span<const LifetimePoint> points, const CavityParams& cavity,
                      const PurcellFitOptions& options = {});

struct VoigtFitOptions {
  Weighting weighting = Weighting::Uniform;
};

/// Parameters: f_L, f_G (FWHMs, Hz), center (Hz), amplitude (area).
FitResult fit_voigt(const SpectrumTrace& trace, const VoigtFitOptions& options = {});

struct HomPeakFitOptions {
  double timing_sigma = 63e-12 * 1.4142135623730951;  // jitter of a detector time difference
  double lifetime = 83.9e-12;                          // initial guess
  bool fit_lifetime = true;
};

struct HomPeakFit {
  std::vector<PeakIntegration> peaks;
  FitResult fit;
};

/// Joint fit of two-sided-exponential (*) Gaussian peaks at fixed centers with
/// a shared lifetime. Parameters: area_0..area_{n-1}, T1.
HomPeakFit fit_hom_peaks(const Histogram& h, std::span<const double> peak_centers,
                         const HomPeakFitOptions& options = {});

}  // namespace qdpillar
