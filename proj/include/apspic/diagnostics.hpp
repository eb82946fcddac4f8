#pragma once

// Moments, conserved functionals, slow-manifold deviation, error metrics,
// Monte Carlo path statistics, convergence slopes and azimuthal mode amplitudes.

#include <cstddef>
#include <functional>
#include <vector>

#include "apspic/fields.hpp"
#include "apspic/pic_engine.hpp"

namespace apspic {

struct Moments {
  ScalarField rho;
  VectorField J;
};

/// rho by deposit_charge; J by the same scatter with weights w * v.
Moments moments(const Ensemble& e, const Grid2D& grid);

double total_charge(const Ensemble& e);

/// Sum of w |v|^2 over alive particles.
double kinetic_moment(const Ensemble& e);

/// Trapezoidal integral of |E|^2 over the grid.
double field_energy_integral(const VectorField& E);

/// 1/2 sum w |v|^2 + 1/2 int |E|^2.
double total_energy(const Ensemble& e, const VectorField& E);

/// Predicted dH/dt of the scaled 2D+2V system with a frozen or vanishing
/// field: (2 sigma Q - sum w |v|^2) / (eps tau).
double energy_balance_rate(const Ensemble& e, double sigma, double tau, double eps);

/// Phase-space histogram for the entropy estimate (4D, bounds per axis).
struct HistogramConfig {
  double xmin = -8, xmax = 8, ymin = -8, ymax = 8;
  double vxmin = -4, vxmax = 4, vymin = -4, vymax = 4;
  int nx = 16, ny = 16, nvx = 16, nvy = 16;
};

/// sum over cells c ln(c) * volume with c = binned weight / cell volume.
/// Particles outside the histogram box are ignored.
double entropy_estimate(const Ensemble& e, const HistogramConfig& bins = {});

struct ConservedReport {
  double Q = 0;
  double H = 0;
  double S_est = 0;
  bool has_entropy = false;
  double t = 0;
};

/// eps^{-1} v - R(x_prev) E(x_prev).
Vec2d slow_manifold_deviation(const Vec2d& x_prev, const Vec2d& v, const ElectricField& E,
                              const MagneticProfile<double>& b, double eps, double tau);

/// Componentwise |xN - uN|.
Vec2d traj_error(const Vec2d& xN, const Vec2d& uN);

/// Terminal states of a Monte Carlo batch with running (Welford) mean and
/// variance; paths must be added in a fixed order for reproducibility.
class PathBundle {
 public:
  void add(const Vec2d& terminal, double max_abs_xi = 0.0);

  std::size_t n_paths() const { return n_; }
  const Vec2d& mean() const { return mean_; }
  /// Unbiased sample variance per component.
  Vec2d variance() const;
  Vec2d standard_error() const;
  double max_abs_xi() const { return m_xi_; }
  const std::vector<Vec2d>& terminals() const { return terminals_; }

 private:
  std::size_t n_ = 0;
  Vec2d mean_ = Vec2d::Zero();
  Vec2d m2_ = Vec2d::Zero();
  double m_xi_ = 0;
  std::vector<Vec2d> terminals_;
};

struct ExpectationError {
  Vec2d error;
  Vec2d standard_error;
};

/// |mean(x^N) - u^N| per component with the Monte Carlo standard error. Needs >= 2 paths.
ExpectationError expectation_error(const PathBundle& bundle, const Vec2d& uN);

struct ErrorSeries {
  std::vector<double> abscissae;
  std::vector<double> errors;
  std::vector<double> standard_errors;  // empty, or one per point
};

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::vector<std::size_t> used;
  std::vector<std::size_t> excluded;  // under the noise floor or non-positive
};

/// Least squares on (log abscissa, log error) with a 95% t-interval on the
/// slope. Points with error <= 0 or error < floor_factor * standard error are
/// excluded. Throws DiagnosticError with fewer than 3 usable points.
SlopeFit convergence_slope(const ErrorSeries& series, double floor_factor = 3.0);

struct RadiusBand {
  double r_min = 3.5;
  double r_max = 6.5;
  double center() const { return 0.5 * (r_min + r_max); }
};

/// |(2/N) sum rho(r_c, theta_j) exp(-i l theta_j)| / mean(rho) at the band's
/// central radius over N uniformly spaced angles. Throws DiagnosticError when
/// the mean density on the circle is zero.
double mode_amplitude(const std::function<double(const Vec2d&)>& density, int l, const RadiusBand& band,
                      int n_angles = 256);

/// Same, sampling the nodal field bilinearly.
double mode_amplitude(const ScalarField& rho, int l, const RadiusBand& band, int n_angles = 256);

/// Fraction of alive weight with |x| outside [band.r_min, band.r_max].
double exterior_charge_fraction(const Ensemble& e, const RadiusBand& band);

}  // namespace apspic
