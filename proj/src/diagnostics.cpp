#include "apspic/diagnostics.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "apspic/summation.hpp"

namespace apspic {

Moments moments(const Ensemble& e, const Grid2D& grid) {
  Moments m{deposit_charge(e, grid), VectorField(grid)};
  for (const Particle& p : e.particles) {
    if (!p.alive) continue;
    const CicStencil s = cic_stencil(grid, p.state.x);
    for (int k = 0; k < 4; ++k)
      m.J.values.row(s.nodes[k]) += (p.weight * s.weights[k]) * p.state.v.transpose();
  }
  const double cell = grid.hx() * grid.hy();
  for (Eigen::Index i = 0; i < grid.nx(); ++i)
    for (Eigen::Index j = 0; j < grid.ny(); ++j)
      m.J.values.row(grid.index(i, j)) /= cell * grid.area_weight(i, j);
  return m;
}

double total_charge(const Ensemble& e) { return total_alive_weight(e); }

double kinetic_moment(const Ensemble& e) {
  CompensatedSum k;
  for (const Particle& p : e.particles)
    if (p.alive) k += p.weight * p.state.v.squaredNorm();
  return k.value();
}

double field_energy_integral(const VectorField& E) {
  const Grid2D& g = E.grid;
  double sum = 0;
  for (Eigen::Index i = 0; i < g.nx(); ++i)
    for (Eigen::Index j = 0; j < g.ny(); ++j) sum += g.area_weight(i, j) * E.values.row(g.index(i, j)).squaredNorm();
  return sum * g.hx() * g.hy();
}

double total_energy(const Ensemble& e, const VectorField& E) {
  return 0.5 * kinetic_moment(e) + 0.5 * field_energy_integral(E);
}

double energy_balance_rate(const Ensemble& e, double sigma, double tau, double eps) {
  return (2 * sigma * total_charge(e) - kinetic_moment(e)) / (eps * tau);
}

double entropy_estimate(const Ensemble& e, const HistogramConfig& h) {
  const double dx = (h.xmax - h.xmin) / h.nx, dy = (h.ymax - h.ymin) / h.ny;
  const double dvx = (h.vxmax - h.vxmin) / h.nvx, dvy = (h.vymax - h.vymin) / h.nvy;
  const double volume = dx * dy * dvx * dvy;
  std::vector<double> bins(static_cast<std::size_t>(h.nx) * h.ny * h.nvx * h.nvy, 0.0);

  auto slot = [](double value, double lo, double width, int n) -> int {
    const double f = (value - lo) / width;
    if (f < 0 || f > n) return -1;
    return std::min(static_cast<int>(f), n - 1);
  };
  for (const Particle& p : e.particles) {
    if (!p.alive) continue;
    const int a = slot(p.state.x.x(), h.xmin, dx, h.nx);
    const int b = slot(p.state.x.y(), h.ymin, dy, h.ny);
    const int c = slot(p.state.v.x(), h.vxmin, dvx, h.nvx);
    const int d = slot(p.state.v.y(), h.vymin, dvy, h.nvy);
    if (a < 0 || b < 0 || c < 0 || d < 0) continue;
    bins[((static_cast<std::size_t>(a) * h.ny + b) * h.nvx + c) * h.nvy + d] += p.weight;
  }
  double s = 0;
  for (double w : bins)
    if (w > 0) s += w * std::log(w / volume);
  return s;
}

Vec2d slow_manifold_deviation(const Vec2d& x_prev, const Vec2d& v, const ElectricField& E,
                              const MagneticProfile<double>& b, double eps, double tau) {
  return v / eps - mat_R(x_prev, b, eps, tau) * E(x_prev);
}

Vec2d traj_error(const Vec2d& xN, const Vec2d& uN) { return (xN - uN).cwiseAbs(); }

void PathBundle::add(const Vec2d& terminal, double max_abs_xi) {
  ++n_;
  const Vec2d d = terminal - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d.cwiseProduct(terminal - mean_);
  m_xi_ = std::max(m_xi_, max_abs_xi);
  terminals_.push_back(terminal);
}

Vec2d PathBundle::variance() const {
  if (n_ < 2) return Vec2d::Zero();
  return m2_ / static_cast<double>(n_ - 1);
}

Vec2d PathBundle::standard_error() const {
  if (n_ < 2) return Vec2d::Zero();
  return (variance() / static_cast<double>(n_)).cwiseSqrt();
}

ExpectationError expectation_error(const PathBundle& bundle, const Vec2d& uN) {
  if (bundle.n_paths() < 2) throw DiagnosticError("expectation_error needs at least 2 paths");
  return {(bundle.mean() - uN).cwiseAbs(), bundle.standard_error()};
}

SlopeFit convergence_slope(const ErrorSeries& series, double floor_factor) {
  const std::size_t n = series.abscissae.size();
  if (series.errors.size() != n || (!series.standard_errors.empty() && series.standard_errors.size() != n))
    throw DiagnosticError("convergence_slope: mismatched series lengths");

  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < n; ++k) {
    const double err = series.errors[k];
    const double se = series.standard_errors.empty() ? 0.0 : series.standard_errors[k];
    if (!(err > 0) || err < floor_factor * se || !(series.abscissae[k] > 0)) {
      fit.excluded.push_back(k);
      continue;
    }
    fit.used.push_back(k);
    lx.push_back(std::log(series.abscissae[k]));
    ly.push_back(std::log(err));
  }
  const std::size_t m = lx.size();
  if (m < 3) throw DiagnosticError("convergence_slope: fewer than 3 usable points");

  double mx = 0, my = 0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  if (!(sxx > 0)) throw DiagnosticError("convergence_slope: abscissae are not distinct");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = ly[k] - (fit.intercept + fit.slope * lx[k]);
    rss += r * r;
  }
  const double dof = static_cast<double>(m - 2);
  const double se_slope = std::sqrt(rss / dof / sxx);
  const double t = boost::math::quantile(boost::math::students_t(dof), 0.975);
  fit.ci_low = fit.slope - t * se_slope;
  fit.ci_high = fit.slope + t * se_slope;
  return fit;
}

double mode_amplitude(const std::function<double(const Vec2d&)>& density, int l, const RadiusBand& band,
                      int n_angles) {
  if (l < 1) throw DiagnosticError("mode_amplitude needs l >= 1");
  if (n_angles < 1) throw DiagnosticError("mode_amplitude needs at least one angle");
  const double r = band.center();
  std::complex<double> coeff{0, 0};
  double sum = 0;
  for (int j = 0; j < n_angles; ++j) {
    const double th = 2 * std::numbers::pi * j / n_angles;
    const double rho = density(Vec2d(r * std::cos(th), r * std::sin(th)));
    sum += rho;
    coeff += rho * std::polar(1.0, -l * th);
  }
  const double mean = sum / n_angles;
  if (!(std::abs(mean) > 0)) throw DiagnosticError("mode_amplitude: zero mean density in band");
  return std::abs(coeff * (2.0 / n_angles)) / mean;
}

double mode_amplitude(const ScalarField& rho, int l, const RadiusBand& band, int n_angles) {
  return mode_amplitude([&rho](const Vec2d& x) { return interpolate(rho, x); }, l, band, n_angles);
}

double exterior_charge_fraction(const Ensemble& e, const RadiusBand& band) {
  CompensatedSum outside, total;
  for (const Particle& p : e.particles) {
    if (!p.alive) continue;
    total += p.weight;
    const double r = p.state.x.norm();
    if (r < band.r_min || r > band.r_max) outside += p.weight;
  }
  return total.value() > 0 ? outside.value() / total.value() : 0.0;
}

}  // namespace apspic
