#pragma once

// Particle ensemble, diocotron initial sampling, charge deposition, absorbing
// walls and the self-consistent step: boundary -> deposit -> Poisson ->
// E = -grad(phi) -> interpolate -> push.

#include <cstdint>
#include <optional>
#include <vector>

#include "apspic/fields.hpp"
#include "apspic/poisson.hpp"
#include "apspic/pushers.hpp"

namespace apspic {

enum class Scheme { apsi1, apsi2 };

struct Particle {
  PhaseState<double> state;
  double weight = 0;  // charge carried; fixed after initialization
  std::uint64_t id = 0;
  bool alive = true;
};

struct Ensemble {
  std::vector<Particle> particles;
  double total_weight0 = 0;
  std::uint64_t rng_seed = 0;
  std::uint64_t steps_taken = 0;  // step counter used to key push noise
};

/// Ring density (1 + alpha cos(l theta)) exp(-4 (|x| - 5)^2) on r_minus <= |x| <= r_plus,
/// with Gaussian velocities of variance sigma_v per component.
struct DiocotronInit {
  double r_minus = 3.5;
  double r_plus = 6.5;
  double alpha_pert = 0.2;
  int l_modes = 5;
  double sigma_v = 1.0;
  double v_box = 4.0;  // resample draws with |v|_inf above this

  void validate() const;
  /// d0(x); zero outside the annulus.
  double density(const Vec2d& x) const;
  /// Integral of d0 by polar midpoint quadrature with `n` cells per direction.
  double total_charge(int n = 512) const;
};

/// Rejection sampling of positions against the envelope (1 + alpha) on the
/// annulus; every particle carries weight Q_tot / n_particles. Throws
/// ConfigError when the expected acceptance rate is below 1e-4.
Ensemble sample_initial(const DiocotronInit& init, std::size_t n_particles, std::uint64_t seed, int workers = 1);

/// Nodal charge density: bilinear scatter of each alive particle's weight,
/// divided by the node control-volume area hx*hy*area_weight (Dirichlet) or
/// hx*hy after folding image nodes (periodic). `skip` marks particles to ignore.
ScalarField deposit_charge(const Ensemble& e, const Grid2D& grid, int workers = 1,
                           BoundaryCondition bc = BoundaryCondition::dirichlet,
                           const std::vector<char>* skip = nullptr);

struct RemovalReport {
  std::size_t count = 0;
  double weight = 0;
};

/// Compensated sum of alive particle weights.
double total_alive_weight(const Ensemble& e);

/// Marks alive particles outside the closed domain as dead.
RemovalReport apply_boundary(Ensemble& e, const Grid2D& domain);

struct PicSetup {
  PicSetup(const Grid2D& g, const PoissonConfig& pcfg, const ScaleParams<double>& p,
           MagneticProfile<double> b, Scheme s, int workers = 1)
      : grid(g), poisson(g, pcfg), params(p), profile(std::move(b)), scheme(s), workers(workers) {}

  Grid2D grid;
  PoissonSolver poisson;
  ScaleParams<double> params;
  MagneticProfile<double> profile;
  Scheme scheme;
  int workers;
};

struct StepReport {
  RemovalReport removed;
  double poisson_residual = 0;
  double wall_seconds = 0;
  double alive_charge = 0;  // after absorption, before the push
  std::optional<ScalarField> rho;
  std::optional<ScalarField> phi;
  std::optional<VectorField> E;
};

/// Absorb, deposit and solve for the field at the current time without
/// pushing. The ensemble is untouched if the Poisson solve throws.
StepReport pic_observe(Ensemble& e, const PicSetup& setup);

/// One full step; the field is frozen at pre-push positions. Noise for
/// particle `id` at this step is keyed by (rng_seed, id, steps_taken).
StepReport pic_step(Ensemble& e, const PicSetup& setup);

/// Push every alive particle through `field` (clamped grid lookups) with the
/// selected scheme, then advance the step counter.
void push_particles(Ensemble& e, const PicSetup& setup, const VectorField& field);

}  // namespace apspic
