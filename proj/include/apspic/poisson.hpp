#pragma once

// -Lap(phi) = rho - rho0 on a Grid2D with the 5-point stencil, and E = -grad(phi).

#include <memory>

#include "apspic/fields.hpp"

namespace apspic {

enum class BoundaryCondition { dirichlet, periodic };
enum class BackgroundMode { zero, spatial_mean };

struct PoissonConfig {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  BackgroundMode rho0_mode = BackgroundMode::spatial_mean;
  double tol = 1e-10;  // relative residual
  int max_iter = 20;   // iterative-refinement sweeps after the direct solve

  /// Throws ConfigError on periodic + zero background or tol <= 0.
  void validate() const;
};

/// Background density rho0 chosen by `mode`: 0 or the area-weighted mean of rho.
/// Periodic grids average over the unique (non-image) nodes.
double background_density(const ScalarField& rho, const PoissonConfig& cfg);

/// Holds the factorized discrete Laplacian for one grid and configuration.
/// For periodic grids, node row/column nx-1 (ny-1) is the image of row/column 0.
class PoissonSolver {
 public:
  PoissonSolver(const Grid2D& grid, const PoissonConfig& cfg);
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  /// Dirichlet: phi = 0 on boundary nodes. Periodic: zero-mean gauge.
  /// Throws SolverError if the relative residual stays above tol after
  /// max_iter refinement sweeps; DomainError for an incompatible periodic source.
  ScalarField solve(const ScalarField& rho) const;

  /// Relative residual of the last solve.
  double last_residual() const { return last_residual_; }

  const Grid2D& grid() const { return grid_; }
  const PoissonConfig& config() const { return cfg_; }

 private:
  struct Impl;
  Grid2D grid_;
  PoissonConfig cfg_;
  std::unique_ptr<Impl> impl_;
  mutable double last_residual_ = 0;
};

ScalarField solve_poisson(const ScalarField& rho, const PoissonConfig& cfg);

/// E = -grad(phi): central differences inside, one-sided second-order
/// differences on Dirichlet boundaries, wrapped differences for periodic grids.
VectorField e_from_phi(const ScalarField& phi, BoundaryCondition bc = BoundaryCondition::dirichlet);

/// Fold periodic image nodes onto their base nodes and copy back, for
/// deposited quantities.
void fold_periodic(ScalarField& f);

}  // namespace apspic
