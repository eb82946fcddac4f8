#include "apspic/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace apspic {

void PoissonConfig::validate() const {
  if (bc == BoundaryCondition::periodic && rho0_mode != BackgroundMode::spatial_mean)
    throw ConfigError("periodic Poisson problems require rho0_mode = spatial-mean", "rho0_mode");
  if (!(tol > 0)) throw ConfigError("Poisson tol must be > 0", "tol");
  if (max_iter < 0) throw ConfigError("Poisson max_iter must be >= 0", "max_iter");
}

double background_density(const ScalarField& rho, const PoissonConfig& cfg) {
  if (cfg.rho0_mode == BackgroundMode::zero) return 0.0;
  const Grid2D& g = rho.grid;
  // Sums are shifted by a reference value so a constant source returns itself exactly.
  const double ref = rho(0, 0);
  double sum = 0, weight = 0;
  if (cfg.bc == BoundaryCondition::periodic) {
    for (Eigen::Index i = 0; i < g.nx() - 1; ++i)
      for (Eigen::Index j = 0; j < g.ny() - 1; ++j) sum += rho(i, j) - ref;
    return ref + sum / static_cast<double>((g.nx() - 1) * (g.ny() - 1));
  }
  for (Eigen::Index i = 0; i < g.nx(); ++i)
    for (Eigen::Index j = 0; j < g.ny(); ++j) {
      const double a = g.area_weight(i, j);
      sum += a * (rho(i, j) - ref);
      weight += a;
    }
  return ref + sum / weight;
}

// Unknown numbering:
//   Dirichlet: interior nodes, k = (i-1)*(ny-2) + (j-1).
//   Periodic:  unique nodes i < nx-1, j < ny-1, k = i*(ny-1) + j; node 0 is
//              pinned for the factorization and the gauge is fixed afterwards.
struct PoissonSolver::Impl {
  using SpMat = Eigen::SparseMatrix<double>;

  SpMat full;     // operator on all unknowns (singular when periodic)
  SpMat reduced;  // factorized operator (periodic: node 0 removed)
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::Index mx = 0, my = 0;  // unknown counts per axis
  bool periodic = false;

  Eigen::Index unknown(Eigen::Index a, Eigen::Index b) const { return a * my + b; }

  Eigen::VectorXd solve_full(const Eigen::VectorXd& rhs) const {
    if (!periodic) return ldlt.solve(rhs);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(rhs.size());
    out.tail(rhs.size() - 1) = ldlt.solve(rhs.tail(rhs.size() - 1));
    return out;
  }
};

PoissonSolver::PoissonSolver(const Grid2D& grid, const PoissonConfig& cfg)
    : grid_(grid), cfg_(cfg), impl_(std::make_unique<Impl>()) {
  cfg_.validate();
  Impl& im = *impl_;
  im.periodic = cfg.bc == BoundaryCondition::periodic;
  im.mx = im.periodic ? grid.nx() - 1 : grid.nx() - 2;
  im.my = im.periodic ? grid.ny() - 1 : grid.ny() - 2;
  const double cx = 1.0 / (grid.hx() * grid.hx());
  const double cy = 1.0 / (grid.hy() * grid.hy());
  const Eigen::Index n = im.mx * im.my;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(5 * n));
  for (Eigen::Index a = 0; a < im.mx; ++a) {
    for (Eigen::Index b = 0; b < im.my; ++b) {
      const Eigen::Index k = im.unknown(a, b);
      trips.emplace_back(k, k, 2 * cx + 2 * cy);
      auto neighbour = [&](Eigen::Index aa, Eigen::Index bb, double c) {
        if (im.periodic) {
          aa = (aa + im.mx) % im.mx;
          bb = (bb + im.my) % im.my;
        } else if (aa < 0 || aa >= im.mx || bb < 0 || bb >= im.my) {
          return;  // Dirichlet boundary value is zero
        }
        trips.emplace_back(k, im.unknown(aa, bb), -c);
      };
      neighbour(a - 1, b, cx);
      neighbour(a + 1, b, cx);
      neighbour(a, b - 1, cy);
      neighbour(a, b + 1, cy);
    }
  }
  im.full.resize(n, n);
  im.full.setFromTriplets(trips.begin(), trips.end());
  im.reduced = im.periodic ? Impl::SpMat(im.full.bottomRightCorner(n - 1, n - 1)) : im.full;
  im.ldlt.compute(im.reduced);
  if (im.ldlt.info() != Eigen::Success) throw SolverError("Poisson factorization failed", NAN);
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

ScalarField PoissonSolver::solve(const ScalarField& rho) const {
  if (!(rho.grid == grid_)) throw DomainError("Poisson source lives on a different grid");
  if (!rho.values.allFinite()) throw DomainError("Poisson source has non-finite entries");
  const Impl& im = *impl_;
  const double rho0 = background_density(rho, cfg_);
  const Eigen::Index off = im.periodic ? 0 : 1;

  Eigen::VectorXd rhs(im.mx * im.my);
  for (Eigen::Index a = 0; a < im.mx; ++a)
    for (Eigen::Index b = 0; b < im.my; ++b) rhs[im.unknown(a, b)] = rho(a + off, b + off) - rho0;

  if (im.periodic) {
    const double mean = rhs.mean();
    const double scale = std::max(1.0, rho.values.cwiseAbs().maxCoeff());
    if (std::abs(mean) > 1e-12 * scale)
      throw DomainError("periodic Poisson source has nonzero mean (incompatible)");
    rhs.array() -= mean;
  }

  ScalarField phi(grid_);
  const double rhs_norm = rhs.norm();
  // A source equal to its background up to rounding gives phi = 0 exactly.
  const double roundoff = 16 * std::numeric_limits<double>::epsilon() * rho.values.cwiseAbs().maxCoeff();
  if (rhs_norm == 0.0 || rhs.cwiseAbs().maxCoeff() <= roundoff) {
    last_residual_ = 0.0;
    return phi;
  }

  Eigen::VectorXd sol = im.solve_full(rhs);
  double residual = (rhs - im.full * sol).norm() / rhs_norm;
  for (int it = 0; it < cfg_.max_iter && residual > cfg_.tol; ++it) {
    sol += im.solve_full(rhs - im.full * sol);
    residual = (rhs - im.full * sol).norm() / rhs_norm;
  }
  if (im.periodic) sol.array() -= sol.mean();
  residual = (rhs - im.full * sol).norm() / rhs_norm;
  last_residual_ = residual;
  if (!(residual <= cfg_.tol)) throw SolverError("Poisson solve did not reach the residual tolerance", residual);

  for (Eigen::Index a = 0; a < im.mx; ++a)
    for (Eigen::Index b = 0; b < im.my; ++b) phi(a + off, b + off) = sol[im.unknown(a, b)];
  if (im.periodic) {
    for (Eigen::Index a = 0; a < grid_.nx(); ++a) phi(a, grid_.ny() - 1) = phi(a % im.mx, 0);
    for (Eigen::Index b = 0; b < grid_.ny(); ++b) phi(grid_.nx() - 1, b) = phi(0, b % im.my);
  }
  return phi;
}

ScalarField solve_poisson(const ScalarField& rho, const PoissonConfig& cfg) {
  return PoissonSolver(rho.grid, cfg).solve(rho);
}

VectorField e_from_phi(const ScalarField& phi, BoundaryCondition bc) {
  const Grid2D& g = phi.grid;
  const Eigen::Index nx = g.nx(), ny = g.ny();
  const bool periodic = bc == BoundaryCondition::periodic;
  VectorField E(g);

  // d/dx along a line of nodes; `at(k)` reads node k on that line.
  auto derivative = [periodic](auto&& at, Eigen::Index k, Eigen::Index n, double h) {
    if (k > 0 && k < n - 1) return (at(k + 1) - at(k - 1)) / (2 * h);
    if (periodic) return (at(1) - at(n - 2)) / (2 * h);  // node n-1 is the image of node 0
    if (k == 0) return (-3 * at(0) + 4 * at(1) - at(2)) / (2 * h);
    return (3 * at(n - 1) - 4 * at(n - 2) + at(n - 3)) / (2 * h);
  };

  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      const double dx = derivative([&](Eigen::Index k) { return phi(k, j); }, i, nx, g.hx());
      const double dy = derivative([&](Eigen::Index k) { return phi(i, k); }, j, ny, g.hy());
      E.set(i, j, Vec2d(-dx, -dy));
    }
  }
  return E;
}

void fold_periodic(ScalarField& f) {
  const Grid2D& g = f.grid;
  const Eigen::Index nx = g.nx(), ny = g.ny();
  for (Eigen::Index j = 0; j < ny; ++j) {
    f(0, j) += f(nx - 1, j);
  }
  for (Eigen::Index i = 0; i < nx - 1; ++i) {
    f(i, 0) += f(i, ny - 1);
  }
  for (Eigen::Index j = 0; j < ny; ++j) f(nx - 1, j) = f(0, j);
  for (Eigen::Index i = 0; i < nx; ++i) f(i, ny - 1) = f(i, 0);
}

}  // namespace apspic
