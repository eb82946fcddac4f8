#include "apspic/pic_engine.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "apspic/noise.hpp"
#include "apspic/parallel.hpp"
#include "apspic/summation.hpp"

namespace apspic {

void DiocotronInit::validate() const {
  if (!(r_minus > 0 && r_minus < r_plus)) throw ConfigError("diocotron init needs 0 < r_minus < r_plus", "r_minus");
  if (!(alpha_pert >= 0 && alpha_pert < 1)) throw ConfigError("diocotron alpha must lie in [0, 1)", "alpha");
  if (l_modes < 0) throw ConfigError("diocotron l must be >= 0", "l");
  if (!(sigma_v > 0)) throw ConfigError("diocotron sigma_v must be > 0", "sigma_v");
  if (!(v_box > 0)) throw ConfigError("diocotron v_box must be > 0", "v_box");
}

double DiocotronInit::density(const Vec2d& x) const {
  const double r = x.norm();
  if (r < r_minus || r > r_plus) return 0.0;
  // Full polar angle; the mode is a smooth function of position.
  const double theta = std::atan2(x.y(), x.x());
  return (1 + alpha_pert * std::cos(l_modes * theta)) * std::exp(-4 * (r - 5) * (r - 5));
}

double DiocotronInit::total_charge(int n) const {
  const double dr = (r_plus - r_minus) / n;
  const double dtheta = 2 * std::numbers::pi / n;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const double r = r_minus + (i + 0.5) * dr;
    double ring = 0;
    for (int j = 0; j < n; ++j) {
      const double th = (j + 0.5) * dtheta;
      ring += density(Vec2d(r * std::cos(th), r * std::sin(th)));
    }
    sum += ring * r;
  }
  return sum * dr * dtheta;
}

Ensemble sample_initial(const DiocotronInit& init, std::size_t n_particles, std::uint64_t seed, int workers) {
  init.validate();
  if (n_particles < 1) throw ConfigError("n_particles must be >= 1", "n_particles");
  const double q_tot = init.total_charge(512);
  const double annulus = std::numbers::pi * (init.r_plus * init.r_plus - init.r_minus * init.r_minus);
  const double envelope = 1 + init.alpha_pert;
  const double acceptance = q_tot / (envelope * annulus);
  if (!(acceptance >= 1e-4)) throw ConfigError("rejection acceptance rate below 1e-4", "init");

  Ensemble e;
  e.rng_seed = seed;
  e.particles.resize(n_particles);
  const double w = q_tot / static_cast<double>(n_particles);
  const NoiseStream pos_stream(seed, StreamTag::init_position);
  const NoiseStream vel_stream(seed, StreamTag::init_velocity);
  const double r2lo = init.r_minus * init.r_minus;
  const double r2span = init.r_plus * init.r_plus - r2lo;
  const double vscale = std::sqrt(init.sigma_v);
  const std::uint64_t max_attempts = static_cast<std::uint64_t>(100.0 / acceptance) + 1000;

  parallel_chunks(n_particles, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Particle& part = e.particles[p];
      part.id = p;
      part.weight = w;
      part.alive = true;
      bool accepted = false;
      for (std::uint64_t k = 0; k < max_attempts && !accepted; ++k) {
        const auto u = pos_stream.uniform_pair(p, 2 * k);
        const double r = std::sqrt(r2lo + (1.0 - u[0]) * r2span);
        const double th = 2 * std::numbers::pi * u[1];
        const Vec2d x(r * std::cos(th), r * std::sin(th));
        const double test = pos_stream.uniform_pair(p, 2 * k + 1)[0] * envelope;
        if (test <= init.density(x)) {
          part.state.x = x;
          accepted = true;
        }
      }
      if (!accepted) throw ConfigError("rejection sampling exhausted its attempt budget", "init");
      for (std::uint64_t k = 0;; ++k) {
        const Vec2d v = vscale * vel_stream.gaussian_pair(p, k);
        if (v.cwiseAbs().maxCoeff() <= init.v_box) {
          part.state.v = v;
          break;
        }
      }
    }
  });
  e.total_weight0 = w * static_cast<double>(n_particles);
  return e;
}

ScalarField deposit_charge(const Ensemble& e, const Grid2D& grid, int workers, BoundaryCondition bc,
                           const std::vector<char>* skip) {
  const auto w = static_cast<std::size_t>(std::max(1, workers));
  std::vector<Eigen::VectorXd> partial(w, Eigen::VectorXd::Zero(grid.size()));
  parallel_chunks(e.particles.size(), workers, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Eigen::VectorXd& q = partial[chunk];
    for (std::size_t p = begin; p < end; ++p) {
      const Particle& part = e.particles[p];
      if (!part.alive || (skip && (*skip)[p])) continue;
      const CicStencil s = cic_stencil(grid, part.state.x);
      for (int k = 0; k < 4; ++k) q[s.nodes[k]] += part.weight * s.weights[k];
    }
  });
  ScalarField rho(grid);
  for (const auto& q : partial) rho.values += q;  // fixed chunk order

  const double cell = grid.hx() * grid.hy();
  if (bc == BoundaryCondition::periodic) {
    fold_periodic(rho);
    rho.values /= cell;
    return rho;
  }
  for (Eigen::Index i = 0; i < grid.nx(); ++i)
    for (Eigen::Index j = 0; j < grid.ny(); ++j) rho(i, j) /= cell * grid.area_weight(i, j);
  return rho;
}

double total_alive_weight(const Ensemble& e) {
  CompensatedSum q;
  for (const Particle& p : e.particles)
    if (p.alive) q += p.weight;
  return q.value();
}

RemovalReport apply_boundary(Ensemble& e, const Grid2D& domain) {
  RemovalReport r;
  CompensatedSum w;
  for (Particle& p : e.particles) {
    if (p.alive && !domain.contains(p.state.x)) {
      p.alive = false;
      ++r.count;
      w += p.weight;
    }
  }
  r.weight = w.value();
  return r;
}

StepReport pic_observe(Ensemble& e, const PicSetup& setup) {
  const auto t0 = std::chrono::steady_clock::now();
  const BoundaryCondition bc = setup.poisson.config().bc;

  std::vector<char> leaving(e.particles.size(), 0);
  for (std::size_t p = 0; p < e.particles.size(); ++p) {
    const Particle& part = e.particles[p];
    leaving[p] = part.alive && !setup.grid.contains(part.state.x);
  }

  StepReport report;
  report.rho = deposit_charge(e, setup.grid, setup.workers, bc, &leaving);
  report.phi = setup.poisson.solve(*report.rho);  // throws before any mutation
  report.poisson_residual = setup.poisson.last_residual();
  report.E = e_from_phi(*report.phi, bc);

  report.removed = apply_boundary(e, setup.grid);
  report.alive_charge = total_alive_weight(e);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void push_particles(Ensemble& e, const PicSetup& setup, const VectorField& field) {
  const NoiseStream noise(e.rng_seed, StreamTag::push_noise);
  const std::uint64_t step = e.steps_taken;
  const Grid2D& grid = setup.grid;
  auto E = [&](const Vec2d& q) -> Vec2d {
    const CicStencil s = cic_stencil_clamped(grid, q);
    Vec2d out = Vec2d::Zero();
    for (int k = 0; k < 4; ++k) out += s.weights[k] * field.values.row(s.nodes[k]).transpose();
    return out;
  };
  parallel_chunks(e.particles.size(), setup.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      Particle& part = e.particles[p];
      if (!part.alive) continue;
      const NoiseDraw<double> xi{noise.gaussian_pair(part.id, step)};
      part.state = setup.scheme == Scheme::apsi1 ? apsi1_step(part.state, E, setup.profile, setup.params, xi)
                                                 : apsi2_step(part.state, E, setup.profile, setup.params, xi);
    }
  });
  ++e.steps_taken;
}

StepReport pic_step(Ensemble& e, const PicSetup& setup) {
  const auto t0 = std::chrono::steady_clock::now();
  StepReport report = pic_observe(e, setup);
  push_particles(e, setup, *report.E);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace apspic
