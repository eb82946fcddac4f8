#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "apspic/errors.hpp"
#include "apspic/noise.hpp"
#include "apspic/summation.hpp"
#include "apspic/pic_engine.hpp"

using namespace apspic;

namespace {

double deposited_charge(const ScalarField& rho) {
  const Grid2D& g = rho.grid;
  CompensatedSum q;
  for (Eigen::Index i = 0; i < g.nx(); ++i)
    for (Eigen::Index j = 0; j < g.ny(); ++j) q += rho(i, j) * g.hx() * g.hy() * g.area_weight(i, j);
  return q.value();
}

Ensemble random_ensemble(std::size_t n, double half_width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half_width, half_width), w(0.1, 2.0);
  std::normal_distribution<double> n01;
  Ensemble e;
  e.rng_seed = seed;
  for (std::size_t p = 0; p < n; ++p) {
    Particle part;
    part.state = {Vec2d(u(rng), u(rng)), Vec2d(n01(rng), n01(rng))};
    part.weight = w(rng);
    part.id = p;
    e.particles.push_back(part);
    e.total_weight0 += part.weight;
  }
  return e;
}

bool bit_identical(const Ensemble& a, const Ensemble& b) {
  if (a.particles.size() != b.particles.size()) return false;
  for (std::size_t p = 0; p < a.particles.size(); ++p) {
    const Particle &x = a.particles[p], &y = b.particles[p];
    if (x.alive != y.alive || std::memcmp(x.state.x.data(), y.state.x.data(), 16) != 0 ||
        std::memcmp(x.state.v.data(), y.state.v.data(), 16) != 0)
      return false;
  }
  return true;
}

const Grid2D kDomain(-8, 8, -8, 8, 33, 33);

}  // namespace

TEST_CASE("diocotron initial sample: support, velocity moments and the mode-5 modulation") {
  const DiocotronInit init;
  const std::size_t n = 1'000'000;
  const Ensemble e = sample_initial(init, n, 12345);
  REQUIRE(e.particles.size() == n);
  const double q = init.total_charge();
  CHECK(e.total_weight0 == doctest::Approx(q).epsilon(1e-12));

  double vx = 0, vy = 0, vxx = 0, vyy = 0, c5 = 0, s5 = 0;
  bool in_band = true;
  for (const Particle& p : e.particles) {
    const double r = p.state.x.norm();
    in_band = in_band && r >= 3.5 && r <= 6.5;
    vx += p.state.v.x();
    vy += p.state.v.y();
    vxx += p.state.v.x() * p.state.v.x();
    vyy += p.state.v.y() * p.state.v.y();
    const double th = std::atan2(p.state.x.y(), p.state.x.x());
    c5 += std::cos(5 * th);
    s5 += std::sin(5 * th);
  }
  CHECK(in_band);
  const double nn = static_cast<double>(n);
  vx /= nn, vy /= nn;
  vxx = vxx / nn - vx * vx;
  vyy = vyy / nn - vy * vy;
  const double se_mean = 1 / std::sqrt(nn), se_var = std::sqrt(2 / nn);
  CHECK(std::abs(vx) < 3 * se_mean);
  CHECK(std::abs(vy) < 3 * se_mean);
  CHECK(std::abs(vxx - 1) < 3 * se_var + 2e-3);  // truncation at 4 sigma lowers the variance by ~1e-3
  CHECK(std::abs(vyy - 1) < 3 * se_var + 2e-3);
  // For an angular density proportional to 1 + a cos(5 theta), E[cos 5 theta] = a / 2.
  const double amplitude = 2 * std::hypot(c5 / nn, s5 / nn);
  CHECK(amplitude == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("initial sampling is deterministic and independent of the worker count") {
  const DiocotronInit init;
  const Ensemble a = sample_initial(init, 5000, 9, 1);
  const Ensemble b = sample_initial(init, 5000, 9, 3);
  CHECK(bit_identical(a, b));
  const Ensemble c = sample_initial(init, 5000, 10, 1);
  CHECK_FALSE(bit_identical(a, c));
}

TEST_CASE("initial density and quadrature") {
  const DiocotronInit init;
  CHECK(init.density(Vec2d(5, 0)) == doctest::Approx(1.2));
  CHECK(init.density(Vec2d(0, 5)) == doctest::Approx(1.0));  // cos(5 pi / 2) = 0
  CHECK(init.density(Vec2d(3, 0)) == 0.0);
  CHECK(init.density(Vec2d(7, 0)) == 0.0);
  // Radial integral 2 pi int r exp(-4 (r-5)^2) dr over [3.5, 6.5]; the cos term integrates to zero.
  const double radial = 2 * std::numbers::pi * 5 * std::sqrt(std::numbers::pi) / 2 * std::erf(3.0);
  CHECK(init.total_charge(512) == doctest::Approx(radial).epsilon(1e-6));
  DiocotronInit bad;
  bad.r_minus = 7;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("deposit: node, cell center and partition of unity") {
  const Grid2D g(0, 4, 0, 4, 5, 5);
  Ensemble e;
  e.particles.push_back({{Vec2d(2, 3), Vec2d::Zero()}, 0.7, 0, true});
  ScalarField rho = deposit_charge(e, g);
  CHECK(rho(2, 3) == doctest::Approx(0.7));
  CHECK(rho.values.sum() == doctest::Approx(0.7));

  e.particles[0].state.x = Vec2d(1.5, 2.5);
  rho = deposit_charge(e, g);
  for (auto [i, j] : {std::pair{1, 2}, {2, 2}, {1, 3}, {2, 3}}) CHECK(rho(i, j) == doctest::Approx(0.25 * 0.7));

  const Ensemble big = random_ensemble(10000, 8, 3);
  double w = 0;
  for (const Particle& p : big.particles) w += p.weight;
  CHECK(std::abs(deposited_charge(deposit_charge(big, kDomain)) - w) <= 1e-12 * w);
  CHECK(std::abs(deposited_charge(deposit_charge(big, kDomain, 4)) - w) <= 1e-12 * w);

  // Periodic deposition: folded charge counted once over the unique nodes.
  const ScalarField per = deposit_charge(big, kDomain, 1, BoundaryCondition::periodic);
  double q = 0;
  for (Eigen::Index i = 0; i < 32; ++i)
    for (Eigen::Index j = 0; j < 32; ++j) q += per(i, j) * kDomain.hx() * kDomain.hy();
  CHECK(std::abs(q - w) <= 1e-12 * w);
}

TEST_CASE("apply_boundary: closed domain") {
  Ensemble e;
  e.particles.push_back({{Vec2d(1, 1), Vec2d::Zero()}, 1, 0, true});
  CHECK(apply_boundary(e, kDomain).count == 0);
  e.particles.push_back({{Vec2d(8.1, 0), Vec2d::Zero()}, 2, 1, true});
  e.particles.push_back({{Vec2d(8, -8), Vec2d::Zero()}, 3, 2, true});
  const RemovalReport r = apply_boundary(e, kDomain);
  CHECK(r.count == 1);
  CHECK(r.weight == 2.0);
  CHECK_FALSE(e.particles[1].alive);
  CHECK(e.particles[2].alive);
}

TEST_CASE("pic_step with zero weights reduces to free Langevin dynamics") {
  Ensemble e = random_ensemble(500, 6, 4);
  for (Particle& p : e.particles) p.weight = 0;
  const ScaleParams<double> params(0.1, 1, 1, 0.05);
  const PicSetup setup(kDomain, PoissonConfig{}, params, MagneticProfile<double>::uniform(1), Scheme::apsi1);
  const Ensemble before = e;
  const StepReport rep = pic_step(e, setup);
  CHECK(rep.rho->values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep.phi->values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(rep.E->values.cwiseAbs().maxCoeff() == 0.0);

  const NoiseStream noise(e.rng_seed, StreamTag::push_noise);
  const auto zero = [](const Vec2d&) -> Vec2d { return Vec2d::Zero(); };
  for (std::size_t p = 0; p < e.particles.size(); ++p) {
    const Particle& b = before.particles[p];
    const auto expect = apsi1_step(b.state, zero, setup.profile, params, {noise.gaussian_pair(b.id, 0)});
    CHECK(e.particles[p].state.x == expect.x);
    CHECK(e.particles[p].state.v == expect.v);
  }
  CHECK(e.steps_taken == 1);
}

TEST_CASE("pic_step: reproducibility and charge budget over 100 steps") {
  const DiocotronInit init;
  const ScaleParams<double> params(0.01, 1, 1, 0.05);
  auto run = [&](int workers, bool check_budget) {
    Ensemble e = sample_initial(init, 4000, 21, workers);
    // Push a few particles towards the wall so absorption happens.
    for (std::size_t p = 0; p < 40; ++p) e.particles[p].state.x = Vec2d(7.99, 0.0);
    const Vec2d kicks[4] = {Vec2d(50, 0), Vec2d(-50, 0), Vec2d(0, 50), Vec2d(0, -50)};
    for (std::size_t p = 0; p < 40; ++p) e.particles[p].state.v = kicks[p % 4];
    const PicSetup setup(kDomain, PoissonConfig{}, params, MagneticProfile<double>::uniform(1), Scheme::apsi2, workers);
    CompensatedSum removed_total;
    for (int step = 0; step < 100; ++step) {
      const double before = total_alive_weight(e);
      const StepReport rep = pic_step(e, setup);
      removed_total += rep.removed.weight;
      if (check_budget) CHECK(std::abs(rep.alive_charge - (before - rep.removed.weight)) <= 1e-12 * before);
    }
    const StepReport last = pic_observe(e, setup);
    removed_total += last.removed.weight;
    if (check_budget) {
      CHECK(removed_total.value() > 0);
      CHECK(std::abs(last.alive_charge + removed_total.value() - e.total_weight0) <= 1e-12 * e.total_weight0);
    }
    return e;
  };
  const Ensemble a = run(1, true);
  const Ensemble b = run(1, false);
  CHECK(bit_identical(a, b));
  const Ensemble c = run(2, false);
  const Ensemble d = run(2, false);
  CHECK(bit_identical(c, d));
}

TEST_CASE("a failed Poisson solve leaves the ensemble untouched") {
  Ensemble e = sample_initial(DiocotronInit{}, 1000, 5);
  e.particles[0].state.x = Vec2d(9, 0);  // would be absorbed by a successful observe
  PoissonConfig strict;
  strict.tol = 1e-30;
  strict.max_iter = 0;
  const PicSetup setup(kDomain, strict, ScaleParams<double>(0.01, 1, 1, 0.05), MagneticProfile<double>::uniform(1),
                       Scheme::apsi1);
  const Ensemble before = e;
  CHECK_THROWS_AS(pic_step(e, setup), SolverError);
  CHECK(bit_identical(before, e));
  CHECK(e.particles[0].alive);
  CHECK(e.steps_taken == 0);
}
