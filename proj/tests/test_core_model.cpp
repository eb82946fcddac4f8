#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "apspic/core_model.hpp"
#include "apspic/errors.hpp"

using namespace apspic;

namespace {

constexpr double pi = std::numbers::pi;

// Brute-force inverse of a 2x2 matrix via the cofactor formula.
Mat2d inverse_2x2(const Mat2d& a) {
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  Mat2d inv;
  inv << a(1, 1) / det, -a(0, 1) / det, -a(1, 0) / det, a(0, 0) / det;
  return inv;
}

Mat2d K() {
  Mat2d k;
  k << 0, 1, -1, 0;
  return k;
}

struct Draw {
  double eps, tau, sigma, dt, b;
  Vec2d x;
};

Draw random_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  auto log_uniform = [&](double lo, double hi) { return std::exp(std::log(lo) + u(rng) * (std::log(hi) - std::log(lo))); };
  Draw d;
  d.eps = log_uniform(1e-8, 1);
  d.tau = log_uniform(1e-2, 1e2);
  d.sigma = log_uniform(1e-3, 10);
  d.dt = log_uniform(1e-4, 1);
  d.b = (u(rng) < 0.5 ? -1 : 1) * log_uniform(0.1, 10);
  d.x = Vec2d(20 * u(rng) - 10, 20 * u(rng) - 10);
  return d;
}

}  // namespace

TEST_CASE("apply_K on basis vectors and K squared") {
  CHECK(apply_K(Vec2d(1, 0)) == Vec2d(0, -1));
  CHECK(apply_K(Vec2d(0, 1)) == Vec2d(1, 0));
  const Vec2d w(0.3, 0.2);
  CHECK((apply_K(apply_K(w)) + w).norm() == 0.0);
  CHECK((K_matrix<double>() * K_matrix<double>() + Mat2d::Identity()).norm() == 0.0);
  CHECK(K_matrix<double>() == K());
}

TEST_CASE("apsi2 gamma constant") {
  CHECK(apsi2_gamma<double> == doctest::Approx(1 - 1 / std::sqrt(2.0)).epsilon(1e-16));
  CHECK(std::abs(apsi2_gamma<double> - (1 - std::sqrt(0.5))) <= 2 * std::numeric_limits<double>::epsilon());
}

TEST_CASE("ScaleParams derived quantities and validation") {
  const ScaleParams<double> p(0.25, 2.0, 0.5, 0.1);
  CHECK(p.delta() == doctest::Approx(0.4));
  CHECK(p.lambda() == doctest::Approx(1.6));
  CHECK(p.noise_amplitude() == doctest::Approx(std::sqrt(2 * 0.5 * 0.4 / 2.0)));
  CHECK_THROWS_AS(ScaleParams<double>(0.0, 1, 1, 0.1), DomainError);
  CHECK_THROWS_AS(ScaleParams<double>(1, -1, 1, 0.1), DomainError);
  CHECK_THROWS_AS(ScaleParams<double>(1, 1, -1, 0.1), DomainError);
  CHECK_THROWS_AS(ScaleParams<double>(1, 1, 1, 0.0), DomainError);

  ScaleParams<double> q(1, 1, 1, 0.1);
  q.set_epsilon(0.5);
  CHECK(q.delta() == doctest::Approx(0.2));
  CHECK_THROWS_AS(q.set_tau(0.0), DomainError);
  CHECK(q.tau() == 1.0);
}

TEST_CASE("mat_M formal limit and product identity") {
  CHECK(mat_M_from(1.7, 0.0, 0.0, 1.0) == Mat2d::Identity());
  CHECK(mat_M_from(1.7, apsi2_gamma<double> * 0.0, apsi2_gamma<double> * 0.0, 1.0) == Mat2d::Identity());

  const auto b = MagneticProfile<double>::benchmark();
  const ScaleParams<double> p(std::ldexp(1.0, -4), 1, 1, pi / 30);
  for (const Vec2d& x : {Vec2d(0.3, 0.2), Vec2d(-4, 7), Vec2d(10, 14)}) {
    const double bx = b(x, p.epsilon());
    const Mat2d A = (1 + p.delta() / p.tau()) * Mat2d::Identity() - p.lambda() * bx * K();
    CHECK((A * mat_M(x, b, p) - Mat2d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("mat_M and mat_M_gamma against a brute-force 2x2 inverse") {
  const auto b = MagneticProfile<double>::uniform(1.0);
  const ScaleParams<double> p(std::ldexp(1.0, -4), 1, 1, pi / 30);
  const Vec2d x(0.3, 0.2);
  const double g = apsi2_gamma<double>;
  const double delta = (pi / 30) * 16, lambda = (pi / 30) * 256;

  Mat2d A = (1 + delta) * Mat2d::Identity() - lambda * K();
  CHECK((mat_M(x, b, p) - inverse_2x2(A)).cwiseAbs().maxCoeff() <= 1e-14);
  Mat2d Ag = (1 + g * delta) * Mat2d::Identity() - g * lambda * K();
  CHECK((mat_M_gamma(x, b, p) - inverse_2x2(Ag)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("mat_R special cases") {
  // eps = 0 with b = 2 collapses to K / 2.
  const Vec2d r = mat_R_from(2.0, 0.0, 1.0) * Vec2d(1, 0);
  CHECK(r.x() == doctest::Approx(0).epsilon(1e-16));
  CHECK(r.y() == doctest::Approx(-0.5));
  // b = 0, eps = tau = 1: (eps tau / eps^2) I = I.
  CHECK((mat_R_from(0.0, 1.0, 1.0) - Mat2d::Identity()).norm() == 0.0);
  CHECK_THROWS_AS(mat_R_from(0.0, 0.0, 1.0), DomainError);

  // Direct formula (b tau^2 K + eps tau I) / ((b tau)^2 + eps^2).
  const double bb = 1.3, eps = 0.2, tau = 3.0;
  const Mat2d expected = (bb * tau * tau * K() + eps * tau * Mat2d::Identity()) / (bb * bb * tau * tau + eps * eps);
  CHECK((mat_R_from(bb, eps, tau) - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("lambda M - R == -M R at the benchmark point") {
  const auto b = MagneticProfile<double>::benchmark();
  const ScaleParams<double> p(0.125, 1, 1, pi / 30);
  const Vec2d x(0.3, 0.2);
  const Mat2d M = mat_M(x, b, p);
  const Mat2d R = mat_R(x, b, p.epsilon(), p.tau());
  CHECK((p.lambda() * M - R + M * R).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("mat_R0") {
  CHECK(mat_R0(1.0) == K());
  const Vec2d e = mat_R0(-2.0) * Vec2d(0, 1);
  CHECK(e.x() == doctest::Approx(-0.5));
  CHECK(e.y() == 0.0);
  for (double b0 : {1.0, -2.0, 0.3}) CHECK((mat_R_from(b0, 0.0, 1.0) - mat_R0(b0)).cwiseAbs().maxCoeff() <= 1e-16);
  CHECK_THROWS_AS(mat_R0(0.0), DomainError);
}

TEST_CASE("MagneticProfile kinds") {
  const auto bench = MagneticProfile<double>::benchmark();
  CHECK(bench(Vec2d(0, 0), 0.7) == 1.0);
  CHECK(bench(Vec2d(0, pi / 2), 0.125) == doctest::Approx(1.125).epsilon(1e-15));
  const auto uni = MagneticProfile<double>::uniform(2.5);
  CHECK(uni(Vec2d(3, -9), 0.1) == 2.5);
  // An unmagnetized profile is allowed; only its guiding-center limit is undefined.
  const auto none = MagneticProfile<double>::uniform(0.0);
  CHECK(none(Vec2d(1, 1), 0.5) == 0.0);
  CHECK_THROWS_AS(mat_R0(none.b0()), DomainError);
  const auto mo = MagneticProfile<double>::maximal_ordering([](const Vec2d& y) { return 1 + y.norm(); }, 1.0);
  CHECK(mo(Vec2d(3, 4), 0.1) == doctest::Approx(1.5));
}

TEST_CASE("property: kernel identities over random admissible draws") {
  std::mt19937_64 rng(20240611);
  double worst_inverse = 0, worst_gamma = 0, worst_identity = 0, worst_gamma_identity = 0;
  const double g = apsi2_gamma<double>;
  for (int trial = 0; trial < 1000; ++trial) {
    const Draw d = random_draw(rng);
    const auto b = MagneticProfile<double>::uniform(d.b);
    const ScaleParams<double> p(d.eps, d.tau, d.sigma, d.dt);
    const Mat2d M = mat_M(d.x, b, p), Mg = mat_M_gamma(d.x, b, p);
    const Mat2d R = mat_R(d.x, b, d.eps, d.tau);
    const Mat2d A = (1 + p.delta() / p.tau()) * Mat2d::Identity() - p.lambda() * d.b * K();
    const Mat2d Ag = (1 + g * p.delta() / p.tau()) * Mat2d::Identity() - g * p.lambda() * d.b * K();
    worst_inverse = std::max(worst_inverse, (A * M - Mat2d::Identity()).cwiseAbs().maxCoeff());
    worst_gamma = std::max(worst_gamma, (Ag * Mg - Mat2d::Identity()).cwiseAbs().maxCoeff());
    worst_identity = std::max(worst_identity, (p.lambda() * M - R + M * R).cwiseAbs().maxCoeff());
    worst_gamma_identity = std::max(worst_gamma_identity, (g * p.lambda() * Mg - R + Mg * R).cwiseAbs().maxCoeff());
  }
  CHECK(worst_inverse <= 1e-12);
  CHECK(worst_gamma <= 1e-12);
  CHECK(worst_identity <= 1e-10);
  CHECK(worst_gamma_identity <= 1e-10);
}

TEST_CASE("property: M is a scaled rotation with norm below 1 / (1 + delta / tau)") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Draw d = random_draw(rng);
    const auto b = MagneticProfile<double>::uniform(d.b);
    const ScaleParams<double> p(d.eps, d.tau, d.sigma, d.dt);
    const Mat2d M = mat_M(d.x, b, p);
    CHECK(M(0, 0) == M(1, 1));
    CHECK(M(0, 1) == -M(1, 0));
    const double spectral = std::hypot(M(0, 0), M(0, 1));
    CHECK(spectral <= (1 + 1e-15) / (1 + p.delta() / p.tau()));
  }
}
