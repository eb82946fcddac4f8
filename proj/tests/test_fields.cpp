#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "apspic/errors.hpp"
#include "apspic/fields.hpp"

using namespace apspic;

TEST_CASE("Grid2D geometry") {
  const Grid2D g(-8, 8, -8, 8, 129, 65);
  CHECK(g.hx() == 0.125);
  CHECK(g.hy() == 0.25);
  CHECK(g.index(2, 3) == 2 * 65 + 3);
  CHECK(g.node(0, 0) == Vec2d(-8, -8));
  CHECK(g.node(128, 64) == Vec2d(8, 8));
  CHECK(g.area_weight(0, 0) == 0.25);
  CHECK(g.area_weight(0, 5) == 0.5);
  CHECK(g.area_weight(5, 5) == 1.0);
  CHECK(g.contains(Vec2d(8, -8)));
  CHECK_FALSE(g.contains(Vec2d(8.1, 0)));
  CHECK_THROWS_AS(Grid2D(0, 1, 0, 1, 2, 5), DomainError);
  CHECK_THROWS_AS(Grid2D(1, 1, 0, 1, 5, 5), DomainError);
}

TEST_CASE("eval_E on analytic and grid sources") {
  const Vec2d e = eval_E(ElectricField::benchmark(), Vec2d(0.3, 0.2));
  CHECK(e == Vec2d(-0.3, -0.2));
  CHECK(eval_E(ElectricField::zero(), Vec2d(1, 2)) == Vec2d::Zero());

  const Grid2D g(0, 1, 0, 1, 5, 5);
  const auto constant = ElectricField::on_grid(VectorField::sample(g, [](const Vec2d&) { return Vec2d(2, -1); }));
  CHECK(constant.is_grid());
  const Vec2d c = eval_E(constant, Vec2d(0.37, 0.81));
  CHECK(c.x() == doctest::Approx(2).epsilon(1e-15));
  CHECK(c.y() == doctest::Approx(-1).epsilon(1e-15));

  const auto linear =
      ElectricField::on_grid(VectorField::sample(g, [](const Vec2d& x) { return Vec2d(x.x(), 2 * x.y()); }));
  const Vec2d l = eval_E(linear, Vec2d(0.25, 0.75));
  CHECK(l.x() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(l.y() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(eval_E(linear, Vec2d(1.5, 0.5)), DomainError);
}

TEST_CASE("eval_b") {
  const auto bench = MagneticProfile<double>::benchmark();
  CHECK(eval_b(bench, Vec2d(0, 0), 0.3) == 1.0);
  CHECK(eval_b(bench, Vec2d(std::numbers::pi / 2, 0), 0.125) == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(eval_b(MagneticProfile<double>::uniform(3.0), Vec2d(-7, 2), 0.5) == 3.0);
}

TEST_CASE("CIC stencil on nodes, cell centers and the upper boundary") {
  const Grid2D g(0, 4, 0, 4, 5, 5);
  const CicStencil on_node = cic_stencil(g, Vec2d(2, 3));
  double total = 0;
  for (int k = 0; k < 4; ++k) {
    total += on_node.weights[k];
    if (on_node.nodes[k] == g.index(2, 3)) CHECK(on_node.weights[k] == 1.0);
  }
  CHECK(total == 1.0);

  const CicStencil center = cic_stencil(g, Vec2d(1.5, 2.5));
  for (double w : center.weights) CHECK(w == 0.25);

  const CicStencil corner = cic_stencil(g, Vec2d(4, 4));
  for (int k = 0; k < 4; ++k)
    if (corner.nodes[k] == g.index(4, 4)) CHECK(corner.weights[k] == 1.0);

  CHECK_THROWS_AS(cic_stencil(g, Vec2d(4.001, 1)), DomainError);
  const CicStencil clamped = cic_stencil_clamped(g, Vec2d(9, -3));
  for (int k = 0; k < 4; ++k)
    if (clamped.nodes[k] == g.index(4, 0)) CHECK(clamped.weights[k] == 1.0);
}

TEST_CASE("property: bilinear interpolation reproduces bilinear functions and weights sum to one") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 5);
  const Grid2D g(-3, 5, -3, 5, 9, 13);
  auto f = [](const Vec2d& x) { return 1.5 - 0.25 * x.x() + 2 * x.y() + 0.5 * x.x() * x.y(); };
  const ScalarField s = ScalarField::sample(g, f);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec2d x(u(rng), u(rng));
    const CicStencil st = cic_stencil(g, x);
    double sum = 0;
    for (double w : st.weights) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1).epsilon(1e-15));
    CHECK(interpolate(s, x) == doctest::Approx(f(x)).epsilon(1e-12));
  }
}

TEST_CASE("ScalarField rejects mismatched or non-finite data") {
  const Grid2D g(0, 1, 0, 1, 3, 3);
  CHECK_THROWS_AS(ScalarField(g, Eigen::VectorXd::Zero(4)), DomainError);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(9);
  bad[4] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ScalarField(g, bad), DomainError);
}
