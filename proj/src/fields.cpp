#include "apspic/fields.hpp"

#include <algorithm>
#include <cmath>

namespace apspic {

Grid2D::Grid2D(double xmin, double xmax, double ymin, double ymax, Eigen::Index nx, Eigen::Index ny)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), nx_(nx), ny_(ny) {
  if (nx < 3 || ny < 3) throw DomainError("Grid2D needs at least 3 nodes per axis");
  if (!(xmax > xmin) || !(ymax > ymin)) throw DomainError("Grid2D bounds must satisfy min < max");
  hx_ = (xmax - xmin) / static_cast<double>(nx - 1);
  hy_ = (ymax - ymin) / static_cast<double>(ny - 1);
}

ScalarField::ScalarField(const Grid2D& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) throw DomainError("ScalarField: value count does not match grid");
  if (!values.allFinite()) throw DomainError("ScalarField: non-finite entry");
}

namespace {

CicStencil stencil_unchecked(const Grid2D& g, double px, double py) {
  const double fx = (px - g.xmin()) / g.hx();
  const double fy = (py - g.ymin()) / g.hy();
  const auto i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(fx)), 0, g.nx() - 2);
  const auto j = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(fy)), 0, g.ny() - 2);
  const double tx = std::clamp(fx - static_cast<double>(i), 0.0, 1.0);
  const double ty = std::clamp(fy - static_cast<double>(j), 0.0, 1.0);
  CicStencil s;
  s.nodes = {g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)};
  s.weights = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  return s;
}

}  // namespace

CicStencil cic_stencil(const Grid2D& g, const Vec2d& x) {
  if (!g.contains(x)) throw DomainError("grid query outside the domain");
  return stencil_unchecked(g, x.x(), x.y());
}

CicStencil cic_stencil_clamped(const Grid2D& g, const Vec2d& x) {
  return stencil_unchecked(g, std::clamp(x.x(), g.xmin(), g.xmax()), std::clamp(x.y(), g.ymin(), g.ymax()));
}

double interpolate(const ScalarField& f, const Vec2d& x) {
  const CicStencil s = cic_stencil(f.grid, x);
  double out = 0;
  for (int k = 0; k < 4; ++k) out += s.weights[k] * f.values[s.nodes[k]];
  return out;
}

Vec2d interpolate(const VectorField& f, const Vec2d& x) {
  const CicStencil s = cic_stencil(f.grid, x);
  Vec2d out = Vec2d::Zero();
  for (int k = 0; k < 4; ++k) out += s.weights[k] * f.values.row(s.nodes[k]).transpose();
  return out;
}

Vec2d ElectricField::operator()(const Vec2d& x) const {
  if (const auto* a = std::get_if<AnalyticField>(&source_)) return a->fn(x);
  return interpolate(std::get<GridField>(source_).values, x);
}

}  // namespace apspic
