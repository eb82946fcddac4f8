#pragma once

// Uniform node-centred mesh, nodal scalar/vector fields, cloud-in-cell
// stencils and electric-field sources (analytic closures or grid-backed).

#include <array>
#include <cstddef>
#include <functional>
#include <variant>

#include <Eigen/Core>

#include "apspic/core_model.hpp"

namespace apspic {

/// Uniform rectangular mesh of nx * ny nodes. Node (i, j) sits at
/// (xmin + i*hx, ymin + j*hy); flat index is i*ny + j.
class Grid2D {
 public:
  Grid2D(double xmin, double xmax, double ymin, double ymax, Eigen::Index nx, Eigen::Index ny);

  double xmin() const { return xmin_; }
  double xmax() const { return xmax_; }
  double ymin() const { return ymin_; }
  double ymax() const { return ymax_; }
  Eigen::Index nx() const { return nx_; }
  Eigen::Index ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  Eigen::Index size() const { return nx_ * ny_; }

  Eigen::Index index(Eigen::Index i, Eigen::Index j) const { return i * ny_ + j; }
  Vec2d node(Eigen::Index i, Eigen::Index j) const { return {xmin_ + i * hx_, ymin_ + j * hy_}; }

  /// Closed-domain membership.
  bool contains(const Vec2d& x) const {
    return x.x() >= xmin_ && x.x() <= xmax_ && x.y() >= ymin_ && x.y() <= ymax_;
  }

  /// Trapezoidal control-volume fraction of node (i, j): 1 interior, 1/2 edge, 1/4 corner.
  double area_weight(Eigen::Index i, Eigen::Index j) const {
    const double wx = (i == 0 || i == nx_ - 1) ? 0.5 : 1.0;
    const double wy = (j == 0 || j == ny_ - 1) ? 0.5 : 1.0;
    return wx * wy;
  }

  bool operator==(const Grid2D& o) const {
    return xmin_ == o.xmin_ && xmax_ == o.xmax_ && ymin_ == o.ymin_ && ymax_ == o.ymax_ && nx_ == o.nx_ &&
           ny_ == o.ny_;
  }

 private:
  double xmin_, xmax_, ymin_, ymax_;
  Eigen::Index nx_, ny_;
  double hx_, hy_;
};

struct ScalarField {
  explicit ScalarField(const Grid2D& g) : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}
  ScalarField(const Grid2D& g, Eigen::VectorXd v);

  double& operator()(Eigen::Index i, Eigen::Index j) { return values[grid.index(i, j)]; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values[grid.index(i, j)]; }

  /// Fill with nodal samples of f.
  template <typename F>
  static ScalarField sample(const Grid2D& g, F&& f) {
    ScalarField s(g);
    for (Eigen::Index i = 0; i < g.nx(); ++i)
      for (Eigen::Index j = 0; j < g.ny(); ++j) s(i, j) = f(g.node(i, j));
    return s;
  }

  Grid2D grid;
  Eigen::VectorXd values;
};

struct VectorField {
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

  explicit VectorField(const Grid2D& g) : grid(g), values(Storage::Zero(g.size(), 2)) {}

  Vec2d at(Eigen::Index i, Eigen::Index j) const { return values.row(grid.index(i, j)).transpose(); }
  void set(Eigen::Index i, Eigen::Index j, const Vec2d& v) { values.row(grid.index(i, j)) = v.transpose(); }

  template <typename F>
  static VectorField sample(const Grid2D& g, F&& f) {
    VectorField s(g);
    for (Eigen::Index i = 0; i < g.nx(); ++i)
      for (Eigen::Index j = 0; j < g.ny(); ++j) s.set(i, j, f(g.node(i, j)));
    return s;
  }

  Grid2D grid;
  Storage values;
};

/// Four nodes and bilinear weights around a point. Shared by deposition and
/// interpolation so the two are adjoint.
struct CicStencil {
  std::array<Eigen::Index, 4> nodes;
  std::array<double, 4> weights;
};

/// Throws DomainError when x lies outside the closed grid domain.
CicStencil cic_stencil(const Grid2D& g, const Vec2d& x);

/// Stencil at the nearest point of the domain.
CicStencil cic_stencil_clamped(const Grid2D& g, const Vec2d& x);

double interpolate(const ScalarField& f, const Vec2d& x);
Vec2d interpolate(const VectorField& f, const Vec2d& x);

struct AnalyticField {
  std::function<Vec2d(const Vec2d&)> fn;
};

struct GridField {
  VectorField values;
};

/// Electric field source: an analytic closure or nodal values on a grid.
class ElectricField {
 public:
  static ElectricField analytic(std::function<Vec2d(const Vec2d&)> fn) {
    return ElectricField(AnalyticField{std::move(fn)});
  }
  static ElectricField on_grid(VectorField values) { return ElectricField(GridField{std::move(values)}); }
  /// E(x) = -x, the benchmark closure.
  static ElectricField benchmark() {
    return analytic([](const Vec2d& x) -> Vec2d { return -x; });
  }
  static ElectricField zero() {
    return analytic([](const Vec2d&) -> Vec2d { return Vec2d::Zero(); });
  }

  Vec2d operator()(const Vec2d& x) const;
  bool is_grid() const { return std::holds_alternative<GridField>(source_); }

 private:
  explicit ElectricField(std::variant<AnalyticField, GridField> s) : source_(std::move(s)) {}
  std::variant<AnalyticField, GridField> source_;
};

inline Vec2d eval_E(const ElectricField& field, const Vec2d& x) { return field(x); }

inline double eval_b(const MagneticProfile<double>& profile, const Vec2d& x, double eps) {
  return profile(x, eps);
}

}  // namespace apspic
