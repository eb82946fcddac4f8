#pragma once

// Scale parameters, magnetic profiles and the 2x2 matrix kernels shared by
// every particle scheme and guiding-center model.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "apspic/errors.hpp"

namespace apspic {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2d = Vec2<double>;
using Mat2d = Mat2<double>;

/// Stage coefficient of the two-stage scheme, 1 - 1/sqrt(2).
template <typename Scalar>
inline constexpr Scalar apsi2_gamma = Scalar(1) - Scalar(1) / std::numbers::sqrt2_v<Scalar>;

/// Rotation generator K = [[0, 1], [-1, 0]].
template <typename Scalar = double>
Mat2<Scalar> K_matrix() {
  Mat2<Scalar> k;
  k << Scalar(0), Scalar(1), Scalar(-1), Scalar(0);
  return k;
}

/// K * w without forming K.
template <typename Derived>
Vec2<typename Derived::Scalar> apply_K(const Eigen::MatrixBase<Derived>& w) {
  return Vec2<typename Derived::Scalar>(w(1), -w(0));
}

/// epsilon, tau, sigma, dt plus the derived stiffness ratios
/// delta = dt/epsilon and lambda = dt/epsilon^2. The derived values are
/// recomputed whenever a primary field changes.
template <typename Scalar>
class ScaleParams {
 public:
  ScaleParams(Scalar epsilon, Scalar tau, Scalar sigma, Scalar dt)
      : epsilon_(epsilon), tau_(tau), sigma_(sigma), dt_(dt) {
    validate();
    refresh();
  }

  Scalar epsilon() const { return epsilon_; }
  Scalar tau() const { return tau_; }
  Scalar sigma() const { return sigma_; }
  Scalar dt() const { return dt_; }
  Scalar delta() const { return delta_; }
  Scalar lambda() const { return lambda_; }

  /// Amplitude multiplying the standard normal draw, sqrt(2 sigma delta / tau).
  Scalar noise_amplitude() const { return std::sqrt(Scalar(2) * sigma_ * delta_ / tau_); }

  void set_epsilon(Scalar v) { update(epsilon_, v); }
  void set_tau(Scalar v) { update(tau_, v); }
  void set_sigma(Scalar v) { update(sigma_, v); }
  void set_dt(Scalar v) { update(dt_, v); }

 private:
  void update(Scalar& slot, Scalar v) {
    const Scalar old = slot;
    slot = v;
    try {
      validate();
    } catch (...) {
      slot = old;
      throw;
    }
    refresh();
  }

  void validate() const {
    if (!(epsilon_ > 0)) throw DomainError("epsilon must be > 0");
    if (!(tau_ > 0)) throw DomainError("tau must be > 0");
    if (!(sigma_ >= 0)) throw DomainError("sigma must be >= 0");
    if (!(dt_ > 0)) throw DomainError("dt must be > 0");
  }

  void refresh() {
    delta_ = dt_ / epsilon_;
    lambda_ = dt_ / (epsilon_ * epsilon_);
  }

  Scalar epsilon_, tau_, sigma_, dt_;
  Scalar delta_{}, lambda_{};
};

/// Scalar magnetic field strength b(x) as seen by a particle at x for a given
/// epsilon. Three shapes are supported:
///  - uniform: b(x) = b0;
///  - benchmark: b(x) = b0 + eps * sin(|x|), with b0 = 1 by default;
///  - maximal ordering: b(x) = btilde(eps * x) for a user profile btilde.
/// `s_exponent` records the closeness b(x) - b0 = O(eps^s).
template <typename Scalar>
class MagneticProfile {
 public:
  enum class Kind { uniform, benchmark, maximal_ordering };

  static MagneticProfile uniform(Scalar b0) { return MagneticProfile(Kind::uniform, b0, Scalar(0), {}); }

  static MagneticProfile benchmark(Scalar b0 = Scalar(1)) {
    return MagneticProfile(Kind::benchmark, b0, Scalar(1), {});
  }

  static MagneticProfile maximal_ordering(std::function<Scalar(const Vec2<Scalar>&)> btilde,
                                          Scalar s_exponent = Scalar(1)) {
    const Scalar b0 = btilde(Vec2<Scalar>::Zero());
    return MagneticProfile(Kind::maximal_ordering, b0, s_exponent, std::move(btilde));
  }

  Kind kind() const { return kind_; }
  Scalar b0() const { return b0_; }
  Scalar s_exponent() const { return s_exponent_; }

  Scalar operator()(const Vec2<Scalar>& x, Scalar eps) const {
    switch (kind_) {
      case Kind::uniform:
        return b0_;
      case Kind::benchmark:
        return b0_ + eps * std::sin(x.norm());
      case Kind::maximal_ordering:
        return btilde_(eps * x);
    }
    return b0_;
  }

 private:
  MagneticProfile(Kind kind, Scalar b0, Scalar s, std::function<Scalar(const Vec2<Scalar>&)> btilde)
      : kind_(kind), b0_(b0), s_exponent_(s), btilde_(std::move(btilde)) {}

  Kind kind_;
  Scalar b0_;
  Scalar s_exponent_;
  std::function<Scalar(const Vec2<Scalar>&)> btilde_;
};

/// ((1 + delta/tau) I + lambda b K) / ((1 + delta/tau)^2 + (lambda b)^2),
/// the inverse of (1 + delta/tau) I - lambda b K.
template <typename Scalar>
Mat2<Scalar> mat_M_from(Scalar b, Scalar delta, Scalar lambda, Scalar tau) {
  const Scalar a = Scalar(1) + delta / tau;
  const Scalar c = lambda * b;
  const Scalar den = a * a + c * c;
  Mat2<Scalar> m;
  m << a / den, c / den, -c / den, a / den;
  return m;
}

template <typename Scalar>
Mat2<Scalar> mat_M(const Vec2<Scalar>& x, const MagneticProfile<Scalar>& b, const ScaleParams<Scalar>& p) {
  return mat_M_from(b(x, p.epsilon()), p.delta(), p.lambda(), p.tau());
}

/// Same as mat_M with delta and lambda scaled by gamma = 1 - 1/sqrt(2).
template <typename Scalar>
Mat2<Scalar> mat_M_gamma(const Vec2<Scalar>& x, const MagneticProfile<Scalar>& b,
                         const ScaleParams<Scalar>& p) {
  constexpr Scalar g = apsi2_gamma<Scalar>;
  return mat_M_from(b(x, p.epsilon()), g * p.delta(), g * p.lambda(), p.tau());
}

/// (b tau^2 K + eps tau I) / ((b tau)^2 + eps^2) for a field value b.
template <typename Scalar>
Mat2<Scalar> mat_R_from(Scalar b, Scalar eps, Scalar tau) {
  const Scalar den = (b * tau) * (b * tau) + eps * eps;
  if (!(den > Scalar(0))) throw DomainError("mat_R: degenerate denominator (b*tau)^2 + eps^2 == 0");
  const Scalar diag = eps * tau / den;
  const Scalar off = b * tau * tau / den;
  Mat2<Scalar> r;
  r << diag, off, -off, diag;
  return r;
}

/// Drift resolvent R(x) evaluated with b = b~(eps x).
template <typename Scalar>
Mat2<Scalar> mat_R(const Vec2<Scalar>& x, const MagneticProfile<Scalar>& b, Scalar eps, Scalar tau) {
  return mat_R_from(b(x, eps), eps, tau);
}

/// Limit drift matrix K / b0.
template <typename Scalar>
Mat2<Scalar> mat_R0(Scalar b0) {
  if (b0 == Scalar(0)) throw DomainError("mat_R0: b0 must be nonzero");
  return K_matrix<Scalar>() / b0;
}

}  // namespace apspic
