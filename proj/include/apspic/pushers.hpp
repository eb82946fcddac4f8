#pragma once

// Single-particle integrators for the scaled Langevin system
//   dx = v/eps dt,
//   dv = (E(x) + b(x)/eps K v - v/tau)/eps dt + sqrt(2 sigma/(eps tau)) dW,
// and for its guiding-center limits.
//
// `Field` is any callable Vec2(const Vec2&), e.g. ElectricField or a lambda.

#include "apspic/core_model.hpp"

namespace apspic {

template <typename Scalar>
struct PhaseState {
  Vec2<Scalar> x;
  Vec2<Scalar> v;
};

template <typename Scalar>
struct GCState {
  Vec2<Scalar> u;
};

/// Pair of independent standard normals driving one step.
template <typename Scalar>
struct NoiseDraw {
  Vec2<Scalar> xi = Vec2<Scalar>::Zero();
};

/// First-order semi-implicit step. The velocity solve is the closed-form
/// inverse of (1 + delta/tau) I - lambda b(x^n) K.
template <typename Scalar, typename Field>
PhaseState<Scalar> apsi1_step(const PhaseState<Scalar>& s, const Field& E, const MagneticProfile<Scalar>& b,
                              const ScaleParams<Scalar>& p, const NoiseDraw<Scalar>& noise) {
  const Vec2<Scalar> rhs = s.v + p.delta() * E(s.x) + p.noise_amplitude() * noise.xi;
  PhaseState<Scalar> out;
  out.v = mat_M(s.x, b, p) * rhs;
  out.x = s.x + p.delta() * out.v;
  return out;
}

/// Intermediate quantities of one two-stage step.
template <typename Scalar>
struct Apsi2Stages {
  Vec2<Scalar> x1;  // first-stage position
  Vec2<Scalar> v1;  // first-stage velocity
  Vec2<Scalar> x2;  // predictor where the second-stage field is evaluated
  Vec2<Scalar> F1;  // first-stage force
  PhaseState<Scalar> next;
};

template <typename Scalar, typename Field>
Apsi2Stages<Scalar> apsi2_stages(const PhaseState<Scalar>& s, const Field& E, const MagneticProfile<Scalar>& b,
                                 const ScaleParams<Scalar>& p, const NoiseDraw<Scalar>& noise) {
  constexpr Scalar g = apsi2_gamma<Scalar>;
  const Scalar delta = p.delta();
  const Scalar eps = p.epsilon();
  const Vec2<Scalar> En = E(s.x);

  Apsi2Stages<Scalar> st;
  st.v1 = mat_M_gamma(s.x, b, p) * (s.v + g * delta * En);
  st.x1 = s.x + g * delta * st.v1;
  st.x2 = s.x + (delta / (Scalar(2) * g)) * st.v1;
  st.F1 = En + (b(s.x, eps) / eps) * apply_K(st.v1) - st.v1 / p.tau();

  const Vec2<Scalar> rhs =
      s.v + (Scalar(1) - g) * delta * st.F1 + g * delta * E(st.x2) + p.noise_amplitude() * noise.xi;
  st.next.v = mat_M_gamma(st.x2, b, p) * rhs;
  st.next.x = s.x + (Scalar(1) - g) * delta * st.v1 + g * delta * st.next.v;
  return st;
}

/// Second-order two-stage semi-implicit step with additive noise.
template <typename Scalar, typename Field>
PhaseState<Scalar> apsi2_step(const PhaseState<Scalar>& s, const Field& E, const MagneticProfile<Scalar>& b,
                              const ScaleParams<Scalar>& p, const NoiseDraw<Scalar>& noise) {
  return apsi2_stages(s, E, b, p, noise).next;
}

/// Explicit Euler-Maruyama step; only stable when dt << eps^2.
template <typename Scalar, typename Field>
PhaseState<Scalar> em_step(const PhaseState<Scalar>& s, const Field& E, const MagneticProfile<Scalar>& b,
                           const ScaleParams<Scalar>& p, const NoiseDraw<Scalar>& noise) {
  const Scalar eps = p.epsilon();
  const Vec2<Scalar> force = E(s.x) + (b(s.x, eps) / eps) * apply_K(s.v) - s.v / p.tau();
  PhaseState<Scalar> out;
  out.x = s.x + p.delta() * s.v;
  out.v = s.v + p.delta() * force + p.noise_amplitude() * noise.xi;
  return out;
}

/// Forward Euler on u' = K E(u) / b0.
template <typename Scalar, typename Field>
GCState<Scalar> gc_euler_step(const GCState<Scalar>& g, const Field& E, Scalar b0, Scalar dt) {
  return {g.u + dt * (mat_R0(b0) * E(g.u))};
}

/// Two-stage guiding-center scheme matching the limit of the second-order particle scheme.
template <typename Scalar, typename Field>
GCState<Scalar> gc_si2_step(const GCState<Scalar>& g, const Field& E, Scalar b0, Scalar dt) {
  constexpr Scalar gm = apsi2_gamma<Scalar>;
  const Mat2<Scalar> r0 = mat_R0(b0);
  const Vec2<Scalar> drift = r0 * E(g.u);
  const Vec2<Scalar> u1 = g.u + (dt / (Scalar(2) * gm)) * drift;
  return {g.u + (Scalar(1) - gm) * dt * drift + gm * dt * (r0 * E(u1))};
}

/// Forward Euler on u' = R(u) E(u), the finite-eps drift model.
template <typename Scalar, typename Field>
GCState<Scalar> gcR_euler_step(const GCState<Scalar>& g, const Field& E, const MagneticProfile<Scalar>& b,
                               Scalar eps, Scalar tau, Scalar dt) {
  return {g.u + dt * (mat_R(g.u, b, eps, tau) * E(g.u))};
}

}  // namespace apspic
