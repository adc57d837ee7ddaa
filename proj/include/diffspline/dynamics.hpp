#pragma once

#include <vector>

#include "diffspline/diffeo.hpp"
#include "diffspline/field.hpp"
#include "diffspline/metric.hpp"
#include "diffspline/velocity_path.hpp"

namespace diffspline {

// Nodal values above this bound abort a rollout as a blow-up.
inline constexpr double kBlowupThreshold = 1e6;

// Snapshot of the flow map and its momentum at one time.
struct State {
  Diffeo phi;
  Momentum m;
};

// Forcing alpha sampled at M+1 uniform times, piecewise linear in between.
class ControlPath : public detail::TimeSampledField {
 public:
  using detail::TimeSampledField::TimeSampledField;
};

// Time history produced by a rollout: states at the M+1 time nodes together
// with the control that generated them.
struct Trajectory {
  std::vector<State> states;
  ControlPath control;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  double dt() const { return 1.0 / steps(); }
  const GridSpec& grid() const { return states.front().phi.grid(); }

  // Eulerian velocities xi_i = sharp(m_i) as a path.
  VelocityPath velocities(const SobolevMetric& metric) const;
};

// Covariant derivative of the right-invariant H^s metric along a curve with
// Eulerian velocity xi, applied to a vector field nu with time derivative
// nu_dot (all right-trivialized):
//   nu_dot + 1/2 ad_dagger(xi, nu) + 1/2 ad_dagger(nu, xi) - 1/2 ad(xi, nu).
VectorField covariant_derivative(const VectorField& xi, const VectorField& nu,
                                 const VectorField& nu_dot,
                                 const SobolevMetric& metric);

// Curve acceleration: the covariant derivative of the velocity along itself,
// xi_dot + ad_dagger(xi, xi).
VectorField acceleration(const VectorField& xi, const VectorField& xi_dot,
                         const SobolevMetric& metric);

// Integrate the forced momentum dynamics
//   dm/dt = -coad(xi, m) + flat(alpha),   xi = sharp(m),
//   d(phi)/dt = xi o phi
// from the given initial state with classical RK4 (one step per control
// segment; stage controls alpha_i, (alpha_i + alpha_{i+1})/2, alpha_{i+1}).
// Throws BlowupError / DegenerateMapError with the offending time index.
Trajectory forced_rollout(const State& initial, const ControlPath& control,
                          const SobolevMetric& metric,
                          EvalScheme scheme = EvalScheme::cubic);

// Unforced rollout from the identity: the geodesic with initial momentum m0.
Trajectory geodesic_shoot(const Momentum& m0, const SobolevMetric& metric,
                          int steps, EvalScheme scheme = EvalScheme::cubic);

// Coadjoint pullback Ad*_g m = |Dg| (Dg)^T (m o g), the dual of
// Ad_g eta = (Dg . eta) o g^{-1} under the average-normalized L2 pairing.
Momentum ad_star_pullback(const Diffeo& g, const Momentum& m,
                          EvalScheme scheme = EvalScheme::cubic);

// Gap in the transport identity
//   m(t) = Ad*_{flow(0->t)^{-1}} m(0) + int_0^t Ad*_{flow(s->t)^{-1}} a(s) ds,
// a = flat(alpha), evaluated at every time node via one segment-by-segment
// pullback recursion and the trapezoid rule. Returns the maximum over nodes
// of the dual H^s norm of the gap.
double transport_residual(const Trajectory& traj, const ControlPath& control,
                          const SobolevMetric& metric,
                          EvalScheme scheme = EvalScheme::cubic);

// Energy balance monitor for f(t) = 1/2 ||xi(t)||^2_{H^s} along a rollout:
// the rate identity f'(t) = <alpha(t), xi(t)>_{H^s} (checked with 2nd-order
// difference quotients) and the a-priori bound
//   f(t) <= f(0) + sqrt(int_0^t ||alpha||^2) * sqrt(int_0^t 2 f) + 1e-6.
struct GronwallReport {
  std::vector<double> energy;           // f at each node
  std::vector<double> energy_rate;      // difference-quotient f'
  std::vector<double> control_pairing;  // <alpha, xi>_{H^s}
  std::vector<bool> bound_ok;           // a-priori bound per node
  double max_identity_gap = 0.0;        // max |f' - pairing|
  bool all_bounds_ok = true;
};

GronwallReport gronwall_monitor(const Trajectory& traj, const ControlPath& control,
                                const SobolevMetric& metric);

}  // namespace diffspline
