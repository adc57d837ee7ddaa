#include <cmath>
#include <random>
#include <vector>

#include "diffspline/diffeo.hpp"
#include "diffspline/dynamics.hpp"
#include "diffspline/errors.hpp"
#include "diffspline/field.hpp"
#include "diffspline/lie_ops.hpp"
#include "diffspline/metric.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace diffspline;

namespace {

// Control path alpha(t) = cos(pi t) a + sin(2 pi t) b. Smooth in time, so the
// difference-quotient monitors see their design order.
ControlPath smooth_control(const GridSpec& g, int steps, unsigned seed, double amp) {
  std::mt19937_64 rng(seed);
  VectorField a = random_band_limited(g, 2, amp, rng);
  VectorField b = random_band_limited(g, 2, amp, rng);
  ControlPath c(g, steps);
  for (int i = 0; i <= steps; ++i) {
    double t = static_cast<double>(i) / steps;
    c.node(i).axpy(std::cos(kTwoPi * t / 2.0), a);
    c.node(i).axpy(std::sin(kTwoPi * t), b);
  }
  return c;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("time-sampled paths interpolate linearly and validate steps") {
  GridSpec g(1, 16);
  CHECK_THROWS_AS(ControlPath(g, 3), ValidationError);  // fewer than 4 steps
  ControlPath c(g, 4);
  for (auto& v : c.node(2).raw()) v = 1.0;
  VectorField mid = c.at_time(0.375);  // halfway between nodes 1 and 2
  CHECK(mid.component(0)[0] == doctest::Approx(0.5).epsilon(1e-13));
  VectorField clamped = c.at_time(7.0);
  CHECK(clamped.component(0)[0] == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("flow of a constant field is an exact translation") {
  GridSpec g(1, 32);
  VectorField u(g);
  for (auto& v : u.raw()) v = 0.4;
  Diffeo phi = testutil::steady_flow(u);
  for (int i = 0; i < g.num_nodes(); ++i)
    CHECK(phi.displacement().component(0)[i] == doctest::Approx(0.4).epsilon(1e-13));
}

TEST_CASE("flow forward then backward returns to the identity") {
  GridSpec g(2, 32);
  std::mt19937_64 rng(3);
  VelocityPath path(g, 8);
  for (int i = 0; i <= 8; ++i) {
    VectorField u = random_band_limited(g, 2, 0.2, rng);
    path.node(i) += u;
  }
  Diffeo fwd = flow(path, 0.0, 1.0, EvalScheme::spectral);
  Diffeo bwd = flow(path, 1.0, 0.0, EvalScheme::spectral);
  Diffeo round = compose(bwd, fwd, EvalScheme::spectral);
  CHECK(round.displacement().max_abs() <= 2e-5);  // two O(dt^4) integrations
}

TEST_CASE("covariant derivative along the curve velocity is the acceleration") {
  GridSpec g(2, 32);
  SobolevMetric ms(g, 3.0);
  std::mt19937_64 rng(5);
  VectorField xi = random_band_limited(g, 2, 0.5, rng);
  VectorField xidot = random_band_limited(g, 2, 0.5, rng);
  // nu = xi: the -1/2 ad(xi,xi) term vanishes and the two ad_dagger halves
  // coincide, leaving xidot + ad_dagger(xi, xi).
  VectorField lhs = covariant_derivative(xi, xi, xidot, ms);
  VectorField rhs = acceleration(xi, xidot, ms);
  CHECK(testutil::max_abs_diff(lhs, rhs) <= 1e-12);
}

TEST_CASE("geodesics conserve energy and have vanishing acceleration") {
  GridSpec g(1, 64);
  SobolevMetric ms(g, 2.5);
  std::mt19937_64 rng(7);
  Momentum m0 = ms.flat(random_band_limited(g, 2, 0.2, rng));
  int steps = 128;
  Trajectory traj = geodesic_shoot(m0, ms, steps);

  double e0 = norm_hs(ms.sharp(m0), ms);
  double drift = 0.0;
  for (const State& st : traj.states)
    drift = std::max(drift, std::abs(norm_hs(ms.sharp(st.m), ms) - e0) / e0);
  CHECK(drift <= 1e-10);

  // central-difference xi_dot; acceleration should vanish to O(dt^2)
  VelocityPath xs = traj.velocities(ms);
  double worst = 0.0;
  for (int i = 1; i < steps; ++i) {
    VectorField xidot = xs.node(i + 1) - xs.node(i - 1);
    xidot *= 0.5 * steps;
    worst = std::max(worst, acceleration(xs.node(i), xidot, ms).max_abs());
  }
  CHECK(worst <= 2e-4);
  CHECK(worst >= 1e-9);  // the quotient is genuinely O(dt^2), not exact
}

TEST_CASE("flow map consistency: d/dt phi = xi o phi") {
  GridSpec g(1, 64);
  SobolevMetric ms(g, 2.5);
  std::mt19937_64 rng(11);
  Momentum m0 = ms.flat(random_band_limited(g, 2, 0.2, rng));
  int steps = 64;
  Trajectory traj = geodesic_shoot(m0, ms, steps, EvalScheme::spectral);
  double worst = 0.0;
  for (int i = 1; i < steps; ++i) {
    VectorField dphi = traj.states[static_cast<size_t>(i) + 1].phi.displacement() -
                       traj.states[static_cast<size_t>(i) - 1].phi.displacement();
    dphi *= 0.5 * steps;
    VectorField rhs = compose_field(ms.sharp(traj.states[static_cast<size_t>(i)].m),
                                    traj.states[static_cast<size_t>(i)].phi,
                                    EvalScheme::spectral);
    rhs -= dphi;
    worst = std::max(worst, rhs.max_abs());
  }
  CHECK(worst <= 5e-4);  // central-difference floor, O(dt^2)
}

TEST_CASE("ad_star_pullback closed forms") {
  GridSpec g(1, 64);
  std::mt19937_64 rng(13);
  Momentum m = retag<MomentumTag>(random_band_limited(g, 3, 1.0, rng));

  // identity leaves momenta alone
  Momentum same = ad_star_pullback(Diffeo::identity(g), m, EvalScheme::spectral);
  CHECK(testutil::max_abs_diff(same, m) <= 1e-12);

  // translations: Dg = I, |Dg| = 1, so the pullback is a pure shift
  VectorField disp(g);
  for (auto& v : disp.raw()) v = 1.17;
  Momentum shifted = ad_star_pullback(Diffeo(disp), m, EvalScheme::spectral);
  Momentum expected = compose_field(m, Diffeo(disp), EvalScheme::spectral);
  CHECK(testutil::max_abs_diff(shifted, expected) <= 1e-12);
}

TEST_CASE("transport residual vanishes on conserved rollouts") {
  GridSpec g(1, 64);
  SobolevMetric ms(g, 2.5);
  std::mt19937_64 rng(17);
  Momentum m0 = ms.flat(random_band_limited(g, 2, 0.2, rng));
  ControlPath zero(g, 64);
  Trajectory traj = forced_rollout({Diffeo::identity(g), m0}, zero, ms,
                                   EvalScheme::spectral);
  CHECK(transport_residual(traj, zero, ms, EvalScheme::spectral) <= 1e-6);
}

TEST_CASE("transport residual decays at second order on forced rollouts") {
  GridSpec g(1, 64);
  SobolevMetric ms(g, 2.5);
  std::mt19937_64 rng(19);
  Momentum m0 = ms.flat(random_band_limited(g, 2, 0.1, rng));
  double r64, r128;
  {
    ControlPath c = smooth_control(g, 64, 21, 0.05);
    Trajectory t = forced_rollout({Diffeo::identity(g), m0}, c, ms);
    r64 = transport_residual(t, c, ms, EvalScheme::spectral);
  }
  {
    ControlPath c = smooth_control(g, 128, 21, 0.05);
    Trajectory t = forced_rollout({Diffeo::identity(g), m0}, c, ms);
    r128 = transport_residual(t, c, ms, EvalScheme::spectral);
  }
  CHECK(r64 <= 1e-4);
  CHECK(r64 / r128 >= 3.0);  // trapezoid-dominated: ratio ~4
  CHECK(r64 / r128 <= 6.0);
}

TEST_CASE("gronwall monitor: identity gap and a-priori bound") {
  GridSpec g(1, 64);
  SobolevMetric ms(g, 2.5);
  std::mt19937_64 rng(23);
  Momentum m0 = ms.flat(random_band_limited(g, 2, 0.1, rng));
  int steps = 128;
  ControlPath c = smooth_control(g, steps, 29, 0.05);
  Trajectory traj = forced_rollout({Diffeo::identity(g), m0}, c, ms);
  GronwallReport rep = gronwall_monitor(traj, c, ms);
  CHECK(rep.max_identity_gap <= 1e-4);
  CHECK(rep.all_bounds_ok);
  CHECK(rep.energy.size() == static_cast<size_t>(steps) + 1);
  // a zero-control geodesic has constant energy and zero pairing
  ControlPath zero(g, steps);
  Trajectory geo = forced_rollout({Diffeo::identity(g), m0}, zero, ms);
  GronwallReport grep = gronwall_monitor(geo, zero, ms);
  CHECK(grep.max_identity_gap <= 1e-8);
  for (double p : grep.control_pairing) CHECK(std::abs(p) <= 1e-12);
}

TEST_CASE("rollouts detect blow-up or degeneracy under absurd forcing") {
  GridSpec g(1, 32);
  SobolevMetric ms(g, 2.5);
  ControlPath c(g, 16);
  for (int i = 0; i <= 16; ++i)
    c.node(i) += VectorField::from_function(
        g, [](int, double x, double) { return -80.0 * std::sin(x); });
  bool threw = false;
  try {
    forced_rollout({Diffeo::identity(g), Momentum(g)}, c, ms);
  } catch (const DegenerateMapError&) {
    threw = true;
  } catch (const BlowupError&) {
    threw = true;
  }
  CHECK(threw);
}

TEST_CASE("geodesic self-convergence is fourth order") {
  GridSpec g(1, 64);
  SobolevMetric ms(g, 2.5);
  std::mt19937_64 rng(31);
  Momentum m0 = ms.flat(random_band_limited(g, 1, 0.45, rng));
  Trajectory ref = geodesic_shoot(m0, ms, 512, EvalScheme::spectral);
  auto end_err = [&](int steps) {
    Trajectory t = geodesic_shoot(m0, ms, steps, EvalScheme::spectral);
    Momentum d = t.states.back().m;
    d -= ref.states.back().m;
    return std::sqrt(dual_norm_sq(d, 2.5));
  };
  double e32 = end_err(32), e64 = end_err(64);
  CHECK(e32 / e64 >= 12.0);
  CHECK(e32 / e64 <= 22.0);
}

}  // TEST_SUITE
