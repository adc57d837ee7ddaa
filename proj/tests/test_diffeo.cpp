#include <cmath>
#include <random>
#include <vector>

#include "diffspline/diffeo.hpp"
#include "diffspline/errors.hpp"
#include "diffspline/field.hpp"
#include "diffspline/grid.hpp"
#include "diffspline/interp.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace diffspline;

namespace {

// Random off-grid sample points, axis-major.
std::vector<double> random_points(const GridSpec& g, int npts, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-kTwoPi, 2.0 * kTwoPi);  // wraps
  std::vector<double> pts(static_cast<size_t>(g.dim) * npts);
  for (auto& p : pts) p = u(rng);
  return pts;
}

Diffeo shear_1d(const GridSpec& g, double amp) {
  return Diffeo(VectorField::from_function(
      g, [amp](int, double x, double) { return amp * std::sin(x); }));
}

}  // namespace

TEST_SUITE("diffeo") {

TEST_CASE("cubic spline reproduces nodal values and constants") {
  GridSpec g(2, 16);
  std::mt19937_64 rng(7);
  VectorField f = random_band_limited(g, 4, 1.0, rng);
  CubicSplineInterpolant s(f);

  // exact at the nodes
  std::vector<double> nodes(static_cast<size_t>(g.dim) * g.num_nodes());
  for (int a = 0; a < g.dim; ++a)
    for (int i = 0; i < g.num_nodes(); ++i)
      nodes[static_cast<size_t>(a) * g.num_nodes() + i] = g.node(i)[a];
  std::vector<double> out(f.raw().size());
  s.eval(nodes, out);
  double worst = 0.0;
  for (size_t i = 0; i < out.size(); ++i)
    worst = std::max(worst, std::abs(out[i] - f.raw()[i]));
  CHECK(worst <= 1e-12);

  // constants are reproduced exactly anywhere
  VectorField c(g);
  for (auto& v : c.raw()) v = 0.37;
  CubicSplineInterpolant sc(c);
  auto pts = random_points(g, 64, 19);
  std::vector<double> cv(static_cast<size_t>(g.dim) * 64);
  sc.eval(pts, cv);
  for (double v : cv) CHECK(v == doctest::Approx(0.37).epsilon(1e-13));
}

TEST_CASE("cubic spline converges at fourth order") {
  // Interpolation error of sin(2x) sampled off the nodes should drop ~16x
  // when the grid is refined 2x.
  auto err_at = [](int n) {
    GridSpec g(1, n);
    VectorField f = VectorField::from_function(
        g, [](int, double x, double) { return std::sin(2.0 * x); });
    CubicSplineInterpolant s(f);
    int npts = 101;
    std::vector<double> pts(npts), out(npts);
    for (int i = 0; i < npts; ++i) pts[i] = (i + 0.321) * kTwoPi / npts;
    s.eval(pts, out);
    double worst = 0.0;
    for (int i = 0; i < npts; ++i)
      worst = std::max(worst, std::abs(out[i] - std::sin(2.0 * pts[i])));
    return worst;
  };
  double e32 = err_at(32), e64 = err_at(64);
  CHECK(e32 / e64 >= 12.0);
  CHECK(e32 / e64 <= 20.0);
}

TEST_CASE("cubic gradient matches finite differences of the spline") {
  GridSpec g(2, 16);
  std::mt19937_64 rng(23);
  VectorField f = random_band_limited(g, 3, 1.0, rng);
  CubicSplineInterpolant s(f);
  int npts = 20;
  auto pts = random_points(g, npts, 31);
  std::vector<double> val(static_cast<size_t>(g.dim) * npts);
  std::vector<double> grad(static_cast<size_t>(g.dim) * g.dim * npts);
  s.eval_gradient(pts, val, grad);

  double h = 1e-6;
  for (int a = 0; a < g.dim; ++a) {
    auto plus = pts, minus = pts;
    for (int i = 0; i < npts; ++i) {
      plus[static_cast<size_t>(a) * npts + i] += h;
      minus[static_cast<size_t>(a) * npts + i] -= h;
    }
    std::vector<double> vp(val.size()), vm(val.size());
    s.eval(plus, vp);
    s.eval(minus, vm);
    for (int c = 0; c < g.dim; ++c)
      for (int i = 0; i < npts; ++i) {
        double fd = (vp[static_cast<size_t>(c) * npts + i] -
                     vm[static_cast<size_t>(c) * npts + i]) /
                    (2.0 * h);
        double an = grad[(static_cast<size_t>(c) * g.dim + a) * npts + i];
        CHECK(an == doctest::Approx(fd).epsilon(1e-5));
      }
  }
}

TEST_CASE("eval_adjoint is the exact transpose of eval") {
  // <S f, w>_points == <f, S^T w>_nodes for arbitrary vectors, including the
  // prefilter. Plain dot products on both sides.
  for (GridSpec g : {GridSpec(1, 16), GridSpec(2, 8)}) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorField f(g);
    for (auto& v : f.raw()) v = u(rng);
    int npts = 33;
    auto pts = random_points(g, npts, 43);
    std::vector<double> w(static_cast<size_t>(g.dim) * npts);
    for (auto& v : w) v = u(rng);

    CubicSplineInterpolant s(f);
    std::vector<double> sf(w.size());
    s.eval(pts, sf);
    double lhs = 0.0;
    for (size_t i = 0; i < w.size(); ++i) lhs += sf[i] * w[i];

    auto st = CubicSplineInterpolant::eval_adjoint(g, g.dim, pts, w);
    double rhs = 0.0;
    for (size_t i = 0; i < st.size(); ++i) rhs += f.raw()[i] * st[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("spectral evaluation is exact for band-limited fields") {
  GridSpec g(2, 16);
  VectorField f = VectorField::from_function(g, [](int c, double x, double y) {
    return c == 0 ? std::sin(3.0 * x) * std::cos(2.0 * y) : std::cos(x + y);
  });
  int npts = 40;
  auto pts = random_points(g, npts, 53);
  std::vector<double> out(static_cast<size_t>(g.dim) * npts);
  spectral_eval(g, g.dim, f.raw(), pts, out);
  for (int i = 0; i < npts; ++i) {
    double x = pts[static_cast<size_t>(i)], y = pts[static_cast<size_t>(npts + i)];
    CHECK(out[static_cast<size_t>(i)] ==
          doctest::Approx(std::sin(3.0 * x) * std::cos(2.0 * y)).epsilon(1e-12));
    CHECK(out[static_cast<size_t>(npts + i)] ==
          doctest::Approx(std::cos(x + y)).epsilon(1e-12));
  }
}

TEST_CASE("translation diffeos invert and compose exactly") {
  GridSpec g(1, 32);
  double c = 0.83;
  VectorField disp(g);
  for (auto& v : disp.raw()) v = c;
  Diffeo tau(disp);

  Diffeo tinv = inverse(tau);
  for (int i = 0; i < g.num_nodes(); ++i)
    CHECK(tinv.displacement().component(0)[i] == doctest::Approx(-c).epsilon(1e-12));

  Diffeo round = compose(tau, tinv);
  CHECK(round.displacement().max_abs() <= 1e-12);

  // Ad*-style pullback of a field under a translation is a pure shift.
  VectorField f = VectorField::from_function(
      g, [](int, double x, double) { return std::sin(2.0 * x); });
  VectorField shifted = compose_field(f, tau, EvalScheme::spectral);
  for (int i = 0; i < g.num_nodes(); ++i)
    CHECK(shifted.component(0)[i] ==
          doctest::Approx(std::sin(2.0 * (g.node(i)[0] + c))).epsilon(1e-12));
}

TEST_CASE("jacobian of a shear is exact") {
  GridSpec g(1, 64);
  Diffeo phi = shear_1d(g, 0.3);
  ScalarField jac = jacobian(phi);
  for (int i = 0; i < g.num_nodes(); ++i)
    CHECK(jac.values[static_cast<size_t>(i)] ==
          doctest::Approx(1.0 + 0.3 * std::cos(g.node(i)[0])).epsilon(1e-12));
  CHECK(min_jacobian(phi) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("degenerate maps are rejected") {
  GridSpec g(1, 64);
  // 1 + 1.1 cos crosses zero: not a diffeomorphism.
  CHECK_THROWS_AS(require_nondegenerate(shear_1d(g, 1.1), "test"),
                  DegenerateMapError);
  CHECK_THROWS_AS((void)compose(shear_1d(g, 1.1), shear_1d(g, 0.1)),
                  DegenerateMapError);
  CHECK_NOTHROW(require_nondegenerate(shear_1d(g, 0.9), "test"));
  CHECK_THROWS_AS((void)inverse(shear_1d(g, 1.4)), DegenerateMapError);
  // Invertible but so steep that the default iteration budget cannot reach
  // the requested tolerance.
  CHECK_THROWS_AS((void)inverse(shear_1d(g, 0.9)), InversionFailureError);
}

TEST_CASE("inverse reaches round-off on smooth diffeos") {
  for (GridSpec g : {GridSpec(1, 64), GridSpec(2, 32)}) {
    std::mt19937_64 rng(61);
    Diffeo phi(random_band_limited(g, 2, 0.15, rng));
    Diffeo phinv = inverse(phi, EvalScheme::spectral, 1e-12, 200);
    // phi o phinv recomputes the converged fixed point: tolerance-limited.
    Diffeo round = compose(phi, phinv, EvalScheme::spectral);
    CHECK(round.displacement().max_abs() <= 1e-9);
    // phinv o phi instead samples phinv off the grid; the inverse
    // displacement is not band-limited, so its trigonometric interpolant is
    // only accurate to the spectral tail it drops.
    Diffeo round2 = compose(phinv, phi, EvalScheme::spectral);
    CHECK(round2.displacement().max_abs() <= 1e-6);
  }
}

TEST_CASE("compose_field against the analytic composition") {
  GridSpec g(1, 64);
  Diffeo phi = shear_1d(g, 0.3);
  VectorField f = VectorField::from_function(
      g, [](int, double x, double) { return std::cos(2.0 * x); });
  auto truth = [](double x) { return std::cos(2.0 * (x + 0.3 * std::sin(x))); };

  VectorField spec = compose_field(f, phi, EvalScheme::spectral);
  VectorField cub = compose_field(f, phi, EvalScheme::cubic);
  double worst_spec = 0.0, worst_cub = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    double t = truth(g.node(i)[0]);
    worst_spec = std::max(worst_spec, std::abs(spec.component(0)[i] - t));
    worst_cub = std::max(worst_cub, std::abs(cub.component(0)[i] - t));
  }
  CHECK(worst_spec <= 1e-12);   // f is band-limited: trig sum is exact
  CHECK(worst_cub <= 1e-5);     // cubic carries the O(h^4) interpolation error
  CHECK(worst_cub >= 1e-10);    // and is genuinely the coarser scheme
}

TEST_CASE("warp coordinates wrap nothing and displacement stays unwrapped") {
  GridSpec g(1, 16);
  VectorField disp(g);
  for (auto& v : disp.raw()) v = kTwoPi + 0.1;  // more than a full wind
  Diffeo phi(disp);
  auto coords = phi.warp_coords();
  CHECK(coords[0] == doctest::Approx(kTwoPi + 0.1));
  CHECK(phi.displacement().component(0)[5] == doctest::Approx(kTwoPi + 0.1));
}

}  // TEST_SUITE
