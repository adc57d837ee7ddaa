#pragma once

// Shared between the rollout integrator and the solver's exact adjoint: both
// must see bitwise-identical stage evaluations for the discrete gradient to
// be the true transpose of the forward map.

#include <vector>

#include "diffspline/dynamics.hpp"
#include "diffspline/interp.hpp"
#include "diffspline/lie_ops.hpp"
#include "diffspline/metric.hpp"

namespace diffspline::rollout {

// State time derivative at one RK4 stage.
//   d_dot = xi(x + d),  m_dot = -coad(xi, m) + flat(alpha),  xi = sharp(m).
struct Rhs {
  VectorField d_dot;
  Momentum m_dot;
};

inline std::vector<double> warp(const GridSpec& g, const VectorField& d) {
  int N = g.num_nodes();
  std::vector<double> coords(static_cast<size_t>(g.dim) * N);
  for (int a = 0; a < g.dim; ++a)
    for (int i = 0; i < N; ++i) coords[a * N + i] = g.node(i)[a] + d.component(a)[i];
  return coords;
}

inline Rhs rhs(const VectorField& d, const Momentum& m, const VectorField* alpha,
               const SobolevMetric& metric, EvalScheme scheme) {
  const GridSpec& g = metric.grid();
  VectorField xi = metric.sharp(m);
  Rhs out{eval_field_at(xi, warp(g, d), scheme), coad(xi, m)};
  out.m_dot *= -1.0;
  if (alpha) out.m_dot += metric.flat(*alpha);
  return out;
}

// Cotangents in the average-normalized L2 pairing: the cotangent of a
// displacement is momentum-like, the cotangent of a momentum velocity-like.
struct Cotangent {
  Momentum d_bar;
  VectorField m_bar;
};

// Transpose of rhs at the linearization point (d, m): given stage cotangents
// (p_d, p_m) of (d_dot, m_dot), accumulate cotangents of d, m, alpha.
//   xi_bar  = eval^T(p_d) - coad_first_adjoint(m, p_m)
//   m_bar   = -ad(xi, p_m) + sharp(xi_bar)
//   d_bar_a = sum_c (grad spline xi)_{c,a} p_d_c      (pointwise)
//   alpha_bar = flat(p_m)
// Cubic scheme only: the adjoint pairs with the B-spline evaluation.
inline void rhs_adjoint(const VectorField& d, const Momentum& m,
                        const SobolevMetric& metric, const Momentum& p_d,
                        const VectorField& p_m, Cotangent& acc, Momentum* alpha_bar) {
  const GridSpec& g = metric.grid();
  int N = g.num_nodes();
  int dim = g.dim;
  VectorField xi = metric.sharp(m);
  std::vector<double> coords = warp(g, d);

  CubicSplineInterpolant spline(xi);
  std::vector<double> values(static_cast<size_t>(dim) * N);
  std::vector<double> grads(static_cast<size_t>(dim) * dim * N);
  spline.eval_gradient(coords, values, grads);
  for (int a = 0; a < dim; ++a)
    for (int i = 0; i < N; ++i) {
      double s = 0.0;
      for (int c = 0; c < dim; ++c)
        s += grads[(c * dim + a) * static_cast<size_t>(N) + i] * p_d.component(c)[i];
      acc.d_bar.component(a)[i] += s;
    }

  Momentum xi_bar(g, CubicSplineInterpolant::eval_adjoint(g, dim, coords, p_d.raw()));
  xi_bar -= coad_first_adjoint(m, p_m);

  acc.m_bar -= ad(xi, p_m);
  acc.m_bar += metric.sharp(xi_bar);

  if (alpha_bar) *alpha_bar += apply_bessel_power(retag<MomentumTag>(p_m), metric.order());
}

// One classical RK4 step of length h (stage controls a0, a_mid, a1; null for
// unforced dynamics). Returns the new (d, m).
inline void rk4_step(VectorField& d, Momentum& m, const VectorField* a0,
                     const VectorField* a_mid, const VectorField* a1, double h,
                     const SobolevMetric& metric, EvalScheme scheme) {
  Rhs k1 = rhs(d, m, a0, metric, scheme);
  VectorField d2 = d;
  d2.axpy(h / 2, k1.d_dot);
  Momentum m2 = m;
  m2.axpy(h / 2, k1.m_dot);
  Rhs k2 = rhs(d2, m2, a_mid, metric, scheme);
  VectorField d3 = d;
  d3.axpy(h / 2, k2.d_dot);
  Momentum m3 = m;
  m3.axpy(h / 2, k2.m_dot);
  Rhs k3 = rhs(d3, m3, a_mid, metric, scheme);
  VectorField d4 = d;
  d4.axpy(h, k3.d_dot);
  Momentum m4 = m;
  m4.axpy(h, k3.m_dot);
  Rhs k4 = rhs(d4, m4, a1, metric, scheme);
  d.axpy(h / 6, k1.d_dot);
  d.axpy(h / 3, k2.d_dot);
  d.axpy(h / 3, k3.d_dot);
  d.axpy(h / 6, k4.d_dot);
  m.axpy(h / 6, k1.m_dot);
  m.axpy(h / 3, k2.m_dot);
  m.axpy(h / 3, k3.m_dot);
  m.axpy(h / 6, k4.m_dot);
}

// Transpose of rk4_step through the recomputed stages. (d, m) is the step's
// input state; (p_d, p_m) enters as the cotangent of the step output and
// leaves as the cotangent of the input; stage-control cotangents accumulate
// into a_bar0 / a_bar_mid / a_bar1.
inline void rk4_step_adjoint(const VectorField& d, const Momentum& m,
                             const VectorField* a0, const VectorField* a_mid,
                             const VectorField* a1, double h,
                             const SobolevMetric& metric, Momentum& p_d,
                             VectorField& p_m, Momentum* a_bar0, Momentum* a_bar_mid,
                             Momentum* a_bar1) {
  // a1 itself is never sampled: k4's value is not part of any stage state,
  // so only its linearization point (d4, m4) matters here.
  (void)a1;
  const GridSpec& g = metric.grid();
  Rhs k1 = rhs(d, m, a0, metric, EvalScheme::cubic);
  VectorField d2 = d;
  d2.axpy(h / 2, k1.d_dot);
  Momentum m2 = m;
  m2.axpy(h / 2, k1.m_dot);
  Rhs k2 = rhs(d2, m2, a_mid, metric, EvalScheme::cubic);
  VectorField d3 = d;
  d3.axpy(h / 2, k2.d_dot);
  Momentum m3 = m;
  m3.axpy(h / 2, k2.m_dot);
  Rhs k3 = rhs(d3, m3, a_mid, metric, EvalScheme::cubic);
  VectorField d4 = d;
  d4.axpy(h, k3.d_dot);
  Momentum m4 = m;
  m4.axpy(h, k3.m_dot);

  auto stage_cot = [&](double c_out, const Cotangent* z_next, double c_z) {
    Cotangent k_bar{Momentum(g), VectorField(g)};
    k_bar.d_bar.axpy(c_out, p_d);
    k_bar.m_bar.axpy(c_out, p_m);
    if (z_next) {
      k_bar.d_bar.axpy(c_z, z_next->d_bar);
      k_bar.m_bar.axpy(c_z, z_next->m_bar);
    }
    return k_bar;
  };

  Cotangent z4{Momentum(g), VectorField(g)};
  {
    Cotangent k4_bar = stage_cot(h / 6, nullptr, 0.0);
    rhs_adjoint(d4, m4, metric, k4_bar.d_bar, k4_bar.m_bar, z4, a_bar1);
  }
  Cotangent z3{Momentum(g), VectorField(g)};
  {
    Cotangent k3_bar = stage_cot(h / 3, &z4, h);
    rhs_adjoint(d3, m3, metric, k3_bar.d_bar, k3_bar.m_bar, z3, a_bar_mid);
  }
  Cotangent z2{Momentum(g), VectorField(g)};
  {
    Cotangent k2_bar = stage_cot(h / 3, &z3, h / 2);
    rhs_adjoint(d2, m2, metric, k2_bar.d_bar, k2_bar.m_bar, z2, a_bar_mid);
  }
  Cotangent z1{Momentum(g), VectorField(g)};
  {
    Cotangent k1_bar = stage_cot(h / 6, &z2, h / 2);
    rhs_adjoint(d, m, metric, k1_bar.d_bar, k1_bar.m_bar, z1, a_bar0);
  }
  p_d += z1.d_bar;
  p_d += z2.d_bar;
  p_d += z3.d_bar;
  p_d += z4.d_bar;
  p_m += z1.m_bar;
  p_m += z2.m_bar;
  p_m += z3.m_bar;
  p_m += z4.m_bar;
}

}  // namespace diffspline::rollout
