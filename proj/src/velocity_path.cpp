#include "diffspline/velocity_path.hpp"

#include <cmath>
#include <string>

#include "diffspline/errors.hpp"

namespace diffspline {

namespace detail {

TimeSampledField::TimeSampledField(const GridSpec& grid, int steps) {
  if (steps < 4)
    throw ValidationError("time discretization needs at least 4 steps, got " +
                          std::to_string(steps));
  nodes_.assign(steps + 1, VectorField::zero(grid));
}

TimeSampledField::TimeSampledField(std::vector<VectorField> nodes)
    : nodes_(std::move(nodes)) {
  if (nodes_.size() < 5)
    throw ValidationError("time discretization needs at least 4 steps");
  for (const auto& f : nodes_)
    require_same_grid(f.grid(), nodes_.front().grid(), "time-sampled field");
}

VectorField TimeSampledField::at_time(double t) const {
  int M = steps();
  double s = std::min(std::max(t, 0.0), 1.0) * M;
  int i = std::min(static_cast<int>(std::floor(s)), M - 1);
  double w = s - i;
  if (w == 0.0) return nodes_[i];
  VectorField out = nodes_[i];
  out *= 1.0 - w;
  out.axpy(w, nodes_[i + 1]);
  return out;
}

}  // namespace detail

namespace {

// One RK4 step for node trajectories dy/dt = xi(t, x + y), with the three
// stage fields supplied (start, midpoint, end); h may be negative.
void rk4_displacement_step(const GridSpec& g, const VectorField& xi0,
                           const VectorField& xi_mid, const VectorField& xi1,
                           double h, VectorField& y, EvalScheme scheme) {
  int N = g.num_nodes();
  std::vector<double> coords(static_cast<size_t>(g.dim) * N);
  auto fill_coords = [&](const VectorField& base, const VectorField* k, double c) {
    for (int a = 0; a < g.dim; ++a)
      for (int i = 0; i < N; ++i) {
        double v = g.node(i)[a] + base.component(a)[i];
        if (k) v += c * k->component(a)[i];
        coords[a * N + i] = v;
      }
  };
  fill_coords(y, nullptr, 0.0);
  VectorField k1 = eval_field_at(xi0, coords, scheme);
  fill_coords(y, &k1, h / 2);
  VectorField k2 = eval_field_at(xi_mid, coords, scheme);
  fill_coords(y, &k2, h / 2);
  VectorField k3 = eval_field_at(xi_mid, coords, scheme);
  fill_coords(y, &k3, h);
  VectorField k4 = eval_field_at(xi1, coords, scheme);
  y.axpy(h / 6, k1);
  y.axpy(h / 3, k2);
  y.axpy(h / 3, k3);
  y.axpy(h / 6, k4);
}

}  // namespace

Diffeo flow(const VelocityPath& path, double t0, double t1, EvalScheme scheme) {
  if (t0 < 0.0 || t0 > 1.0 || t1 < 0.0 || t1 > 1.0)
    throw ValidationError("flow endpoints must lie in [0, 1]");
  const GridSpec& g = path.grid();
  VectorField y = VectorField::zero(g);
  if (t0 == t1) return Diffeo(std::move(y));

  int M = path.steps();
  double dir = t1 > t0 ? 1.0 : -1.0;
  double s = t0 * M;  // time in units of dt; segment boundaries at integers
  double s_end = t1 * M;
  const double eps = 1e-12 * M;
  while (dir * (s_end - s) > eps) {
    double boundary = dir > 0 ? std::floor(s + 1.0 + eps) : std::ceil(s - 1.0 - eps);
    double s_next = dir > 0 ? std::min(boundary, s_end) : std::max(boundary, s_end);
    double ta = s / M, tb = s_next / M;
    VectorField xi0 = path.at_time(ta);
    VectorField xim = path.at_time(0.5 * (ta + tb));
    VectorField xi1 = path.at_time(tb);
    rk4_displacement_step(g, xi0, xim, xi1, tb - ta, y, scheme);
    if (!y.finite()) throw BlowupError("flow: non-finite displacement",
                                       static_cast<int>(std::lround(s_next)));
    require_nondegenerate(Diffeo(y), "flow");
    s = s_next;
  }
  return Diffeo(std::move(y));
}

double path_energy(const VelocityPath& path, const SobolevMetric& metric) {
  require_same_grid(path.grid(), metric.grid(), "path_energy");
  int M = path.steps();
  double acc = 0.0;
  for (int i = 0; i <= M; ++i) {
    double w = (i == 0 || i == M) ? 0.5 : 1.0;
    acc += w * inner_hs(path.node(i), path.node(i), metric);
  }
  return acc / M;
}

}  // namespace diffspline
