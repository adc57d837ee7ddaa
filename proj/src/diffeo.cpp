#include "diffspline/diffeo.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "diffspline/errors.hpp"
#include "diffspline/lie_ops.hpp"

namespace diffspline {

Diffeo::Diffeo(VectorField displacement) : displacement_(std::move(displacement)) {
  if (displacement_.empty())
    throw ValidationError("diffeo needs a displacement field");
  if (!displacement_.finite())
    throw ValidationError("diffeo displacement has non-finite entries");
}

Diffeo Diffeo::identity(const GridSpec& grid) {
  return Diffeo(VectorField::zero(grid));
}

std::vector<double> Diffeo::warp_coords() const {
  const GridSpec& g = grid();
  int N = g.num_nodes();
  std::vector<double> coords(static_cast<size_t>(g.dim) * N);
  const auto& d = displacement_.raw();
  for (int a = 0; a < g.dim; ++a)
    for (int i = 0; i < N; ++i) coords[a * N + i] = g.node(i)[a] + d[a * N + i];
  return coords;
}

ScalarField jacobian(const Diffeo& phi) {
  const GridSpec& g = phi.grid();
  auto dd = field_derivatives(phi.displacement());
  ScalarField det{g, std::vector<double>(g.num_nodes())};
  if (g.dim == 1) {
    for (int i = 0; i < g.num_nodes(); ++i) det.values[i] = 1.0 + dd[0][0][i];
  } else {
    for (int i = 0; i < g.num_nodes(); ++i)
      det.values[i] = (1.0 + dd[0][0][i]) * (1.0 + dd[1][1][i]) -
                      dd[0][1][i] * dd[1][0][i];
  }
  return det;
}

double min_jacobian(const Diffeo& phi) { return jacobian(phi).min(); }

void require_nondegenerate(const Diffeo& phi, const char* where) {
  double mj = min_jacobian(phi);
  if (!(mj > kJacobianFloor))
    throw DegenerateMapError(std::string(where) + ": Jacobian determinant " +
                             std::to_string(mj) + " at or below floor " +
                             std::to_string(kJacobianFloor));
}

template <class Tag>
BasicField<Tag> compose_field(const BasicField<Tag>& f, const Diffeo& phi,
                              EvalScheme scheme) {
  require_same_grid(f.grid(), phi.grid(), "compose_field");
  return eval_field_at(f, phi.warp_coords(), scheme);
}

template VectorField compose_field<VelocityTag>(const VectorField&, const Diffeo&,
                                                EvalScheme);
template Momentum compose_field<MomentumTag>(const Momentum&, const Diffeo&,
                                             EvalScheme);

Diffeo compose(const Diffeo& outer, const Diffeo& inner, EvalScheme scheme) {
  require_same_grid(outer.grid(), inner.grid(), "compose");
  VectorField d = compose_field(outer.displacement(), inner, scheme);
  d += inner.displacement();
  Diffeo result{std::move(d)};
  require_nondegenerate(result, "compose");
  return result;
}

Diffeo inverse(const Diffeo& phi, EvalScheme scheme, double tol, int max_iterations) {
  require_nondegenerate(phi, "inverse");
  const GridSpec& g = phi.grid();
  int N = g.num_nodes();
  const VectorField& d = phi.displacement();
  CubicSplineInterpolant spline(d);

  VectorField e = -1.0 * d;
  std::vector<double> coords(static_cast<size_t>(g.dim) * N);
  VectorField sampled(g);
  double residual = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    for (int a = 0; a < g.dim; ++a)
      for (int i = 0; i < N; ++i)
        coords[a * N + i] = g.node(i)[a] + e.component(a)[i];
    if (scheme == EvalScheme::cubic)
      spline.eval(coords, sampled.raw());
    else
      spectral_eval(g, g.dim, d.raw(), coords, sampled.raw());
    residual = 0.0;
    for (int a = 0; a < g.dim; ++a)
      for (int i = 0; i < N; ++i) {
        double next = -sampled.component(a)[i];
        residual = std::max(residual, std::abs(next - e.component(a)[i]));
        e.component(a)[i] = next;
      }
    if (residual <= tol) return Diffeo(std::move(e));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "inverse: fixed point stalled at residual %.3e after %d iterations",
                residual, max_iterations);
  throw InversionFailureError(buf, residual);
}

}  // namespace diffspline
