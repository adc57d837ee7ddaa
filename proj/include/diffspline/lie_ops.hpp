#pragma once

#include <array>
#include <vector>

#include "diffspline/field.hpp"
#include "diffspline/metric.hpp"

namespace diffspline {

// Lie-algebra operators on vector fields over the torus. Derivatives are
// spectral; every quadratic product is dealiased by the 2/3 rule on both the
// inputs and the result, so the discrete L2 dualities below hold to round-off
// for band-limited data (3 * floor(n/3) < n when n is a power of two).

// ad(xi, eta) = Dxi . eta - Deta . xi
VectorField ad(const VectorField& xi, const VectorField& eta);

// coad(xi, m) = (Dxi)^T m + (Dm) xi + m div xi, the L2 dual of ad:
// <coad(xi, m), eta>_{L2} = <m, ad(xi, eta)>_{L2}.
Momentum coad(const VectorField& xi, const Momentum& m);

// Metric transpose of ad in its first slot: sharp(coad(nu, flat(kappa))).
VectorField ad_dagger(const VectorField& nu, const VectorField& kappa,
                      const SobolevMetric& metric);

// div xi, spectral.
ScalarField divergence(const VectorField& xi);

// L2 adjoint of the first slot of coad: for fixed m, the map p |-> result
// satisfies <coad(xi, m), p>_{L2} = <xi, coad_first_adjoint(m, p)>_{L2}.
// Closed form: -(div p) m - (Dm) p + (Dm)^T p - grad(p . m).
Momentum coad_first_adjoint(const Momentum& m, const VectorField& p);

// Nodal partial derivatives of every component, jac[c][a] = d f_c / d x_a.
// Linear, so no dealias filter is applied here.
template <class Tag>
std::vector<std::array<std::vector<double>, 2>> field_derivatives(
    const BasicField<Tag>& f);

}  // namespace diffspline
