#pragma once

#include <vector>

#include "diffspline/field.hpp"
#include "diffspline/interp.hpp"

namespace diffspline {

// Jacobian determinants at or below this floor count as degenerate.
inline constexpr double kJacobianFloor = 0.02;

// Diffeomorphism of the torus in the identity component, stored as
// phi(x) = x + d(x) with a periodic displacement d. The displacement is kept
// unwrapped; only evaluation points are reduced mod 2*pi, so paths that wind
// around the torus stay representable.
class Diffeo {
 public:
  Diffeo() = default;
  explicit Diffeo(VectorField displacement);
  static Diffeo identity(const GridSpec& grid);

  const GridSpec& grid() const { return displacement_.grid(); }
  const VectorField& displacement() const { return displacement_; }

  // Absolute coordinates x + d(x) at every node, axis-major.
  std::vector<double> warp_coords() const;

 private:
  VectorField displacement_;
};

// det D(phi) at the nodes, via spectral derivatives of the displacement.
ScalarField jacobian(const Diffeo& phi);
double min_jacobian(const Diffeo& phi);

// Throws DegenerateMapError when min det D(phi) <= kJacobianFloor.
void require_nondegenerate(const Diffeo& phi, const char* where);

// Pullback f o phi by sampling f at the warped nodes.
template <class Tag>
BasicField<Tag> compose_field(const BasicField<Tag>& f, const Diffeo& phi,
                              EvalScheme scheme = EvalScheme::cubic);

// outer o inner; the result is checked for degeneracy.
Diffeo compose(const Diffeo& outer, const Diffeo& inner,
               EvalScheme scheme = EvalScheme::cubic);

// Fixed-point inversion of phi = Id + d: e <- -d o (Id + e), starting from
// e = -d. Converges whenever the displacement is a contraction; throws
// InversionFailureError with the last residual otherwise.
Diffeo inverse(const Diffeo& phi, EvalScheme scheme = EvalScheme::cubic,
               double tol = 1e-10, int max_iterations = 50);

}  // namespace diffspline
