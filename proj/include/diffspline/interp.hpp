#pragma once

#include <span>
#include <string>
#include <vector>

#include "diffspline/field.hpp"
#include "diffspline/grid.hpp"

namespace diffspline {

// How compositions f(x + d(x)) sample a field between nodes.
//   cubic:    periodic cubic B-spline, O(h^4), exact at nodes and on constants.
//   spectral: trigonometric summation of the DFT, exact for band-limited data.
enum class EvalScheme { cubic, spectral };

EvalScheme parse_eval_scheme(const std::string& name);
std::string to_string(EvalScheme scheme);

// Periodic cubic B-spline interpolant of all components of a nodal field.
// Construction prefilters the nodal values into B-spline coefficients by
// dividing the DFT by the spline symbol prod_a (2 + cos(k_a h)) / 3.
//
// Point layout everywhere: `coords` holds absolute torus coordinates,
// axis-major (axis a occupies [a*npts, (a+1)*npts)); any real value is
// accepted and wrapped periodically.
class CubicSplineInterpolant {
 public:
  CubicSplineInterpolant(const GridSpec& grid, int comps,
                         const std::vector<double>& nodal);

  template <class Tag>
  explicit CubicSplineInterpolant(const BasicField<Tag>& f)
      : CubicSplineInterpolant(f.grid(), f.components(), f.raw()) {}

  const GridSpec& grid() const { return grid_; }
  int components() const { return comps_; }

  // out[c*npts + i] = S_c(point i)
  void eval(std::span<const double> coords, std::span<double> out) const;

  // Additionally grads[(c*grid.dim + a)*npts + i] = d S_c / d x_a at point i.
  void eval_gradient(std::span<const double> coords, std::span<double> values,
                     std::span<double> grads) const;

  // Exact transpose of (nodal values -> point values) applied to a point
  // cotangent: scatter through the same B-spline weights, then the prefilter
  // (self-adjoint: real even symbol). Independent of any instance state.
  static std::vector<double> eval_adjoint(const GridSpec& grid, int comps,
                                          std::span<const double> coords,
                                          std::span<const double> point_cotangent);

 private:
  GridSpec grid_{};
  int comps_ = 0;
  std::vector<std::vector<double>> coef_;
};

// Trigonometric evaluation of the field's DFT interpolant at arbitrary
// points; exact (to round-off) wherever the field is band-limited. Modes
// below 1e-15 of the spectral peak are skipped.
void spectral_eval(const GridSpec& grid, int comps, const std::vector<double>& nodal,
                   std::span<const double> coords, std::span<double> out);

// Scheme-dispatching convenience used by the composition operators.
template <class Tag>
BasicField<Tag> eval_field_at(const BasicField<Tag>& f, std::span<const double> coords,
                              EvalScheme scheme) {
  BasicField<Tag> out(f.grid());
  if (scheme == EvalScheme::cubic) {
    CubicSplineInterpolant s(f);
    s.eval(coords, out.raw());
  } else {
    spectral_eval(f.grid(), f.components(), f.raw(), coords, out.raw());
  }
  return out;
}

}  // namespace diffspline
