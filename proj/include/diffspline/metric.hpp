#pragma once

#include <vector>

#include "diffspline/field.hpp"
#include "diffspline/grid.hpp"

namespace diffspline {

// Right-invariant Sobolev H^s structure on vector fields over the torus,
// realized as the diagonal Fourier multiplier lambda(k) = (1 + |k|^2)^s acting
// identically on each component. flat/sharp are the musical isomorphisms
// between velocities and momenta with respect to the average-normalized L2
// pairing, so <u, w>_{H^s} = <flat(u), w>_{L2}.
class SobolevMetric {
 public:
  SobolevMetric(const GridSpec& grid, double order);

  const GridSpec& grid() const { return grid_; }
  double order() const { return order_; }
  const std::vector<double>& multiplier() const { return lambda_; }

  Momentum flat(const VectorField& u) const;
  VectorField sharp(const Momentum& m) const;

 private:
  GridSpec grid_{};
  double order_ = 0.0;
  std::vector<double> lambda_;
};

double inner_hs(const VectorField& u, const VectorField& w, const SobolevMetric& metric);
double norm_hs(const VectorField& u, const SobolevMetric& metric);

// Squared dual Sobolev norm sum_k (1 + |k|^2)^{-order} |m_hat(k)|^2 (summed
// over components).
double dual_norm_sq(const Momentum& m, double order);

// Apply the diagonal multiplier (1 + |k|^2)^order to each component without
// changing the tag. Shared workhorse behind flat/sharp and the solver's
// metric changes.
template <class Tag>
BasicField<Tag> apply_bessel_power(const BasicField<Tag>& f, double order);

}  // namespace diffspline
