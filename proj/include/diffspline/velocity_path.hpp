#pragma once

#include <vector>

#include "diffspline/diffeo.hpp"
#include "diffspline/field.hpp"
#include "diffspline/metric.hpp"

namespace diffspline {

namespace detail {

// Field samples at M+1 uniform times on [0,1], piecewise linear in between.
class TimeSampledField {
 public:
  TimeSampledField() = default;
  TimeSampledField(const GridSpec& grid, int steps);
  explicit TimeSampledField(std::vector<VectorField> nodes);

  int steps() const { return static_cast<int>(nodes_.size()) - 1; }
  double dt() const { return 1.0 / steps(); }
  const GridSpec& grid() const { return nodes_.front().grid(); }

  VectorField& node(int i) { return nodes_[i]; }
  const VectorField& node(int i) const { return nodes_[i]; }
  std::vector<VectorField>& nodes() { return nodes_; }
  const std::vector<VectorField>& nodes() const { return nodes_; }

  // Piecewise-linear value at t (clamped to [0,1]).
  VectorField at_time(double t) const;

 protected:
  std::vector<VectorField> nodes_;
};

}  // namespace detail

// Time-dependent velocity field: the right-trivialized speed of a path of
// diffeomorphisms.
class VelocityPath : public detail::TimeSampledField {
 public:
  using detail::TimeSampledField::TimeSampledField;
};

// Flow of the velocity path from time t0 to t1 (either direction): the map
// taking a particle's position at t0 to its position at t1. Node positions
// are integrated with classical RK4, one step per time-grid segment; the
// Jacobian positivity floor is checked after every step.
Diffeo flow(const VelocityPath& path, double t0, double t1,
            EvalScheme scheme = EvalScheme::cubic);

// Trapezoid rule for int_0^1 ||xi(t)||^2_{H^s} dt.
double path_energy(const VelocityPath& path, const SobolevMetric& metric);

}  // namespace diffspline
