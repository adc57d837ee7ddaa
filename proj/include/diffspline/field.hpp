#pragma once

#include <cmath>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "diffspline/errors.hpp"
#include "diffspline/fft.hpp"
#include "diffspline/grid.hpp"

namespace diffspline {

// Nodal data shared by velocities and momenta: `dim` real components stored
// component-major (component c occupies [c*N, (c+1)*N) in row-major node
// order). The tag keeps tangent vectors and covectors apart at the type level;
// they pair only through the average-normalized L2 product or a metric.
template <class Tag>
class BasicField {
 public:
  BasicField() = default;

  explicit BasicField(const GridSpec& grid)
      : grid_(grid), values_(static_cast<size_t>(grid.dim) * grid.num_nodes(), 0.0) {}

  BasicField(const GridSpec& grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != static_cast<size_t>(grid_.dim) * grid_.num_nodes())
      throw ValidationError("field payload size does not match grid");
  }

  static BasicField zero(const GridSpec& grid) { return BasicField(grid); }

  // fn(component, x1, x2) -> value, evaluated at every node.
  template <class Fn>
  static BasicField from_function(const GridSpec& grid, Fn&& fn) {
    BasicField f(grid);
    int N = grid.num_nodes();
    for (int c = 0; c < grid.dim; ++c)
      for (int i = 0; i < N; ++i) {
        auto x = grid.node(i);
        f.values_[c * N + i] = fn(c, x[0], x[1]);
      }
    return f;
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return grid_.dim; }
  int num_nodes() const { return grid_.num_nodes(); }
  bool empty() const { return values_.empty(); }

  std::span<double> component(int c) {
    return {values_.data() + static_cast<size_t>(c) * grid_.num_nodes(),
            static_cast<size_t>(grid_.num_nodes())};
  }
  std::span<const double> component(int c) const {
    return {values_.data() + static_cast<size_t>(c) * grid_.num_nodes(),
            static_cast<size_t>(grid_.num_nodes())};
  }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  BasicField& operator+=(const BasicField& o) {
    require_same_grid(grid_, o.grid_, "field +=");
    for (size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  BasicField& operator-=(const BasicField& o) {
    require_same_grid(grid_, o.grid_, "field -=");
    for (size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  BasicField& operator*=(double a) {
    for (auto& v : values_) v *= a;
    return *this;
  }
  friend BasicField operator+(BasicField a, const BasicField& b) { return a += b; }
  friend BasicField operator-(BasicField a, const BasicField& b) { return a -= b; }
  friend BasicField operator*(double a, BasicField f) { return f *= a; }

  // this += a * x
  void axpy(double a, const BasicField& x) {
    require_same_grid(grid_, x.grid_, "field axpy");
    for (size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // One spectrum per component, in the fft.hpp convention.
  std::vector<fft::cvec> spectrum() const {
    std::vector<fft::cvec> s;
    s.reserve(components());
    for (int c = 0; c < components(); ++c)
      s.push_back(fft::forward(grid_, component(c).data()));
    return s;
  }

  static BasicField from_spectrum(const GridSpec& grid,
                                  const std::vector<fft::cvec>& spec) {
    BasicField f(grid);
    for (int c = 0; c < grid.dim; ++c)
      fft::inverse(grid, spec[c], f.component(c).data());
    return f;
  }

 private:
  GridSpec grid_{};
  std::vector<double> values_;
};

struct VelocityTag {};
struct MomentumTag {};

using VectorField = BasicField<VelocityTag>;
using Momentum = BasicField<MomentumTag>;

// Reinterpret nodal values under the other tag (used where an operator's
// algebra mixes them, e.g. adjoint plumbing). Explicit by design.
template <class To, class From>
BasicField<To> retag(const BasicField<From>& f) {
  return BasicField<To>(f.grid(), f.raw());
}

struct ScalarField {
  GridSpec grid{};
  std::vector<double> values;

  double min() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::max(m, v);
    return m;
  }
};

// Average-normalized L2 pairing: (2*pi)^{-dim} integral of a.b, which the
// uniform grid evaluates as (1/N) sum over nodes. Valid across tags.
template <class TagA, class TagB>
double inner_l2(const BasicField<TagA>& a, const BasicField<TagB>& b) {
  require_same_grid(a.grid(), b.grid(), "inner_l2");
  const auto& x = a.raw();
  const auto& y = b.raw();
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc / a.grid().num_nodes();
}

// Random real field supported on modes with |k_axis| <= kmax, scaled so the
// largest nodal amplitude is roughly `amplitude`. Deterministic given the rng
// state; coefficients are drawn in a fixed mode order.
VectorField random_band_limited(const GridSpec& grid, int kmax, double amplitude,
                                std::mt19937_64& rng);

}  // namespace diffspline
