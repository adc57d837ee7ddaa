#include "diffspline/metric.hpp"

#include <cmath>
#include <string>

#include "diffspline/errors.hpp"
#include "diffspline/fft.hpp"

namespace diffspline {

SobolevMetric::SobolevMetric(const GridSpec& grid, double order)
    : grid_(grid), order_(order) {
  if (!std::isfinite(order) || order < 0.0)
    throw ValidationError("metric order must be finite and >= 0, got " +
                          std::to_string(order));
  const auto& ksq = fft::k_squared(grid_);
  lambda_.resize(ksq.size());
  for (size_t i = 0; i < ksq.size(); ++i) lambda_[i] = std::pow(1.0 + ksq[i], order_);
}

template <class Tag>
BasicField<Tag> apply_bessel_power(const BasicField<Tag>& f, double order) {
  const GridSpec& g = f.grid();
  const auto& ksq = fft::k_squared(g);
  auto spec = f.spectrum();
  for (auto& comp : spec)
    for (size_t i = 0; i < comp.size(); ++i) comp[i] *= std::pow(1.0 + ksq[i], order);
  return BasicField<Tag>::from_spectrum(g, spec);
}

template VectorField apply_bessel_power<VelocityTag>(const VectorField&, double);
template Momentum apply_bessel_power<MomentumTag>(const Momentum&, double);

Momentum SobolevMetric::flat(const VectorField& u) const {
  require_same_grid(grid_, u.grid(), "flat");
  auto spec = u.spectrum();
  for (auto& comp : spec)
    for (size_t i = 0; i < comp.size(); ++i) comp[i] *= lambda_[i];
  return Momentum::from_spectrum(grid_, spec);
}

VectorField SobolevMetric::sharp(const Momentum& m) const {
  require_same_grid(grid_, m.grid(), "sharp");
  auto spec = m.spectrum();
  for (auto& comp : spec)
    for (size_t i = 0; i < comp.size(); ++i) comp[i] /= lambda_[i];
  return VectorField::from_spectrum(grid_, spec);
}

double inner_hs(const VectorField& u, const VectorField& w, const SobolevMetric& metric) {
  require_same_grid(u.grid(), metric.grid(), "inner_hs");
  require_same_grid(u.grid(), w.grid(), "inner_hs");
  const auto& lambda = metric.multiplier();
  auto su = u.spectrum();
  auto sw = w.spectrum();
  double acc = 0.0;
  for (int c = 0; c < u.components(); ++c)
    for (size_t i = 0; i < lambda.size(); ++i)
      acc += lambda[i] * (su[c][i] * std::conj(sw[c][i])).real();
  return acc;
}

double norm_hs(const VectorField& u, const SobolevMetric& metric) {
  return std::sqrt(std::max(0.0, inner_hs(u, u, metric)));
}

double dual_norm_sq(const Momentum& m, double order) {
  const auto& ksq = fft::k_squared(m.grid());
  auto spec = m.spectrum();
  double acc = 0.0;
  for (const auto& comp : spec)
    for (size_t i = 0; i < ksq.size(); ++i)
      acc += std::pow(1.0 + ksq[i], -order) * std::norm(comp[i]);
  return acc;
}

}  // namespace diffspline
