#include "diffspline/lie_ops.hpp"

#include "diffspline/fft.hpp"

namespace diffspline {

namespace {

// Band-limited view of a field: filtered nodal values plus all first
// derivatives, shared by composite operators to avoid redundant transforms.
struct Bundle {
  GridSpec grid;
  int comps;
  std::vector<std::vector<double>> value;               // [comp][node]
  std::vector<std::array<std::vector<double>, 2>> der;  // [comp][axis][node]
};

template <class Tag>
Bundle filtered_bundle(const BasicField<Tag>& f) {
  const GridSpec& g = f.grid();
  const auto& mask = fft::dealias_mask(g);
  Bundle b{g, f.components(), {}, {}};
  b.value.resize(b.comps);
  b.der.resize(b.comps);
  for (int c = 0; c < b.comps; ++c) {
    fft::cvec spec = fft::forward(g, f.component(c).data());
    for (size_t i = 0; i < spec.size(); ++i) spec[i] *= mask[i];
    b.value[c].resize(g.num_nodes());
    fft::inverse(g, spec, b.value[c].data());
    for (int a = 0; a < g.dim; ++a) {
      fft::cvec d = fft::derivative_spectrum(g, spec, a);
      b.der[c][a].resize(g.num_nodes());
      fft::inverse(g, d, b.der[c][a].data());
    }
  }
  return b;
}

template <class Tag>
BasicField<Tag> filtered_output(const GridSpec& g,
                                std::vector<std::vector<double>> nodal) {
  const auto& mask = fft::dealias_mask(g);
  BasicField<Tag> out(g);
  for (int c = 0; c < g.dim; ++c) {
    fft::cvec spec = fft::forward(g, nodal[c].data());
    for (size_t i = 0; i < spec.size(); ++i) spec[i] *= mask[i];
    fft::inverse(g, spec, out.component(c).data());
  }
  return out;
}

}  // namespace

VectorField ad(const VectorField& xi, const VectorField& eta) {
  require_same_grid(xi.grid(), eta.grid(), "ad");
  const GridSpec& g = xi.grid();
  Bundle bx = filtered_bundle(xi);
  Bundle be = filtered_bundle(eta);
  int N = g.num_nodes();
  std::vector<std::vector<double>> out(g.dim, std::vector<double>(N, 0.0));
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j)
      for (int p = 0; p < N; ++p)
        out[i][p] += bx.der[i][j][p] * be.value[j][p] - be.der[i][j][p] * bx.value[j][p];
  return filtered_output<VelocityTag>(g, std::move(out));
}

Momentum coad(const VectorField& xi, const Momentum& m) {
  require_same_grid(xi.grid(), m.grid(), "coad");
  const GridSpec& g = xi.grid();
  Bundle bx = filtered_bundle(xi);
  Bundle bm = filtered_bundle(m);
  int N = g.num_nodes();
  std::vector<double> div(N, 0.0);
  for (int j = 0; j < g.dim; ++j)
    for (int p = 0; p < N; ++p) div[p] += bx.der[j][j][p];
  std::vector<std::vector<double>> out(g.dim, std::vector<double>(N, 0.0));
  for (int i = 0; i < g.dim; ++i) {
    for (int j = 0; j < g.dim; ++j)
      for (int p = 0; p < N; ++p)
        out[i][p] += bx.der[j][i][p] * bm.value[j][p] + bm.der[i][j][p] * bx.value[j][p];
    for (int p = 0; p < N; ++p) out[i][p] += bm.value[i][p] * div[p];
  }
  return filtered_output<MomentumTag>(g, std::move(out));
}

VectorField ad_dagger(const VectorField& nu, const VectorField& kappa,
                      const SobolevMetric& metric) {
  require_same_grid(nu.grid(), metric.grid(), "ad_dagger");
  return metric.sharp(coad(nu, metric.flat(kappa)));
}

ScalarField divergence(const VectorField& xi) {
  const GridSpec& g = xi.grid();
  ScalarField out{g, std::vector<double>(g.num_nodes(), 0.0)};
  std::vector<double> tmp(g.num_nodes());
  for (int a = 0; a < g.dim; ++a) {
    fft::cvec spec = fft::forward(g, xi.component(a).data());
    fft::cvec d = fft::derivative_spectrum(g, spec, a);
    fft::inverse(g, d, tmp.data());
    for (int p = 0; p < g.num_nodes(); ++p) out.values[p] += tmp[p];
  }
  return out;
}

Momentum coad_first_adjoint(const Momentum& m, const VectorField& p) {
  require_same_grid(m.grid(), p.grid(), "coad_first_adjoint");
  const GridSpec& g = m.grid();
  Bundle bm = filtered_bundle(m);
  Bundle bp = filtered_bundle(p);
  int N = g.num_nodes();
  std::vector<double> divp(N, 0.0);
  for (int j = 0; j < g.dim; ++j)
    for (int q = 0; q < N; ++q) divp[q] += bp.der[j][j][q];
  // q = p . m, band-limited product, then its spectral gradient.
  std::vector<double> dot(N, 0.0);
  for (int j = 0; j < g.dim; ++j)
    for (int q = 0; q < N; ++q) dot[q] += bp.value[j][q] * bm.value[j][q];
  fft::cvec dot_spec = fft::forward(g, dot.data());
  const auto& mask = fft::dealias_mask(g);
  for (size_t i = 0; i < dot_spec.size(); ++i) dot_spec[i] *= mask[i];

  std::vector<std::vector<double>> out(g.dim, std::vector<double>(N, 0.0));
  std::vector<double> tmp(N);
  for (int i = 0; i < g.dim; ++i) {
    for (int q = 0; q < N; ++q) out[i][q] = -divp[q] * bm.value[i][q];
    for (int j = 0; j < g.dim; ++j)
      for (int q = 0; q < N; ++q)
        out[i][q] += (bm.der[j][i][q] - bm.der[i][j][q]) * bp.value[j][q];
    fft::cvec gi = fft::derivative_spectrum(g, dot_spec, i);
    fft::inverse(g, gi, tmp.data());
    for (int q = 0; q < N; ++q) out[i][q] -= tmp[q];
  }
  return filtered_output<MomentumTag>(g, std::move(out));
}

template <class Tag>
std::vector<std::array<std::vector<double>, 2>> field_derivatives(
    const BasicField<Tag>& f) {
  const GridSpec& g = f.grid();
  std::vector<std::array<std::vector<double>, 2>> jac(f.components());
  for (int c = 0; c < f.components(); ++c) {
    fft::cvec spec = fft::forward(g, f.component(c).data());
    for (int a = 0; a < g.dim; ++a) {
      fft::cvec d = fft::derivative_spectrum(g, spec, a);
      jac[c][a].resize(g.num_nodes());
      fft::inverse(g, d, jac[c][a].data());
    }
  }
  return jac;
}

template std::vector<std::array<std::vector<double>, 2>> field_derivatives<VelocityTag>(
    const VectorField&);
template std::vector<std::array<std::vector<double>, 2>> field_derivatives<MomentumTag>(
    const Momentum&);

}  // namespace diffspline
