#include "diffspline/interp.hpp"

#include <cmath>

#include "diffspline/errors.hpp"
#include "diffspline/fft.hpp"
#include "diffspline/parallel.hpp"

namespace diffspline {

EvalScheme parse_eval_scheme(const std::string& name) {
  if (name == "cubic") return EvalScheme::cubic;
  if (name == "spectral") return EvalScheme::spectral;
  throw ValidationError("unknown eval scheme '" + name + "' (want cubic or spectral)");
}

std::string to_string(EvalScheme scheme) {
  return scheme == EvalScheme::cubic ? "cubic" : "spectral";
}

namespace {

// Uniform cubic B-spline pieces on [0,1); support spans coefficient offsets
// -1..2 around the base node.
inline void bspline_weights(double u, double w[4]) {
  double v = 1.0 - u;
  w[0] = v * v * v / 6.0;
  w[1] = (3.0 * u * u * u - 6.0 * u * u + 4.0) / 6.0;
  w[2] = (-3.0 * u * u * u + 3.0 * u * u + 3.0 * u + 1.0) / 6.0;
  w[3] = u * u * u / 6.0;
}

inline void bspline_dweights(double u, double d[4]) {
  double v = 1.0 - u;
  d[0] = -0.5 * v * v;
  d[1] = 0.5 * u * (3.0 * u - 4.0);
  d[2] = 0.5 * (-3.0 * u * u + 2.0 * u + 1.0);
  d[3] = 0.5 * u * u;
}

// Periodic support indices and local fraction for coordinate x.
inline void locate(double x, double inv_h, int n, int idx[4], double& u) {
  double t = x * inv_h;
  double fl = std::floor(t);
  u = t - fl;
  long j0 = static_cast<long>(fl);
  int jm = static_cast<int>(((j0 % n) + n) % n);
  idx[0] = (jm - 1 + n) % n;
  idx[1] = jm;
  idx[2] = (jm + 1) % n;
  idx[3] = (jm + 2) % n;
}

double spline_symbol(int k, int n) {
  return (2.0 + std::cos(kTwoPi * k / n)) / 3.0;
}

void prefilter(const GridSpec& g, double* comp) {
  fft::cvec spec = fft::forward(g, comp);
  for (int i = 0; i < g.num_nodes(); ++i) {
    auto k = g.wavevector(i);
    double b = spline_symbol(k[0], g.n);
    if (g.dim == 2) b *= spline_symbol(k[1], g.n);
    spec[i] /= b;
  }
  fft::inverse(g, spec, comp);
}

}  // namespace

CubicSplineInterpolant::CubicSplineInterpolant(const GridSpec& grid, int comps,
                                               const std::vector<double>& nodal)
    : grid_(grid), comps_(comps) {
  if (nodal.size() != static_cast<size_t>(comps) * grid.num_nodes())
    throw ValidationError("spline payload size does not match grid");
  coef_.resize(comps_);
  for (int c = 0; c < comps_; ++c) {
    coef_[c].assign(nodal.begin() + static_cast<size_t>(c) * grid.num_nodes(),
                    nodal.begin() + static_cast<size_t>(c + 1) * grid.num_nodes());
    prefilter(grid_, coef_[c].data());
  }
}

void CubicSplineInterpolant::eval(std::span<const double> coords,
                                  std::span<double> out) const {
  int npts = static_cast<int>(coords.size()) / grid_.dim;
  double inv_h = 1.0 / grid_.spacing();
  int n = grid_.n;
  if (grid_.dim == 1) {
    parallel_for(npts, [&](int begin, int end) {
      for (int p = begin; p < end; ++p) {
        int idx[4];
        double u, w[4];
        locate(coords[p], inv_h, n, idx, u);
        bspline_weights(u, w);
        for (int c = 0; c < comps_; ++c) {
          const double* cf = coef_[c].data();
          out[c * npts + p] = w[0] * cf[idx[0]] + w[1] * cf[idx[1]] +
                              w[2] * cf[idx[2]] + w[3] * cf[idx[3]];
        }
      }
    });
    return;
  }
  parallel_for(npts, [&](int begin, int end) {
    for (int p = begin; p < end; ++p) {
      int ix[4], iy[4];
      double ux, uy, wx[4], wy[4];
      locate(coords[p], inv_h, n, ix, ux);
      locate(coords[npts + p], inv_h, n, iy, uy);
      bspline_weights(ux, wx);
      bspline_weights(uy, wy);
      for (int c = 0; c < comps_; ++c) {
        const double* cf = coef_[c].data();
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) {
          const double* row = cf + static_cast<size_t>(ix[a]) * n;
          acc += wx[a] * (wy[0] * row[iy[0]] + wy[1] * row[iy[1]] +
                          wy[2] * row[iy[2]] + wy[3] * row[iy[3]]);
        }
        out[c * npts + p] = acc;
      }
    }
  });
}

void CubicSplineInterpolant::eval_gradient(std::span<const double> coords,
                                           std::span<double> values,
                                           std::span<double> grads) const {
  int npts = static_cast<int>(coords.size()) / grid_.dim;
  double inv_h = 1.0 / grid_.spacing();
  int n = grid_.n;
  int dim = grid_.dim;
  if (dim == 1) {
    parallel_for(npts, [&](int begin, int end) {
      for (int p = begin; p < end; ++p) {
        int idx[4];
        double u, w[4], d[4];
        locate(coords[p], inv_h, n, idx, u);
        bspline_weights(u, w);
        bspline_dweights(u, d);
        for (int c = 0; c < comps_; ++c) {
          const double* cf = coef_[c].data();
          double v = 0.0, dv = 0.0;
          for (int a = 0; a < 4; ++a) {
            v += w[a] * cf[idx[a]];
            dv += d[a] * cf[idx[a]];
          }
          values[c * npts + p] = v;
          grads[c * npts + p] = dv * inv_h;
        }
      }
    });
    return;
  }
  parallel_for(npts, [&](int begin, int end) {
    for (int p = begin; p < end; ++p) {
      int ix[4], iy[4];
      double ux, uy, wx[4], wy[4], dx[4], dy[4];
      locate(coords[p], inv_h, n, ix, ux);
      locate(coords[npts + p], inv_h, n, iy, uy);
      bspline_weights(ux, wx);
      bspline_weights(uy, wy);
      bspline_dweights(ux, dx);
      bspline_dweights(uy, dy);
      for (int c = 0; c < comps_; ++c) {
        const double* cf = coef_[c].data();
        double v = 0.0, g0 = 0.0, g1 = 0.0;
        for (int a = 0; a < 4; ++a) {
          const double* row = cf + static_cast<size_t>(ix[a]) * n;
          double sy = wy[0] * row[iy[0]] + wy[1] * row[iy[1]] + wy[2] * row[iy[2]] +
                      wy[3] * row[iy[3]];
          double sdy = dy[0] * row[iy[0]] + dy[1] * row[iy[1]] + dy[2] * row[iy[2]] +
                       dy[3] * row[iy[3]];
          v += wx[a] * sy;
          g0 += dx[a] * sy;
          g1 += wx[a] * sdy;
        }
        values[c * npts + p] = v;
        grads[(c * dim + 0) * npts + p] = g0 * inv_h;
        grads[(c * dim + 1) * npts + p] = g1 * inv_h;
      }
    }
  });
}

std::vector<double> CubicSplineInterpolant::eval_adjoint(
    const GridSpec& grid, int comps, std::span<const double> coords,
    std::span<const double> point_cotangent) {
  int npts = static_cast<int>(coords.size()) / grid.dim;
  int N = grid.num_nodes();
  int n = grid.n;
  double inv_h = 1.0 / grid.spacing();
  std::vector<double> acc(static_cast<size_t>(comps) * N, 0.0);
  // Scatter stays serial: overlapping support makes concurrent accumulation
  // order-dependent, and bitwise reproducibility matters more here than speed.
  if (grid.dim == 1) {
    for (int p = 0; p < npts; ++p) {
      int idx[4];
      double u, w[4];
      locate(coords[p], inv_h, n, idx, u);
      bspline_weights(u, w);
      for (int c = 0; c < comps; ++c) {
        double pc = point_cotangent[c * npts + p];
        double* out = acc.data() + static_cast<size_t>(c) * N;
        for (int a = 0; a < 4; ++a) out[idx[a]] += w[a] * pc;
      }
    }
  } else {
    for (int p = 0; p < npts; ++p) {
      int ix[4], iy[4];
      double ux, uy, wx[4], wy[4];
      locate(coords[p], inv_h, n, ix, ux);
      locate(coords[npts + p], inv_h, n, iy, uy);
      bspline_weights(ux, wx);
      bspline_weights(uy, wy);
      for (int c = 0; c < comps; ++c) {
        double pc = point_cotangent[c * npts + p];
        double* out = acc.data() + static_cast<size_t>(c) * N;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            out[static_cast<size_t>(ix[a]) * n + iy[b]] += wx[a] * wy[b] * pc;
      }
    }
  }
  for (int c = 0; c < comps; ++c) prefilter(grid, acc.data() + static_cast<size_t>(c) * N);
  return acc;
}

void spectral_eval(const GridSpec& grid, int comps, const std::vector<double>& nodal,
                   std::span<const double> coords, std::span<double> out) {
  int npts = static_cast<int>(coords.size()) / grid.dim;
  int N = grid.num_nodes();
  std::vector<fft::cvec> spec(comps);
  double peak = 0.0;
  for (int c = 0; c < comps; ++c) {
    spec[c] = fft::forward(grid, nodal.data() + static_cast<size_t>(c) * N);
    for (const auto& z : spec[c]) peak = std::max(peak, std::abs(z));
  }
  double cut = 1e-15 * peak;

  struct Mode {
    int k0, k1;
    std::vector<std::complex<double>> coef;
  };
  std::vector<Mode> modes;
  for (int i = 0; i < N; ++i) {
    double mag = 0.0;
    for (int c = 0; c < comps; ++c) mag = std::max(mag, std::abs(spec[c][i]));
    if (mag <= cut) continue;
    auto k = grid.wavevector(i);
    Mode m{k[0], k[1], {}};
    m.coef.reserve(comps);
    for (int c = 0; c < comps; ++c) m.coef.push_back(spec[c][i]);
    modes.push_back(std::move(m));
  }

  int half = grid.n / 2;
  parallel_for(npts, [&](int begin, int end) {
    std::vector<std::complex<double>> e0(grid.n + 1), e1(grid.n + 1);
    for (int p = begin; p < end; ++p) {
      double x0 = coords[p];
      for (int k = -half; k <= half; ++k) e0[k + half] = std::polar(1.0, k * x0);
      if (grid.dim == 2) {
        double x1 = coords[npts + p];
        for (int k = -half; k <= half; ++k) e1[k + half] = std::polar(1.0, k * x1);
      }
      for (int c = 0; c < comps; ++c) out[c * npts + p] = 0.0;
      for (const auto& m : modes) {
        std::complex<double> phase = e0[m.k0 + half];
        if (grid.dim == 2) phase *= e1[m.k1 + half];
        for (int c = 0; c < comps; ++c)
          out[c * npts + p] += (m.coef[c] * phase).real();
      }
    }
  });
}

}  // namespace diffspline
