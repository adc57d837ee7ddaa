#include "diffspline/field.hpp"

namespace diffspline {

VectorField random_band_limited(const GridSpec& grid, int kmax, double amplitude,
                                std::mt19937_64& rng) {
  if (kmax < 1 || kmax > grid.dealias_limit())
    throw ValidationError("random_band_limited: kmax must lie in [1, n/3]");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  int N = grid.num_nodes();
  std::vector<fft::cvec> spec(grid.dim, fft::cvec(N));
  // Draw one coefficient per independent mode pair (k, -k) in a fixed order so
  // the result is real and reproducible.
  for (int c = 0; c < grid.dim; ++c) {
    for (int i = 0; i < N; ++i) {
      auto k = grid.wavevector(i);
      if (std::abs(k[0]) > kmax || std::abs(k[1]) > kmax) continue;
      bool positive_half = k[0] > 0 || (k[0] == 0 && k[1] > 0);
      if (!positive_half) continue;
      double re = unit(rng), im = unit(rng);
      spec[c][i] = std::complex<double>(re, im);
    }
    // Mirror for realness: coef(-k) = conj(coef(k)).
    for (int i = 0; i < N; ++i) {
      auto k = grid.wavevector(i);
      bool negative_half = k[0] < 0 || (k[0] == 0 && k[1] < 0);
      if (!negative_half) continue;
      int i0, i1 = 0;
      i0 = (grid.n - (grid.dim == 1 ? i : i / grid.n)) % grid.n;
      if (grid.dim == 2) i1 = (grid.n - i % grid.n) % grid.n;
      int mirror = grid.dim == 1 ? i0 : i0 * grid.n + i1;
      spec[c][i] = std::conj(spec[c][mirror]);
    }
  }
  VectorField f = VectorField::from_spectrum(grid, spec);
  double peak = f.max_abs();
  if (peak > 0.0) f *= amplitude / peak;
  return f;
}

}  // namespace diffspline
