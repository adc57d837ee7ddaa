#pragma once

#include <array>
#include <cstdint>

namespace diffspline {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid on the torus [0, 2*pi)^dim with n nodes per axis.
// n must be a power of two with n >= 8 so that the 2/3-rule band
// (|k| <= n/3 per axis) makes quadratic products alias-free.
struct GridSpec {
  int dim = 1;
  int n = 8;

  GridSpec() = default;
  GridSpec(int dim_, int n_);

  int num_nodes() const { return dim == 1 ? n : n * n; }
  double spacing() const { return kTwoPi / n; }
  int dealias_limit() const { return n / 3; }

  // Coordinates of a node by linear index (row-major, axis 0 slowest).
  std::array<double, 2> node(int index) const {
    if (dim == 1) return {index * spacing(), 0.0};
    return {(index / n) * spacing(), (index % n) * spacing()};
  }

  // Integer wavevector of a spectral mode by linear index (same layout).
  std::array<int, 2> wavevector(int index) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Signed frequency for DFT bin i of an n-point axis.
inline int dft_frequency(int i, int n) { return i <= n / 2 ? i : i - n; }

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

}  // namespace diffspline
