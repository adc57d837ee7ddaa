#include "diffspline/grid.hpp"

#include <string>

#include "diffspline/errors.hpp"

namespace diffspline {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}

GridSpec::GridSpec(int dim_, int n_) : dim(dim_), n(n_) {
  if (dim != 1 && dim != 2)
    throw ValidationError("grid dim must be 1 or 2, got " + std::to_string(dim));
  if (n < 8 || !power_of_two(n))
    throw ValidationError("grid n must be a power of two >= 8, got " +
                          std::to_string(n));
}

std::array<int, 2> GridSpec::wavevector(int index) const {
  if (dim == 1) return {dft_frequency(index, n), 0};
  return {dft_frequency(index / n, n), dft_frequency(index % n, n)};
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b))
    throw IncompatibleGridError(std::string(where) + ": grids differ (dim " +
                                std::to_string(a.dim) + " n " + std::to_string(a.n) +
                                " vs dim " + std::to_string(b.dim) + " n " +
                                std::to_string(b.n) + ")");
}

}  // namespace diffspline
