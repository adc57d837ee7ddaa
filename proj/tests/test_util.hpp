#pragma once

// Shared helpers for the test suite: an O(N^2) direct DFT used as an
// independent oracle for the FFT-based code paths, plus small filesystem and
// subprocess utilities for the CLI tests.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "diffspline/diffeo.hpp"
#include "diffspline/dynamics.hpp"
#include "diffspline/field.hpp"
#include "diffspline/grid.hpp"
#include "diffspline/metric.hpp"

namespace testutil {

using diffspline::Diffeo;
using diffspline::GridSpec;
using diffspline::Momentum;
using diffspline::VectorField;

// Direct O(N^2) DFT with the same normalization as the fft module:
// coef(k) = (1/N) sum_x f(x) exp(-i k.x).  Slow, only for small grids.
inline std::vector<std::complex<double>> naive_dft(const GridSpec& g,
                                                   std::span<const double> nodal) {
  int N = g.num_nodes();
  std::vector<std::complex<double>> out(static_cast<size_t>(N));
  for (int j = 0; j < N; ++j) {
    auto k = g.wavevector(j);
    std::complex<double> acc = 0.0;
    for (int i = 0; i < N; ++i) {
      auto x = g.node(i);
      acc += nodal[static_cast<size_t>(i)] *
             std::polar(1.0, -(k[0] * x[0] + k[1] * x[1]));
    }
    out[static_cast<size_t>(j)] = acc / static_cast<double>(N);
  }
  return out;
}

// H^s inner product evaluated from first principles through the naive DFT.
template <class TagA, class TagB>
inline double naive_inner_hs(const diffspline::BasicField<TagA>& u,
                             const diffspline::BasicField<TagB>& w, double s) {
  const GridSpec& g = u.grid();
  int N = g.num_nodes();
  double acc = 0.0;
  for (int c = 0; c < g.dim; ++c) {
    auto uh = naive_dft(g, u.component(c));
    auto wh = naive_dft(g, w.component(c));
    for (int j = 0; j < N; ++j) {
      auto k = g.wavevector(j);
      double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
      acc += std::pow(1.0 + k2, s) *
             (uh[static_cast<size_t>(j)] * std::conj(wh[static_cast<size_t>(j)])).real();
    }
  }
  return acc;
}

template <class Tag>
inline double max_abs_diff(const diffspline::BasicField<Tag>& a,
                           const diffspline::BasicField<Tag>& b) {
  diffspline::BasicField<Tag> d = a;
  d -= b;
  return d.max_abs();
}

// Steady-flow diffeomorphism: time-1 flow of the autonomous field u.
inline Diffeo steady_flow(const VectorField& u,
                          diffspline::EvalScheme scheme = diffspline::EvalScheme::spectral) {
  diffspline::VelocityPath path(std::vector<VectorField>{u, u, u, u, u});
  return diffspline::flow(path, 0.0, 1.0, scheme);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& stem = "diffspline-test") {
    path = std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str(const std::string& rel) const { return (path / rel).string(); }
};

struct RunResult {
  int status = -1;
  std::string output;  // stdout + stderr interleaved
};

inline RunResult run_command(const std::string& cmd) {
  RunResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (size_t got = fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, got);
  int rc = pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

}  // namespace testutil
