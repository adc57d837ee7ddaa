#pragma once

#include <complex>
#include <vector>

#include "diffspline/grid.hpp"

namespace diffspline::fft {

using cvec = std::vector<std::complex<double>>;

// DFT convention: coef(k) = (1/N) * sum_x u(x) exp(-i k.x), so coef(0) is the
// mean and u(x) = sum_k coef(k) exp(+i k.x). Mode storage is row-major with
// axis 0 slowest, matching GridSpec::wavevector.
cvec forward(const GridSpec& g, const double* nodal);

// Real part of sum_k coef(k) exp(+i k.x) at the grid nodes.
void inverse(const GridSpec& g, const cvec& coef, double* nodal);

// Unnormalized c2c transform (sign = -1 forward, +1 backward), out-of-place.
void transform(const GridSpec& g, const std::complex<double>* in,
               std::complex<double>* out, int sign);

// Spectrum of the partial derivative along `axis`: i*k_axis per mode, with the
// Nyquist bin zeroed (its sign is ambiguous under d/dx).
cvec derivative_spectrum(const GridSpec& g, const cvec& coef, int axis);

// |k|^2 per mode, cached per grid.
const std::vector<double>& k_squared(const GridSpec& g);

// 2/3-rule mask: 1.0 where |k_axis| <= n/3 for every axis, else 0.0.
const std::vector<double>& dealias_mask(const GridSpec& g);

}  // namespace diffspline::fft
