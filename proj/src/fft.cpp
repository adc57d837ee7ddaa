#include "diffspline/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "diffspline/errors.hpp"

namespace diffspline::fft {

namespace {

// FFTW planning mutates global state; execution through fftw_execute_dft on
// distinct buffers is thread-safe. Plans use FFTW_ESTIMATE so planning is
// deterministic and cheap, and FFTW_UNALIGNED so cached plans accept any
// caller buffer.
std::mutex g_plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> g_plans;

fftw_plan plan_for(const GridSpec& g, int sign) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto key = std::make_tuple(g.dim, g.n, sign);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;

  cvec a(g.num_nodes()), b(g.num_nodes());
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan p = g.dim == 1 ? fftw_plan_dft_1d(g.n, in, out, sign, flags)
                           : fftw_plan_dft_2d(g.n, g.n, in, out, sign, flags);
  if (!p) throw Error("internal", "fftw plan creation failed");
  g_plans.emplace(key, p);
  return p;
}

}  // namespace

void transform(const GridSpec& g, const std::complex<double>* in,
               std::complex<double>* out, int sign) {
  fftw_plan p = plan_for(g, sign);
  fftw_execute_dft(p,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

cvec forward(const GridSpec& g, const double* nodal) {
  int N = g.num_nodes();
  cvec buf(N), out(N);
  for (int i = 0; i < N; ++i) buf[i] = nodal[i];
  transform(g, buf.data(), out.data(), FFTW_FORWARD);
  double scale = 1.0 / N;
  for (auto& c : out) c *= scale;
  return out;
}

void inverse(const GridSpec& g, const cvec& coef, double* nodal) {
  int N = g.num_nodes();
  cvec out(N);
  transform(g, coef.data(), out.data(), FFTW_BACKWARD);
  for (int i = 0; i < N; ++i) nodal[i] = out[i].real();
}

cvec derivative_spectrum(const GridSpec& g, const cvec& coef, int axis) {
  int N = g.num_nodes();
  cvec out(N);
  int nyquist = g.n / 2;
  for (int i = 0; i < N; ++i) {
    int k = g.wavevector(i)[axis];
    out[i] = (k == nyquist || k == -nyquist)
                 ? 0.0
                 : std::complex<double>(0.0, k) * coef[i];
  }
  return out;
}

namespace {
std::mutex g_table_mutex;
std::map<std::pair<int, int>, std::vector<double>> g_ksq, g_mask;
}  // namespace

const std::vector<double>& k_squared(const GridSpec& g) {
  std::lock_guard<std::mutex> lock(g_table_mutex);
  auto key = std::make_pair(g.dim, g.n);
  auto it = g_ksq.find(key);
  if (it != g_ksq.end()) return it->second;
  std::vector<double> t(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    auto k = g.wavevector(i);
    t[i] = double(k[0]) * k[0] + double(k[1]) * k[1];
  }
  return g_ksq.emplace(key, std::move(t)).first->second;
}

const std::vector<double>& dealias_mask(const GridSpec& g) {
  std::lock_guard<std::mutex> lock(g_table_mutex);
  auto key = std::make_pair(g.dim, g.n);
  auto it = g_mask.find(key);
  if (it != g_mask.end()) return it->second;
  std::vector<double> t(g.num_nodes());
  int limit = g.dealias_limit();
  for (int i = 0; i < g.num_nodes(); ++i) {
    auto k = g.wavevector(i);
    bool keep = std::abs(k[0]) <= limit && (g.dim == 1 || std::abs(k[1]) <= limit);
    t[i] = keep ? 1.0 : 0.0;
  }
  return g_mask.emplace(key, std::move(t)).first->second;
}

}  // namespace diffspline::fft
