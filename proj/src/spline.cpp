#include "diffspline/spline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <string>

#include "diffspline/errors.hpp"
#include "diffspline/fft.hpp"
#include "rollout_detail.hpp"

namespace diffspline {

SplineProblem::SplineProblem(const GridSpec& grid_, double s_, double s_prime_,
                             int time_steps_, Diffeo phi0_, VectorField v0_,
                             Diffeo phi1_, VectorField v1_, PenaltySchedule penalty_,
                             SolverTolerances tol_, bool allow_sprime_below_)
    : grid(grid_),
      s(s_),
      s_prime(s_prime_),
      time_steps(time_steps_),
      phi0(std::move(phi0_)),
      phi1(std::move(phi1_)),
      v0(std::move(v0_)),
      v1(std::move(v1_)),
      penalty(penalty_),
      tol(tol_),
      allow_sprime_below(allow_sprime_below_) {
  if (time_steps < 4)
    throw ValidationError("time_steps must be >= 4, got " + std::to_string(time_steps));
  double smin = grid.dim / 2.0 + 1.0;
  if (!(std::isfinite(s) && s > smin))
    throw ValidationError("metric order s = " + std::to_string(s) +
                          " violates the smoothness hypothesis s > dim/2 + 1 = " +
                          std::to_string(smin));
  if (!std::isfinite(s_prime))
    throw ValidationError("acceleration order s' must be finite");
  if (allow_sprime_below) {
    if (!(s_prime > s))
      throw ValidationError("acceleration order s' = " + std::to_string(s_prime) +
                            " must still exceed s even with allow_sprime_below");
  } else if (!(s_prime >= s + 1.0)) {
    throw ValidationError(
        "acceleration order s' = " + std::to_string(s_prime) +
        " violates the hypothesis s' >= s + 1 = " + std::to_string(s + 1.0) +
        " (set allow_sprime_below to explore s' in (s, s+1))");
  }
  require_same_grid(phi0.grid(), grid, "spline problem phi0");
  require_same_grid(phi1.grid(), grid, "spline problem phi1");
  require_same_grid(v0.grid(), grid, "spline problem v0");
  require_same_grid(v1.grid(), grid, "spline problem v1");
  require_nondegenerate(phi0, "spline problem phi0");
  require_nondegenerate(phi1, "spline problem phi1");
  if (!v0.finite() || !v1.finite())
    throw ValidationError("boundary velocities must be finite");
  if (!(penalty.initial > 0.0) || !(penalty.growth > 1.0) || penalty.max_rounds < 1)
    throw ValidationError("penalty schedule needs initial > 0, growth > 1, rounds >= 1");
  if (!(tol.endpoint > 0.0) || !(tol.gradient >= 0.0) || tol.max_iterations < 1)
    throw ValidationError("tolerances need endpoint > 0, gradient >= 0, iterations >= 1");
}

KnotSequence::KnotSequence(std::vector<Knot> knots_, double lambda0_)
    : knots(std::move(knots_)), lambda0(lambda0_) {
  if (knots.empty()) throw ValidationError("knot sequence must not be empty");
  double prev = 0.0;
  for (const auto& k : knots) {
    if (!(k.time > prev && k.time <= 1.0))
      throw ValidationError("knot times must be strictly increasing in (0, 1]");
    prev = k.time;
  }
  if (!(lambda0 > 0.0))
    throw ValidationError(
        "lambda0 must be positive: with no initial-speed penalty the sequence "
        "objective has infimum zero and minimizers cease to exist");
}

double objective(const ControlPath& control, double s_prime) {
  SobolevMetric msp(control.grid(), s_prime);
  int M = control.steps();
  double acc = 0.0;
  for (int i = 0; i <= M; ++i) {
    double w = (i == 0 || i == M) ? 0.5 : 1.0;
    acc += w * inner_hs(control.node(i), control.node(i), msp);
  }
  return acc / M;
}

namespace {

using clock_type = std::chrono::steady_clock;

// Optimization variables in spectral form: one flat complex array for the
// control (node-major, then component, then mode) and one for the optional
// initial-momentum unknown. All optimizer algebra runs here so W-inner
// products are diagonal; nodal fields are materialized only for rollouts.
struct SpecVec {
  std::vector<std::complex<double>> a;
  std::vector<std::complex<double>> m;
};

void axpy(SpecVec& y, double c, const SpecVec& x) {
  for (size_t i = 0; i < y.a.size(); ++i) y.a[i] += c * x.a[i];
  for (size_t i = 0; i < y.m.size(); ++i) y.m[i] += c * x.m[i];
}

void scale(SpecVec& y, double c) {
  for (auto& z : y.a) z *= c;
  for (auto& z : y.m) z *= c;
}

SpecVec combine(const SpecVec& u, double c, const SpecVec& p) {
  SpecVec out = u;
  axpy(out, c, p);
  return out;
}

struct EvalOut {
  Trajectory traj;
  double merit = 0.0;
  double objective = 0.0;
  double speed = 0.0;
  double r_phi = 0.0, r_xi = 0.0;
  std::vector<double> knot_r;
};

class Engine {
 public:
  Engine(const SplineProblem& problem, const KnotSequence* seq)
      : P(problem),
        Ms(problem.grid, problem.s),
        Msp(problem.grid, problem.s_prime),
        sequence(seq != nullptr) {
    const GridSpec& g = P.grid;
    N = g.num_nodes();
    dim = g.dim;
    M = P.time_steps;
    const auto& ls = Ms.multiplier();
    const auto& lsp = Msp.multiplier();
    wm0.resize(N);
    riesz_m0.resize(N);
    for (int i = 0; i < N; ++i) {
      wm0[i] = lsp[i] / (ls[i] * ls[i]);
      riesz_m0[i] = (ls[i] * ls[i]) / lsp[i];
    }
    node_knot.assign(M + 1, -1);
    if (sequence) {
      lambda0 = seq->lambda0;
      int prev_idx = 0;
      for (const auto& k : seq->knots) {
        require_same_grid(k.target.grid(), g, "knot target");
        require_nondegenerate(k.target, "knot target");
        int idx = static_cast<int>(std::lround(k.time * M));
        idx = std::min(std::max(idx, 0), M);
        if (idx <= prev_idx)
          throw ValidationError(
              "knot times collide on the time grid after snapping; refine "
              "time_steps or separate the knots");
        prev_idx = idx;
        knot_index.push_back(idx);
        knot_snap.push_back(std::abs(k.time - static_cast<double>(idx) / M));
        knot_disp.push_back(k.target.displacement());
        node_knot[idx] = static_cast<int>(knot_index.size()) - 1;
      }
    } else {
      // Boundary inverses are one-time costs; give steep maps a budget far
      // beyond the default so only genuinely degenerate data fails.
      m0_fixed = Ms.flat(
          compose_field(P.v0, inverse(P.phi0, EvalScheme::cubic, 1e-10, 500)));
      xi1_target =
          compose_field(P.v1, inverse(P.phi1, EvalScheme::cubic, 1e-10, 500));
      phi1_disp = P.phi1.displacement();
    }
  }

  const SplineProblem& P;
  SobolevMetric Ms, Msp;
  bool sequence;
  int N = 0, dim = 0, M = 0;
  double lambda0 = 0.0;
  std::vector<double> wm0, riesz_m0;
  std::vector<int> knot_index;
  std::vector<double> knot_snap;
  std::vector<VectorField> knot_disp;
  std::vector<int> node_knot;
  Momentum m0_fixed;
  VectorField xi1_target, phi1_disp;

  double trap_weight(int i) const { return (i == 0 || i == M) ? 0.5 : 1.0; }

  SpecVec to_spec(const ControlPath& c, const Momentum* m0) const {
    SpecVec v;
    v.a.resize(static_cast<size_t>(M + 1) * dim * N);
    for (int i = 0; i <= M; ++i)
      for (int c2 = 0; c2 < dim; ++c2) {
        fft::cvec s = fft::forward(P.grid, c.node(i).component(c2).data());
        std::copy(s.begin(), s.end(),
                  v.a.begin() + (static_cast<size_t>(i) * dim + c2) * N);
      }
    if (m0) {
      v.m.resize(static_cast<size_t>(dim) * N);
      for (int c2 = 0; c2 < dim; ++c2) {
        fft::cvec s = fft::forward(P.grid, m0->component(c2).data());
        std::copy(s.begin(), s.end(), v.m.begin() + static_cast<size_t>(c2) * N);
      }
    }
    return v;
  }

  ControlPath alpha_from_spec(const SpecVec& v) const {
    std::vector<VectorField> nodes(M + 1, VectorField(P.grid));
    fft::cvec buf(N);
    for (int i = 0; i <= M; ++i)
      for (int c2 = 0; c2 < dim; ++c2) {
        auto begin = v.a.begin() + (static_cast<size_t>(i) * dim + c2) * N;
        std::copy(begin, begin + N, buf.begin());
        fft::inverse(P.grid, buf, nodes[i].component(c2).data());
      }
    return ControlPath(std::move(nodes));
  }

  Momentum m0_from_spec(const SpecVec& v) const {
    Momentum m(P.grid);
    fft::cvec buf(N);
    for (int c2 = 0; c2 < dim; ++c2) {
      auto begin = v.m.begin() + static_cast<size_t>(c2) * N;
      std::copy(begin, begin + N, buf.begin());
      fft::inverse(P.grid, buf, m.component(c2).data());
    }
    return m;
  }

  // W geometry: per-node H^{s'} on the control block; the m0 block pairs
  // with weight lambda_{s'} / lambda_s^2 so that it measures the H^{s'} size
  // of the induced initial velocity sharp_s(m0).
  double wdot(const SpecVec& x, const SpecVec& y) const {
    const auto& lsp = Msp.multiplier();
    double acc = 0.0;
    for (size_t i = 0; i < x.a.size(); ++i)
      acc += lsp[i % N] * (x.a[i] * std::conj(y.a[i])).real();
    for (size_t i = 0; i < x.m.size(); ++i)
      acc += wm0[i % N] * (x.m[i] * std::conj(y.m[i])).real();
    return acc;
  }

  double wnorm(const SpecVec& x) const { return std::sqrt(std::max(0.0, wdot(x, x))); }

  State initial_state(const SpecVec& u) const {
    if (sequence) return {P.phi0, m0_from_spec(u)};
    return {P.phi0, m0_fixed};
  }

  EvalOut evaluate(const SpecVec& u, double pen) const {
    ControlPath alpha = alpha_from_spec(u);
    EvalOut out;
    out.traj = forced_rollout(initial_state(u), alpha, Ms);
    out.objective = 0.0;
    const auto& lsp = Msp.multiplier();
    for (int i = 0; i <= M; ++i) {
      double nsq = 0.0;
      for (int c2 = 0; c2 < dim; ++c2) {
        auto begin = u.a.begin() + (static_cast<size_t>(i) * dim + c2) * N;
        for (int k = 0; k < N; ++k) nsq += lsp[k] * std::norm(begin[k]);
      }
      out.objective += trap_weight(i) * nsq;
    }
    out.objective /= M;
    out.merit = out.objective;

    if (sequence) {
      double sp = 0.0;
      for (size_t i = 0; i < u.m.size(); ++i) sp += wm0[i % N] * std::norm(u.m[i]);
      out.speed = lambda0 * sp;
      out.merit += out.speed;
      double total = 0.0;
      for (size_t j = 0; j < knot_index.size(); ++j) {
        VectorField gap = out.traj.states[knot_index[j]].phi.displacement();
        gap -= knot_disp[j];
        double r = inner_hs(gap, gap, Ms);
        out.knot_r.push_back(r);
        total += r;
      }
      out.merit += pen * total;
    } else {
      VectorField gapd = out.traj.states[M].phi.displacement();
      gapd -= phi1_disp;
      out.r_phi = inner_hs(gapd, gapd, Ms);
      VectorField gapxi = Ms.sharp(out.traj.states[M].m);
      gapxi -= xi1_target;
      out.r_xi = inner_hs(gapxi, gapxi, Ms);
      out.merit += pen * (out.r_phi + out.r_xi);
    }
    return out;
  }

  // Exact transpose of the evaluation above through the recomputed RK4
  // stages; writes the W-Riesz gradient in spectral form.
  void gradient_from(const EvalOut& eo, const SpecVec& u, double pen,
                     SpecVec& gout) const {
    const GridSpec& g = P.grid;
    ControlPath alpha = alpha_from_spec(u);
    double h = 1.0 / M;

    Momentum p_d(g);
    VectorField p_m(g);
    if (!sequence) {
      VectorField gapd = eo.traj.states[M].phi.displacement();
      gapd -= phi1_disp;
      p_d.axpy(2.0 * pen, Ms.flat(gapd));
      VectorField gapxi = Ms.sharp(eo.traj.states[M].m);
      gapxi -= xi1_target;
      p_m.axpy(2.0 * pen, gapxi);
    } else if (node_knot[M] >= 0) {
      VectorField gap = eo.traj.states[M].phi.displacement();
      gap -= knot_disp[node_knot[M]];
      p_d.axpy(2.0 * pen, Ms.flat(gap));
    }

    std::vector<Momentum> alpha_bar(M + 1, Momentum(g));
    for (int i = M - 1; i >= 0; --i) {
      const VectorField& a0 = alpha.node(i);
      const VectorField& a1 = alpha.node(i + 1);
      VectorField a_mid = a0;
      a_mid *= 0.5;
      a_mid.axpy(0.5, a1);
      Momentum ab0(g), abm(g), ab1(g);
      rollout::rk4_step_adjoint(eo.traj.states[i].phi.displacement(),
                                eo.traj.states[i].m, &a0, &a_mid, &a1, h, Ms, p_d,
                                p_m, &ab0, &abm, &ab1);
      alpha_bar[i] += ab0;
      alpha_bar[i].axpy(0.5, abm);
      alpha_bar[i + 1] += ab1;
      alpha_bar[i + 1].axpy(0.5, abm);
      if (i > 0 && sequence && node_knot[i] >= 0) {
        VectorField gap = eo.traj.states[i].phi.displacement();
        gap -= knot_disp[node_knot[i]];
        p_d.axpy(2.0 * pen, Ms.flat(gap));
      }
    }

    // Riesz representation: g_alpha = alpha_bar / lambda_{s'} + 2 dt w_i alpha;
    // g_m0 = riesz_m0 * p_m(0) + 2 lambda0 m0.
    const auto& lsp = Msp.multiplier();
    gout.a.assign(static_cast<size_t>(M + 1) * dim * N, {});
    gout.m.clear();
    for (int i = 0; i <= M; ++i) {
      double wobj = 2.0 * h * trap_weight(i);
      for (int c2 = 0; c2 < dim; ++c2) {
        fft::cvec ab = fft::forward(g, alpha_bar[i].component(c2).data());
        auto out = gout.a.begin() + (static_cast<size_t>(i) * dim + c2) * N;
        auto uin = u.a.begin() + (static_cast<size_t>(i) * dim + c2) * N;
        for (int k = 0; k < N; ++k) out[k] = ab[k] / lsp[k] + wobj * uin[k];
      }
    }
    if (sequence) {
      gout.m.assign(static_cast<size_t>(dim) * N, {});
      for (int c2 = 0; c2 < dim; ++c2) {
        fft::cvec pm = fft::forward(g, p_m.component(c2).data());
        auto out = gout.m.begin() + static_cast<size_t>(c2) * N;
        auto uin = u.m.begin() + static_cast<size_t>(c2) * N;
        for (int k = 0; k < N; ++k)
          out[k] = riesz_m0[k] * pm[k] + 2.0 * lambda0 * uin[k];
      }
    }
  }

  EvalOut gradient_spec(const SpecVec& u, double pen, SpecVec& gout) const {
    EvalOut eo = evaluate(u, pen);
    gradient_from(eo, u, pen, gout);
    return eo;
  }
};

struct Lbfgs {
  std::deque<SpecVec> s, y;
  std::deque<double> rho;
  static constexpr size_t kMemory = 10;

  void push(SpecVec si, SpecVec yi, double sy) {
    s.push_back(std::move(si));
    y.push_back(std::move(yi));
    rho.push_back(1.0 / sy);
    if (s.size() > kMemory) {
      s.pop_front();
      y.pop_front();
      rho.pop_front();
    }
  }

  SpecVec direction(const Engine& eng, const SpecVec& g) const {
    SpecVec q = g;
    std::vector<double> al(s.size());
    for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) {
      al[i] = rho[i] * eng.wdot(s[i], q);
      axpy(q, -al[i], y[i]);
    }
    if (!s.empty()) {
      double yy = eng.wdot(y.back(), y.back());
      if (yy > 0.0) scale(q, eng.wdot(s.back(), y.back()) / yy);
    }
    for (size_t i = 0; i < s.size(); ++i) {
      double beta = rho[i] * eng.wdot(y[i], q);
      axpy(q, al[i] - beta, s[i]);
    }
    scale(q, -1.0);
    return q;
  }
};

SolveResult run_solver(Engine& eng, SpecVec u, const SolveOptions& options) {
  auto t0 = clock_type::now();
  const SplineProblem& P = eng.P;
  (void)options;
  double pen = P.penalty.initial;
  SolveReport rep;

  SpecVec g, gnew;
  EvalOut eo;
  double prev_resid = std::numeric_limits<double>::infinity();
  int stall = 0;
  rep.status = "max-rounds";

  for (int round = 0; round < P.penalty.max_rounds; ++round) {
    RoundReport rr;
    rr.penalty = pen;
    rep.final_penalty = pen;
    Lbfgs hist;
    eo = eng.gradient_spec(u, pen, g);
    rr.merit_history.push_back(eo.merit);
    double gn = eng.wnorm(g);
    rr.exit = "gradient-tol";

    for (int iter = 0; iter < P.tol.max_iterations; ++iter) {
      if (gn <= P.tol.gradient) break;
      SpecVec p = hist.direction(eng, g);
      double slope = eng.wdot(g, p);
      if (!(slope < 0.0)) {
        p = g;
        scale(p, -1.0);
        slope = -gn * gn;
      }
      double step = 1.0;
      bool accepted = false;
      SpecVec u_new;
      EvalOut trial;
      for (int ls = 0; ls < 40; ++ls) {
        u_new = combine(u, step, p);
        bool feasible = true;
        try {
          trial = eng.evaluate(u_new, pen);
        } catch (const DegenerateMapError&) {
          feasible = false;
        } catch (const BlowupError&) {
          feasible = false;
        }
        if (feasible && trial.merit <= eo.merit + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        rr.exit = "line-search";
        break;
      }
      eng.gradient_from(trial, u_new, pen, gnew);
      SpecVec sv = u_new;
      axpy(sv, -1.0, u);
      SpecVec yv = gnew;
      axpy(yv, -1.0, g);
      double sy = eng.wdot(sv, yv);
      if (sy > 1e-12 * eng.wnorm(sv) * eng.wnorm(yv))
        hist.push(std::move(sv), std::move(yv), sy);
      u = std::move(u_new);
      eo = std::move(trial);
      g = std::move(gnew);
      gn = eng.wnorm(g);
      rr.merit_history.push_back(eo.merit);
      ++rr.iterations;
      if (iter == P.tol.max_iterations - 1) rr.exit = "max-iterations";
    }

    rr.gradient_norm = gn;
    rr.objective = eo.objective;
    rep.rounds.push_back(rr);
    rep.gradient_norm = gn;

    double rmax = 0.0;
    if (eng.sequence)
      for (double r : eo.knot_r) rmax = std::max(rmax, r);
    else
      rmax = std::max(eo.r_phi, eo.r_xi);

    if (rmax <= P.tol.endpoint) {
      rep.converged = true;
      rep.status = "converged";
      break;
    }
    if (rmax > 0.5 * prev_resid) {
      if (++stall >= 2) {
        rep.status = "residual-stall";
        break;
      }
    } else {
      stall = 0;
    }
    prev_resid = rmax;
    if (round + 1 < P.penalty.max_rounds) pen *= P.penalty.growth;
  }

  rep.objective = eo.objective;
  rep.speed_penalty = eo.speed;
  rep.endpoint_residual_phi = eo.r_phi;
  rep.endpoint_residual_xi = eo.r_xi;
  rep.knot_residuals = eo.knot_r;
  rep.knot_snap_distances = eng.knot_snap;

  ControlPath control = eng.alpha_from_spec(u);
  rep.transport_gap = transport_residual(eo.traj, control, eng.Ms);
  GronwallReport gr = gronwall_monitor(eo.traj, control, eng.Ms);
  rep.gronwall_identity_gap = gr.max_identity_gap;
  rep.gronwall_bounds_ok = gr.all_bounds_ok;
  rep.wall_seconds =
      std::chrono::duration<double>(clock_type::now() - t0).count();

  SolveResult result{std::move(eo.traj), std::move(control), std::nullopt,
                     std::move(rep)};
  if (eng.sequence) result.m0 = eng.m0_from_spec(u);
  return result;
}

SpecVec initial_guess(const Engine& eng, const SolveOptions& options,
                      const ControlPath* init_control) {
  const GridSpec& g = eng.P.grid;
  ControlPath alpha = init_control ? *init_control : ControlPath(g, eng.M);
  Momentum m0(g);
  if (!init_control && options.init == SolveOptions::Init::random) {
    std::mt19937_64 rng(options.seed);
    int kmax = std::min(3, g.dealias_limit());
    for (int i = 0; i <= eng.M; ++i)
      alpha.node(i) = random_band_limited(g, kmax, options.random_amplitude, rng);
    if (eng.sequence)
      m0 = retag<MomentumTag>(
          random_band_limited(g, kmax, options.random_amplitude, rng));
  }
  return eng.to_spec(alpha, eng.sequence ? &m0 : nullptr);
}

}  // namespace

std::pair<double, double> endpoint_residual(const Trajectory& traj,
                                            const SplineProblem& problem) {
  require_same_grid(traj.grid(), problem.grid, "endpoint_residual");
  if (traj.steps() != problem.time_steps)
    throw ValidationError("endpoint_residual: trajectory step count differs from problem");
  SobolevMetric ms(problem.grid, problem.s);
  VectorField gapd = traj.states.back().phi.displacement();
  gapd -= problem.phi1.displacement();
  double r_phi = inner_hs(gapd, gapd, ms);
  VectorField gapxi = ms.sharp(traj.states.back().m);
  gapxi -= compose_field(problem.v1,
                         inverse(problem.phi1, EvalScheme::cubic, 1e-10, 500));
  double r_xi = inner_hs(gapxi, gapxi, ms);
  return {r_phi, r_xi};
}

ControlPath gradient(const ControlPath& control, const SplineProblem& problem,
                     double penalty_weight) {
  require_same_grid(control.grid(), problem.grid, "gradient");
  if (control.steps() != problem.time_steps)
    throw ValidationError("gradient: control step count differs from problem");
  Engine eng(problem, nullptr);
  SpecVec u = eng.to_spec(control, nullptr);
  SpecVec g;
  eng.gradient_spec(u, penalty_weight, g);
  return eng.alpha_from_spec(g);
}

SolveResult solve(const SplineProblem& problem, const SolveOptions& options) {
  Engine eng(problem, nullptr);
  return run_solver(eng, initial_guess(eng, options, nullptr), options);
}

SolveResult solve(const SplineProblem& problem, const ControlPath& init,
                  const SolveOptions& options) {
  require_same_grid(init.grid(), problem.grid, "solve initial control");
  if (init.steps() != problem.time_steps)
    throw ValidationError("solve: initial control step count differs from problem");
  Engine eng(problem, nullptr);
  return run_solver(eng, initial_guess(eng, options, &init), options);
}

SolveResult interpolate_sequence(const KnotSequence& sequence,
                                 const SplineProblem& problem,
                                 const SolveOptions& options) {
  Engine eng(problem, &sequence);
  return run_solver(eng, initial_guess(eng, options, nullptr), options);
}

}  // namespace diffspline
