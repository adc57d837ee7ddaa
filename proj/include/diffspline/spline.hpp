#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diffspline/dynamics.hpp"

namespace diffspline {

// Quadratic-penalty continuation: the constraint weight starts at `initial`
// and is multiplied by `growth` after every inner round.
struct PenaltySchedule {
  double initial = 10.0;
  double growth = 10.0;
  int max_rounds = 5;
};

struct SolverTolerances {
  double gradient = 1e-8;    // W-norm of the gradient ends an inner round
  double endpoint = 1e-6;    // squared residual target (endpoint / knots)
  int max_iterations = 500;  // inner-round iteration cap
};

// Acceleration-minimizing interpolation problem between two boundary states
// on the diffeomorphism group: find the control alpha minimizing
//   Q(alpha) = int_0^1 ||alpha(t)||^2_{H^{s'}} dt
// subject to the forced momentum dynamics, with endpoint constraints
// phi(1) = phi1, xi(1) = v1 o phi1^{-1} handled by quadratic penalty.
// Construction validates every hypothesis before any computation:
//   s > dim/2 + 1, and s' >= s + 1 (or s' > s with allow_sprime_below).
struct SplineProblem {
  GridSpec grid;
  double s = 0.0;
  double s_prime = 0.0;
  int time_steps = 0;
  Diffeo phi0, phi1;
  VectorField v0, v1;  // Lagrangian boundary velocities (of the path itself)
  PenaltySchedule penalty;
  SolverTolerances tol;
  bool allow_sprime_below = false;

  SplineProblem(const GridSpec& grid, double s, double s_prime, int time_steps,
                Diffeo phi0, VectorField v0, Diffeo phi1, VectorField v1,
                PenaltySchedule penalty = {}, SolverTolerances tol = {},
                bool allow_sprime_below = false);
};

// Interpolation targets at interior times for sequence mode. Times must be
// strictly increasing in (0, 1]; each is snapped to the nearest time node
// when solving. The initial speed penalty lambda0 must be positive: without
// it the sequence objective has infimum zero (winding paths can connect the
// knots with arbitrarily little acceleration) and minimizers cease to exist.
struct Knot {
  double time = 0.0;
  Diffeo target;
};

struct KnotSequence {
  std::vector<Knot> knots;
  double lambda0 = 0.0;

  KnotSequence(std::vector<Knot> knots, double lambda0);
};

struct RoundReport {
  double penalty = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;  // Q at round end
  std::vector<double> merit_history;
  std::string exit;  // gradient-tol | line-search | max-iterations
};

struct SolveReport {
  bool converged = false;
  std::string status;  // converged | residual-stall | max-rounds
  double objective = 0.0;       // Q(alpha) at the solution
  double speed_penalty = 0.0;   // lambda0 ||xi(0)||^2_{H^{s'}} (sequence mode)
  double endpoint_residual_phi = 0.0;
  double endpoint_residual_xi = 0.0;
  std::vector<double> knot_residuals;
  std::vector<double> knot_snap_distances;
  double final_penalty = 0.0;
  double gradient_norm = 0.0;
  double transport_gap = 0.0;
  double gronwall_identity_gap = 0.0;
  bool gronwall_bounds_ok = true;
  std::vector<RoundReport> rounds;
  double wall_seconds = 0.0;  // serialized under a separate timing subtree
};

struct SolveOptions {
  enum class Init { zero, random };
  Init init = Init::zero;
  std::uint64_t seed = 0;
  double random_amplitude = 0.01;
};

struct SolveResult {
  Trajectory trajectory;
  ControlPath control;
  std::optional<Momentum> m0;  // sequence mode: recovered initial momentum
  SolveReport report;
};

// Trapezoid rule for Q(alpha) = int_0^1 ||alpha(t)||^2_{H^{s'}} dt.
double objective(const ControlPath& control, double s_prime);

// Squared H^s gaps (displacement, Eulerian velocity) between the trajectory
// endpoint and the problem's boundary targets.
std::pair<double, double> endpoint_residual(const Trajectory& traj,
                                            const SplineProblem& problem);

// Gradient of Q + penalty * (endpoint residuals) with respect to the control,
// as the H^{s'} Riesz representation per node: the exact transpose of the
// discrete rollout (same RK4 stages), so finite differences of the merit
// match <gradient, direction>_W to round-off-limited accuracy.
ControlPath gradient(const ControlPath& control, const SplineProblem& problem,
                     double penalty_weight);

SolveResult solve(const SplineProblem& problem, const SolveOptions& options = {});
SolveResult solve(const SplineProblem& problem, const ControlPath& init,
                  const SolveOptions& options = {});

// Sequence mode: start state fixed at (phi0, free initial velocity); knots
// contribute position-only penalty terms; the initial velocity enters as an
// extra momentum unknown with speed penalty lambda0 ||xi(0)||^2_{H^{s'}}.
SolveResult interpolate_sequence(const KnotSequence& sequence,
                                 const SplineProblem& problem,
                                 const SolveOptions& options = {});

}  // namespace diffspline
