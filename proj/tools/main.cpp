// Command-line driver: geodesic shooting, spline boundary problems, knot
// sequence interpolation, and the invariant check suite. Every failure is
// reported as a single line `error: <code>: <message>` on stderr.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diffspline/checks.hpp"
#include "diffspline/dynamics.hpp"
#include "diffspline/errors.hpp"
#include "diffspline/io.hpp"
#include "diffspline/spline.hpp"

namespace ds = diffspline;
using ds::io::json;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool verbose = false;
};

// `shown` is the dotted path used in error messages; defaults to the key.
const json& need(const json& j, const std::string& key, std::string shown = "") {
  if (shown.empty()) shown = key;
  if (!j.is_object() || !j.contains(key))
    throw ds::ValidationError("config is missing key \"" + shown + "\"");
  return j.at(key);
}

double need_number(const json& j, const std::string& key, std::string shown = "") {
  if (shown.empty()) shown = key;
  const json& v = need(j, key, shown);
  if (!v.is_number())
    throw ds::ValidationError("config key \"" + shown + "\" must be a number");
  return v.get<double>();
}

int need_integer(const json& j, const std::string& key, std::string shown = "") {
  if (shown.empty()) shown = key;
  const json& v = need(j, key, shown);
  if (!v.is_number_integer())
    throw ds::ValidationError("config key \"" + shown + "\" must be an integer");
  return v.get<int>();
}

ds::GridSpec parse_grid(const json& cfg) {
  const json& g = need(cfg, "grid");
  return ds::GridSpec(need_integer(g, "dim", "grid.dim"),
                      need_integer(g, "n", "grid.n"));
}

std::string resolve(const std::string& config_path, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute()) return rel;
  return (fs::path(config_path).parent_path() / p).string();
}

ds::VectorField parse_velocity(const json& spec, const ds::GridSpec& grid,
                               const std::string& key, const Options& opt) {
  if (spec.is_string() && spec.get<std::string>() == "zero")
    return ds::VectorField(grid);
  if (spec.is_object() && spec.contains("file")) {
    ds::VectorField f = ds::io::read_vector_field(
        resolve(opt.config, spec.at("file").get<std::string>()));
    ds::require_same_grid(f.grid(), grid, key.c_str());
    return f;
  }
  throw ds::ValidationError("config key \"" + key +
                            "\" must be \"zero\" or {\"file\": PATH}");
}

ds::Diffeo parse_diffeo(const json& spec, const ds::GridSpec& grid,
                        const std::string& key, const Options& opt) {
  if (spec.is_string() && spec.get<std::string>() == "identity")
    return ds::Diffeo::identity(grid);
  if (spec.is_object() && spec.contains("file")) {
    ds::Diffeo d =
        ds::io::read_diffeo(resolve(opt.config, spec.at("file").get<std::string>()));
    ds::require_same_grid(d.grid(), grid, key.c_str());
    return d;
  }
  throw ds::ValidationError("config key \"" + key +
                            "\" must be \"identity\" or {\"file\": PATH}");
}

ds::Momentum parse_momentum(const json& spec, const ds::GridSpec& grid,
                            const std::string& key, const Options& opt) {
  if (spec.is_object() && spec.contains("file")) {
    ds::Momentum m = ds::io::read_momentum(
        resolve(opt.config, spec.at("file").get<std::string>()));
    ds::require_same_grid(m.grid(), grid, key.c_str());
    return m;
  }
  if (spec.is_object() && spec.contains("random")) {
    const json& r = spec.at("random");
    std::mt19937_64 rng(opt.seed);
    return ds::retag<ds::MomentumTag>(ds::random_band_limited(
        grid, need_integer(r, "kmax", key + ".random.kmax"),
        need_number(r, "amplitude", key + ".random.amplitude"), rng));
  }
  throw ds::ValidationError("config key \"" + key +
                            "\" must be {\"file\": PATH} or {\"random\": "
                            "{\"kmax\", \"amplitude\"}}");
}

ds::PenaltySchedule parse_penalty(const json& cfg) {
  ds::PenaltySchedule p;
  if (!cfg.contains("penalty")) return p;
  const json& j = cfg.at("penalty");
  if (j.contains("initial")) p.initial = need_number(j, "initial");
  if (j.contains("growth")) p.growth = need_number(j, "growth");
  if (j.contains("max_rounds")) p.max_rounds = need_integer(j, "max_rounds");
  return p;
}

ds::SolverTolerances parse_tolerances(const json& cfg) {
  ds::SolverTolerances t;
  if (!cfg.contains("tolerances")) return t;
  const json& j = cfg.at("tolerances");
  if (j.contains("gradient")) t.gradient = need_number(j, "gradient");
  if (j.contains("endpoint")) t.endpoint = need_number(j, "endpoint");
  if (j.contains("max_iterations"))
    t.max_iterations = need_integer(j, "max_iterations");
  return t;
}

ds::SolveOptions parse_solve_options(const json& cfg, const Options& opt) {
  ds::SolveOptions so;
  so.seed = opt.seed;
  if (cfg.contains("init")) {
    std::string init = need(cfg, "init").get<std::string>();
    if (init == "zero")
      so.init = ds::SolveOptions::Init::zero;
    else if (init == "random")
      so.init = ds::SolveOptions::Init::random;
    else
      throw ds::ValidationError("config key \"init\" must be \"zero\" or \"random\"");
  }
  if (cfg.contains("random_amplitude"))
    so.random_amplitude = need_number(cfg, "random_amplitude");
  return so;
}

ds::EvalScheme parse_scheme(const json& cfg) {
  if (!cfg.contains("eval_scheme")) return ds::EvalScheme::cubic;
  const json& v = cfg.at("eval_scheme");
  if (!v.is_string())
    throw ds::ValidationError("config key \"eval_scheme\" must be a string");
  return ds::parse_eval_scheme(v.get<std::string>());
}

void report_solution(const ds::SolveResult& result, const ds::SobolevMetric& metric,
                     const Options& opt) {
  fs::create_directories(opt.out);
  ds::io::write_trajectory(opt.out + "/trajectory", result.trajectory, metric);
  if (result.m0)
    ds::io::write_field(opt.out + "/m0.field", *result.m0, "m0");
  json rep = ds::io::solve_report_json(result.report);
  ds::io::write_json(opt.out + "/report.json", rep);
  if (opt.verbose) std::cout << rep.dump(2) << '\n';
  std::cout << (result.report.converged ? "converged" : result.report.status)
            << " objective " << result.report.objective << '\n';
}

int run_geodesic(const Options& opt) {
  json cfg = ds::io::read_json(opt.config);
  ds::GridSpec grid = parse_grid(cfg);
  ds::SobolevMetric metric(grid, need_number(need(cfg, "metric"), "s", "metric.s"));
  int steps = need_integer(cfg, "steps");
  ds::Momentum m0 = parse_momentum(need(cfg, "momentum"), grid, "momentum", opt);
  ds::EvalScheme scheme = parse_scheme(cfg);

  ds::Trajectory traj = ds::geodesic_shoot(m0, metric, steps, scheme);
  ds::ControlPath zero_control(grid, steps);

  fs::create_directories(opt.out);
  ds::io::write_trajectory(opt.out + "/trajectory", traj, metric);

  double f0 = 0.5 * ds::dual_norm_sq(traj.states.front().m, metric.order());
  double fM = 0.5 * ds::dual_norm_sq(traj.states.back().m, metric.order());
  json rep;
  rep["energy"] = {{"initial", f0},
                   {"final", fM},
                   {"relative_drift", std::abs(fM - f0) / std::max(f0, 1e-30)}};
  rep["transport_gap"] = ds::transport_residual(traj, zero_control, metric, scheme);
  rep["gronwall"] = ds::io::gronwall_json(ds::gronwall_monitor(traj, zero_control, metric));
  ds::io::write_json(opt.out + "/conservation.json", rep);
  if (opt.verbose) std::cout << rep.dump(2) << '\n';
  std::cout << "geodesic ok, relative energy drift "
            << rep["energy"]["relative_drift"].get<double>() << '\n';
  return 0;
}

int run_spline(const Options& opt) {
  json cfg = ds::io::read_json(opt.config);
  ds::GridSpec grid = parse_grid(cfg);
  const json& metric_cfg = need(cfg, "metric");
  double s = need_number(metric_cfg, "s", "metric.s");
  double sp = need_number(metric_cfg, "s_prime", "metric.s_prime");
  const json& boundary = need(cfg, "boundary");
  bool allow = cfg.contains("allow_sprime_below") &&
               need(cfg, "allow_sprime_below").get<bool>();

  ds::SplineProblem problem(
      grid, s, sp, need_integer(cfg, "time_steps"),
      parse_diffeo(need(boundary, "phi0"), grid, "boundary.phi0", opt),
      parse_velocity(need(boundary, "v0"), grid, "boundary.v0", opt),
      parse_diffeo(need(boundary, "phi1"), grid, "boundary.phi1", opt),
      parse_velocity(need(boundary, "v1"), grid, "boundary.v1", opt),
      parse_penalty(cfg), parse_tolerances(cfg), allow);

  ds::SolveResult result = ds::solve(problem, parse_solve_options(cfg, opt));
  report_solution(result, ds::SobolevMetric(grid, s), opt);
  return result.report.converged ? 0 : 2;
}

int run_sequence(const Options& opt) {
  json cfg = ds::io::read_json(opt.config);
  ds::GridSpec grid = parse_grid(cfg);
  const json& metric_cfg = need(cfg, "metric");
  double s = need_number(metric_cfg, "s", "metric.s");
  double sp = need_number(metric_cfg, "s_prime", "metric.s_prime");
  bool allow = cfg.contains("allow_sprime_below") &&
               need(cfg, "allow_sprime_below").get<bool>();

  ds::Diffeo phi0 = cfg.contains("phi0")
                        ? parse_diffeo(need(cfg, "phi0"), grid, "phi0", opt)
                        : ds::Diffeo::identity(grid);

  const json& knots_cfg = need(cfg, "knots");
  if (!knots_cfg.is_array() || knots_cfg.empty())
    throw ds::ValidationError("config key \"knots\" must be a non-empty array");
  std::vector<ds::Knot> knots;
  for (size_t i = 0; i < knots_cfg.size(); ++i) {
    const json& k = knots_cfg[i];
    std::string where = "knots[" + std::to_string(i) + "]";
    knots.push_back({need_number(k, "time", where + ".time"),
                     parse_diffeo(need(k, "target", where + ".target"), grid,
                                  where + ".target", opt)});
  }
  ds::KnotSequence sequence(std::move(knots), need_number(cfg, "lambda0"));

  // The endpoint boundary slots are inert in sequence mode; the last knot
  // stands in for phi1 so problem validation still sees consistent grids.
  ds::SplineProblem problem(grid, s, sp, need_integer(cfg, "time_steps"), phi0,
                            ds::VectorField(grid), sequence.knots.back().target,
                            ds::VectorField(grid), parse_penalty(cfg),
                            parse_tolerances(cfg), allow);

  ds::SolveResult result =
      ds::interpolate_sequence(sequence, problem, parse_solve_options(cfg, opt));
  report_solution(result, ds::SobolevMetric(grid, s), opt);
  return result.report.converged ? 0 : 2;
}

int run_check(const Options& opt, const std::string& mutate) {
  ds::checks::Mutation mutation = ds::checks::Mutation::none;
  if (mutate == "coad-sign")
    mutation = ds::checks::Mutation::coad_sign;
  else if (!mutate.empty())
    throw ds::ValidationError("unknown mutation \"" + mutate + "\"");

  auto results = ds::checks::run_all(opt.seed, mutation);
  for (const auto& r : results)
    std::printf("%s %-32s %.3e <= %.3e\n", r.pass ? "pass" : "FAIL",
                r.name.c_str(), r.value, r.threshold);
  json rep = ds::checks::to_json(results);
  rep["seed"] = opt.seed;
  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    ds::io::write_json(opt.out + "/checks.json", rep);
  }
  bool ok = ds::checks::all_pass(results);
  std::cout << (ok ? "all checks passed" : "checks FAILED") << '\n';
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational interpolation on torus diffeomorphism groups"};
  app.require_subcommand(1);

  Options opt;
  std::string mutate;

  auto add_common = [&](CLI::App* sub, bool needs_config, bool needs_out) {
    auto* c = sub->add_option("--config", opt.config, "JSON problem description");
    if (needs_config) c->required();
    auto* o = sub->add_option("--out", opt.out, "output directory");
    if (needs_out) o->required();
    sub->add_option("--seed", opt.seed, "seed for randomized inputs");
    sub->add_flag("--verbose", opt.verbose, "print full reports to stdout");
  };

  CLI::App* geodesic = app.add_subcommand(
      "geodesic", "shoot the unforced dynamics and write conservation reports");
  add_common(geodesic, true, true);
  CLI::App* spline = app.add_subcommand(
      "spline", "solve the two-point acceleration-minimizing problem");
  add_common(spline, true, true);
  CLI::App* sequence = app.add_subcommand(
      "sequence", "interpolate a sequence of target maps with free initial speed");
  add_common(sequence, true, true);
  CLI::App* check =
      app.add_subcommand("check", "run the deterministic invariant suite");
  add_common(check, false, false);
  check->add_option("--mutate", mutate,
                    "inject a deliberate defect (coad-sign) to prove the "
                    "checks can fail");

  CLI11_PARSE(app, argc, argv);

  try {
    if (geodesic->parsed()) return run_geodesic(opt);
    if (spline->parsed()) return run_spline(opt);
    if (sequence->parsed()) return run_sequence(opt);
    return run_check(opt, mutate);
  } catch (const ds::Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
}
