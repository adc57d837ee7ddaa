// Python bindings for the main operations: metric algebra, Lie operators,
// diffeomorphism calculus, rollouts, and the interpolation solvers. Fields
// cross the boundary as float64 arrays shaped (dim, n) or (dim, n, n),
// component-major like the C++ storage.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "diffspline/checks.hpp"
#include "diffspline/dynamics.hpp"
#include "diffspline/errors.hpp"
#include "diffspline/io.hpp"
#include "diffspline/lie_ops.hpp"
#include "diffspline/spline.hpp"

namespace py = pybind11;
using namespace diffspline;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_values(const GridSpec& g, const Array& arr, const char* name) {
  if (arr.ndim() != g.dim + 1 || arr.shape(0) != g.dim)
    throw ValidationError(std::string(name) + " must have shape (dim, n" +
                          (g.dim == 2 ? ", n)" : ")"));
  for (int a = 1; a <= g.dim; ++a)
    if (arr.shape(a) != g.n)
      throw ValidationError(std::string(name) + " axis sizes must equal n");
  std::vector<double> values(static_cast<size_t>(g.dim) * g.num_nodes());
  std::memcpy(values.data(), arr.data(), values.size() * sizeof(double));
  return values;
}

VectorField to_velocity(const GridSpec& g, const Array& arr, const char* name) {
  return VectorField(g, to_values(g, arr, name));
}

Momentum to_momentum(const GridSpec& g, const Array& arr, const char* name) {
  return Momentum(g, to_values(g, arr, name));
}

template <class Tag>
py::array from_field(const BasicField<Tag>& f) {
  const GridSpec& g = f.grid();
  std::vector<py::ssize_t> shape{g.dim};
  for (int a = 0; a < g.dim; ++a) shape.push_back(g.n);
  py::array_t<double> arr(shape);
  std::memcpy(arr.mutable_data(), f.raw().data(), f.raw().size() * sizeof(double));
  return arr;
}

py::array from_scalar(const ScalarField& f) {
  std::vector<py::ssize_t> shape;
  for (int a = 0; a < f.grid.dim; ++a) shape.push_back(f.grid.n);
  py::array_t<double> arr(shape);
  std::memcpy(arr.mutable_data(), f.values.data(), f.values.size() * sizeof(double));
  return arr;
}

ControlPath to_control(const GridSpec& g, const Array& arr) {
  if (arr.ndim() != g.dim + 2 || arr.shape(1) != g.dim)
    throw ValidationError("control must have shape (nodes, dim, n" +
                          std::string(g.dim == 2 ? ", n)" : ")"));
  int nodes = static_cast<int>(arr.shape(0));
  if (nodes < 5) throw ValidationError("control needs at least 5 time nodes");
  size_t per = static_cast<size_t>(g.dim) * g.num_nodes();
  std::vector<VectorField> out;
  out.reserve(nodes);
  for (int i = 0; i < nodes; ++i) {
    std::vector<double> values(per);
    std::memcpy(values.data(), arr.data() + per * i, per * sizeof(double));
    out.emplace_back(g, std::move(values));
  }
  return ControlPath(std::move(out));
}

py::array stack_fields(const std::vector<py::array>& arrs) {
  py::list l;
  for (const auto& a : arrs) l.append(a);
  return py::module_::import("numpy").attr("stack")(l).cast<py::array>();
}

py::object json_to_py(const io::json& j) {
  namespace nl = nlohmann;
  switch (j.type()) {
    case nl::json::value_t::object: {
      py::dict d;
      for (auto it = j.begin(); it != j.end(); ++it)
        d[py::str(it.key())] = json_to_py(it.value());
      return d;
    }
    case nl::json::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(json_to_py(v));
      return l;
    }
    case nl::json::value_t::string:
      return py::str(j.get<std::string>());
    case nl::json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nl::json::value_t::number_integer:
    case nl::json::value_t::number_unsigned:
      return py::int_(j.get<long long>());
    case nl::json::value_t::number_float:
      return py::float_(j.get<double>());
    default:
      return py::none();
  }
}

py::dict trajectory_dict(const Trajectory& traj, const SobolevMetric& metric) {
  std::vector<py::array> phis, ms, xis;
  for (const auto& st : traj.states) {
    phis.push_back(from_field(st.phi.displacement()));
    ms.push_back(from_field(st.m));
    xis.push_back(from_field(metric.sharp(st.m)));
  }
  py::dict d;
  d["phi"] = stack_fields(phis);
  d["m"] = stack_fields(ms);
  d["xi"] = stack_fields(xis);
  return d;
}

Trajectory rebuild_trajectory(const GridSpec& g, const Array& phis, const Array& ms,
                              ControlPath control) {
  if (phis.ndim() != g.dim + 2 || ms.ndim() != g.dim + 2 ||
      phis.shape(0) != ms.shape(0))
    throw ValidationError("phi and m stacks must share a leading node axis");
  int nodes = static_cast<int>(phis.shape(0));
  size_t per = static_cast<size_t>(g.dim) * g.num_nodes();
  Trajectory traj;
  traj.control = std::move(control);
  for (int i = 0; i < nodes; ++i) {
    std::vector<double> dv(per), mv(per);
    std::memcpy(dv.data(), phis.data() + per * i, per * sizeof(double));
    std::memcpy(mv.data(), ms.data() + per * i, per * sizeof(double));
    traj.states.push_back(
        {Diffeo(VectorField(g, std::move(dv))), Momentum(g, std::move(mv))});
  }
  return traj;
}

SplineProblem make_problem(const GridSpec& g, double s, double s_prime,
                           int time_steps, const Array& phi0, const Array& v0,
                           const Array& phi1, const Array& v1, double pen_initial,
                           double pen_growth, int pen_rounds, double tol_gradient,
                           double tol_endpoint, int max_iterations,
                           bool allow_sprime_below) {
  PenaltySchedule pen{pen_initial, pen_growth, pen_rounds};
  SolverTolerances tol{tol_gradient, tol_endpoint, max_iterations};
  return SplineProblem(g, s, s_prime, time_steps,
                       Diffeo(to_velocity(g, phi0, "phi0")),
                       to_velocity(g, v0, "v0"), Diffeo(to_velocity(g, phi1, "phi1")),
                       to_velocity(g, v1, "v1"), pen, tol, allow_sprime_below);
}

py::dict result_dict(const SolveResult& result, const SobolevMetric& metric) {
  py::dict d = trajectory_dict(result.trajectory, metric);
  std::vector<py::array> nodes;
  for (const auto& a : result.control.nodes()) nodes.push_back(from_field(a));
  d["control"] = stack_fields(nodes);
  if (result.m0) d["m0"] = from_field(*result.m0);
  d["report"] = json_to_py(io::solve_report_json(result.report));
  d["converged"] = result.report.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "variational interpolation on torus diffeomorphism groups";

  py::register_exception<Error>(mod, "DiffsplineError");

  py::class_<GridSpec>(mod, "GridSpec")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("n"))
      .def_readonly("dim", &GridSpec::dim)
      .def_readonly("n", &GridSpec::n)
      .def_property_readonly("num_nodes", &GridSpec::num_nodes)
      .def("__repr__", [](const GridSpec& g) {
        return "GridSpec(dim=" + std::to_string(g.dim) +
               ", n=" + std::to_string(g.n) + ")";
      });

  mod.def(
      "node_coords",
      [](const GridSpec& g) {
        std::vector<py::array> axes;
        int N = g.num_nodes();
        for (int a = 0; a < g.dim; ++a) {
          py::array_t<double> arr(N);
          for (int i = 0; i < N; ++i) arr.mutable_at(i) = g.node(i)[a];
          axes.push_back(arr);
        }
        return stack_fields(axes);
      },
      py::arg("grid"), "flat node coordinates, axis-major, shape (dim, n^dim)");

  mod.def(
      "inner_hs",
      [](const GridSpec& g, const Array& u, const Array& w, double s) {
        SobolevMetric m(g, s);
        return inner_hs(to_velocity(g, u, "u"), to_velocity(g, w, "w"), m);
      },
      py::arg("grid"), py::arg("u"), py::arg("w"), py::arg("s"));

  mod.def(
      "flat",
      [](const GridSpec& g, const Array& u, double s) {
        return from_field(SobolevMetric(g, s).flat(to_velocity(g, u, "u")));
      },
      py::arg("grid"), py::arg("u"), py::arg("s"));

  mod.def(
      "sharp",
      [](const GridSpec& g, const Array& m, double s) {
        return from_field(SobolevMetric(g, s).sharp(to_momentum(g, m, "m")));
      },
      py::arg("grid"), py::arg("m"), py::arg("s"));

  mod.def(
      "dual_norm_sq",
      [](const GridSpec& g, const Array& m, double sigma) {
        return dual_norm_sq(to_momentum(g, m, "m"), sigma);
      },
      py::arg("grid"), py::arg("m"), py::arg("sigma"));

  mod.def(
      "ad",
      [](const GridSpec& g, const Array& xi, const Array& eta) {
        return from_field(ad(to_velocity(g, xi, "xi"), to_velocity(g, eta, "eta")));
      },
      py::arg("grid"), py::arg("xi"), py::arg("eta"));

  mod.def(
      "coad",
      [](const GridSpec& g, const Array& xi, const Array& m) {
        return from_field(coad(to_velocity(g, xi, "xi"), to_momentum(g, m, "m")));
      },
      py::arg("grid"), py::arg("xi"), py::arg("m"));

  mod.def(
      "ad_dagger",
      [](const GridSpec& g, const Array& nu, const Array& kappa, double s) {
        SobolevMetric metric(g, s);
        return from_field(ad_dagger(to_velocity(g, nu, "nu"),
                                    to_velocity(g, kappa, "kappa"), metric));
      },
      py::arg("grid"), py::arg("nu"), py::arg("kappa"), py::arg("s"));

  mod.def(
      "jacobian",
      [](const GridSpec& g, const Array& disp) {
        return from_scalar(jacobian(Diffeo(to_velocity(g, disp, "disp"))));
      },
      py::arg("grid"), py::arg("disp"));

  mod.def(
      "compose",
      [](const GridSpec& g, const Array& outer, const Array& inner,
         const std::string& scheme) {
        Diffeo r = compose(Diffeo(to_velocity(g, outer, "outer")),
                           Diffeo(to_velocity(g, inner, "inner")),
                           parse_eval_scheme(scheme));
        return from_field(r.displacement());
      },
      py::arg("grid"), py::arg("outer"), py::arg("inner"),
      py::arg("scheme") = "cubic");

  mod.def(
      "inverse",
      [](const GridSpec& g, const Array& disp, const std::string& scheme) {
        return from_field(
            inverse(Diffeo(to_velocity(g, disp, "disp")), parse_eval_scheme(scheme))
                .displacement());
      },
      py::arg("grid"), py::arg("disp"), py::arg("scheme") = "cubic");

  mod.def(
      "compose_field",
      [](const GridSpec& g, const Array& f, const Array& disp,
         const std::string& scheme) {
        return from_field(compose_field(to_velocity(g, f, "f"),
                                        Diffeo(to_velocity(g, disp, "disp")),
                                        parse_eval_scheme(scheme)));
      },
      py::arg("grid"), py::arg("f"), py::arg("disp"), py::arg("scheme") = "cubic");

  mod.def(
      "geodesic_shoot",
      [](const GridSpec& g, const Array& m0, double s, int steps,
         const std::string& scheme) {
        SobolevMetric metric(g, s);
        return trajectory_dict(geodesic_shoot(to_momentum(g, m0, "m0"), metric,
                                              steps, parse_eval_scheme(scheme)),
                               metric);
      },
      py::arg("grid"), py::arg("m0"), py::arg("s"), py::arg("steps"),
      py::arg("scheme") = "cubic");

  mod.def(
      "forced_rollout",
      [](const GridSpec& g, const Array& phi0, const Array& m0, const Array& control,
         double s, const std::string& scheme) {
        SobolevMetric metric(g, s);
        return trajectory_dict(
            forced_rollout({Diffeo(to_velocity(g, phi0, "phi0")),
                            to_momentum(g, m0, "m0")},
                           to_control(g, control), metric, parse_eval_scheme(scheme)),
            metric);
      },
      py::arg("grid"), py::arg("phi0"), py::arg("m0"), py::arg("control"),
      py::arg("s"), py::arg("scheme") = "cubic");

  mod.def(
      "transport_residual",
      [](const GridSpec& g, const Array& phis, const Array& ms, const Array& control,
         double s, const std::string& scheme) {
        ControlPath c = to_control(g, control);
        Trajectory traj = rebuild_trajectory(g, phis, ms, c);
        return transport_residual(traj, c, SobolevMetric(g, s),
                                  parse_eval_scheme(scheme));
      },
      py::arg("grid"), py::arg("phi"), py::arg("m"), py::arg("control"),
      py::arg("s"), py::arg("scheme") = "cubic");

  mod.def(
      "gronwall_monitor",
      [](const GridSpec& g, const Array& phis, const Array& ms, const Array& control,
         double s) {
        ControlPath c = to_control(g, control);
        Trajectory traj = rebuild_trajectory(g, phis, ms, c);
        return json_to_py(io::gronwall_json(
            gronwall_monitor(traj, c, SobolevMetric(g, s))));
      },
      py::arg("grid"), py::arg("phi"), py::arg("m"), py::arg("control"),
      py::arg("s"));

  mod.def(
      "objective",
      [](const GridSpec& g, const Array& control, double s_prime) {
        return objective(to_control(g, control), s_prime);
      },
      py::arg("grid"), py::arg("control"), py::arg("s_prime"));

  mod.def(
      "solve",
      [](const GridSpec& g, double s, double s_prime, int time_steps,
         const Array& phi0, const Array& v0, const Array& phi1, const Array& v1,
         double penalty_initial, double penalty_growth, int penalty_rounds,
         double tol_gradient, double tol_endpoint, int max_iterations,
         bool allow_sprime_below, const std::string& init, std::uint64_t seed,
         double random_amplitude) {
        SplineProblem problem = make_problem(
            g, s, s_prime, time_steps, phi0, v0, phi1, v1, penalty_initial,
            penalty_growth, penalty_rounds, tol_gradient, tol_endpoint,
            max_iterations, allow_sprime_below);
        SolveOptions options;
        options.init = init == "random" ? SolveOptions::Init::random
                                        : SolveOptions::Init::zero;
        options.seed = seed;
        options.random_amplitude = random_amplitude;
        return result_dict(solve(problem, options), SobolevMetric(g, s));
      },
      py::arg("grid"), py::arg("s"), py::arg("s_prime"), py::arg("time_steps"),
      py::arg("phi0"), py::arg("v0"), py::arg("phi1"), py::arg("v1"),
      py::arg("penalty_initial") = 10.0, py::arg("penalty_growth") = 10.0,
      py::arg("penalty_rounds") = 5, py::arg("tol_gradient") = 1e-8,
      py::arg("tol_endpoint") = 1e-6, py::arg("max_iterations") = 500,
      py::arg("allow_sprime_below") = false, py::arg("init") = "zero",
      py::arg("seed") = 0, py::arg("random_amplitude") = 0.01);

  mod.def(
      "interpolate_sequence",
      [](const GridSpec& g, double s, double s_prime, int time_steps,
         const Array& phi0, const std::vector<std::pair<double, Array>>& knots,
         double lambda0, double penalty_initial, double penalty_growth,
         int penalty_rounds, double tol_gradient, double tol_endpoint,
         int max_iterations, bool allow_sprime_below, const std::string& init,
         std::uint64_t seed, double random_amplitude) {
        if (knots.empty()) throw ValidationError("knots must not be empty");
        std::vector<Knot> ks;
        for (const auto& [t, arr] : knots)
          ks.push_back({t, Diffeo(to_velocity(g, arr, "knot target"))});
        KnotSequence sequence(std::move(ks), lambda0);
        VectorField zero(g);
        PenaltySchedule pen{penalty_initial, penalty_growth, penalty_rounds};
        SolverTolerances tol{tol_gradient, tol_endpoint, max_iterations};
        SplineProblem problem(g, s, s_prime, time_steps,
                              Diffeo(to_velocity(g, phi0, "phi0")), zero,
                              sequence.knots.back().target, zero, pen, tol,
                              allow_sprime_below);
        SolveOptions options;
        options.init = init == "random" ? SolveOptions::Init::random
                                        : SolveOptions::Init::zero;
        options.seed = seed;
        options.random_amplitude = random_amplitude;
        return result_dict(interpolate_sequence(sequence, problem, options),
                           SobolevMetric(g, s));
      },
      py::arg("grid"), py::arg("s"), py::arg("s_prime"), py::arg("time_steps"),
      py::arg("phi0"), py::arg("knots"), py::arg("lambda0"),
      py::arg("penalty_initial") = 10.0, py::arg("penalty_growth") = 10.0,
      py::arg("penalty_rounds") = 5, py::arg("tol_gradient") = 1e-8,
      py::arg("tol_endpoint") = 1e-6, py::arg("max_iterations") = 500,
      py::arg("allow_sprime_below") = false, py::arg("init") = "zero",
      py::arg("seed") = 0, py::arg("random_amplitude") = 0.01);

  mod.def(
      "run_checks",
      [](std::uint64_t seed, const std::string& mutate) {
        checks::Mutation m = checks::Mutation::none;
        if (mutate == "coad-sign") m = checks::Mutation::coad_sign;
        else if (!mutate.empty()) throw ValidationError("unknown mutation");
        return json_to_py(checks::to_json(checks::run_all(seed, m)));
      },
      py::arg("seed") = 0, py::arg("mutate") = "");
}
