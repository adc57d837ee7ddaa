#include "diffspline/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "diffspline/errors.hpp"

namespace diffspline::io {

namespace {

void write_payload(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  static_assert(sizeof(double) == 8);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 8));
  } else {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, 8);
      char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(bits >> (8 * i));
      out.write(b, 8);
    }
  }
  if (!out) throw IoError("short write to " + path);
}

std::vector<double> read_payload(const std::string& path, size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> values(count);
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * 8));
  } else {
    for (size_t i = 0; i < count; ++i) {
      char b[8];
      in.read(b, 8);
      std::uint64_t bits = 0;
      for (int j = 0; j < 8; ++j)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[j])) << (8 * j);
      std::memcpy(&values[i], &bits, 8);
    }
  }
  if (!in || in.gcount() == 0)
    throw IoError(path + " is shorter than its sidecar promises");
  in.peek();
  if (!in.eof()) throw IoError(path + " is longer than its sidecar promises");
  return values;
}

void write_sidecar(const std::string& path, const GridSpec& grid,
                   const std::string& name, const char* type) {
  json meta;
  meta["dim"] = grid.dim;
  meta["n"] = grid.n;
  meta["components"] = grid.dim;
  meta["name"] = name;
  if (type) meta["type"] = type;
  write_json(path + ".json", meta);
}

struct FieldFile {
  GridSpec grid;
  std::string type;
  std::vector<double> values;
};

FieldFile read_field_file(const std::string& path) {
  json meta = read_json(path + ".json");
  for (const char* key : {"dim", "n", "components"})
    if (!meta.contains(key) || !meta[key].is_number_integer())
      throw IoError(path + ".json needs an integer key \"" + std::string(key) +
                    "\"");
  GridSpec grid(meta["dim"].get<int>(), meta["n"].get<int>());
  int comps = meta["components"].get<int>();
  if (comps != grid.dim)
    throw IoError(path + ".json: components must equal dim for vector data");
  std::string type;
  if (meta.contains("type") && meta["type"].is_string())
    type = meta["type"].get<std::string>();
  FieldFile f{grid, std::move(type),
              read_payload(path, static_cast<size_t>(comps) * grid.num_nodes())};
  return f;
}

}  // namespace

void write_field(const std::string& path, const VectorField& f,
                 const std::string& name) {
  write_payload(path, f.raw());
  write_sidecar(path, f.grid(), name, nullptr);
}

void write_field(const std::string& path, const Momentum& f,
                 const std::string& name) {
  write_payload(path, f.raw());
  write_sidecar(path, f.grid(), name, nullptr);
}

void write_diffeo(const std::string& path, const Diffeo& phi,
                  const std::string& name) {
  write_payload(path, phi.displacement().raw());
  write_sidecar(path, phi.grid(), name, "diffeo");
}

VectorField read_vector_field(const std::string& path) {
  FieldFile f = read_field_file(path);
  return VectorField(f.grid, std::move(f.values));
}

Momentum read_momentum(const std::string& path) {
  FieldFile f = read_field_file(path);
  return Momentum(f.grid, std::move(f.values));
}

Diffeo read_diffeo(const std::string& path) {
  FieldFile f = read_field_file(path);
  if (f.type != "diffeo")
    throw IoError(path + " does not hold a diffeomorphism (sidecar type \"" +
                  f.type + "\")");
  return Diffeo(VectorField(f.grid, std::move(f.values)));
}

void write_trajectory(const std::string& dir, const Trajectory& traj,
                      const SobolevMetric& metric) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());

  int M = traj.steps();
  json manifest;
  manifest["schema"] = "trajectory/1";
  manifest["grid"] = {{"dim", traj.grid().dim}, {"n", traj.grid().n}};
  manifest["steps"] = M;
  json times = json::array();
  json nodes = json::array();
  char buf[32];
  for (int i = 0; i <= M; ++i) {
    times.push_back(static_cast<double>(i) / M);
    std::snprintf(buf, sizeof buf, "%04d", i);
    std::string tag = buf;
    std::string phi_name = "phi_" + tag + ".field";
    std::string m_name = "m_" + tag + ".field";
    std::string xi_name = "xi_" + tag + ".field";
    std::string a_name = "alpha_" + tag + ".field";
    write_diffeo(dir + "/" + phi_name, traj.states[i].phi, "phi_" + tag);
    write_field(dir + "/" + m_name, traj.states[i].m, "m_" + tag);
    write_field(dir + "/" + xi_name, metric.sharp(traj.states[i].m), "xi_" + tag);
    write_field(dir + "/" + a_name, traj.control.node(i), "alpha_" + tag);
    nodes.push_back({{"phi", phi_name},
                     {"m", m_name},
                     {"xi", xi_name},
                     {"alpha", a_name}});
  }
  manifest["times"] = std::move(times);
  manifest["nodes"] = std::move(nodes);
  write_json(dir + "/manifest.json", manifest);
}

json solve_report_json(const SolveReport& report) {
  json j;
  j["converged"] = report.converged;
  j["status"] = report.status;
  j["objective"] = report.objective;
  j["speed_penalty"] = report.speed_penalty;
  j["endpoint_residual"] = {{"phi", report.endpoint_residual_phi},
                            {"xi", report.endpoint_residual_xi}};
  if (!report.knot_residuals.empty())
    j["knots"] = {{"residuals", report.knot_residuals},
                  {"snap_distances", report.knot_snap_distances}};
  j["final_penalty"] = report.final_penalty;
  j["gradient_norm"] = report.gradient_norm;
  j["diagnostics"] = {{"transport_gap", report.transport_gap},
                      {"gronwall_identity_gap", report.gronwall_identity_gap},
                      {"gronwall_bounds_ok", report.gronwall_bounds_ok}};
  json rounds = json::array();
  for (const auto& r : report.rounds)
    rounds.push_back({{"penalty", r.penalty},
                      {"iterations", r.iterations},
                      {"gradient_norm", r.gradient_norm},
                      {"objective", r.objective},
                      {"merit_history", r.merit_history},
                      {"exit", r.exit}});
  j["rounds"] = std::move(rounds);
  j["timing"] = {{"wall_seconds", report.wall_seconds}};
  return j;
}

json gronwall_json(const GronwallReport& report) {
  json j;
  j["energy"] = report.energy;
  j["energy_rate"] = report.energy_rate;
  j["control_pairing"] = report.control_pairing;
  j["bound_ok"] = report.bound_ok;
  j["max_identity_gap"] = report.max_identity_gap;
  j["all_bounds_ok"] = report.all_bounds_ok;
  return j;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError(path + " is not valid JSON");
  return j;
}

void write_json(const std::string& path, const json& value) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << value.dump(2) << '\n';
  if (!out) throw IoError("short write to " + path);
}

}  // namespace diffspline::io
