#pragma once

#include <string>

#include "json.hpp"

#include "diffspline/diffeo.hpp"
#include "diffspline/field.hpp"
#include "diffspline/spline.hpp"

namespace diffspline::io {

using nlohmann::json;

// On-disk field format: PATH holds the raw component-major float64 payload
// (little endian, row-major node order), PATH + ".json" a sidecar
// {"dim", "n", "components", "name"} plus "type": "diffeo" for displacement
// fields written from a Diffeo. Read errors name the offending path.

void write_field(const std::string& path, const VectorField& f,
                 const std::string& name);
void write_field(const std::string& path, const Momentum& f,
                 const std::string& name);
void write_diffeo(const std::string& path, const Diffeo& phi,
                  const std::string& name);

VectorField read_vector_field(const std::string& path);
Momentum read_momentum(const std::string& path);
Diffeo read_diffeo(const std::string& path);

// Trajectory directory: one field file per state component per node
// (phi_%04d.field, m_%04d.field, xi_%04d.field, alpha_%04d.field) plus
// manifest.json {"schema": "trajectory/1", "grid", "steps", "times", "nodes"}.
void write_trajectory(const std::string& dir, const Trajectory& traj,
                      const SobolevMetric& metric);

// Report serialization. Keys come out sorted (nlohmann objects are ordered
// maps), so equal reports dump to identical bytes; wall-clock time lives in
// a separate "timing" subtree so the rest is run-to-run reproducible.
json solve_report_json(const SolveReport& report);
json gronwall_json(const GronwallReport& report);

json read_json(const std::string& path);
void write_json(const std::string& path, const json& value);

}  // namespace diffspline::io
