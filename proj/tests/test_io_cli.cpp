#include <cstdint>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "diffspline/dynamics.hpp"
#include "diffspline/errors.hpp"
#include "diffspline/field.hpp"
#include "diffspline/io.hpp"
#include "diffspline/metric.hpp"
#include "diffspline/spline.hpp"
#include "test_util.hpp"

namespace ds = diffspline;
using nlohmann::json;
using testutil::TempDir;
using testutil::run_command;

namespace {

// The CLI binary under test; the build injects its absolute path.
const std::string kCli = DIFFSPLINE_CLI_PATH;

std::string q(const std::string& path) { return "'" + path + "'"; }

ds::VectorField random_velocity(const ds::GridSpec& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ds::random_band_limited(grid, 2, 0.1, rng);
}

json minimal_spline_config() {
  json cfg;
  cfg["grid"] = {{"dim", 1}, {"n", 16}};
  cfg["metric"] = {{"s", 2.5}, {"s_prime", 3.5}};
  cfg["time_steps"] = 8;
  cfg["boundary"] = {{"phi0", "identity"},
                     {"v0", "zero"},
                     {"phi1", "identity"},
                     {"v1", "zero"}};
  return cfg;
}

}  // namespace

TEST_SUITE("io-cli") {

TEST_CASE("field files round-trip bit-exactly with a descriptive sidecar") {
  TempDir tmp;
  ds::GridSpec grid(2, 8);
  ds::VectorField u = random_velocity(grid, 17);

  std::string path = tmp.str("u.field");
  ds::io::write_field(path, u, "u");
  ds::VectorField back = ds::io::read_vector_field(path);

  REQUIRE(back.grid() == grid);
  auto a = u.raw();
  auto b = back.raw();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  json side = ds::io::read_json(path + ".json");
  CHECK(side.at("dim") == 2);
  CHECK(side.at("n") == 8);
  CHECK(side.at("components") == 2);
  CHECK(side.at("name") == "u");
  CHECK(!side.contains("type"));
}

TEST_CASE("momentum and diffeo files keep their type tags") {
  TempDir tmp;
  ds::GridSpec grid(1, 16);
  ds::Momentum m = ds::retag<ds::MomentumTag>(random_velocity(grid, 3));
  ds::Diffeo phi(random_velocity(grid, 4));

  ds::io::write_field(tmp.str("m.field"), m, "m");
  ds::io::write_diffeo(tmp.str("phi.field"), phi, "phi");

  ds::Momentum m2 = ds::io::read_momentum(tmp.str("m.field"));
  CHECK(testutil::max_abs_diff(m, m2) == 0.0);

  json side = ds::io::read_json(tmp.str("phi.field") + ".json");
  CHECK(side.at("type") == "diffeo");
  ds::Diffeo phi2 = ds::io::read_diffeo(tmp.str("phi.field"));
  CHECK(testutil::max_abs_diff(phi.displacement(), phi2.displacement()) == 0.0);

  // A plain velocity file is not acceptable where a map is required.
  CHECK_THROWS_WITH_AS(ds::io::read_diffeo(tmp.str("m.field")),
                       doctest::Contains("does not hold a diffeomorphism"),
                       ds::IoError);
}

TEST_CASE("read errors name the offending path") {
  TempDir tmp;
  std::string missing = tmp.str("nope.field");
  CHECK_THROWS_WITH_AS(ds::io::read_vector_field(missing),
                       doctest::Contains(missing.c_str()), ds::IoError);

  ds::GridSpec grid(1, 16);
  std::string path = tmp.str("t.field");
  ds::io::write_field(path, random_velocity(grid, 5), "t");

  // Chop the payload: the reader must notice the sidecar promises more.
  std::ofstream(path, std::ios::trunc | std::ios::binary) << "xx";
  CHECK_THROWS_WITH_AS(ds::io::read_vector_field(path),
                       doctest::Contains("shorter than its sidecar promises"),
                       ds::IoError);

  ds::io::write_field(path, random_velocity(grid, 5), "t");
  std::ofstream(path, std::ios::app | std::ios::binary) << "trailing";
  CHECK_THROWS_WITH_AS(ds::io::read_vector_field(path),
                       doctest::Contains("longer than its sidecar promises"),
                       ds::IoError);
}

TEST_CASE("trajectory directories carry a complete manifest") {
  TempDir tmp;
  ds::GridSpec grid(1, 16);
  ds::SobolevMetric metric(grid, 2.0);
  std::mt19937_64 rng(7);
  ds::Momentum m0 =
      ds::retag<ds::MomentumTag>(ds::random_band_limited(grid, 2, 0.05, rng));
  ds::Trajectory traj = ds::geodesic_shoot(m0, metric, 8);

  std::string dir = tmp.str("traj");
  ds::io::write_trajectory(dir, traj, metric);

  json manifest = ds::io::read_json(dir + "/manifest.json");
  CHECK(manifest.at("schema") == "trajectory/1");
  CHECK(manifest.at("steps") == 8);
  CHECK(manifest.at("nodes").size() == 9);
  CHECK(manifest.at("times").size() == 9);
  CHECK(manifest.at("times")[0].get<double>() == 0.0);
  CHECK(manifest.at("times")[8].get<double>() == doctest::Approx(1.0));

  for (const auto& node : manifest.at("nodes"))
    for (const char* part : {"phi", "m", "xi", "alpha"})
      CHECK(std::ifstream(dir + "/" + node.at(part).get<std::string>()).good());

  // Spot-check the last state against what was written.
  ds::Diffeo phi_end = ds::io::read_diffeo(
      dir + "/" + manifest.at("nodes")[8].at("phi").get<std::string>());
  CHECK(testutil::max_abs_diff(phi_end.displacement(),
                               traj.states.back().phi.displacement()) == 0.0);
  ds::Momentum m_end = ds::io::read_momentum(
      dir + "/" + manifest.at("nodes")[8].at("m").get<std::string>());
  CHECK(testutil::max_abs_diff(m_end, traj.states.back().m) == 0.0);
}

TEST_CASE("solve reports dump to identical bytes once timing is erased") {
  ds::GridSpec grid(1, 16);
  ds::SplineProblem problem(grid, 2.5, 3.5, 8, ds::Diffeo::identity(grid),
                            ds::VectorField(grid), ds::Diffeo::identity(grid),
                            ds::VectorField(grid));
  json a = ds::io::solve_report_json(ds::solve(problem).report);
  json b = ds::io::solve_report_json(ds::solve(problem).report);

  REQUIRE(a.contains("timing"));
  CHECK(a.at("timing").contains("wall_seconds"));
  a.erase("timing");
  b.erase("timing");
  CHECK(a.dump(2) == b.dump(2));
}

TEST_CASE("cli geodesic writes a trajectory and a conservation report") {
  TempDir tmp;
  json cfg;
  cfg["grid"] = {{"dim", 1}, {"n", 32}};
  cfg["metric"] = {{"s", 2.5}};
  cfg["steps"] = 16;
  cfg["momentum"] = {{"random", {{"kmax", 2}, {"amplitude", 0.1}}}};
  ds::io::write_json(tmp.str("geo.json"), cfg);

  auto r = run_command(kCli + " geodesic --config " + q(tmp.str("geo.json")) +
                       " --out " + q(tmp.str("out")) + " --seed 7");
  CAPTURE(r.output);
  REQUIRE(r.status == 0);
  CHECK(r.output.find("geodesic ok, relative energy drift") != std::string::npos);

  json rep = ds::io::read_json(tmp.str("out/conservation.json"));
  CHECK(rep.at("energy").at("relative_drift").get<double>() < 1e-9);
  CHECK(rep.at("transport_gap").get<double>() < 1e-3);
  CHECK(rep.at("gronwall").at("all_bounds_ok").get<bool>());

  json manifest = ds::io::read_json(tmp.str("out/trajectory/manifest.json"));
  CHECK(manifest.at("steps") == 16);
}

TEST_CASE("cli geodesic accepts momentum from a file, resolved next to the config") {
  TempDir tmp;
  ds::GridSpec grid(1, 16);
  ds::Momentum m0 = ds::retag<ds::MomentumTag>(random_velocity(grid, 9));
  ds::io::write_field(tmp.str("m0.field"), m0, "m0");

  json cfg;
  cfg["grid"] = {{"dim", 1}, {"n", 16}};
  cfg["metric"] = {{"s", 2.0}};
  cfg["steps"] = 8;
  cfg["momentum"] = {{"file", "m0.field"}};
  ds::io::write_json(tmp.str("geo.json"), cfg);

  auto r = run_command(kCli + " geodesic --config " + q(tmp.str("geo.json")) +
                       " --out " + q(tmp.str("out")));
  CAPTURE(r.output);
  CHECK(r.status == 0);

  // The written trajectory starts from exactly the momentum we supplied.
  json manifest = ds::io::read_json(tmp.str("out/trajectory/manifest.json"));
  ds::Momentum m_start = ds::io::read_momentum(
      tmp.str("out/trajectory/") +
      manifest.at("nodes")[0].at("m").get<std::string>());
  CHECK(testutil::max_abs_diff(m_start, m0) == 0.0);
}

TEST_CASE("cli spline solves the trivial problem and reports exact rest") {
  TempDir tmp;
  ds::io::write_json(tmp.str("spline.json"), minimal_spline_config());

  auto r = run_command(kCli + " spline --config " + q(tmp.str("spline.json")) +
                       " --out " + q(tmp.str("out")));
  CAPTURE(r.output);
  REQUIRE(r.status == 0);
  CHECK(r.output.find("converged objective 0") != std::string::npos);

  json rep = ds::io::read_json(tmp.str("out/report.json"));
  CHECK(rep.at("converged").get<bool>());
  CHECK(rep.at("objective").get<double>() == 0.0);
  CHECK(rep.at("status") == "converged");
}

TEST_CASE("cli spline reaches a file target and reruns reproducibly") {
  TempDir tmp;
  ds::GridSpec grid(1, 16);
  ds::VectorField disp(grid);
  for (std::size_t i = 0; i < static_cast<std::size_t>(grid.num_nodes()); ++i)
    disp.component(0)[i] = 0.05 * std::sin(grid.node(i)[0]);
  ds::io::write_diffeo(tmp.str("phi1.field"), ds::Diffeo(disp), "phi1");

  json cfg = minimal_spline_config();
  cfg["boundary"]["phi1"] = {{"file", "phi1.field"}};
  ds::io::write_json(tmp.str("spline.json"), cfg);

  auto run = [&](const std::string& out) {
    return run_command(kCli + " spline --config " + q(tmp.str("spline.json")) +
                       " --out " + q(tmp.str(out)));
  };
  auto r1 = run("out1");
  CAPTURE(r1.output);
  REQUIRE(r1.status == 0);
  CHECK(r1.output.find("converged objective") != std::string::npos);

  auto r2 = run("out2");
  REQUIRE(r2.status == 0);

  json rep1 = ds::io::read_json(tmp.str("out1/report.json"));
  json rep2 = ds::io::read_json(tmp.str("out2/report.json"));
  rep1.erase("timing");
  rep2.erase("timing");
  CHECK(rep1.dump(2) == rep2.dump(2));
}

TEST_CASE("cli sequence recovers knots and writes the free initial momentum") {
  TempDir tmp;
  ds::GridSpec grid(1, 16);
  auto shear = [&](double amp) {
    ds::VectorField disp(grid);
    for (std::size_t i = 0; i < static_cast<std::size_t>(grid.num_nodes()); ++i)
      disp.component(0)[i] = amp * std::sin(grid.node(i)[0]);
    return ds::Diffeo(disp);
  };
  ds::io::write_diffeo(tmp.str("k1.field"), shear(0.03), "k1");
  ds::io::write_diffeo(tmp.str("k2.field"), shear(0.05), "k2");

  json cfg;
  cfg["grid"] = {{"dim", 1}, {"n", 16}};
  cfg["metric"] = {{"s", 2.5}, {"s_prime", 3.5}};
  cfg["time_steps"] = 8;
  cfg["lambda0"] = 1e-3;
  cfg["knots"] = json::array({
      json{{"time", 0.5}, {"target", {{"file", "k1.field"}}}},
      json{{"time", 1.0}, {"target", {{"file", "k2.field"}}}},
  });
  ds::io::write_json(tmp.str("seq.json"), cfg);

  auto r = run_command(kCli + " sequence --config " + q(tmp.str("seq.json")) +
                       " --out " + q(tmp.str("out")));
  CAPTURE(r.output);
  REQUIRE(r.status == 0);
  CHECK(r.output.find("converged objective") != std::string::npos);

  json rep = ds::io::read_json(tmp.str("out/report.json"));
  CHECK(rep.at("knots").at("residuals").size() == 2);
  CHECK(std::ifstream(tmp.str("out/m0.field")).good());
}

TEST_CASE("cli failures carry an error code and a usable message") {
  TempDir tmp;

  auto missing = run_command(kCli + " spline --config " +
                             q(tmp.str("absent.json")) + " --out " +
                             q(tmp.str("out")));
  CHECK(missing.status == 1);
  CHECK(missing.output.find("error: io-error") != std::string::npos);

  json cfg = minimal_spline_config();
  cfg.erase("metric");
  ds::io::write_json(tmp.str("nometric.json"), cfg);
  auto bad_key = run_command(kCli + " spline --config " +
                             q(tmp.str("nometric.json")) + " --out " +
                             q(tmp.str("out")));
  CHECK(bad_key.status == 1);
  CHECK(bad_key.output.find("error: validation-error") != std::string::npos);
  CHECK(bad_key.output.find("missing key \"metric\"") != std::string::npos);

  // Smoothness-gap violations are rejected up front through the CLI too.
  json weak = minimal_spline_config();
  weak["metric"]["s_prime"] = 3.0;
  ds::io::write_json(tmp.str("weak.json"), weak);
  auto rejected = run_command(kCli + " spline --config " +
                              q(tmp.str("weak.json")) + " --out " +
                              q(tmp.str("out")));
  CHECK(rejected.status == 1);
  CHECK(rejected.output.find("error: validation-error") != std::string::npos);
}

TEST_CASE("cli check passes clean and fails under an injected defect") {
  TempDir tmp;
  auto clean = run_command(kCli + " check --seed 3 --out " + q(tmp.str("out")));
  CAPTURE(clean.output);
  CHECK(clean.status == 0);
  CHECK(clean.output.find("all checks passed") != std::string::npos);

  json rep = ds::io::read_json(tmp.str("out/checks.json"));
  CHECK(rep.at("seed") == 3);

  auto mutated = run_command(kCli + " check --seed 3 --mutate coad-sign");
  CAPTURE(mutated.output);
  CHECK(mutated.status == 2);
  CHECK(mutated.output.find("checks FAILED") != std::string::npos);

  auto unknown = run_command(kCli + " check --mutate frobnicate");
  CHECK(unknown.status == 1);
  CHECK(unknown.output.find("error: validation-error") != std::string::npos);
}

}  // TEST_SUITE
