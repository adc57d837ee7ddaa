#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace diffspline::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      // measured gap
  double threshold = 0.0;  // pass iff value <= threshold
};

// Deliberate defect injected into the suite's operator plumbing, used to
// demonstrate that the checks can fail: with coad_sign the duality checks
// run against a sign-flipped coad and must report failures.
enum class Mutation { none, coad_sign };

// Deterministic invariant suite over seeded random fields in one and two
// dimensions: operator dualities, transform roundtrips, interpolation
// transposes, inversion, conservation, transport, energy balance, and the
// finite-difference gradient probe.
std::vector<CheckResult> run_all(std::uint64_t seed, Mutation mutation = Mutation::none);

bool all_pass(const std::vector<CheckResult>& results);

nlohmann::json to_json(const std::vector<CheckResult>& results);

}  // namespace diffspline::checks
