#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrt/io.hpp"

namespace mrt {

struct CheckResult {
  std::string name;      // module.invariant
  std::string statement; // what is measured
  double measured = 0;
  double threshold = 0;
  std::string relation; // "<=", ">=", "in"
  double threshold_hi = 0; // upper end for "in"
  bool pass = false;
  double seconds = 0;
  std::string detail;
};

struct VerifyOptions {
  /// Flip the buoyancy sign in the spectral forms (mutation sanity check).
  bool inject_sign_error = false;
  std::uint64_t seed = 1;
  /// Substring filter on check names; empty runs everything.
  std::string only;
};

/// Runs the invariant suite of every module.
std::vector<CheckResult> run_verify(const VerifyOptions& o = {});
Json verify_json(const std::vector<CheckResult>& r, const VerifyOptions& o);

} // namespace mrt
