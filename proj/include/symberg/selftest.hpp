#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symberg/config.hpp"
#include "symberg/geometry.hpp"

namespace symberg {

struct SelftestOptions {
  std::string filter;  // module name; empty runs every module
  DebugOptions debug;
  std::uint64_t seed = config::default_seed;
  bool include_slow = false;
};

// One invariant: passes when value <= limit.
struct SelftestResult {
  std::string module;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  double seconds = 0.0;
  std::string error;  // exception text when the check threw
};

const std::vector<std::string>& selftest_modules();
// Throws ConfigError for an unknown filter.
std::vector<SelftestResult> run_selftest(const SelftestOptions& options);

}  // namespace symberg
