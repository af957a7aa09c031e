#pragma once

#include <string>
#include <vector>

namespace ringbec {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Invariant checks on the built-in presets, run by `validate`.
std::vector<CheckResult> run_invariant_suite();

}  // namespace ringbec
