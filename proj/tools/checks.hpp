#pragma once

// Self-contained invariant checks over randomly generated fixtures. Each
// check reports pass/fail with a one-line detail; a fault-injection switch
// deliberately corrupts one S matrix so the failure path stays exercised.

#include <cstdint>
#include <string>
#include <vector>

namespace mlgk {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> run_checks(std::uint64_t seed, int threads, bool inject_fault);

}  // namespace mlgk
