#pragma once

// Named invariant batteries runnable from the command line: seeded
// re-checks of the pointwise algebra identities, the discretization
// convergence orders, the principal-symbol classifications, and the
// linearized-operator spectrum.  Each check carries a stable anchor id,
// the number of samples, the worst error seen, and — on failure — the
// seed of the first offending sample, so any red entry reproduces from
// the report alone.

#include <cstdint>
#include <string>
#include <vector>

#include "g2flow/config.hpp"

namespace g2flow {

struct CheckRecord {
  std::string name;        // human-readable statement of the invariant
  std::string anchor;      // stable machine id, 1:1 with the check
  int samples = 0;
  double worst_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  uint64_t fail_seed = 0;  // sample seed of the first failure; 0 if passed
};

struct SuiteReport {
  std::string suite;
  uint64_t seed = 0;
  double tolerance = 0.0;  // requested override; 0 means per-check defaults
  std::vector<CheckRecord> checks;
  bool passed = false;
};

// name in {algebra, fields, symbols, spectrum}.  tol > 0 overrides the
// tolerance of the numerical-identity checks (structural checks such as
// convergence-order bands and integer counts keep their own).  Throws
// std::invalid_argument for an unknown suite name.
SuiteReport run_suite(const std::string& name, const RunConfig& cfg,
                      uint64_t seed, double tol = 0.0);

// Fixed-width human-readable table, one row per check.
std::string suite_table(const SuiteReport& report);

// Machine-readable report including every CheckRecord field.
std::string suite_json(const SuiteReport& report);

}  // namespace g2flow
