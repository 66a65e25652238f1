#pragma once

// The acceptance checks: nine numbered end-to-end criteria, each returning a
// verdict plus the measurements behind it. Shared by the `verify` CLI command
// and the acceptance test binary so both always agree.

#include <string>
#include <vector>

namespace mevo {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0.0;                // wall clock for the whole criterion
  std::vector<std::string> details;    // one gate or measurement per line
};

// The valid criterion ids, in run order.
std::vector<int> criterion_ids();

// Runs one criterion. Pipeline-driven criteria write their runs under
// scratch_dir/<run-name>; most wipe their own subdirectory first so timings
// reflect a full run, while the bound check reuses an existing trained model
// when one is already present. Exceptions are caught and reported as a
// failed result rather than thrown.
CriterionResult run_criterion(int id, const std::string& scratch_dir);

}  // namespace mevo
