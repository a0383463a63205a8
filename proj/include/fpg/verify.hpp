#pragma once

#include <string>
#include <vector>

namespace fpg {

struct CheckResult {
  std::string check;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyOptions {
  std::string only_prefix;  // empty = run everything
  bool mutate_aux = false;  // self-test fixture: flip the density gradient sign
};

// Deterministic verification battery over the numerical identities this
// library relies on. Every check compares two independent computation routes.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

// Columns: check,max_error,tolerance,status.
std::string verification_csv(const std::vector<CheckResult>& results);

}  // namespace fpg
