#pragma once

// Self-checks of the analytic formulas against the enumeration oracles and
// the interference builders against their null certificates.

#include <iosfwd>
#include <string>
#include <vector>

namespace qkdfs::checks {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

std::vector<CheckResult> run_all();

// Pass/fail table; returns true iff every check passed.
bool print_checks(std::ostream& out, const std::vector<CheckResult>& results);

// Reference numbers: threshold QBERs and the faked-pair mixtures.
void print_tables(std::ostream& out);

}  // namespace qkdfs::checks
