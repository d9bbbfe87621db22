#pragma once

#include <string>
#include <vector>

namespace bmv {

// One checked identity suite over its documented grid. Errors are
// |lhs - rhs| / max(1, |lhs|, |rhs|). min_kernel tracks the smallest kernel
// value seen on the |v| <= 1 grid for the nonnegativity suites.
struct IdentityReport {
  std::string suite;
  int cases = 0;
  double max_error = 0;
  double min_kernel = 0;
  double threshold = 0;      // documented bound for max_error
  std::string worst_case;
  bool passed() const { return max_error <= threshold && min_kernel >= -1e-12; }
};

// Suites: gauss, pfaff, lemma5, lebasic, lereps.
IdentityReport run_identity_suite(const std::string& suite);

std::vector<std::string> identity_suites();

}  // namespace bmv
