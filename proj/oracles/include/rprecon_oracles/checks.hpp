#pragma once

// Seeded oracle batteries shared by the self-test command and the acceptance
// suite. Each check reports the worst relative error over its instances.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rprecon::checks {

struct CheckResult {
  std::string name;
  double worst = 0.0;
  double tol = 0.0;
  int instances = 0;

  bool passed() const { return worst <= tol; } // NaN fails
};

/// Library solvers against dense Kronecker and monolithic KKT solves.
std::vector<CheckResult> oracle_equivalences(int instances,
                                             std::uint64_t seed);

/// Group invariance of every metric family and equivariance of its
/// gradient: O(r) for Stiefel and PSD, GL(r) for the two-factor geometry.
std::vector<CheckResult> invariance_battery(int instances, std::uint64_t seed);

/// Defining-equation and central finite-difference checks of every
/// gradient operation.
std::vector<CheckResult> gradient_checks(int instances, std::uint64_t seed);

/// Prints a fixed-width table and returns whether every check passed.
bool print_table(const std::vector<CheckResult> &results, std::ostream &out);

} // namespace rprecon::checks
