#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icas {

struct CriterionResult {
  int id{0};
  std::string title;
  bool passed{false};
  /// Measured against expected values, fixed precision.
  std::string detail;
};

struct AcceptanceReport {
  std::uint64_t seed{0};
  std::vector<CriterionResult> results;

  bool all_passed() const;
  /// Deterministic text: no timings, no paths.
  std::string text() const;
};

/// Criteria 1 to 9. Criterion 10 (repeatability of the whole report) is
/// checked by running this twice and comparing text().
AcceptanceReport run_acceptance(std::uint64_t seed);

/// One "[PASS]/[FAIL] <id> <title>: <detail>" line.
std::string format_result(const CriterionResult &r);

} // namespace icas
