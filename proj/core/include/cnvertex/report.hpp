#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cnvertex/tensor.hpp"

namespace cnv {

struct Check {
  std::string name;
  std::string anchor;  // human-readable label of the identity being checked
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<std::pair<std::string, cd>> witness;
  std::optional<cd> measured_ratio;  // set when a failure is a constant multiple of the expected value
  std::string note;
};

struct VerificationReport {
  std::vector<Check> checks;

  Check& add(std::string name, std::string anchor, double residual, double tolerance,
             std::vector<std::pair<std::string, cd>> witness = {});
  void merge(const VerificationReport& other);
  bool all_pass() const;
  int failures() const;
  double max_residual(const std::string& prefix) const;
  const Check* find(const std::string& name) const;
};

// Ratio L/R measured at the largest entry of R; used to label constant-factor mismatches.
cd dominant_ratio(const Mat& lhs, const Mat& rhs);

// If the ratio of lhs to rhs is constant (to tol) but not 1, record it on the check.
void annotate_ratio(Check& c, const Mat& lhs, const Mat& rhs, double tol = 1e-8);

}  // namespace cnv
