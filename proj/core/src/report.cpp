#include "cnvertex/report.hpp"

#include <algorithm>
#include <cmath>

namespace cnv {

Check& VerificationReport::add(std::string name, std::string anchor, double residual, double tolerance,
                               std::vector<std::pair<std::string, cd>> witness) {
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.residual = residual;
  c.tolerance = tolerance;
  c.pass = std::isfinite(residual) && residual < tolerance;
  c.witness = std::move(witness);
  checks.push_back(std::move(c));
  return checks.back();
}

void VerificationReport::merge(const VerificationReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

bool VerificationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

int VerificationReport::failures() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
}

double VerificationReport::max_residual(const std::string& prefix) const {
  double r = 0.0;
  for (const auto& c : checks)
    if (c.name.rfind(prefix, 0) == 0) r = std::max(r, std::isfinite(c.residual) ? c.residual : INFINITY);
  return r;
}

const Check* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

cd dominant_ratio(const Mat& lhs, const Mat& rhs) {
  Eigen::Index r = 0, c = 0;
  rhs.cwiseAbs().maxCoeff(&r, &c);
  if (rhs(r, c) == cd(0.0)) return cd(NAN, NAN);
  return lhs(r, c) / rhs(r, c);
}

void annotate_ratio(Check& c, const Mat& lhs, const Mat& rhs, double tol) {
  if (c.pass) return;
  const cd k = dominant_ratio(lhs, rhs);
  if (!std::isfinite(k.real())) return;
  if (rel_diff(lhs, k * rhs) < tol) c.measured_ratio = k;
}

}  // namespace cnv
