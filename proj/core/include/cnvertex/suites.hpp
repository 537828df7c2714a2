#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnvertex/bethe.hpp"
#include "cnvertex/model.hpp"
#include "cnvertex/report.hpp"
#include "cnvertex/transfer.hpp"

namespace cnv {

enum class Suite { r_properties, fusion, operator_identities, asymptotics, spectrum, bethe, all };

const char* to_string(Suite s);
Suite parse_suite(const std::string& name);  // std::invalid_argument on unknown names
BoundaryKind parse_boundary(const std::string& name);

// Default tolerances of the verification campaigns; a global override replaces all of them.
struct Tolerances {
  double r_properties = 1e-10;
  double reflection = 1e-10;
  double commutativity = 1e-10;
  double projector_angle = 1e-8;
  double closure = 1e-10;
  double operator_identity = 1e-9;
  double special_value = 1e-8;
  double eigen_relation = 1e-8;
  double bae = 1e-11;
  double tq_match = 1e-8;
  double cn_match = 1e-7;
  double vacuum = 1e-9;
  double energy = 1e-8;
  double energy_consistency = 1e-7;
  double diagonal_limit = 1e-12;
  double symmetry = 1e-12;

  void override_all(double tol);
};

struct RunConfig {
  int n = 3;
  int sites = 1;
  std::vector<cd> theta;  // empty: drawn from the seed
  BoundaryKind boundary = BoundaryKind::open;
  BoundaryParams params;
  std::uint64_t seed = 7;
  std::optional<double> tol;  // global tolerance override
  Suite suite = Suite::all;
  std::vector<int> counts;    // Bethe root counts; empty: minimal admissible counts
  int solver_seeds = 40;

  Tolerances tolerances() const;
  // Validated chain; throws std::invalid_argument or CapacityError.
  ChainSpec chain() const;
};

// Suites that have checks for this configuration (fusion needs rank 3; periodic T-Q needs rank 3).
bool applicable(Suite suite, const RunConfig& cfg);
std::vector<Suite> expand(Suite suite);

struct SuiteReport {
  Suite suite = Suite::all;
  bool applicable = true;
  VerificationReport report;
};

// Runs the selected suites concurrently (one task per suite) and returns them in a fixed order.
// Failed checks without a witness receive the inhomogeneities as witness.
std::vector<SuiteReport> run_suites(Suite suite, const RunConfig& cfg);

// All checks of run_suites merged into one report.
VerificationReport run_suite(Suite suite, const RunConfig& cfg);

struct SpectrumRun {
  ChainSpec chain;
  Spectrum spectrum;
  VerificationReport report;               // basis, degrees, asymptotics and relations over all lines
  std::vector<VerificationReport> lines;  // the same relations per eigenvalue line
};

SpectrumRun run_spectrum(const RunConfig& cfg);

struct BetheRun {
  ChainSpec chain;
  TQModel model = TQModel::open_c3;
  std::vector<int> counts;
  SolveResult solve;
  MatchReport match;
  std::vector<cd> energies;        // per state, from the T-Q eigenvalue
  std::vector<cd> lambda0;         // per state, Lambda(0)
  std::vector<double> pole_residues;
  VerificationReport report;
  std::vector<std::string> notes;
};

BetheRun run_bethe(const RunConfig& cfg);

}  // namespace cnv
