#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnvertex/model.hpp"
#include "cnvertex/report.hpp"
#include "cnvertex/transfer.hpp"

namespace cnv {

struct PoleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Which T-Q parametrization an evaluator implements.
//  periodic_c3: homogeneous C_3 relations with roots mu^(1..3)
//  open_c3:     inhomogeneous C_3 relations with roots lambda^(1..3)
//  open_cn:     inhomogeneous C_n relations with roots lambda^(1..n) (fundamental Lambda only)
enum class TQModel { periodic_c3, open_c3, open_cn };

const char* to_string(TQModel m);

// Bethe roots per level: roots[m - 1] holds level m.
struct BetheState {
  std::vector<std::vector<cd>> roots;
  std::vector<int> counts() const;
};

struct TQOptions {
  Pairing pairing = Pairing::consistent;
  bool include_f = true;           // inhomogeneous terms on/off (diagonal-limit comparisons)
  double even_f_prefactor = 0.25;  // prefactor of the two even-n C_n terms (printed: 1)
  bool q0_is_g = true;             // C_n: Q^(0)(u) read as G(u) = prod (u - theta)(u + theta); else 1
  bool last_h_shifted = false;     // C_n: Z_2n uses H_2n(u + n + 1) as typeset instead of H_2n(u)
  // C_3 Bethe equations exactly as typeset. Off by default: the residue-consistent forms differ in one
  // shift (open level 2: Q2(l - 2) for Q2(l - 3); periodic level 3: see bae_residuals).
  bool printed_bae = false;
  // Periodic Lambda2: subtract Z3(u+1/2) Z4(u-1/2) instead of the typeset Z3(u+1/2) Z3(u-1/2).
  bool periodic_exclusion_z3z4 = false;
};

class TQEvaluator {
 public:
  TQEvaluator(ChainSpec chain, TQModel model, TQOptions opt = {});

  const ChainSpec& chain() const { return chain_; }
  TQModel model() const { return model_; }
  const TQOptions& options() const { return opt_; }
  int levels() const;

  // Count constraints of the model; throws std::invalid_argument when violated.
  void check_counts(const BetheState& s) const;
  // Smallest admissible counts (all free levels zero).
  std::vector<int> minimal_counts() const;

  // Lambda, Lambda2, Lambda3 (fused kinds for the C_3 models only). PoleError within 1e-8 of a pole;
  // within 1e-3 of a Q-zero the value is taken as the mean over a small circle (exact for an entire function).
  cd lambda(const BetheState& s, TransferKind kind, cd u) const;

  // Z-terms (for open models the f-terms are not added) and f-terms at u.
  std::vector<cd> z_terms(const BetheState& s, cd u) const;
  std::vector<cd> f_terms(const BetheState& s, cd u) const;

  // One residual per root per level in the printed arrangement (lhs - rhs), scaled by the
  // largest term of its equation. DegenerateStateError when two roots of a level coincide.
  std::vector<cd> bae_residuals(const BetheState& s) const;

  // Largest normalized residue of Lambda at the zeros of its Q-denominators (0 at a Bethe solution).
  double pole_residue(const BetheState& s) const;

  // Boundary functions entering the C_n relations.
  cd hbar1(cd u) const;
  cd hbar2(cd u) const;
  cd xbar() const;

 private:
  ChainSpec chain_;
  TQModel model_;
  TQOptions opt_;

  cd lambda_raw(const BetheState& s, TransferKind kind, cd u) const;
  std::vector<cd> q_zeros(const BetheState& s) const;  // poles of the Q-ratios in Lambda
  cd q(const BetheState& s, int m, cd u) const;
  cd q_den(const BetheState& s, int m, cd u) const;
  cd H(int which, cd u) const;
  std::vector<cd> c3_z(const BetheState& s, cd u) const;
  std::vector<cd> c3_f(const BetheState& s, cd u) const;
  std::vector<cd> c3_ztilde(const BetheState& s, cd u) const;
  std::vector<cd> cn_z(const BetheState& s, cd u) const;
  std::vector<cd> cn_f(const BetheState& s, cd u) const;
};

struct SolveOptions {
  int seeds = 40;
  int max_iterations = 200;
  double tolerance = 1e-11;  // accept when max |residual| is below this
  double dedup_radius = 1e-8;
  std::uint64_t seed = 7;
};

struct SolveResult {
  std::vector<BetheState> states;
  std::vector<double> residuals;  // max |bae residual| per state
  double best_residual = 0.0;     // best over all seeds (diagnostic when nothing converged)
  int converged_seeds = 0;
  int attempted_seeds = 0;
};

// Multi-start damped Newton on the Bethe equations in root coordinates.
SolveResult solve_bae(const TQEvaluator& ev, const std::vector<int>& counts, const SolveOptions& opt = {});

// Assignment of T-Q eigenvalues to exact eigenvalues by their distance on a grid.
struct MatchEntry {
  int state = -1;
  int ed_index = -1;
  double distance = 0.0;  // max over grid of |Lambda_TQ - Lambda_ED| / max |Lambda_ED|
  bool matched = false;
};

struct MatchReport {
  std::vector<MatchEntry> entries;
  double coverage = 0.0;  // fraction of distinct exact eigenvalues hit by some T-Q state
  std::vector<cd> grid;
};

// Greedy ascending-cost assignment (optimal whenever true matches are separated from the rest).
MatchReport match_spectrum(const std::vector<std::function<cd(cd)>>& tq, const std::vector<PolynomialFit>& ed,
                           const std::vector<cd>& grid, double tol);

// d ln Lambda / du at u = 0 from a polynomial fit; SingularityError if Lambda(0) = 0.
cd energy(const PolynomialFit& lambda);

// Energy of a T-Q state through the fitted eigenvalue polynomial of the evaluator's chain.
cd energy(const TQEvaluator& ev, const BetheState& s);

// 10-point grid used to compare eigenvalue functions.
std::vector<cd> comparison_grid();

// Term-by-term comparison of the C_n relations at n = 3 with the dedicated C_3 relations.
VerificationReport compare_cn_with_c3(const ChainSpec& chain, const BetheState& s, double tol);

}  // namespace cnv
