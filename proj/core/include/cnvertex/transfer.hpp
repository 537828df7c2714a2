#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cnvertex/fusion.hpp"
#include "cnvertex/model.hpp"
#include "cnvertex/report.hpp"
#include "cnvertex/tensor.hpp"

namespace cnv {

enum class BoundaryKind { periodic, open };
enum class TransferKind { t, t2, t3 };

const char* to_string(BoundaryKind b);
const char* to_string(TransferKind k);

struct ChainSpec {
  int n = 3;
  std::vector<cd> theta;
  BoundaryKind boundary = BoundaryKind::periodic;
  BoundaryParams params;

  int sites() const { return static_cast<int>(theta.size()); }
  int site_dim() const { return 2 * n; }
  std::int64_t quantum_dim() const;
  bool has_fused() const { return n == 3; }

  // Shape and capacity checks; throws std::invalid_argument or CapacityError.
  void validate_shape() const;
  // Additionally requires distinct inhomogeneities whose differences avoid the identity evaluation points.
  void validate() const;
};

// N distinct reals in [0.1, 0.45], pairwise 0.02 apart (clear of the u = 1/2 prefactor poles).
std::vector<cd> random_theta(int sites, Sampler& s);

// Polynomial degree of t, t2, t3 in u.
int transfer_degree(const ChainSpec& chain, TransferKind kind);

// Leading coefficient of t, t2, t3 as u -> infinity (times identity).
cd asymptotic_coefficient(const ChainSpec& chain, TransferKind kind);

// Transfer matrices of one chain. Fused kinds are available for n = 3 only.
// Auxiliary-space operators are handled as blocks acting on the quantum space, so no
// (aux x quantum)-sized matrix is ever formed.
class TransferMatrices {
 public:
  explicit TransferMatrices(ChainSpec chain);

  const ChainSpec& chain() const { return chain_; }
  Mat operator()(TransferKind kind, cd u) const;
  Mat derivative(cd u) const;  // exact d t(u) / du of the fundamental transfer matrix

  // Dense monodromy T_0(u) and, for open chains, reflecting monodromy T_0(u) K^-_0(u) T^_0(u),
  // on aux (x) quantum. Intended for small chains.
  Mat monodromy(TransferKind kind, cd u) const;
  Mat monodromy_hat(TransferKind kind, cd u) const;
  Mat reflecting_monodromy(TransferKind kind, cd u) const;

 private:
  ChainSpec chain_;
  std::optional<c3::FusedBoundary> fused_;
};

// Hamiltonian H = t'(0) t(0)^{-1} of the homogeneous chain (all theta = 0).
Mat hamiltonian(int n, int sites, BoundaryKind boundary, const BoundaryParams& p);

// One common eigenvector with its eigenvalue polynomials.
struct EigenLine {
  Vec vector;
  PolynomialFit lambda, lambda2, lambda3;  // lambda2/3 only for n = 3
};

struct Spectrum {
  std::vector<EigenLine> lines;
  double basis_residual = 0.0;  // simultaneous-diagonalization residual
  int degenerate_clusters = 0;
  double fit_residual = 0.0;    // max held-out relative residual of the eigenvalue fits
  bool has_fused = false;
};

Spectrum spectrum(const TransferMatrices& tm, std::uint64_t seed);

VerificationReport verify_monodromy(const ChainSpec& chain, int samples, double tol, Sampler& s);
VerificationReport verify_commutativity(const TransferMatrices& tm, int samples, double tol, Sampler& s);
VerificationReport verify_operator_identities(const TransferMatrices& tm, double tol);
VerificationReport verify_asymptotics_and_special_values(const TransferMatrices& tm, double tol);
// Fits the eigenvalue polynomials of one line from scalar values value(kind, u) on the spectrum nodes.
EigenLine fit_eigen_line(const ChainSpec& chain, const std::function<cd(TransferKind, cd)>& value);

VerificationReport verify_spectrum(const TransferMatrices& tm, const Spectrum& sp, double tol);
// Degrees, asymptotics and scalar functional relations of eigenvalue lines; check names start with `prefix`.
VerificationReport verify_eigenvalues(const ChainSpec& chain, const std::vector<EigenLine>& lines, bool has_fused,
                                      double tol, const std::string& prefix);
VerificationReport verify_hamiltonian(int n, int sites, BoundaryKind boundary, const BoundaryParams& p, int samples,
                                      double tol, Sampler& s);

}  // namespace cnv
