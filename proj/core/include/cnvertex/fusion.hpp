#pragma once

#include <string>
#include <vector>

#include "cnvertex/model.hpp"
#include "cnvertex/report.hpp"
#include "cnvertex/tensor.hpp"

// Fusion hierarchy of the C_3 model: projector bases, fused R- and K-matrices and their identities.
namespace cnv::c3 {

enum class ProjectorName { P1, P14, P14_123, P6_bar, P14_bar, P14_tilde };

struct Projector {
  ProjectorName id;
  std::string name;
  std::vector<int> dims;  // factor dims of the space the basis vectors live in
  Mat isometry;           // columns are the tabulated basis vectors
  std::string parent;     // operator whose degeneration produces the subspace
  double point = 0.0;     // degeneration point of the parent

  int rank() const { return static_cast<int>(isometry.cols()); }
  Mat projection() const { return isometry * isometry.adjoint(); }
};

const Projector& projector(ProjectorName name);
std::vector<ProjectorName> all_projectors();

Mat r(cd u);  // C_3 fundamental R on V (x) V

// Direct fused constructions; SingularityError at zeros of their normalizers.
Mat r_bar(cd u);        // on V_bar (x) V, 84 x 84
Mat r_tilde(cd u);      // on V_tilde (x) V, 84 x 84
Mat r_tilde_bar(cd u);  // on V_tilde (x) V_bar, 196 x 196

// Entries of the fused R-matrices are polynomials in u; these evaluate the cached polynomial
// continuation (valid at every u, including normalizer zeros).
Mat r_bar_poly(cd u);
Mat r_tilde_poly(cd u);
Mat r_tilde_bar_poly(cd u);

enum class FusedKind { bar_minus, bar_plus, tilde_minus, tilde_plus };

// Direct fused K constructions with their scalar prefactors; SingularityError at prefactor zeros.
Mat fused_k(FusedKind kind, const BoundaryParams& p, cd u);

// Polynomial continuation of the four fused K-matrices for one parameter set.
struct FusedBoundary {
  BoundaryParams params;
  MatrixPolynomial bar_minus, bar_plus, tilde_minus, tilde_plus;
  double fit_residual = 0.0;  // max held-out relative residual of the four fits

  explicit FusedBoundary(const BoundaryParams& p);
  Mat operator()(FusedKind kind, cd u) const;
};

// <psi0| K1(u) R(2u-4) K2(u-4) |psi0> and its dual counterpart.
cd det_q_sandwich_minus(const BoundaryParams& p, cd u);
cd det_q_sandwich_plus(const BoundaryParams& p, cd u);

VerificationReport verify_projectors(double angle_tol);
VerificationReport verify_fused_r(int samples, double tol, Sampler& s);
VerificationReport verify_closure(int samples, double tol, Sampler& s);
VerificationReport verify_fused_reflection(const BoundaryParams& p, int samples, double tol, Sampler& s);
VerificationReport verify_quantum_determinants(const BoundaryParams& p, int samples, double tol, Sampler& s);
VerificationReport verify_fused_k_values(const BoundaryParams& p, int samples, double tol, Sampler& s);

}  // namespace cnv::c3
