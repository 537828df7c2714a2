#pragma once

#include <cstdint>
#include <random>

#include "cnvertex/report.hpp"
#include "cnvertex/tensor.hpp"

namespace cnv {

// C_n rational R-matrix on V (x) V, dim V = 2n, crossing parameter kappa = n + 1.
struct RMatrixFamily {
  int n = 3;

  explicit RMatrixFamily(int rank = 3);
  int d() const { return 2 * n; }
  double kappa() const { return n + 1.0; }
  int bar(int i) const { return 2 * n - 1 - i; }  // 0-based conjugate index
  int xi(int i) const { return i < n ? 1 : -1; }

  // entries of R(u)
  cd a(cd u) const { return (1.0 + u) * (u + kappa()); }
  cd b(cd u) const { return u * (u + kappa()); }
  cd c(cd u) const { return 2.0 * u + kappa(); }
  cd dd(cd u) const { return -u; }
  cd e(cd u) const { return u * (u + kappa() - 1.0); }
  cd g(cd u) const { return u + kappa(); }

  cd rho_v(cd u) const { return a(u) * a(-u); }
  cd rho_v_tilde(cd u) const { return rho_v(u + kappa()); }  // crossing normalizer

  Mat operator()(cd u) const;
  Mat derivative(cd u) const;  // entrywise d/du (entries are quadratic in u)
  Mat permutation() const;
};

// Normalizers of the fused C_3 R-matrices.
namespace c3 {
inline cd rho0_tilde(cd u) { return (u - 1.0) * (u + 4.0); }
inline cd rho_vbar(cd u) { return (u + 3.5) * (u - 3.5) * (u + 1.5) * (u - 1.5); }
inline cd rho_vtilde(cd u) { return -(u + 3.0) * (u - 3.0); }
inline cd rho_vbar_vtilde(cd u) { return (u + 2.5) * (u - 2.5) * (u + 3.5) * (u - 3.5); }
}  // namespace c3

// Boundary parameters of K^- (zeta, c1, c2) and K^+ (tilded set).
struct BoundaryParams {
  cd zeta{0.7, 0.1}, c1{0.3, 0.0}, c2{0.5, -0.2};
  cd zeta_t{-0.4, 0.3}, c1_t{0.2, 0.1}, c2_t{0.6, 0.0};

  bool diagonal() const { return c1 == cd(0.0) && c2 == cd(0.0) && c1_t == cd(0.0) && c2_t == cd(0.0); }
  cd sqrt_minus() const { return std::sqrt(1.0 + c1 * c2); }
  cd sqrt_plus() const { return std::sqrt(1.0 + c1_t * c2_t); }
  cd x() const;

  cd h1(cd u) const { return 2.0 * (sqrt_minus() * u + zeta); }
  cd h2(cd u) const { return 2.0 * (sqrt_minus() * u - zeta); }
  cd h1_t(cd u) const { return -2.0 * (sqrt_plus() * u + zeta_t); }
  cd h2_t(cd u) const { return -2.0 * (sqrt_plus() * u - zeta_t); }
};

// How the K^- and K^+ factors are paired inside the T-Q boundary functions.
//  printed:    H1 = h1 h~1, H2 = h2 h~2 (as typeset)
//  consistent: H1 = h1 h~2, H2 = h2 h~1 (reproduces exact diagonalization and Lambda(0))
enum class Pairing { printed, consistent };

cd boundary_H1(const BoundaryParams& p, cd u, Pairing pairing);
cd boundary_H2(const BoundaryParams& p, cd u, Pairing pairing);

Mat k_minus(int n, const BoundaryParams& p, cd u);
Mat k_plus(int n, const BoundaryParams& p, cd u);
Mat k_minus_derivative(int n, const BoundaryParams& p);
Mat k_plus_derivative(int n, const BoundaryParams& p);

// Quantum determinants of the C_3 reflection matrices as printed.
cd det_q_minus_formula(const BoundaryParams& p, cd u);
cd det_q_plus_formula(const BoundaryParams& p, cd u);

// Random complex spectral parameter with parts uniform in [-2, 2], kept 1e-3 away from `avoid`.
struct Sampler {
  std::mt19937_64 gen;
  explicit Sampler(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi);
  cd spectral(const std::vector<double>& avoid = {});
};

VerificationReport verify_r_properties(int n, int samples, double tol, Sampler& s);
VerificationReport verify_reflection_equations(int n, const BoundaryParams& p, int samples, double tol, Sampler& s);

}  // namespace cnv
