#include "cnvertex/model.hpp"

#include <cmath>
#include <string>

namespace cnv {

RMatrixFamily::RMatrixFamily(int rank) : n(rank) {
  if (rank < 2) throw std::invalid_argument("rank must be >= 2");
}

Mat RMatrixFamily::operator()(cd u) const {
  const int dim = d();
  Mat r = Mat::Zero(dim * dim, dim * dim);
  const cd id = u * (u + kappa());
  const cd perm = u + kappa();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      r(i * dim + j, i * dim + j) += id;
      r(j * dim + i, i * dim + j) += perm;
    }
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) r(i * dim + bar(i), k * dim + bar(k)) -= u * double(xi(i) * xi(k));
  return r;
}

Mat RMatrixFamily::derivative(cd u) const {
  const int dim = d();
  Mat r = Mat::Zero(dim * dim, dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      r(i * dim + j, i * dim + j) += 2.0 * u + kappa();
      r(j * dim + i, i * dim + j) += 1.0;
    }
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) r(i * dim + bar(i), k * dim + bar(k)) -= double(xi(i) * xi(k));
  return r;
}

Mat RMatrixFamily::permutation() const {
  const int dim = d();
  Mat p = Mat::Zero(dim * dim, dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) p(j * dim + i, i * dim + j) = 1.0;
  return p;
}

cd BoundaryParams::x() const {
  return 8.0 * std::sqrt((1.0 + c1 * c2) * (1.0 + c1_t * c2_t)) - 4.0 * (2.0 + c1 * c2_t + c2 * c1_t);
}

cd boundary_H1(const BoundaryParams& p, cd u, Pairing pairing) {
  return pairing == Pairing::printed ? p.h1(u) * p.h1_t(u) : p.h1(u) * p.h2_t(u);
}

cd boundary_H2(const BoundaryParams& p, cd u, Pairing pairing) {
  return pairing == Pairing::printed ? p.h2(u) * p.h2_t(u) : p.h2(u) * p.h1_t(u);
}

namespace {

Mat boundary_block(int n, cd c1, cd c2) {
  Mat m(2, 2);
  m << -1.0, c1, c2, 1.0;
  return kron(m, Mat::Identity(n, n));
}

}  // namespace

Mat k_minus(int n, const BoundaryParams& p, cd u) {
  return p.zeta * Mat::Identity(2 * n, 2 * n) + u * boundary_block(n, p.c1, p.c2);
}

Mat k_plus(int n, const BoundaryParams& p, cd u) {
  const cd w = -u - double(n + 1);
  return p.zeta_t * Mat::Identity(2 * n, 2 * n) + w * boundary_block(n, p.c1_t, p.c2_t);
}

Mat k_minus_derivative(int n, const BoundaryParams& p) { return boundary_block(n, p.c1, p.c2); }

Mat k_plus_derivative(int n, const BoundaryParams& p) { return -boundary_block(n, p.c1_t, p.c2_t); }

cd det_q_minus_formula(const BoundaryParams& p, cd u) { return (u - 1.5) * (u - 4.0) * p.h1(u) * p.h2(u); }

cd det_q_plus_formula(const BoundaryParams& p, cd u) { return (u + 1.5) * (u + 4.0) * p.h1_t(u) * p.h2_t(u); }

double Sampler::uniform(double lo, double hi) {
  const double r = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * r;
}

cd Sampler::spectral(const std::vector<double>& avoid) {
  for (;;) {
    const double re = uniform(-2.0, 2.0);
    const double im = uniform(-2.0, 2.0);
    const cd u(re, im);
    bool ok = true;
    for (double a : avoid)
      if (std::abs(u - a) < 1e-3) ok = false;
    if (ok) return u;
  }
}

namespace {

struct Worst {
  double residual = 0.0;
  cd u, v;
  void update(double r, cd uu, cd vv) {
    if (!(r <= residual)) {
      residual = r;
      u = uu;
      v = vv;
    }
  }
};

}  // namespace

VerificationReport verify_r_properties(int n, int samples, double tol, Sampler& s) {
  const RMatrixFamily R(n);
  const int d = R.d();
  const std::vector<int> d2{d, d}, d3{d, d, d};
  const double k = R.kappa();
  Worst reg, uni, cross, ybe;

  reg.update(rel_diff(R(0.0), std::sqrt(R.rho_v(0.0)) * R.permutation()), 0.0, 0.0);
  const Mat id2 = Mat::Identity(d * d, d * d);
  for (int i = 0; i < samples; ++i) {
    const cd u = s.spectral({0.0, -1.0, -k});
    const cd v = s.spectral({0.0, -1.0, -k});
    uni.update(rel_diff(R(u) * R(-u), R.rho_v(u) * id2), u, v);
    const Mat lhs = partial_transpose(R(u), d2, 0) * partial_transpose(R(-u - 2.0 * k), d2, 0);
    cross.update(rel_diff(lhs, R.rho_v(u + k) * id2), u, v);
    const Mat r12 = R(u - v), r13 = R(u), r23 = R(v);
    const Mat lhs3 = apply_embedded(r12, {0, 1}, d3, apply_embedded(r13, {0, 2}, d3, embed(r23, {1, 2}, d3)));
    const Mat rhs3 = apply_embedded(r23, {1, 2}, d3, apply_embedded(r13, {0, 2}, d3, embed(r12, {0, 1}, d3)));
    ybe.update(rel_diff(lhs3, rhs3), u, v);
  }

  VerificationReport rep;
  const std::string p = "r.n" + std::to_string(n) + ".";
  rep.add(p + "regularity", "R(0) proportional to permutation", reg.residual, tol);
  rep.add(p + "unitarity", "R12(u) R21(-u) = rho_v(u)", uni.residual, tol, {{"u", uni.u}});
  rep.add(p + "crossing_unitarity", "R12(u)^t1 R21(-u-2kappa)^t1 = rho_v(u+kappa)", cross.residual, tol,
          {{"u", cross.u}});
  rep.add(p + "yang_baxter", "R12(u-v) R13(u) R23(v) = R23(v) R13(u) R12(u-v)", ybe.residual, tol,
          {{"u", ybe.u}, {"v", ybe.v}});
  return rep;
}

VerificationReport verify_reflection_equations(int n, const BoundaryParams& p, int samples, double tol, Sampler& s) {
  const RMatrixFamily R(n);
  const int d = R.d();
  const std::vector<int> d2{d, d};
  const double k = R.kappa();
  Worst re, dre;
  for (int i = 0; i < samples; ++i) {
    const cd u = s.spectral();
    const cd v = s.spectral();
    {
      const Mat k1 = embed(k_minus(n, p, u), {0}, d2);
      const Mat k2 = embed(k_minus(n, p, v), {1}, d2);
      const Mat lhs = R(u - v) * k1 * R(u + v) * k2;
      const Mat rhs = k2 * R(u + v) * k1 * R(u - v);
      re.update(rel_diff(lhs, rhs), u, v);
    }
    {
      const Mat k1 = embed(k_plus(n, p, u), {0}, d2);
      const Mat k2 = embed(k_plus(n, p, v), {1}, d2);
      const Mat lhs = R(-u + v) * k1 * R(-u - v - 2.0 * k) * k2;
      const Mat rhs = k2 * R(-u - v - 2.0 * k) * k1 * R(-u + v);
      dre.update(rel_diff(lhs, rhs), u, v);
    }
  }
  VerificationReport rep;
  const std::string pre = "k.n" + std::to_string(n) + ".";
  rep.add(pre + "reflection", "R(u-v) K1(u) R(u+v) K2(v) = K2(v) R(u+v) K1(u) R(u-v)", re.residual, tol,
          {{"u", re.u}, {"v", re.v}});
  rep.add(pre + "dual_reflection", "dual reflection equation with shift -u-v-2kappa", dre.residual, tol,
          {{"u", dre.u}, {"v", dre.v}});
  return rep;
}

}  // namespace cnv
