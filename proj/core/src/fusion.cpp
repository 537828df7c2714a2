#include "cnvertex/fusion.hpp"

#include <cmath>
#include <string>

namespace cnv::c3 {

namespace {

const RMatrixFamily& family() {
  static const RMatrixFamily f(3);
  return f;
}

void require_nonzero(cd z, const char* what, cd u) {
  if (std::abs(z) < 1e-12)
    throw SingularityError(std::string(what) + ": normalizer vanishes at u = " + std::to_string(u.real()) + " + " +
                           std::to_string(u.imag()) + "i");
}

const Mat& iso(ProjectorName p) { return projector(p).isometry; }

Mat identity(int d) { return Mat::Identity(d, d); }

// Fused-R numerators applied to the fused isometry (never forming the 1296-dim product).
Mat r_bar_numerator(cd u) {
  const std::vector<int> d3{6, 6, 6};
  const Mat w = kron(iso(ProjectorName::P14), identity(6));
  Mat x = apply_embedded(r(u - 0.5), {1, 2}, d3, w);
  x = apply_embedded(r(u + 0.5), {0, 2}, d3, x);
  return w.adjoint() * x;
}

Mat r_tilde_numerator(cd u) {
  const std::vector<int> d4{6, 6, 6, 6};
  const Mat w = kron(iso(ProjectorName::P14_123), identity(6));
  Mat x = apply_embedded(r(u - 1.0), {2, 3}, d4, w);
  x = apply_embedded(r(u), {1, 3}, d4, x);
  x = apply_embedded(r(u + 1.0), {0, 3}, d4, x);
  return w.adjoint() * x;
}

cd r_tilde_normalizer(cd u) { return rho0_tilde(u + 1.0) * rho0_tilde(u) * (u + 2.0); }

Mat r_tilde_bar_from(const std::function<Mat(cd)>& rt, cd u) {
  const std::vector<int> d3{14, 6, 6};
  const Mat w = kron(identity(14), iso(ProjectorName::P14));
  Mat x = apply_embedded(rt(u - 0.5), {0, 2}, d3, w);
  x = apply_embedded(rt(u + 0.5), {0, 1}, d3, x);
  return w.adjoint() * x;
}

struct FusedRCache {
  MatrixPolynomial bar, tilde, tilde_bar;
  FusedRCache() {
    bar = interpolate_matrix([](cd u) { return r_bar(u); }, 2, -2.0, 2.0, 0.3);
    tilde = interpolate_matrix([](cd u) { return r_tilde(u); }, 1, -2.0, 2.0, 0.3);
    tilde_bar = interpolate_matrix([this](cd u) { return r_tilde_bar_from([this](cd w) { return tilde(w); }, u); },
                                   2, -2.0, 2.0, 0.3);
  }
};

const FusedRCache& fused_cache() {
  static const FusedRCache c;
  return c;
}

cd k_prefactor(FusedKind kind, cd u) {
  switch (kind) {
    case FusedKind::bar_minus: return 2.0 * (u - 0.5) * (u + 2.0);
    case FusedKind::bar_plus: return 2.0 * (u + 2.0) * (u + 4.5);
    case FusedKind::tilde_minus: return 8.0 * (u + 2.5) * (u + 1.5) * (u - 0.5) * u * (u - 1.0) * (u + 2.0);
    case FusedKind::tilde_plus: return 8.0 * (u + 1.5) * (u + 2.5) * (u + 4.5) * (u + 2.0) * (u + 4.0) * (u + 5.0);
  }
  return 1.0;
}

Mat km(const BoundaryParams& p, cd u) { return k_minus(3, p, u); }
Mat kp(const BoundaryParams& p, cd u) { return k_plus(3, p, u); }

Mat fused_k_numerator(FusedKind kind, const BoundaryParams& p, cd u) {
  const std::vector<int> d2{6, 6}, d3{6, 6, 6};
  switch (kind) {
    case FusedKind::bar_minus: {
      const Mat& w = iso(ProjectorName::P14);
      Mat x = apply_embedded(km(p, u - 0.5), {1}, d2, w);
      x = r(2.0 * u) * x;
      x = apply_embedded(km(p, u + 0.5), {0}, d2, x);
      return w.adjoint() * x;
    }
    case FusedKind::bar_plus: {
      const Mat& w = iso(ProjectorName::P14);
      Mat x = apply_embedded(kp(p, u + 0.5), {0}, d2, w);
      x = r(-2.0 * u - 8.0) * x;
      x = apply_embedded(kp(p, u - 0.5), {1}, d2, x);
      return w.adjoint() * x;
    }
    case FusedKind::tilde_minus: {
      const Mat& w = iso(ProjectorName::P14_123);
      Mat x = apply_embedded(km(p, u - 1.0), {2}, d3, w);
      x = apply_embedded(r(2.0 * u - 1.0), {1, 2}, d3, x);
      x = apply_embedded(km(p, u), {1}, d3, x);
      x = apply_embedded(r(2.0 * u), {0, 2}, d3, x);
      x = apply_embedded(r(2.0 * u + 1.0), {0, 1}, d3, x);
      x = apply_embedded(km(p, u + 1.0), {0}, d3, x);
      return w.adjoint() * x;
    }
    case FusedKind::tilde_plus: {
      const Mat& w = iso(ProjectorName::P14_123);
      Mat x = apply_embedded(kp(p, u + 1.0), {0}, d3, w);
      x = apply_embedded(r(-2.0 * u - 9.0), {0, 1}, d3, x);
      x = apply_embedded(kp(p, u), {1}, d3, x);
      x = apply_embedded(r(-2.0 * u - 8.0), {0, 2}, d3, x);
      x = apply_embedded(r(-2.0 * u - 7.0), {1, 2}, d3, x);
      x = apply_embedded(kp(p, u - 1.0), {2}, d3, x);
      return w.adjoint() * x;
    }
  }
  return {};
}

int fused_k_degree(FusedKind kind) {
  return kind == FusedKind::bar_minus || kind == FusedKind::bar_plus ? 2 : 3;
}

}  // namespace

Mat r(cd u) { return family()(u); }

Mat r_bar(cd u) {
  const cd z = rho0_tilde(u + 0.5);
  require_nonzero(z, "r_bar", u);
  return r_bar_numerator(u) / z;
}

Mat r_tilde(cd u) {
  const cd z = r_tilde_normalizer(u);
  require_nonzero(z, "r_tilde", u);
  return r_tilde_numerator(u) / z;
}

Mat r_tilde_bar(cd u) { return r_tilde_bar_from([](cd w) { return r_tilde(w); }, u); }

Mat r_bar_poly(cd u) { return fused_cache().bar(u); }
Mat r_tilde_poly(cd u) { return fused_cache().tilde(u); }
Mat r_tilde_bar_poly(cd u) { return fused_cache().tilde_bar(u); }

Mat fused_k(FusedKind kind, const BoundaryParams& p, cd u) {
  const cd z = k_prefactor(kind, u);
  require_nonzero(z, "fused_k", u);
  return fused_k_numerator(kind, p, u) / z;
}

FusedBoundary::FusedBoundary(const BoundaryParams& p) : params(p) {
  for (FusedKind kind : {FusedKind::bar_minus, FusedKind::bar_plus, FusedKind::tilde_minus, FusedKind::tilde_plus}) {
    double res = 0.0;
    auto mp = interpolate_matrix([&](cd u) { return fused_k(kind, p, u); }, fused_k_degree(kind), -2.0, 2.0, 0.3,
                                 &res);
    fit_residual = std::max(fit_residual, res);
    switch (kind) {
      case FusedKind::bar_minus: bar_minus = std::move(mp); break;
      case FusedKind::bar_plus: bar_plus = std::move(mp); break;
      case FusedKind::tilde_minus: tilde_minus = std::move(mp); break;
      case FusedKind::tilde_plus: tilde_plus = std::move(mp); break;
    }
  }
}

Mat FusedBoundary::operator()(FusedKind kind, cd u) const {
  switch (kind) {
    case FusedKind::bar_minus: return bar_minus(u);
    case FusedKind::bar_plus: return bar_plus(u);
    case FusedKind::tilde_minus: return tilde_minus(u);
    case FusedKind::tilde_plus: return tilde_plus(u);
  }
  return {};
}

cd det_q_sandwich_minus(const BoundaryParams& p, cd u) {
  const std::vector<int> d2{6, 6};
  const Mat& w = iso(ProjectorName::P1);
  Mat x = apply_embedded(km(p, u - 4.0), {1}, d2, w);
  x = r(2.0 * u - 4.0) * x;
  x = apply_embedded(km(p, u), {0}, d2, x);
  return (w.adjoint() * x)(0, 0);
}

cd det_q_sandwich_plus(const BoundaryParams& p, cd u) {
  const std::vector<int> d2{6, 6};
  const Mat& w = iso(ProjectorName::P1);
  Mat x = apply_embedded(kp(p, u), {0}, d2, w);
  x = r(-2.0 * u - 4.0) * x;
  x = apply_embedded(kp(p, u - 4.0), {1}, d2, x);
  return (w.adjoint() * x)(0, 0);
}

namespace {

struct Worst {
  double residual = 0.0;
  std::vector<std::pair<std::string, cd>> witness;
  void update(double r, std::vector<std::pair<std::string, cd>> w) {
    if (!(r <= residual)) {
      residual = r;
      witness = std::move(w);
    }
  }
};

// Column space of `op` (SVD) compared with a tabulated basis.
void degeneration_check(VerificationReport& rep, const std::string& name, const std::string& anchor, const Mat& op,
                        int expected_rank, const Mat& basis, double angle_tol) {
  const RankResult rr = svd_rank(op, 1e-9);
  auto& c = rep.add(name + ".rank", anchor + ": rank", std::abs(rr.rank - expected_rank), 0.5,
                    {{"rank", double(rr.rank)}, {"expected", double(expected_rank)}});
  c.note = "residual is |rank - expected|";
  rep.add(name + ".subspace", anchor + ": principal angle to tabulated basis", subspace_distance(rr.isometry, basis),
          angle_tol);
}

}  // namespace

VerificationReport verify_projectors(double angle_tol) {
  VerificationReport rep;
  for (ProjectorName pn : all_projectors()) {
    const Projector& p = projector(pn);
    const Mat g = p.isometry.adjoint() * p.isometry;
    rep.add("projector." + p.name + ".gram", "orthonormal basis of " + p.name,
            (g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-12);
  }
  const std::vector<int> d3{6, 6, 6};
  degeneration_check(rep, "degeneration.r_m4", "R(-4) one-dimensional projector", r(-4.0), 1,
                     iso(ProjectorName::P1), angle_tol);
  degeneration_check(rep, "degeneration.r_m1", "R(-1) 14-dimensional projector", r(-1.0), 14,
                     iso(ProjectorName::P14), angle_tol);
  const Mat triple = embed(r(-1.0), {0, 1}, d3) * embed(r(-2.0), {0, 2}, d3) * embed(r(-1.0), {1, 2}, d3);
  degeneration_check(rep, "degeneration.triple", "R12(-1) R13(-2) R23(-1) antisymmetric triple", triple, 14,
                     iso(ProjectorName::P14_123), angle_tol);
  degeneration_check(rep, "degeneration.r_bar_m7/2", "R_bar(-7/2) 6-dimensional projector", r_bar(-3.5), 6,
                     iso(ProjectorName::P6_bar), angle_tol);
  const Mat rb = r_bar(-1.5);
  degeneration_check(rep, "degeneration.r_bar_m3/2", "R_bar(-3/2) 14-dimensional projector", rb, 14,
                     iso(ProjectorName::P14_bar), angle_tol);
  degeneration_check(rep, "degeneration.r_tilde_m3", "R_tilde(-3) 14-dimensional projector", r_tilde(-3.0), 14,
                     iso(ProjectorName::P14_tilde), angle_tol);

  // Cross-checks in V (x) V (x) V: the two 14-dimensional fused subspaces should coincide.
  const Mat lift = kron(iso(ProjectorName::P14), identity(6));
  const RankResult rr = svd_rank(rb, 1e-9);
  rep.add("degeneration.r_bar_m3/2.vs_triple", "column space of R_bar(-3/2) lifted vs antisymmetric triple basis",
          subspace_distance(lift * rr.isometry, iso(ProjectorName::P14_123)), angle_tol);
  rep.add("subspace.bar14_vs_triple", "tabulated P14_bar basis lifted vs antisymmetric triple basis",
          subspace_distance(lift * iso(ProjectorName::P14_bar), iso(ProjectorName::P14_123)), angle_tol);
  return rep;
}

VerificationReport verify_fused_r(int samples, double tol, Sampler& s) {
  Worst ub, ut, utb, cb, ct, yb, yt, poly;
  const std::vector<int> d2{14, 6}, d3{14, 6, 6};
  const std::vector<double> avoid{0.5, -4.5, -0.5, -7.5, 0.0, 1.0, -1.0, -2.0, -3.0, -4.0, -5.0};
  for (int i = 0; i < samples; ++i) {
    const cd u = s.spectral(avoid), v = s.spectral(avoid);
    const std::vector<std::pair<std::string, cd>> w{{"u", u}, {"v", v}};
    const Mat rbu = r_bar(u), rtu = r_tilde(u);
    ub.update(rel_diff(rbu * r_bar(-u), rho_vbar(u) * identity(84)), w);
    ut.update(rel_diff(rtu * r_tilde(-u), rho_vtilde(u) * identity(84)), w);
    utb.update(rel_diff(r_tilde_bar_poly(u) * r_tilde_bar_poly(-u), rho_vbar_vtilde(u) * identity(196)), w);
    const cd cbar = (u + 0.5) * (u + 2.5) * (u + 5.5) * (u + 7.5);
    const cd ctil = -(u + 1.0) * (u + 7.0);
    cb.update(rel_diff(partial_transpose(rbu, d2, 0) * partial_transpose(r_bar_poly(-u - 8.0), d2, 0),
                       cbar * identity(84)),
              w);
    ct.update(rel_diff(partial_transpose(rtu, d2, 0) * partial_transpose(r_tilde_poly(-u - 8.0), d2, 0),
                       ctil * identity(84)),
              w);
    {
      const Mat a = embed(r_bar_poly(u - v), {0, 1}, d3), b = embed(r_bar(u), {0, 2}, d3),
                c = embed(r(v), {1, 2}, d3);
      yb.update(rel_diff(a * b * c, c * b * a), w);
    }
    {
      const Mat a = embed(r_tilde_poly(u - v), {0, 1}, d3), b = embed(rtu, {0, 2}, d3), c = embed(r(v), {1, 2}, d3);
      yt.update(rel_diff(a * b * c, c * b * a), w);
    }
    poly.update(std::max({rel_diff(r_bar_poly(u), rbu), rel_diff(r_tilde_poly(u), rtu),
                          rel_diff(r_tilde_bar_poly(u), r_tilde_bar(u))}),
                w);
  }
  VerificationReport rep;
  rep.add("fused_r.bar.unitarity", "R_bar(u) R_bar(-u) = rho_vbar(u)", ub.residual, tol, ub.witness);
  rep.add("fused_r.tilde.unitarity", "R_tilde(u) R_tilde(-u) = rho_vtilde(u)", ut.residual, tol, ut.witness);
  rep.add("fused_r.tilde_bar.unitarity", "R_tilde_bar(u) R_tilde_bar(-u) = rho_vbar_vtilde(u)", utb.residual, tol,
          utb.witness);
  rep.add("fused_r.bar.crossing", "R_bar crossing-unitarity", cb.residual, tol, cb.witness);
  rep.add("fused_r.tilde.crossing", "R_tilde crossing-unitarity", ct.residual, tol, ct.witness);
  rep.add("fused_r.bar.yang_baxter", "Yang-Baxter equation for (R_bar, R_bar, R)", yb.residual, tol, yb.witness);
  rep.add("fused_r.tilde.yang_baxter", "Yang-Baxter equation for (R_tilde, R_tilde, R)", yt.residual, tol,
          yt.witness);
  rep.add("fused_r.polynomial", "fused R entries are polynomials (deg 2, 1, 2)", poly.residual, tol, poly.witness);
  return rep;
}

VerificationReport verify_closure(int samples, double tol, Sampler& s) {
  const std::vector<int> d3{14, 6, 6};
  const Mat w6 = kron(iso(ProjectorName::P6_bar), identity(6));
  const Mat wt = kron(iso(ProjectorName::P14_tilde), identity(6));
  Worst c6, ct, a6, at, qd;
  for (int i = 0; i < samples; ++i) {
    const cd u = s.spectral({1.0, -4.0, -2.0, -6.5});
    const std::vector<std::pair<std::string, cd>> w{{"u", u}};
    {
      const Mat x = apply_embedded(r(u + 3.0), {1, 2}, d3, apply_embedded(r_bar(u - 0.5), {0, 2}, d3, w6));
      c6.update(rel_diff(w6.adjoint() * x / rho0_tilde(u + 3.0), r(u)), w);
      a6.update(rel_diff(x, w6 * (w6.adjoint() * x)), w);
    }
    {
      const Mat x = apply_embedded(r(u + 2.5), {1, 2}, d3, apply_embedded(r_tilde(u - 0.5), {0, 2}, d3, wt));
      ct.update(rel_diff(wt.adjoint() * x / (u + 6.5), r_bar(u)), w);
      at.update(rel_diff(x, wt * (wt.adjoint() * x)), w);
    }
    {
      const std::vector<int> v3{6, 6, 6};
      const Mat w1 = kron(iso(ProjectorName::P1), identity(6));
      const Mat x = apply_embedded(r(u), {0, 2}, v3, apply_embedded(r(u - 4.0), {1, 2}, v3, w1));
      const RMatrixFamily& f = family();
      qd.update(rel_diff(w1.adjoint() * x, f.a(u) * f.e(u - 4.0) * identity(6)), w);
    }
  }
  VerificationReport rep;
  rep.add("closure.six_dim", "6-dim fusion of R_bar and R returns R", c6.residual, tol, c6.witness);
  rep.add("closure.six_dim.invariance", "6-dim subspace invariant under R23(u+3) R_bar13(u-1/2)", a6.residual, tol,
          a6.witness);
  rep.add("closure.tilde", "14-dim fusion of R_tilde and R returns R_bar", ct.residual, tol, ct.witness);
  rep.add("closure.tilde.invariance", "14-dim subspace invariant under R23(u+5/2) R_tilde13(u-1/2)", at.residual, tol,
          at.witness);
  rep.add("closure.singlet", "P1 R13(u) R23(u-4) P1 = a(u) e(u-4)", qd.residual, tol, qd.witness);
  {
    const std::vector<int> v3{6, 6, 6};
    const Mat w1 = kron(iso(ProjectorName::P1), identity(6));
    const Mat x = apply_embedded(r(2.0), {0, 2}, v3, apply_embedded(r(-2.0), {1, 2}, v3, w1));
    const cd val = (w1.adjoint() * x)(0, 0);
    rep.add("closure.singlet.u2", "P1 R13(2) R23(-2) P1 = -36", std::abs(val - cd(-36.0)) / 36.0, tol, {{"value", val}});
  }
  {
    const std::vector<int> d4{6, 6, 6, 6};
    Mat x = embed(r(-1.0), {2, 3}, d4);
    x = apply_embedded(r(-2.0), {1, 3}, d4, x);
    x = apply_embedded(r(-1.0), {1, 2}, d4, x);
    x = apply_embedded(r(-3.0), {0, 3}, d4, x);
    x = apply_embedded(r(-2.0), {0, 2}, d4, x);
    x = apply_embedded(r(-1.0), {0, 1}, d4, x);
    const double scale = std::pow(r(-1.0).norm(), 3) * std::pow(r(-2.0).norm(), 2) * r(-3.0).norm();
    rep.add("closure.six_product", "R12(-1) R13(-2) R14(-3) R23(-1) R24(-2) R34(-1) = 0", x.norm() / scale, 1e-9);
  }
  {
    const std::vector<int> v3{6, 6, 6};
    const Mat p321 = embed(projector(ProjectorName::P14_123).projection(), {2, 1, 0}, v3);
    const Mat p32 = embed(projector(ProjectorName::P14).projection(), {2, 1}, v3);
    rep.add("closure.projector_absorption", "P14_32 P14_321 = P14_321", rel_diff(p32 * p321, p321), tol);
  }
  return rep;
}

VerificationReport verify_fused_reflection(const BoundaryParams& p, int samples, double tol, Sampler& s) {
  const FusedBoundary fb(p);
  Worst reb, dreb, ret, dret, retb, dretb;
  const std::vector<int> d14_6{14, 6}, d14_14{14, 14};
  auto re = [](const Mat& r1, const Mat& k1, const Mat& r2, const Mat& k2) {
    return rel_diff(r1 * k1 * r2 * k2, k2 * r2 * k1 * r1);
  };
  for (int i = 0; i < samples; ++i) {
    const cd u = s.spectral(), v = s.spectral();
    const std::vector<std::pair<std::string, cd>> w{{"u", u}, {"v", v}};
    {
      const Mat k1 = embed(fb(FusedKind::bar_minus, u), {0}, d14_6), k2 = embed(km(p, v), {1}, d14_6);
      reb.update(re(r_bar_poly(u - v), k1, r_bar_poly(u + v), k2), w);
      const Mat q1 = embed(fb(FusedKind::bar_plus, u), {0}, d14_6), q2 = embed(kp(p, v), {1}, d14_6);
      dreb.update(re(r_bar_poly(-u + v), q1, r_bar_poly(-u - v - 8.0), q2), w);
    }
    {
      const Mat k1 = embed(fb(FusedKind::tilde_minus, u), {0}, d14_6), k2 = embed(km(p, v), {1}, d14_6);
      ret.update(re(r_tilde_poly(u - v), k1, r_tilde_poly(u + v), k2), w);
      const Mat q1 = embed(fb(FusedKind::tilde_plus, u), {0}, d14_6), q2 = embed(kp(p, v), {1}, d14_6);
      dret.update(re(r_tilde_poly(-u + v), q1, r_tilde_poly(-u - v - 8.0), q2), w);
    }
    {
      const Mat k1 = embed(fb(FusedKind::tilde_minus, u), {0}, d14_14),
                k2 = embed(fb(FusedKind::bar_minus, v), {1}, d14_14);
      retb.update(re(r_tilde_bar_poly(u - v), k1, r_tilde_bar_poly(u + v), k2), w);
      const Mat q1 = embed(fb(FusedKind::tilde_plus, u), {0}, d14_14),
                q2 = embed(fb(FusedKind::bar_plus, v), {1}, d14_14);
      dretb.update(re(r_tilde_bar_poly(-u + v), q1, r_tilde_bar_poly(-u - v - 8.0), q2), w);
    }
  }
  VerificationReport rep;
  rep.add("fused_k.bar.reflection", "reflection equation (K_bar-, K-) with R_bar", reb.residual, tol, reb.witness);
  rep.add("fused_k.bar.dual_reflection", "dual reflection equation (K_bar+, K+) with R_bar", dreb.residual, tol,
          dreb.witness);
  rep.add("fused_k.tilde.reflection", "reflection equation (K_tilde-, K-) with R_tilde", ret.residual, tol,
          ret.witness);
  rep.add("fused_k.tilde.dual_reflection", "dual reflection equation (K_tilde+, K+) with R_tilde", dret.residual, tol,
          dret.witness);
  rep.add("fused_k.tilde_bar.reflection", "reflection equation (K_tilde-, K_bar-) with R_tilde_bar", retb.residual,
          tol, retb.witness);
  rep.add("fused_k.tilde_bar.dual_reflection", "dual reflection equation (K_tilde+, K_bar+) with R_tilde_bar",
          dretb.residual, tol, dretb.witness);
  rep.add("fused_k.polynomial", "fused K entries are polynomials (deg 2, 2, 3, 3)", fb.fit_residual, tol);
  return rep;
}

VerificationReport verify_quantum_determinants(const BoundaryParams& p, int samples, double tol, Sampler& s) {
  VerificationReport rep;
  double rm = 0.0, rp = 0.0;
  cd wm, wp, ratio_m, ratio_p;
  bool const_m = true, const_p = true;
  for (int i = 0; i < samples; ++i) {
    const cd u = s.spectral({1.5, 4.0, -1.5, -4.0});
    const cd sm = det_q_sandwich_minus(p, u), fm = det_q_minus_formula(p, u);
    const cd sp = det_q_sandwich_plus(p, u), fp = det_q_plus_formula(p, u);
    if (rel_diff(sm, fm) >= rm) rm = rel_diff(sm, fm), wm = u;
    if (rel_diff(sp, fp) >= rp) rp = rel_diff(sp, fp), wp = u;
    if (i == 0) ratio_m = sm / fm, ratio_p = sp / fp;
    const_m = const_m && rel_diff(sm / fm, ratio_m) < 1e-10;
    const_p = const_p && rel_diff(sp / fp, ratio_p) < 1e-10;
  }
  auto& cm = rep.add("qdet.minus", "quantum determinant of K-: (u-3/2)(u-4) h1(u) h2(u)", rm, tol, {{"u", wm}});
  if (!cm.pass && const_m) cm.measured_ratio = ratio_m;
  auto& cp = rep.add("qdet.plus", "quantum determinant of K+: (u+3/2)(u+4) h1~(u) h2~(u)", rp, tol, {{"u", wp}});
  if (!cp.pass && const_p) cp.measured_ratio = ratio_p;
  {
    const cd v = det_q_minus_formula(p, 0.0), expect = -24.0 * p.zeta * p.zeta;
    rep.add("qdet.minus.u0", "Det_q(K-)(0) = -24 zeta^2", rel_diff(v, expect), tol, {{"value", v}});
  }
  return rep;
}

VerificationReport verify_fused_k_values(const BoundaryParams& p, int samples, double tol, Sampler& s) {
  VerificationReport rep;
  const FusedBoundary fb(p);
  auto scalar_check = [&](const std::string& name, const std::string& anchor, const Mat& m, cd expected) {
    const Mat e = expected * identity(static_cast<int>(m.rows()));
    auto& c = rep.add(name, anchor, rel_diff(m, e), tol, {{"expected", expected}, {"measured_00", m(0, 0)}});
    annotate_ratio(c, m, e);
  };
  scalar_check("fused_k.bar_minus.at0", "K_bar-(0) = (1+c1c2-4zeta^2)/2", fb(FusedKind::bar_minus, 0.0),
               0.5 * (1.0 + p.c1 * p.c2 - 4.0 * p.zeta * p.zeta));
  scalar_check("fused_k.bar_plus.atm4", "K_bar+(-4) = (1+c1~c2~-4zeta~^2)/2", fb(FusedKind::bar_plus, -4.0),
               0.5 * (1.0 + p.c1_t * p.c2_t - 4.0 * p.zeta_t * p.zeta_t));
  scalar_check("fused_k.tilde_minus.at0", "K_tilde-(0) = 8 zeta (1+c1c2-4zeta^2)", fb(FusedKind::tilde_minus, 0.0),
               8.0 * p.zeta * (1.0 + p.c1 * p.c2 - 4.0 * p.zeta * p.zeta));
  scalar_check("fused_k.tilde_plus.atm4", "K_tilde+(-4) = 8 zeta~ (1+c1~c2~-4zeta~^2)",
               fb(FusedKind::tilde_plus, -4.0), 8.0 * p.zeta_t * (1.0 + p.c1_t * p.c2_t - 4.0 * p.zeta_t * p.zeta_t));

  // Closure of the boundary fusion: 6-dim projection returns K, 14-dim projection returns K_bar.
  const std::vector<int> dk{14, 6};
  const Mat& u6 = iso(ProjectorName::P6_bar);
  const Mat& vt = iso(ProjectorName::P14_tilde);
  double r6m = 0, r6p = 0, rtm = 0, rtp = 0;
  Mat l6m, e6m, l6p, e6p;
  for (int i = 0; i < samples; ++i) {
    const cd u = s.spectral({0.5, -2.0, -7.0, -4.5, -6.5, -3.0, -2.5});
    {
      Mat x = apply_embedded(fb(FusedKind::bar_minus, u - 0.5), {0}, dk, u6);
      x = r_bar_poly(2.0 * u + 2.5) * x;
      x = apply_embedded(km(p, u + 3.0), {1}, dk, x);
      const Mat l = u6.adjoint() * x / (2.0 * (u + 2.0) * (u - 0.5) * p.h1(u + 3.0) * p.h2(u + 3.0));
      if (rel_diff(l, km(p, u)) >= r6m) r6m = rel_diff(l, km(p, u)), l6m = l, e6m = km(p, u);
    }
    {
      Mat x = apply_embedded(kp(p, u + 3.0), {1}, dk, u6);
      x = r_bar_poly(-2.0 * u - 10.5) * x;
      x = apply_embedded(fb(FusedKind::bar_plus, u - 0.5), {0}, dk, x);
      const Mat l = u6.adjoint() * x / (2.0 * (u + 7.0) * (u + 4.5) * p.h1_t(u + 3.0) * p.h2_t(u + 3.0));
      if (rel_diff(l, kp(p, u)) >= r6p) r6p = rel_diff(l, kp(p, u)), l6p = l, e6p = kp(p, u);
    }
    {
      Mat x = apply_embedded(fb(FusedKind::tilde_minus, u - 0.5), {0}, dk, vt);
      x = r_tilde_poly(2.0 * u + 2.0) * x;
      x = apply_embedded(km(p, u + 2.5), {1}, dk, x);
      const Mat l = -(vt.adjoint() * x) / (2.0 * (u - 0.5) * p.h1(u + 2.5) * p.h2(u + 2.5));
      rtm = std::max(rtm, rel_diff(l, fb(FusedKind::bar_minus, u)));
    }
    {
      Mat x = apply_embedded(kp(p, u + 2.5), {1}, dk, vt);
      x = r_tilde_poly(-2.0 * u - 10.0) * x;
      x = apply_embedded(fb(FusedKind::tilde_plus, u - 0.5), {0}, dk, x);
      const Mat l = vt.adjoint() * x / (2.0 * (u + 6.5) * p.h1_t(u + 2.5) * p.h2_t(u + 2.5));
      rtp = std::max(rtp, rel_diff(l, fb(FusedKind::bar_plus, u)));
    }
  }
  auto& a = rep.add("fused_k.closure.six_minus", "6-dim boundary fusion returns K-", r6m, tol);
  annotate_ratio(a, l6m, e6m);
  auto& b = rep.add("fused_k.closure.six_plus", "6-dim boundary fusion returns K+", r6p, tol);
  annotate_ratio(b, l6p, e6p);
  rep.add("fused_k.closure.tilde_minus", "14-dim boundary fusion returns K_bar-", rtm, tol);
  rep.add("fused_k.closure.tilde_plus", "14-dim boundary fusion returns K_bar+", rtp, tol);
  return rep;
}

}  // namespace cnv::c3
