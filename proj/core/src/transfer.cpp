#include "cnvertex/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace cnv {

const char* to_string(BoundaryKind b) { return b == BoundaryKind::periodic ? "periodic" : "open"; }

const char* to_string(TransferKind k) {
  switch (k) {
    case TransferKind::t: return "t";
    case TransferKind::t2: return "t2";
    case TransferKind::t3: return "t3";
  }
  return "?";
}

std::int64_t ChainSpec::quantum_dim() const {
  std::int64_t q = 1;
  for (int j = 0; j < sites(); ++j) {
    if (q > std::numeric_limits<std::int64_t>::max() / site_dim()) return std::numeric_limits<std::int64_t>::max();
    q *= site_dim();
  }
  return q;
}

void ChainSpec::validate_shape() const {
  if (n < 2) throw std::invalid_argument("rank must be >= 2");
  if (sites() < 1) throw std::invalid_argument("chain needs at least one site");
  const std::int64_t q = quantum_dim();
  const std::int64_t aux = has_fused() ? 14 : site_dim();
  const std::int64_t cap = capacity_cap();
  if (q > cap / aux || q * aux > cap / (q * aux))
    throw CapacityError("chain with n=" + std::to_string(n) + ", N=" + std::to_string(sites()) +
                        " exceeds the dense capacity of " + std::to_string(cap) + " entries");
}

void ChainSpec::validate() const {
  validate_shape();
  static const double bad[] = {0.0, 1.0, 2.0, 3.0, 4.0, 3.5};
  for (int i = 0; i < sites(); ++i)
    for (int j = i + 1; j < sites(); ++j)
      for (double b : bad)
        for (double sgn : {1.0, -1.0})
          if (std::abs(theta[i] - theta[j] - sgn * b) < 1e-3)
            throw std::invalid_argument("inhomogeneities " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                        " are degenerate");
}

std::vector<cd> random_theta(int sites, Sampler& s) {
  std::vector<cd> th;
  while (static_cast<int>(th.size()) < sites) {
    const double x = s.uniform(0.1, 0.45);
    bool ok = true;
    for (const cd& y : th) ok = ok && std::abs(x - y.real()) > 0.02;
    if (ok) th.emplace_back(x, 0.0);
  }
  return th;
}

int transfer_degree(const ChainSpec& c, TransferKind kind) {
  const int N = c.sites();
  if (c.boundary == BoundaryKind::periodic) return kind == TransferKind::t3 ? N : 2 * N;
  switch (kind) {
    case TransferKind::t: return 4 * N + 2;
    case TransferKind::t2: return 4 * N + 4;
    case TransferKind::t3: return 2 * N + 6;
  }
  return 0;
}

cd asymptotic_coefficient(const ChainSpec& c, TransferKind kind) {
  if (c.boundary == BoundaryKind::periodic) return kind == TransferKind::t ? cd(2.0 * c.n) : cd(14.0);
  const BoundaryParams& p = c.params;
  const cd X = 2.0 + p.c1 * p.c2_t + p.c2 * p.c1_t;
  const cd Y = (1.0 + p.c1 * p.c2) * (1.0 + p.c1_t * p.c2_t);
  switch (kind) {
    case TransferKind::t: return -double(c.n) * X;
    case TransferKind::t2: return 4.0 * (3.0 * X * X + 2.0 * Y);
    case TransferKind::t3: return -64.0 * X * (X * X + 3.0 * Y);
  }
  return 0.0;
}

namespace {

// Operator on aux (x) quantum stored as D x D blocks acting on the quantum space, row-major.
struct Blocks {
  int D = 0;
  std::vector<Mat> b;
  Mat& at(int a, int c) { return b[static_cast<std::size_t>(a * D + c)]; }
  const Mat& at(int a, int c) const { return b[static_cast<std::size_t>(a * D + c)]; }
};

Blocks identity_blocks(int D) {
  Blocks x{D, std::vector<Mat>(static_cast<std::size_t>(D * D), Mat::Zero(1, 1))};
  for (int a = 0; a < D; ++a) x.at(a, a)(0, 0) = 1.0;
  return x;
}

Blocks zero_blocks(int D, Eigen::Index q) {
  return Blocks{D, std::vector<Mat>(static_cast<std::size_t>(D * D), Mat::Zero(q, q))};
}

// out += kron(a, r) without forming the product; zero entries of r are skipped.
void add_kron(Mat& out, const Mat& a, const Mat& r) {
  using Strided = Eigen::Map<Mat, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
  const Eigen::Index q = r.rows(), rows = out.rows();
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < q; ++i) {
      const cd w = r(i, j);
      if (w == cd(0.0)) continue;
      Strided view(out.data() + i + j * rows, a.rows(), a.cols(), Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(q * rows, q));
      view += w * a;
    }
}

// T_(k) = T_(k-1) R_{0k}: new block (a,b) = sum_c T^{ac} (x) R^{cb}. With diag_only only blocks (a,a) are built.
Blocks append_right(const Blocks& t, const Mat& r, int q, bool diag_only = false) {
  const Eigen::Index qq = t.b[0].rows() * q;
  Blocks out = zero_blocks(t.D, diag_only ? 0 : qq);
  if (diag_only)
    for (int a = 0; a < t.D; ++a) out.at(a, a) = Mat::Zero(qq, qq);
  for (int c = 0; c < t.D; ++c)
    for (int b = 0; b < t.D; ++b) {
      const Mat rb = r.block(c * q, b * q, q, q);
      if (rb.isZero(0.0)) continue;
      for (int a = 0; a < t.D; ++a) {
        if (diag_only && a != b) continue;
        const Mat& ta = t.at(a, c);
        if (ta.isZero(0.0)) continue;
        add_kron(out.at(a, b), ta, rb);
      }
    }
  return out;
}

// T^_(k) = R_{0k} T^_(k-1) with site k placed after the earlier sites: block (a,b) = sum_c T^{cb} (x) R^{ac}.
Blocks prepend_left(const Blocks& t, const Mat& r, int q) {
  const Eigen::Index qq = t.b[0].rows() * q;
  Blocks out = zero_blocks(t.D, qq);
  for (int a = 0; a < t.D; ++a)
    for (int c = 0; c < t.D; ++c) {
      const Mat rb = r.block(a * q, c * q, q, q);
      if (rb.isZero(0.0)) continue;
      for (int b = 0; b < t.D; ++b) {
        const Mat& tc = t.at(c, b);
        if (tc.isZero(0.0)) continue;
        add_kron(out.at(a, b), tc, rb);
      }
    }
  return out;
}

Blocks add(const Blocks& x, const Blocks& y) {
  Blocks out = x;
  for (std::size_t i = 0; i < out.b.size(); ++i) out.b[i] += y.b[i];
  return out;
}

// Scalar aux matrix k times blocks (k on the left) or blocks times k.
Blocks scalar_left(const Mat& k, const Blocks& x) {
  Blocks out = zero_blocks(x.D, x.b[0].rows());
  for (int a = 0; a < x.D; ++a)
    for (int b = 0; b < x.D; ++b) {
      if (k(a, b) == cd(0.0)) continue;
      for (int d = 0; d < x.D; ++d) out.at(a, d) += k(a, b) * x.at(b, d);
    }
  return out;
}

Blocks scalar_right(const Blocks& x, const Mat& k) {
  Blocks out = zero_blocks(x.D, x.b[0].rows());
  for (int b = 0; b < x.D; ++b)
    for (int d = 0; d < x.D; ++d) {
      if (k(b, d) == cd(0.0)) continue;
      for (int a = 0; a < x.D; ++a) out.at(a, d) += x.at(a, b) * k(b, d);
    }
  return out;
}

// tr_0 (X Y) = sum_{a,d} X^{ad} Y^{da}
Mat trace_product(const Blocks& x, const Blocks& y) {
  Mat out = Mat::Zero(x.b[0].rows(), x.b[0].rows());
  for (int a = 0; a < x.D; ++a)
    for (int d = 0; d < x.D; ++d) out.noalias() += x.at(a, d) * y.at(d, a);
  return out;
}

Mat trace(const Blocks& x) {
  Mat out = Mat::Zero(x.b[0].rows(), x.b[0].rows());
  for (int a = 0; a < x.D; ++a) out += x.at(a, a);
  return out;
}

Mat dense(const Blocks& x) {
  const Eigen::Index q = x.b[0].rows();
  Mat out(x.D * q, x.D * q);
  for (int a = 0; a < x.D; ++a)
    for (int b = 0; b < x.D; ++b) out.block(a * q, b * q, q, q) = x.at(a, b);
  return out;
}

// Value and first derivative of a block operator.
struct Jet {
  Blocks v, d;
};

struct Local {
  int aux = 0;
  std::function<Mat(cd)> r;   // on aux (x) site
  std::function<Mat(cd)> dr;  // derivative (fundamental kind only)
};

Local local_r(const ChainSpec& c, TransferKind kind) {
  if (kind != TransferKind::t && !c.has_fused())
    throw std::invalid_argument("fused transfer matrices are available for n = 3 only");
  switch (kind) {
    case TransferKind::t: {
      RMatrixFamily f(c.n);
      return {c.site_dim(), [f](cd u) { return f(u); }, [f](cd u) { return f.derivative(u); }};
    }
    case TransferKind::t2: return {14, [](cd u) { return c3::r_bar_poly(u); }, nullptr};
    case TransferKind::t3: return {14, [](cd u) { return c3::r_tilde_poly(u); }, nullptr};
  }
  return {};
}

// With diag_only the last step keeps only the diagonal aux blocks (enough for a periodic trace).
Jet monodromy_jet(const ChainSpec& c, const Local& loc, cd u, bool hat, bool deriv, bool diag_only = false) {
  const int q = c.site_dim();
  Jet j{identity_blocks(loc.aux), zero_blocks(loc.aux, 1)};
  for (int k = 0; k < c.sites(); ++k) {
    const cd w = hat ? u + c.theta[k] : u - c.theta[k];
    const Mat r = loc.r(w);
    const bool last_diag = diag_only && k + 1 == c.sites();
    auto step = [&](const Blocks& t, const Mat& m) {
      return hat ? prepend_left(t, m, q) : append_right(t, m, q, last_diag);
    };
    Blocks v = step(j.v, r);
    if (deriv) j.d = add(step(j.d, r), step(j.v, loc.dr(w)));
    j.v = std::move(v);
  }
  return j;
}

}  // namespace

TransferMatrices::TransferMatrices(ChainSpec chain) : chain_(std::move(chain)) {
  chain_.validate_shape();
  if (chain_.boundary == BoundaryKind::open && chain_.has_fused()) fused_.emplace(chain_.params);
}

Mat TransferMatrices::operator()(TransferKind kind, cd u) const {
  const Local loc = local_r(chain_, kind);
  const bool periodic = chain_.boundary == BoundaryKind::periodic;
  const Jet t = monodromy_jet(chain_, loc, u, false, false, periodic);
  if (periodic) return trace(t.v);
  Mat km, kp;
  switch (kind) {
    case TransferKind::t:
      km = k_minus(chain_.n, chain_.params, u);
      kp = k_plus(chain_.n, chain_.params, u);
      break;
    case TransferKind::t2:
      km = (*fused_)(c3::FusedKind::bar_minus, u);
      kp = (*fused_)(c3::FusedKind::bar_plus, u);
      break;
    case TransferKind::t3:
      km = (*fused_)(c3::FusedKind::tilde_minus, u);
      kp = (*fused_)(c3::FusedKind::tilde_plus, u);
      break;
  }
  const Jet th = monodromy_jet(chain_, loc, u, true, false);
  return trace_product(scalar_left(kp, scalar_right(t.v, km)), th.v);
}

Mat TransferMatrices::derivative(cd u) const {
  const Local loc = local_r(chain_, TransferKind::t);
  const bool periodic = chain_.boundary == BoundaryKind::periodic;
  const Jet t = monodromy_jet(chain_, loc, u, false, true, periodic);
  if (periodic) return trace(t.d);
  const int n = chain_.n;
  const Mat km = k_minus(n, chain_.params, u), kp = k_plus(n, chain_.params, u);
  const Mat dkm = k_minus_derivative(n, chain_.params), dkp = k_plus_derivative(n, chain_.params);
  const Jet th = monodromy_jet(chain_, loc, u, true, true);
  const Blocks m = scalar_right(t.v, km);
  const Blocks dm = add(scalar_right(t.d, km), scalar_right(t.v, dkm));
  const Blocks w = scalar_left(kp, m);
  const Blocks dw = add(scalar_left(dkp, m), scalar_left(kp, dm));
  return trace_product(dw, th.v) + trace_product(w, th.d);
}

Mat TransferMatrices::monodromy(TransferKind kind, cd u) const {
  return dense(monodromy_jet(chain_, local_r(chain_, kind), u, false, false).v);
}

Mat TransferMatrices::monodromy_hat(TransferKind kind, cd u) const {
  return dense(monodromy_jet(chain_, local_r(chain_, kind), u, true, false).v);
}

Mat TransferMatrices::reflecting_monodromy(TransferKind kind, cd u) const {
  if (chain_.boundary != BoundaryKind::open) throw std::invalid_argument("reflecting monodromy needs an open chain");
  const Local loc = local_r(chain_, kind);
  Mat km;
  switch (kind) {
    case TransferKind::t: km = k_minus(chain_.n, chain_.params, u); break;
    case TransferKind::t2: km = (*fused_)(c3::FusedKind::bar_minus, u); break;
    case TransferKind::t3: km = (*fused_)(c3::FusedKind::tilde_minus, u); break;
  }
  const Blocks t = monodromy_jet(chain_, loc, u, false, false).v;
  const Blocks th = monodromy_jet(chain_, loc, u, true, false).v;
  Blocks out = zero_blocks(t.D, t.b[0].rows());
  const Blocks m = scalar_right(t, km);
  for (int a = 0; a < t.D; ++a)
    for (int b = 0; b < t.D; ++b)
      for (int c = 0; c < t.D; ++c) out.at(a, b).noalias() += m.at(a, c) * th.at(c, b);
  return dense(out);
}

Mat hamiltonian(int n, int sites, BoundaryKind boundary, const BoundaryParams& p) {
  ChainSpec c{n, std::vector<cd>(static_cast<std::size_t>(sites), cd(0.0)), boundary, p};
  const TransferMatrices tm(c);
  const Mat t0 = tm(TransferKind::t, 0.0);
  Eigen::PartialPivLU<Mat> lu(t0);
  if (std::abs(lu.determinant()) == 0.0) throw SingularityError("t(0) is singular");
  // H = t'(0) t(0)^{-1}  <=>  H^T = t(0)^{-T} t'(0)^T
  const Mat ht = t0.transpose().partialPivLu().solve(tm.derivative(0.0).transpose());
  return ht.transpose();
}

namespace {

std::vector<TransferKind> kinds_of(const ChainSpec& c) {
  if (c.has_fused()) return {TransferKind::t, TransferKind::t2, TransferKind::t3};
  return {TransferKind::t};
}

// Nodes for eigenvalue / entry fits: Chebyshev on [-5, 1.5] (covering all special points) lifted off the real axis.
constexpr double kFitLo = -5.0, kFitHi = 1.5, kFitOffset = 0.37;

std::vector<cd> heldout_nodes() { return {cd(0.713, -0.29), cd(-3.87, 0.61)}; }

}  // namespace

Spectrum spectrum(const TransferMatrices& tm, std::uint64_t seed) {
  const ChainSpec& c = tm.chain();
  const auto kinds = kinds_of(c);
  std::vector<Mat> ops{tm(TransferKind::t, cd(0.311, 0.127)), tm(TransferKind::t, cd(-0.73, 0.419))};
  for (std::size_t k = 1; k < kinds.size(); ++k) ops.push_back(tm(kinds[k], cd(0.157, -0.263)));
  const SimultaneousBasis sb = simultaneous_eigbasis(ops, seed);

  Spectrum sp;
  sp.basis_residual = sb.max_residual;
  sp.degenerate_clusters = sb.degenerate_clusters;
  sp.has_fused = c.has_fused();
  const Mat& V = sb.vectors;
  const Eigen::Index m = V.cols();
  sp.lines.resize(static_cast<std::size_t>(m));
  const Eigen::VectorXcd norms = (V.adjoint() * V).diagonal();

  for (TransferKind kind : kinds) {
    const int deg = transfer_degree(c, kind);
    std::vector<cd> nodes = chebyshev_nodes(deg + 1, kFitLo, kFitHi, kFitOffset);
    for (const cd& h : heldout_nodes()) nodes.push_back(h);
    std::vector<std::vector<cd>> vals(static_cast<std::size_t>(m));
    for (const cd& u : nodes) {
      const Mat tv = tm(kind, u) * V;
      for (Eigen::Index j = 0; j < m; ++j)
        vals[static_cast<std::size_t>(j)].push_back(V.col(j).dot(tv.col(j)) / norms(j));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      PolynomialFit f = fit_polynomial_heldout(nodes, vals[static_cast<std::size_t>(j)], deg);
      sp.fit_residual = std::max(sp.fit_residual, f.residual);
      EigenLine& line = sp.lines[static_cast<std::size_t>(j)];
      if (kind == TransferKind::t) line.vector = V.col(j);
      (kind == TransferKind::t ? line.lambda : kind == TransferKind::t2 ? line.lambda2 : line.lambda3) = std::move(f);
    }
  }
  return sp;
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

cd prod_over(const std::vector<cd>& th, const std::function<cd(cd)>& f) {
  cd p = 1.0;
  for (const cd& t : th) p *= f(t);
  return p;
}

// Random probe columns: operator equalities are checked as A X = B X for a few random X columns.
Mat probe(Eigen::Index rows, Eigen::Index cols, Sampler& s) {
  Mat x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = cd(s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0));
  return x;
}

std::string site_suffix(int j, double sign) { return (sign > 0 ? ".plus_theta" : ".minus_theta") + std::to_string(j + 1); }

}  // namespace

VerificationReport verify_monodromy(const ChainSpec& c, int samples, double tol, Sampler& s) {
  c.validate_shape();
  VerificationReport rep;
  const TransferMatrices tm(c);
  const int d = c.site_dim();
  const int Q = static_cast<int>(c.quantum_dim());
  const RMatrixFamily R(c.n);
  const std::string pre = std::string("monodromy.") + to_string(c.boundary) + ".n" + std::to_string(c.n) + ".";

  // RTT relations: R_{00'}(u-v) T_0(u) T_0'(v) = T_0'(v) T_0(u) R_{00'}(u-v) for (t,t), (t2,t), (t3,t).
  struct Pair {
    TransferKind kind;
    int aux;
    std::function<Mat(cd)> r;
    const char* name;
  };
  std::vector<Pair> pairs{{TransferKind::t, d, [R](cd u) { return R(u); }, "fundamental"}};
  if (c.has_fused() && c.sites() == 1) {
    pairs.push_back({TransferKind::t2, 14, [](cd u) { return c3::r_bar_poly(u); }, "bar"});
    pairs.push_back({TransferKind::t3, 14, [](cd u) { return c3::r_tilde_poly(u); }, "tilde"});
  }
  for (const Pair& pr : pairs) {
    Worst w;
    const std::vector<int> dims{pr.aux, d, Q};
    for (int i = 0; i < samples; ++i) {
      const cd u = s.spectral(), v = s.spectral();
      const Mat r = pr.r(u - v);
      const Mat ta = tm.monodromy(pr.kind, u), tb = tm.monodromy(TransferKind::t, v);
      const Mat x = probe(pr.aux * d * Q, 8, s);
      const Mat lhs = apply_embedded(r, {0, 1}, dims, apply_embedded(ta, {0, 2}, dims, apply_embedded(tb, {1, 2}, dims, x)));
      const Mat rhs = apply_embedded(tb, {1, 2}, dims, apply_embedded(ta, {0, 2}, dims, apply_embedded(r, {0, 1}, dims, x)));
      w.update(rel_diff(lhs, rhs), {{"u", u}, {"v", v}});
    }
    rep.add(pre + "yang_baxter." + pr.name, "R(u-v) T(u) T(v) = T(v) T(u) R(u-v)", w.residual, tol, w.witness);
  }

  // T^_0(-theta_1) at N = 1 is the regular point R(0).
  if (c.sites() == 1) {
    const Mat th = tm.monodromy_hat(TransferKind::t, -c.theta[0]);
    rep.add(pre + "regular_point", "T^(-theta_1) = R(0) = rho_v(0)^{1/2} P for one site",
            rel_diff(th, std::sqrt(R.rho_v(0.0)) * R.permutation()), tol);
  }

  // Reflection algebra for the reflecting monodromy.
  if (c.boundary == BoundaryKind::open) {
    Worst w;
    const std::vector<int> dims{d, d, Q};
    for (int i = 0; i < samples; ++i) {
      const cd u = s.spectral(), v = s.spectral();
      const Mat r1 = R(u - v), r2 = R(u + v);
      const Mat ta = tm.reflecting_monodromy(TransferKind::t, u), tb = tm.reflecting_monodromy(TransferKind::t, v);
      const Mat x = probe(d * d * Q, 8, s);
      Mat lhs = apply_embedded(tb, {1, 2}, dims, x);
      lhs = apply_embedded(r2, {0, 1}, dims, lhs);
      lhs = apply_embedded(ta, {0, 2}, dims, lhs);
      lhs = apply_embedded(r1, {0, 1}, dims, lhs);
      Mat rhs = apply_embedded(r1, {0, 1}, dims, x);
      rhs = apply_embedded(ta, {0, 2}, dims, rhs);
      rhs = apply_embedded(r2, {0, 1}, dims, rhs);
      rhs = apply_embedded(tb, {1, 2}, dims, rhs);
      w.update(rel_diff(lhs, rhs), {{"u", u}, {"v", v}});
    }
    rep.add(pre + "reflection_algebra", "R(u-v) U_1(u) R(u+v) U_2(v) = U_2(v) R(u+v) U_1(u) R(u-v)", w.residual, tol,
            w.witness);
  }

  // Fusion of monodromies: compressing T_0(u+1/2) T_0'(u-1/2) onto the 14-dim subspace gives T_bar(u).
  if (c.has_fused() && c.sites() <= 2) {
    const std::vector<int> dims{6, 6, Q};
    const Mat w0 = kron(c3::projector(c3::ProjectorName::P14).isometry, Mat::Identity(Q, Q));
    Worst w;
    for (int i = 0; i < samples; ++i) {
      const cd u = s.spectral();
      Mat x = apply_embedded(tm.monodromy(TransferKind::t, u - 0.5), {1, 2}, dims, w0);
      x = apply_embedded(tm.monodromy(TransferKind::t, u + 0.5), {0, 2}, dims, x);
      const cd norm = prod_over(c.theta, [&](cd t) { return c3::rho0_tilde(u + 0.5 - t); });
      w.update(rel_diff(w0.adjoint() * x, norm * tm.monodromy(TransferKind::t2, u)), {{"u", u}});
    }
    rep.add(pre + "fusion.bar", "P14 T(u+1/2) T(u-1/2) P14 = prod rho0(u+1/2-theta) T_bar(u)", w.residual, tol,
            w.witness);
  }
  return rep;
}

VerificationReport verify_commutativity(const TransferMatrices& tm, int samples, double tol, Sampler& s) {
  const ChainSpec& c = tm.chain();
  const auto kinds = kinds_of(c);
  VerificationReport rep;
  for (std::size_t a = 0; a < kinds.size(); ++a)
    for (std::size_t b = a; b < kinds.size(); ++b) {
      Worst w;
      for (int i = 0; i < samples; ++i) {
        const cd u = s.spectral(), v = s.spectral();
        const Mat x = tm(kinds[a], u), y = tm(kinds[b], v);
        w.update((x * y - y * x).norm() / std::max(x.norm() * y.norm(), 1e-300), {{"u", u}, {"v", v}});
      }
      rep.add(std::string("commute.") + to_string(c.boundary) + "." + to_string(kinds[a]) + "_" + to_string(kinds[b]),
              "[t_a(u), t_b(v)] = 0", w.residual, tol, w.witness);
    }
  return rep;
}

namespace {

// Records an identity lhs = rhs at one point; vanishing sides are reported as degenerate.
void add_identity(VerificationReport& rep, const std::string& name, const std::string& anchor, const Mat& lhs,
                  const Mat& rhs, double scale, double tol, std::vector<std::pair<std::string, cd>> witness) {
  const double mag = std::max(lhs.norm(), rhs.norm());
  if (mag <= 1e-12 * scale) {
    Check& ch = rep.add(name, anchor, 0.0, tol, std::move(witness));
    ch.note = "degenerate: both sides vanish at this point";
    return;
  }
  Check& ch = rep.add(name, anchor, rel_diff(lhs, rhs), tol, std::move(witness));
  annotate_ratio(ch, lhs, rhs);
}

}  // namespace

VerificationReport verify_operator_identities(const TransferMatrices& tm, double tol) {
  const ChainSpec& c = tm.chain();
  c.validate();
  VerificationReport rep;
  if (!c.has_fused()) return rep;
  const auto& th = c.theta;
  const Mat I = Mat::Identity(c.quantum_dim(), c.quantum_dim());
  const RMatrixFamily R(3);
  auto t = [&](cd u) { return tm(TransferKind::t, u); };
  auto t2 = [&](cd u) { return tm(TransferKind::t2, u); };
  auto t3 = [&](cd u) { return tm(TransferKind::t3, u); };

  if (c.boundary == BoundaryKind::periodic) {
    const std::string pre = "identity.periodic.";
    for (int j = 0; j < c.sites(); ++j) {
      const cd x = th[j];
      const std::vector<std::pair<std::string, cd>> w{{"u", x}};
      const std::string sfx = ".theta" + std::to_string(j + 1);
      const Mat tx = t(x);
      const double sc = tx.norm();
      auto pr = [&](const std::function<cd(cd)>& f) { return prod_over(th, [&](cd ti) { return f(x - ti); }); };
      {
        const Mat l = tx * t(x - 4.0);
        add_identity(rep, pre + "t_t4" + sfx, "periodic fusion hierarchy t(u) t(u-4)", l,
                     pr([&](cd d) { return R.a(d) * R.e(d - 4.0); }) * I, sc * t(x - 4.0).norm(), tol, w);
      }
      {
        const Mat l = tx * t(x - 1.0);
        add_identity(rep, pre + "t_t1" + sfx, "periodic fusion hierarchy t(u) t(u-1)", l,
                     pr([](cd d) { return c3::rho0_tilde(d); }) * t2(x - 0.5), sc * t(x - 1.0).norm(), tol, w);
      }
      {
        const Mat a = t2(x - 1.5);
        add_identity(rep, pre + "t_t2_32" + sfx, "periodic fusion hierarchy t(u) t2(u-3/2)", tx * a,
                     pr([](cd d) { return c3::rho0_tilde(d) * (d + 1.0); }) * t3(x - 1.0), sc * a.norm(), tol, w);
      }
      {
        const Mat a = t2(x - 3.5);
        add_identity(rep, pre + "t_t2_72" + sfx, "periodic fusion hierarchy t(u) t2(u-7/2)", tx * a,
                     pr([](cd d) { return c3::rho0_tilde(d); }) * t(x - 3.0), sc * a.norm(), tol, w);
      }
      {
        const Mat a = t3(x - 3.0);
        add_identity(rep, pre + "t_t3_3" + sfx, "periodic fusion hierarchy t(u) t3(u-3)", tx * a,
                     pr([](cd d) { return d + 4.0; }) * t2(x - 2.5), sc * a.norm(), tol, w);
      }
    }
    return rep;
  }

  const BoundaryParams& p = c.params;
  auto H1H2 = [&](cd x) { return p.h1(x) * p.h1_t(x) * p.h2(x) * p.h2_t(x); };
  auto varrho = [&](cd x) {
    return prod_over(th, [&](cd ti) { return c3::rho0_tilde(x - ti) * c3::rho0_tilde(x + ti); });
  };
  auto pr2 = [&](cd x, double s) { return prod_over(th, [&](cd ti) { return (x - ti + s) * (x + ti + s); }); };
  const std::string pre = "identity.open.";
  for (int j = 0; j < c.sites(); ++j)
    for (double sg : {1.0, -1.0}) {
      const cd x = sg * th[j];
      const std::vector<std::pair<std::string, cd>> w{{"u", x}};
      const std::string sfx = site_suffix(j, sg);
      const Mat tx = t(x);
      const double sc = tx.norm();
      {
        const Mat a = t(x - 4.0);
        const cd f = (1.0 / 16.0) * (x - 1.5) * (x + 1.5) * (x - 4.0) * (x + 4.0) /
                     ((x - 0.5) * (x + 0.5) * (x - 2.0) * (x + 2.0)) * H1H2(x) * varrho(x) * varrho(-x);
        add_identity(rep, pre + "t_t4" + sfx, "open fusion hierarchy t(u) t(u-4)", tx * a, f * I, sc * a.norm(), tol,
                     w);
      }
      {
        const Mat a = t(x - 1.0);
        const cd f = 0.25 * (x - 1.0) * (x + 1.5) * (x + 1.5) * (x + 4.0) /
                     ((x - 0.5) * (x + 3.5) * (x + 1.0) * (x + 2.0)) * varrho(x);
        add_identity(rep, pre + "t_t1" + sfx, "open fusion hierarchy t(u) t(u-1)", tx * a, f * t2(x - 0.5),
                     sc * a.norm(), tol, w);
      }
      {
        const Mat a = t2(x - 1.5);
        const cd f = (1.0 / 16.0) * (x - 1.5) * (x + 1.5) * (x + 1.0) * (x + 4.0) /
                     ((x - 0.5) * (x + 0.5) * (x + 2.0) * (x + 3.0)) * varrho(x) * pr2(x, 1.0);
        add_identity(rep, pre + "t_t2_32" + sfx, "open fusion hierarchy t(u) t2(u-3/2)", tx * a, f * t3(x - 1.0),
                     sc * a.norm(), tol, w);
      }
      {
        const Mat a = t2(x - 3.5);
        const cd f = 0.25 * (x - 1.0) * (x - 3.5) * (x + 1.5) * (x + 4.0) /
                     ((x - 0.5) * (x - 1.5) * (x + 1.0) * (x + 2.0)) * H1H2(x) * varrho(x);
        add_identity(rep, pre + "t_t2_72" + sfx, "open fusion hierarchy t(u) t2(u-7/2)", tx * a, f * t(x - 3.0),
                     sc * a.norm(), tol, w);
      }
      {
        const Mat a = t3(x - 3.0);
        const cd f = (x - 3.0) * (x + 4.0) / ((x - 1.0) * (x + 2.0)) * pr2(x, 4.0) * H1H2(x);
        add_identity(rep, pre + "t_t3_3" + sfx, "open fusion hierarchy t(u) t3(u-3)", tx * a, f * t2(x - 2.5),
                     sc * a.norm(), tol, w);
      }
    }
  return rep;
}

namespace {

// The twelve special-point relations of the open chain, as (name, point, lhs kind, rhs factor, rhs kind/point).
struct SpecialValue {
  std::string name;
  TransferKind kind;
  cd point;
  cd factor;
  std::optional<std::pair<TransferKind, cd>> rhs;  // empty: rhs = factor * id
};

std::vector<SpecialValue> special_values(const ChainSpec& c) {
  const BoundaryParams& p = c.params;
  const RMatrixFamily R(3);
  const cd zz = p.zeta * p.zeta_t;
  const cd D = (1.0 + p.c1 * p.c2 - 4.0 * p.zeta * p.zeta) * (1.0 + p.c1_t * p.c2_t - 4.0 * p.zeta_t * p.zeta_t);
  auto pr = [&](const std::function<cd(cd)>& f) { return prod_over(c.theta, [&](cd t) { return f(-t); }); };
  const cd r1 = pr([&](cd u) { return R.rho_v(u); });
  const cd rb = pr([](cd u) { return c3::rho_vbar(u); });
  const cd rt = pr([](cd u) { return c3::rho_vtilde(u); });
  const cd g1 = prod_over(c.theta, [](cd t) { return (1.0 - t) * (1.0 + t); });
  const cd g32 = prod_over(c.theta, [](cd t) { return (1.5 - t) * (1.5 + t); });
  using K = TransferKind;
  return {
      {"t.at0", K::t, 0.0, 6.0 * zz * r1, std::nullopt},
      {"t.atm4", K::t, -4.0, 6.0 * zz * r1, std::nullopt},
      {"t2.at0", K::t2, 0.0, 3.5 * D * rb, std::nullopt},
      {"t2.atm4", K::t2, -4.0, 3.5 * D * rb, std::nullopt},
      {"t2.atm1_2", K::t2, -0.5, 28.0 / 3.0 * zz, std::make_pair(K::t, cd(-1.0))},
      {"t2.atm7_2", K::t2, -3.5, 28.0 / 3.0 * zz, std::make_pair(K::t, cd(-3.0))},
      {"t3.at0", K::t3, 0.0, 128.0 * 7.0 * zz * D * rt, std::nullopt},
      {"t3.atm4", K::t3, -4.0, 128.0 * 7.0 * zz * D * rt, std::nullopt},
      {"t3.atm1", K::t3, -1.0, 16.0 * zz / g1, std::make_pair(K::t2, cd(-1.5))},
      {"t3.atm3", K::t3, -3.0, 16.0 * zz / g1, std::make_pair(K::t2, cd(-2.5))},
      {"t3.atm1_2", K::t3, -0.5, -28.0 * D / g32, std::make_pair(K::t, cd(-1.5))},
      {"t3.atm7_2", K::t3, -3.5, -28.0 * D / g32, std::make_pair(K::t, cd(-2.5))},
  };
}

}  // namespace

VerificationReport verify_asymptotics_and_special_values(const TransferMatrices& tm, double tol) {
  const ChainSpec& c = tm.chain();
  VerificationReport rep;
  const std::string b = to_string(c.boundary);
  const Mat I = Mat::Identity(c.quantum_dim(), c.quantum_dim());
  for (TransferKind kind : kinds_of(c)) {
    const int deg = transfer_degree(c, kind);
    double held = 0.0;
    const MatrixPolynomial mp =
        interpolate_matrix([&](cd u) { return tm(kind, u); }, deg, kFitLo, kFitHi, kFitOffset, &held);
    const std::string k = to_string(kind);
    rep.add("degree." + b + "." + k, "entries of " + k + "(u) are polynomials of degree " + std::to_string(deg), held,
            tol);
    const cd coef = asymptotic_coefficient(c, kind);
    Check& ch = rep.add("asymptotic." + b + "." + k,
                        "leading term of " + k + "(u) is c u^" + std::to_string(deg) + " id", rel_diff(mp.leading(), coef * I),
                        tol, {{"expected", coef}});
    annotate_ratio(ch, mp.leading(), coef * I);
  }
  if (c.boundary != BoundaryKind::open || !c.has_fused()) return rep;
  for (const SpecialValue& sv : special_values(c)) {
    const Mat lhs = tm(sv.kind, sv.point);
    const Mat rhs = sv.rhs ? Mat(sv.factor * tm(sv.rhs->first, sv.rhs->second)) : Mat(sv.factor * I);
    Check& ch = rep.add("special." + sv.name, "open special-point value of " + std::string(to_string(sv.kind)),
                        rel_diff(lhs, rhs), tol, {{"u", sv.point}});
    annotate_ratio(ch, lhs, rhs);
    if (sv.name.rfind("t.", 0) == 0) ch.note = "assumes rho_1 = rho_v(u) = a(u) a(-u)";
    if (sv.name.rfind("t2.at", 0) == 0 && !sv.rhs) ch.note = "rho_vbar taken as the R_bar unitarity normalizer";
    if (sv.name == "t3.at0" || sv.name == "t3.atm4") ch.note = "rho_vtilde taken as the R_tilde unitarity normalizer";
  }
  return rep;
}

EigenLine fit_eigen_line(const ChainSpec& c, const std::function<cd(TransferKind, cd)>& value) {
  EigenLine line;
  for (TransferKind kind : kinds_of(c)) {
    const int deg = transfer_degree(c, kind);
    std::vector<cd> nodes = chebyshev_nodes(deg + 1, kFitLo, kFitHi, kFitOffset);
    for (const cd& h : heldout_nodes()) nodes.push_back(h);
    std::vector<cd> vals;
    for (const cd& u : nodes) vals.push_back(value(kind, u));
    (kind == TransferKind::t ? line.lambda : kind == TransferKind::t2 ? line.lambda2 : line.lambda3) =
        fit_polynomial_heldout(nodes, vals, deg);
  }
  return line;
}

VerificationReport verify_spectrum(const TransferMatrices& tm, const Spectrum& sp, double tol) {
  const std::string b = std::string("eigen.") + to_string(tm.chain().boundary) + ".";
  VerificationReport rep;
  rep.add(b + "common_basis", "t, t2, t3 share eigenvectors", sp.basis_residual, tol);
  rep.merge(verify_eigenvalues(tm.chain(), sp.lines, sp.has_fused, tol, b));
  return rep;
}

VerificationReport verify_eigenvalues(const ChainSpec& c, const std::vector<EigenLine>& lines, bool has_fused,
                                      double tol, const std::string& b) {
  VerificationReport rep;
  {
    double fit = 0.0;
    for (const auto& line : lines) {
      fit = std::max(fit, line.lambda.residual);
      if (has_fused) fit = std::max({fit, line.lambda2.residual, line.lambda3.residual});
    }
    rep.add(b + "degree", "eigenvalues are polynomials of the stated degrees (held-out residual)", fit, tol);
  }

  auto scalar_rel = [](cd l, cd r) { return rel_diff(l, r); };
  // Asymptotics of every eigenvalue.
  {
    Worst w[3];
    for (const auto& line : lines) {
      w[0].update(scalar_rel(line.lambda.leading(), asymptotic_coefficient(c, TransferKind::t)), {});
      if (has_fused) {
        w[1].update(scalar_rel(line.lambda2.leading(), asymptotic_coefficient(c, TransferKind::t2)), {});
        w[2].update(scalar_rel(line.lambda3.leading(), asymptotic_coefficient(c, TransferKind::t3)), {});
      }
    }
    rep.add(b + "asymptotic.lambda", "leading coefficient of Lambda", w[0].residual, tol);
    if (has_fused) {
      rep.add(b + "asymptotic.lambda2", "leading coefficient of Lambda2", w[1].residual, tol);
      rep.add(b + "asymptotic.lambda3", "leading coefficient of Lambda3", w[2].residual, tol);
    }
  }
  if (!has_fused) return rep;

  const auto& th = c.theta;
  const RMatrixFamily R(3);
  std::vector<std::pair<std::string, Worst>> fam;
  std::map<std::string, std::vector<cd>> ratios;  // lhs / rhs of the special values, per line
  auto record = [&](const std::string& name, double r, cd u) {
    for (auto& f : fam)
      if (f.first == name) return f.second.update(r, {{"u", u}});
    fam.push_back({name, Worst{}});
    fam.back().second.update(r, {{"u", u}});
  };
  for (const auto& line : lines) {
    const auto& L = line.lambda;
    const auto& L2 = line.lambda2;
    const auto& L3 = line.lambda3;
    if (c.boundary == BoundaryKind::periodic) {
      for (const cd& x : th) {
        auto pr = [&](const std::function<cd(cd)>& f) { return prod_over(th, [&](cd ti) { return f(x - ti); }); };
        record("t_t4", scalar_rel(L(x) * L(x - 4.0), pr([&](cd d) { return R.a(d) * R.e(d - 4.0); })), x);
        record("t_t1", scalar_rel(L(x) * L(x - 1.0), pr([](cd d) { return c3::rho0_tilde(d); }) * L2(x - 0.5)), x);
        record("t_t2_32",
               scalar_rel(L(x) * L2(x - 1.5), pr([](cd d) { return c3::rho0_tilde(d) * (d + 1.0); }) * L3(x - 1.0)),
               x);
        record("t_t2_72", scalar_rel(L(x) * L2(x - 3.5), pr([](cd d) { return c3::rho0_tilde(d); }) * L(x - 3.0)), x);
        record("t_t3_3", scalar_rel(L(x) * L3(x - 3.0), pr([](cd d) { return d + 4.0; }) * L2(x - 2.5)), x);
      }
      continue;
    }
    const BoundaryParams& p = c.params;
    auto H1H2 = [&](cd x) { return p.h1(x) * p.h1_t(x) * p.h2(x) * p.h2_t(x); };
    auto varrho = [&](cd x) {
      return prod_over(th, [&](cd ti) { return c3::rho0_tilde(x - ti) * c3::rho0_tilde(x + ti); });
    };
    auto pr2 = [&](cd x, double s) { return prod_over(th, [&](cd ti) { return (x - ti + s) * (x + ti + s); }); };
    for (const cd& t0 : th)
      for (double sg : {1.0, -1.0}) {
        const cd x = sg * t0;
        record("t_t4",
               scalar_rel(L(x) * L(x - 4.0), (1.0 / 16.0) * (x - 1.5) * (x + 1.5) * (x - 4.0) * (x + 4.0) /
                                                 ((x - 0.5) * (x + 0.5) * (x - 2.0) * (x + 2.0)) * H1H2(x) *
                                                 varrho(x) * varrho(-x)),
               x);
        record("t_t1",
               scalar_rel(L(x) * L(x - 1.0), 0.25 * (x - 1.0) * (x + 1.5) * (x + 1.5) * (x + 4.0) /
                                                 ((x - 0.5) * (x + 3.5) * (x + 1.0) * (x + 2.0)) * varrho(x) *
                                                 L2(x - 0.5)),
               x);
        record("t_t2_32",
               scalar_rel(L(x) * L2(x - 1.5), (1.0 / 16.0) * (x - 1.5) * (x + 1.5) * (x + 1.0) * (x + 4.0) /
                                                  ((x - 0.5) * (x + 0.5) * (x + 2.0) * (x + 3.0)) * varrho(x) *
                                                  pr2(x, 1.0) * L3(x - 1.0)),
               x);
        record("t_t2_72",
               scalar_rel(L(x) * L2(x - 3.5), 0.25 * (x - 1.0) * (x - 3.5) * (x + 1.5) * (x + 4.0) /
                                                  ((x - 0.5) * (x - 1.5) * (x + 1.0) * (x + 2.0)) * H1H2(x) *
                                                  varrho(x) * L(x - 3.0)),
               x);
        record("t_t3_3",
               scalar_rel(L(x) * L3(x - 3.0), (x - 3.0) * (x + 4.0) / ((x - 1.0) * (x + 2.0)) * pr2(x, 4.0) *
                                                  H1H2(x) * L2(x - 2.5)),
               x);
      }
    for (const SpecialValue& sv : special_values(c)) {
      const auto& lhs = sv.kind == TransferKind::t ? L : sv.kind == TransferKind::t2 ? L2 : L3;
      cd rhs = sv.factor;
      if (sv.rhs) rhs *= (sv.rhs->first == TransferKind::t ? L : L2)(sv.rhs->second);
      const cd l = lhs(sv.point);
      record("special." + sv.name, scalar_rel(l, rhs), sv.point);
      ratios["special." + sv.name].push_back(rhs == cd(0.0) ? cd(NAN, NAN) : l / rhs);
    }
  }
  for (auto& [name, w] : fam) {
    Check& ch = rep.add(b + "relation." + name, "eigenvalue form of " + name, w.residual, tol, w.witness);
    // A failure with one common ratio over all eigenvalues is a constant-factor mismatch.
    const auto it = ratios.find(name);
    if (ch.pass || it == ratios.end() || it->second.empty() || !std::isfinite(it->second.front().real())) continue;
    bool constant = true;
    for (const cd& k : it->second) constant = constant && rel_diff(k, it->second.front()) < 1e-8;
    if (constant) ch.measured_ratio = it->second.front();
  }
  return rep;
}

VerificationReport verify_hamiltonian(int n, int sites, BoundaryKind boundary, const BoundaryParams& p, int samples,
                                      double tol, Sampler& s) {
  VerificationReport rep;
  const std::string pre = std::string("hamiltonian.") + to_string(boundary) + ".n" + std::to_string(n) + ".N" +
                          std::to_string(sites) + ".";
  const Mat H = hamiltonian(n, sites, boundary, p);
  const ChainSpec c{n, std::vector<cd>(static_cast<std::size_t>(sites), cd(0.0)), boundary, p};
  const TransferMatrices tm(c);

  Worst comm;
  for (int i = 0; i < samples; ++i) {
    const cd v = s.spectral();
    const Mat t = tm(TransferKind::t, v);
    comm.update((H * t - t * H).norm() / std::max(H.norm() * t.norm(), 1e-300), {{"v", v}});
  }
  rep.add(pre + "commutes", "[H, t(v)] = 0", comm.residual, tol, comm.witness);

  // Eigenvalues of H against central differences of ln Lambda at u = 0.
  const SimultaneousBasis sb =
      simultaneous_eigbasis({tm(TransferKind::t, cd(0.311, 0.127)), tm(TransferKind::t, cd(-0.73, 0.419))}, 11);
  const double h = 1e-5;
  const Mat tp = tm(TransferKind::t, h), tmn = tm(TransferKind::t, -h), t0 = tm(TransferKind::t, 0.0);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < sb.vectors.cols(); ++j) {
    const Vec v = sb.vectors.col(j);
    const cd nv = v.dot(v);
    const cd e = v.dot(H * v) / nv;
    const cd fd = (v.dot(tp * v) - v.dot(tmn * v)) / (2.0 * h) / (v.dot(t0 * v));
    worst = std::max(worst, std::abs(e - fd) / std::max(1.0, std::abs(e)));
  }
  rep.add(pre + "finite_difference", "eigenvalues of H equal d ln Lambda/du at u = 0", worst, 1e-7);

  if (boundary == BoundaryKind::periodic && sites >= 2) {
    Vec e0 = Vec::Zero(H.rows());
    e0(0) = 1.0;
    const Vec he = H * e0;
    const cd E = he(0);
    const double res = (he - E * e0).norm();
    rep.add(pre + "vacuum_energy", "H on |1...1> has energy 5N/4", std::max(res, rel_diff(E, 1.25 * sites)), 1e-8,
            {{"energy", E}});
  }
  return rep;
}

}  // namespace cnv
