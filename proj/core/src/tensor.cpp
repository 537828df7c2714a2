#include "cnvertex/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

namespace cnv {

std::int64_t capacity_cap() {
  if (const char* env = std::getenv("CNV_MAX_ENTRIES")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  return std::int64_t{1} << 28;
}

void check_capacity(std::int64_t entries, const std::string& what) {
  if (entries > capacity_cap())
    throw CapacityError(what + ": " + std::to_string(entries) + " entries exceeds cap " +
                        std::to_string(capacity_cap()));
}

DenseOperator::DenseOperator(std::vector<SpaceLabel> f, Mat mat) : factors(std::move(f)), m(std::move(mat)) {
  std::int64_t d = 1;
  for (const auto& s : factors) {
    if (s.dim < 1) throw std::invalid_argument("space dimension must be positive");
    d *= s.dim;
  }
  if (m.rows() != d || m.cols() != d) throw std::invalid_argument("operator size does not match factor dims");
}

std::vector<int> DenseOperator::dims() const {
  std::vector<int> d;
  for (const auto& s : factors) d.push_back(s.dim);
  return d;
}

std::int64_t product(const std::vector<int>& dims) {
  std::int64_t p = 1;
  for (int d : dims) p *= d;
  return p;
}

Mat kron(const Mat& a, const Mat& b) {
  check_capacity(a.rows() * b.rows() * a.cols() * b.cols(), "kron");
  return Eigen::kroneckerProduct(a, b).eval();
}

DenseOperator kron(const DenseOperator& a, const DenseOperator& b) {
  auto f = a.factors;
  f.insert(f.end(), b.factors.begin(), b.factors.end());
  return DenseOperator(std::move(f), kron(a.m, b.m));
}

namespace {

// strides of a row-major multi-index
std::vector<std::int64_t> strides_of(const std::vector<int>& dims) {
  std::vector<std::int64_t> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

}  // namespace

namespace {

// Offsets of the op's basis states and of the spectator factors inside the full row-major index.
struct EmbedLayout {
  std::vector<std::int64_t> op_off, rest_off;
  std::int64_t D = 1;
};

EmbedLayout embed_layout(const Mat& op, const std::vector<int>& positions, const std::vector<int>& dims) {
  const int L = static_cast<int>(dims.size());
  std::vector<bool> used(L, false);
  std::int64_t dop = 1;
  for (int p : positions) {
    if (p < 0 || p >= L) throw std::invalid_argument("embed: position out of range");
    if (used[p]) throw std::invalid_argument("embed: duplicate position");
    used[p] = true;
    dop *= dims[p];
  }
  if (op.rows() != dop || op.cols() != dop) throw std::invalid_argument("embed: dimension mismatch");
  EmbedLayout lay;
  lay.D = product(dims);

  const auto st = strides_of(dims);
  std::vector<int> rest;
  for (int k = 0; k < L; ++k)
    if (!used[k]) rest.push_back(k);

  lay.op_off.assign(dop, 0);
  for (std::int64_t i = 0; i < dop; ++i) {
    std::int64_t r = i, off = 0;
    for (int q = static_cast<int>(positions.size()) - 1; q >= 0; --q) {
      int p = positions[q];
      off += (r % dims[p]) * st[p];
      r /= dims[p];
    }
    lay.op_off[i] = off;
  }
  const std::int64_t drest = lay.D / dop;
  lay.rest_off.assign(drest, 0);
  for (std::int64_t i = 0; i < drest; ++i) {
    std::int64_t r = i, off = 0;
    for (int q = static_cast<int>(rest.size()) - 1; q >= 0; --q) {
      int p = rest[q];
      off += (r % dims[p]) * st[p];
      r /= dims[p];
    }
    lay.rest_off[i] = off;
  }
  return lay;
}

}  // namespace

Mat embed(const Mat& op, const std::vector<int>& positions, const std::vector<int>& dims) {
  const EmbedLayout lay = embed_layout(op, positions, dims);
  check_capacity(lay.D * lay.D, "embed");
  const auto dop = static_cast<std::int64_t>(lay.op_off.size());
  Mat out = Mat::Zero(lay.D, lay.D);
  for (std::int64_t j = 0; j < dop; ++j)
    for (std::int64_t i = 0; i < dop; ++i) {
      const cd v = op(i, j);
      if (v == cd(0.0)) continue;
      for (std::int64_t r : lay.rest_off) out(lay.op_off[i] + r, lay.op_off[j] + r) = v;
    }
  return out;
}

Mat apply_embedded(const Mat& op, const std::vector<int>& positions, const std::vector<int>& dims, const Mat& x) {
  const EmbedLayout lay = embed_layout(op, positions, dims);
  if (x.rows() != lay.D) throw std::invalid_argument("apply_embedded: dimension mismatch");
  const auto dop = static_cast<std::int64_t>(lay.op_off.size());
  Mat out = Mat::Zero(lay.D, x.cols());
  for (std::int64_t j = 0; j < dop; ++j)
    for (std::int64_t i = 0; i < dop; ++i) {
      const cd v = op(i, j);
      if (v == cd(0.0)) continue;
      for (std::int64_t r : lay.rest_off) out.row(lay.op_off[i] + r) += v * x.row(lay.op_off[j] + r);
    }
  return out;
}

Mat apply_embedded_right(const Mat& x, const Mat& op, const std::vector<int>& positions,
                         const std::vector<int>& dims) {
  return apply_embedded(op.transpose(), positions, dims, x.transpose()).transpose();
}

DenseOperator embed(const DenseOperator& op, const std::vector<int>& positions,
                    const std::vector<SpaceLabel>& chain) {
  std::vector<int> dims;
  for (const auto& s : chain) dims.push_back(s.dim);
  return DenseOperator(chain, embed(op.m, positions, dims));
}

Mat partial_trace(const Mat& op, const std::vector<int>& dims, int k) {
  if (k < 0 || k >= static_cast<int>(dims.size())) throw std::out_of_range("partial_trace: factor index");
  std::int64_t left = 1, right = 1;
  for (int i = 0; i < k; ++i) left *= dims[i];
  for (int i = k + 1; i < static_cast<int>(dims.size()); ++i) right *= dims[i];
  const int dk = dims[k];
  const std::int64_t D = left * right;
  Mat out = Mat::Zero(D, D);
  for (std::int64_t l1 = 0; l1 < left; ++l1)
    for (std::int64_t l2 = 0; l2 < left; ++l2)
      for (int a = 0; a < dk; ++a)
        out.block(l1 * right, l2 * right, right, right) +=
            op.block((l1 * dk + a) * right, (l2 * dk + a) * right, right, right);
  return out;
}

Mat partial_transpose(const Mat& op, const std::vector<int>& dims, int k) {
  if (k < 0 || k >= static_cast<int>(dims.size())) throw std::out_of_range("partial_transpose: factor index");
  std::int64_t left = 1, right = 1;
  for (int i = 0; i < k; ++i) left *= dims[i];
  for (int i = k + 1; i < static_cast<int>(dims.size()); ++i) right *= dims[i];
  const int dk = dims[k];
  Mat out(op.rows(), op.cols());
  for (std::int64_t l1 = 0; l1 < left; ++l1)
    for (std::int64_t l2 = 0; l2 < left; ++l2)
      for (int a = 0; a < dk; ++a)
        for (int b = 0; b < dk; ++b)
          out.block((l1 * dk + a) * right, (l2 * dk + b) * right, right, right) =
              op.block((l1 * dk + b) * right, (l2 * dk + a) * right, right, right);
  return out;
}

DenseOperator partial_trace(const DenseOperator& op, int k) {
  auto f = op.factors;
  Mat m = partial_trace(op.m, op.dims(), k);
  f.erase(f.begin() + k);
  return DenseOperator(std::move(f), std::move(m));
}

DenseOperator partial_transpose(const DenseOperator& op, int k) {
  return DenseOperator(op.factors, partial_transpose(op.m, op.dims(), k));
}

Mat swap_factors(int d1, int d2) {
  Mat q = Mat::Zero(d1 * d2, d1 * d2);
  for (int i = 0; i < d1; ++i)
    for (int j = 0; j < d2; ++j) q(j * d1 + i, i * d2 + j) = 1.0;
  return q;
}

RankResult svd_rank(const Mat& op, double threshold) {
  if (threshold <= 0) throw std::invalid_argument("svd_rank: threshold must be positive");
  RankResult r;
  Eigen::JacobiSVD<Mat> svd(op, Eigen::ComputeThinU);
  r.singular_values = svd.singularValues();
  if (r.singular_values.size() == 0 || r.singular_values(0) == 0.0) {
    r.isometry = Mat(op.rows(), 0);
    return r;
  }
  const double cut = threshold * r.singular_values(0);
  for (Eigen::Index i = 0; i < r.singular_values.size(); ++i)
    if (r.singular_values(i) > cut) ++r.rank;
  r.isometry = svd.matrixU().leftCols(r.rank);
  return r;
}

Mat orthonormalize(const Mat& a) {
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ() * Mat::Identity(a.rows(), a.cols());
}

double subspace_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("subspace_distance: ambient dims differ");
  const Mat qa = orthonormalize(a), qb = orthonormalize(b);
  const Mat d1 = qb - qa * (qa.adjoint() * qb);
  const Mat d2 = qa - qb * (qb.adjoint() * qa);
  Eigen::JacobiSVD<Mat> s1(d1), s2(d2);
  double v1 = s1.singularValues().size() ? s1.singularValues()(0) : 0.0;
  double v2 = s2.singularValues().size() ? s2.singularValues()(0) : 0.0;
  return std::max(v1, v2);
}

double rel_diff(const Mat& a, const Mat& b) {
  const double s = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / s;
}

double rel_diff(cd a, cd b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

EigenPairs eig(const Mat& op) {
  if (op.rows() != op.cols()) throw std::invalid_argument("eig: operator must be square");
  Eigen::ComplexEigenSolver<Mat> es(op);
  if (es.info() != Eigen::Success) throw std::runtime_error("eig: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

double unit_draw(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

}  // namespace

SimultaneousBasis simultaneous_eigbasis(const std::vector<Mat>& ops, std::uint64_t seed, double tol) {
  if (ops.empty()) throw std::invalid_argument("simultaneous_eigbasis: no operators");
  std::mt19937_64 g(seed);
  SimultaneousBasis best;
  best.max_residual = std::numeric_limits<double>::infinity();
  for (int attempt = 1; attempt <= 5; ++attempt) {
    Mat comb = Mat::Zero(ops[0].rows(), ops[0].cols());
    for (const auto& op : ops) {
      cd w(unit_draw(g) - 0.5, unit_draw(g) - 0.5);
      comb += w * op / std::max(op.norm(), 1e-300);
    }
    EigenPairs ep = eig(comb);
    SimultaneousBasis sb;
    sb.attempts = attempt;
    sb.vectors = ep.vectors;
    for (Eigen::Index c = 0; c < sb.vectors.cols(); ++c) sb.vectors.col(c).normalize();
    double rmax = 0.0;
    for (const auto& op : ops) {
      Vec lam(sb.vectors.cols());
      const double on = std::max(op.norm(), 1e-300);
      for (Eigen::Index c = 0; c < sb.vectors.cols(); ++c) {
        const Vec v = sb.vectors.col(c);
        const Vec av = op * v;
        lam(c) = v.dot(av);
        rmax = std::max(rmax, (av - lam(c) * v).norm() / on);
      }
      sb.eigenvalues.push_back(lam);
    }
    sb.max_residual = rmax;
    double rad = ep.values.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < ep.values.size(); ++i)
      for (Eigen::Index j = i + 1; j < ep.values.size(); ++j)
        if (std::abs(ep.values(i) - ep.values(j)) < 1e-8 * rad) {
          ++sb.degenerate_clusters;
          break;
        }
    if (rmax < best.max_residual) best = sb;
    if (rmax <= tol) break;
  }
  return best;
}

cd PolynomialFit::operator()(cd u) const {
  const cd t = (u - center) / scale;
  cd acc = 0.0;
  for (int k = static_cast<int>(scaled.size()) - 1; k >= 0; --k) acc = acc * t + scaled[k];
  return acc;
}

namespace {

struct Scaling {
  cd center;
  double scale;
};

Scaling scaling_for(const std::vector<cd>& u, std::size_t count) {
  cd c = 0.0;
  for (std::size_t i = 0; i < count; ++i) c += u[i];
  c /= static_cast<double>(count);
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s = std::max(s, std::abs(u[i] - c));
  return {c, s > 0 ? s : 1.0};
}

Mat vandermonde(const std::vector<cd>& u, std::size_t count, int degree, const Scaling& sc) {
  Mat v(count, degree + 1);
  for (std::size_t i = 0; i < count; ++i) {
    cd t = (u[i] - sc.center) / sc.scale, p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      v(i, k) = p;
      p *= t;
    }
  }
  return v;
}

// coefficients in t=(u-c)/s  ->  coefficients in u
std::vector<cd> to_monomial(const std::vector<cd>& scaled, cd c, double s) {
  const int deg = static_cast<int>(scaled.size()) - 1;
  std::vector<cd> out(deg + 1, 0.0);
  // (u - c)^k expanded with binomials
  std::vector<double> binom(deg + 1, 0.0);
  for (int k = 0; k <= deg; ++k) {
    const cd a = scaled[k] / std::pow(s, k);
    binom.assign(deg + 1, 0.0);
    binom[0] = 1.0;
    for (int j = 1; j <= k; ++j)
      for (int i = j; i >= 1; --i) binom[i] += binom[i - 1];
    for (int j = 0; j <= k; ++j) out[j] += a * binom[j] * std::pow(-c, k - j);
  }
  return out;
}

}  // namespace

PolynomialFit fit_polynomial(const std::vector<cd>& u, const std::vector<cd>& values, int degree) {
  if (degree < 0) throw std::invalid_argument("fit_polynomial: negative degree");
  if (u.size() != values.size() || static_cast<int>(u.size()) < degree + 1)
    throw std::invalid_argument("fit_polynomial: need at least degree+1 samples");
  PolynomialFit f;
  f.degree = degree;
  auto sc = scaling_for(u, u.size());
  f.center = sc.center;
  f.scale = sc.scale;
  Mat v = vandermonde(u, u.size(), degree, sc);
  Vec y = Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
  Vec c = v.colPivHouseholderQr().solve(y);
  f.scaled.assign(c.data(), c.data() + c.size());
  f.coefficients = to_monomial(f.scaled, f.center, f.scale);
  double ymax = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
  f.residual = (v * c - y).cwiseAbs().maxCoeff() / ymax;
  return f;
}

PolynomialFit fit_polynomial_heldout(const std::vector<cd>& u, const std::vector<cd>& values, int degree) {
  if (static_cast<int>(u.size()) < degree + 1) throw std::invalid_argument("fit_polynomial_heldout: too few samples");
  std::vector<cd> fu(u.begin(), u.begin() + degree + 1), fv(values.begin(), values.begin() + degree + 1);
  PolynomialFit f = fit_polynomial(fu, fv, degree);
  double ymax = 1e-300, r = 0.0;
  for (const auto& y : values) ymax = std::max(ymax, std::abs(y));
  for (std::size_t i = degree + 1; i < u.size(); ++i) r = std::max(r, std::abs(f(u[i]) - values[i]) / ymax);
  f.residual = r;
  return f;
}

Mat MatrixPolynomial::operator()(cd u) const {
  Mat acc = coefficients.back();
  for (int k = static_cast<int>(coefficients.size()) - 2; k >= 0; --k) acc = (acc * u + coefficients[k]).eval();
  return acc;
}

MatrixPolynomial fit_matrix_polynomial(const std::vector<cd>& u, const std::vector<Mat>& values, int degree) {
  if (static_cast<int>(u.size()) < degree + 1 || u.size() != values.size())
    throw std::invalid_argument("fit_matrix_polynomial: need at least degree+1 samples");
  const auto sc = scaling_for(u, u.size());
  Mat v = vandermonde(u, u.size(), degree, sc);
  auto qr = v.colPivHouseholderQr();
  const Eigen::Index r = values[0].rows(), c = values[0].cols();
  Mat y(u.size(), r * c);
  for (std::size_t i = 0; i < u.size(); ++i) y.row(i) = Eigen::Map<const Eigen::RowVectorXcd>(values[i].data(), r * c);
  Mat coef = qr.solve(y);  // (degree+1) x (r*c), in scaled variable
  MatrixPolynomial mp;
  mp.degree = degree;
  mp.coefficients.assign(degree + 1, Mat::Zero(r, c));
  // expand each scaled coefficient row into monomials in u
  std::vector<cd> unit(degree + 1, 0.0);
  for (int k = 0; k <= degree; ++k) {
    unit.assign(degree + 1, 0.0);
    unit[k] = 1.0;
    auto mono = to_monomial(unit, sc.center, sc.scale);
    const Mat ck = Eigen::Map<const Mat>(coef.row(k).eval().data(), r, c);
    for (int j = 0; j <= degree; ++j)
      if (mono[j] != cd(0.0)) mp.coefficients[j] += mono[j] * ck;
  }
  return mp;
}

MatrixPolynomial interpolate_matrix(const std::function<Mat(cd)>& f, int degree, double lo, double hi, double offset,
                                    double* heldout) {
  const auto nodes = chebyshev_nodes(degree + 1, lo, hi, offset);
  std::vector<Mat> values;
  for (const cd& u : nodes) values.push_back(f(u));
  MatrixPolynomial mp = fit_matrix_polynomial(nodes, values, degree);
  if (heldout) {
    double r = 0.0;
    for (const cd& u : {cd(0.5 * (lo + hi) + 0.123 * (hi - lo), -0.7 * offset), cd(lo + 0.031 * (hi - lo), 1.9 * offset)})
      r = std::max(r, rel_diff(mp(u), f(u)));
    *heldout = r;
  }
  return mp;
}

std::vector<cd> chebyshev_nodes(int count, double lo, double hi, double offset) {
  std::vector<cd> out;
  for (int k = 0; k < count; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.5) / count);
    out.emplace_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * x, offset);
  }
  return out;
}

std::vector<cd> circle_nodes(int count, cd center, double radius) {
  std::vector<cd> out;
  for (int k = 0; k < count; ++k) out.push_back(center + std::polar(radius, 2 * std::numbers::pi * (k + 0.5) / count));
  return out;
}

}  // namespace cnv
