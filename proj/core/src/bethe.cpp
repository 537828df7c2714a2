#include "cnvertex/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace cnv {

const char* to_string(TQModel m) {
  switch (m) {
    case TQModel::periodic_c3: return "periodic_c3";
    case TQModel::open_c3: return "open_c3";
    case TQModel::open_cn: return "open_cn";
  }
  return "?";
}

std::vector<int> BetheState::counts() const {
  std::vector<int> c;
  for (const auto& r : roots) c.push_back(static_cast<int>(r.size()));
  return c;
}

namespace {

constexpr double kPoleEps = 1e-8;     // closer than this to a pole: PoleError
constexpr double kPoleSafe = 1e-3;    // closer than this to a Q-zero: contour-mean evaluation
constexpr double kSafeRadius = 1e-2;  // radius of that contour
constexpr int kRing = 32;
constexpr double kMaxRoot = 1e3;

std::string where(cd u) { return "(" + std::to_string(u.real()) + ", " + std::to_string(u.imag()) + ")"; }

cd inv(cd x) {
  if (std::abs(x) < kPoleEps) throw PoleError("evaluation at a pole of a T-Q prefactor");
  return 1.0 / x;
}

template <class F>
cd prod_theta(const ChainSpec& c, F f) {
  cd p = 1.0;
  for (cd t : c.theta) p *= f(t);
  return p;
}

bool is_open(TQModel m) { return m != TQModel::periodic_c3; }

// Relative residual of an equation lhs = rhs, scaled by its largest term.
cd scaled(cd lhs, cd rhs, std::initializer_list<cd> terms) {
  double s = std::abs(rhs);
  for (cd t : terms) s = std::max(s, std::abs(t));
  if (!(s > 0.0)) return 0.0;
  return (lhs - rhs) / s;
}

}  // namespace

TQEvaluator::TQEvaluator(ChainSpec chain, TQModel model, TQOptions opt)
    : chain_(std::move(chain)), model_(model), opt_(opt) {
  chain_.validate_shape();
  if (model_ == TQModel::periodic_c3 && chain_.boundary != BoundaryKind::periodic)
    throw std::invalid_argument("periodic T-Q needs a periodic chain");
  if (model_ != TQModel::periodic_c3 && chain_.boundary != BoundaryKind::open)
    throw std::invalid_argument("open T-Q needs an open chain");
  if (model_ != TQModel::open_cn && chain_.n != 3) throw std::invalid_argument("C_3 T-Q needs rank 3");
}

int TQEvaluator::levels() const { return model_ == TQModel::open_cn ? chain_.n : 3; }

void TQEvaluator::check_counts(const BetheState& s) const {
  const int lv = levels();
  if (static_cast<int>(s.roots.size()) != lv)
    throw std::invalid_argument("expected " + std::to_string(lv) + " root levels");
  if (model_ == TQModel::periodic_c3) return;
  for (const auto& level : s.roots)
    for (cd l : level)
      if (std::abs(l) < 1e-12) throw std::invalid_argument("open Bethe roots must be nonzero");
  const auto L = s.counts();
  const int N = chain_.sites();
  auto at = [&](int m) { return m == 0 ? N : L[static_cast<std::size_t>(m - 1)]; };
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("root counts violate " + what);
  };
  const int n = lv;
  need(at(1) == at(2) + N, "L1 = L2 + N");
  if (n % 2 == 1) {
    for (int l = 2; l <= (n - 1) / 2; ++l) need(at(2 * l - 1) == at(2 * l - 2) + at(2 * l), "L(2l-1) = L(2l-2) + L(2l)");
    need(at(n) == at(n - 1), "Ln = L(n-1)");
  } else {
    for (int l = 2; l <= (n - 2) / 2; ++l) need(at(2 * l - 1) == at(2 * l - 2) + at(2 * l), "L(2l-1) = L(2l-2) + L(2l)");
    need(at(n - 1) == at(n - 2) + 2 * at(n), "L(n-1) = L(n-2) + 2 Ln");
  }
}

std::vector<int> TQEvaluator::minimal_counts() const {
  std::vector<int> c(static_cast<std::size_t>(levels()), 0);
  if (is_open(model_)) c[0] = chain_.sites();
  return c;
}

cd TQEvaluator::q(const BetheState& s, int m, cd u) const {
  if (m == 0) {
    if (model_ == TQModel::open_cn && opt_.q0_is_g) return prod_theta(chain_, [&](cd t) { return (u - t) * (u + t); });
    return 1.0;
  }
  if (m > levels()) return 1.0;
  cd p = 1.0;
  const double h = m / 2.0;
  for (cd l : s.roots[static_cast<std::size_t>(m - 1)]) {
    p *= u - l + h;
    if (is_open(model_)) p *= u + l + h;
  }
  return p;
}

cd TQEvaluator::q_den(const BetheState& s, int m, cd u) const {
  const cd v = q(s, m, u);
  if (m >= 1 && m <= levels()) {
    const double h = m / 2.0;
    for (cd l : s.roots[static_cast<std::size_t>(m - 1)]) {
      if (std::abs(u - l + h) < kPoleEps || (is_open(model_) && std::abs(u + l + h) < kPoleEps))
        throw PoleError("evaluation at a zero of Q^(" + std::to_string(m) + ") near u + shift = " + where(u));
    }
  } else if (std::abs(v) < kPoleEps) {
    throw PoleError("evaluation at a zero of Q^(0)");
  }
  return v;
}

cd TQEvaluator::hbar1(cd u) const { return boundary_H1(chain_.params, u, opt_.pairing); }
cd TQEvaluator::hbar2(cd u) const { return boundary_H2(chain_.params, u, opt_.pairing); }
cd TQEvaluator::xbar() const { return chain_.params.x(); }

// H_l of the C_n relations (l = 1..2n); for n = 3 these are H1(u), H2(u+1), H1(u+1), H2(u+3), H1(u+3), H2(u+4).
cd TQEvaluator::H(int l, cd u) const {
  const int n = chain_.n;
  if (l <= n) return l % 2 ? hbar1(u + (l - 1) / 2.0) : hbar2(u + l / 2.0);
  const int m = 2 * n - l + 1;
  return m % 2 ? hbar2(u + double(n) + 1.0 - (m - 1) / 2.0) : hbar1(u + double(n) + 1.0 - m / 2.0);
}

std::vector<cd> TQEvaluator::c3_z(const BetheState& s, cd u) const {
  const RMatrixFamily R(3);
  auto Q = [&](int m, cd v) { return q(s, m, v); };
  auto D = [&](int m, cd v) { return inv(q_den(s, m, v)); };
  if (model_ == TQModel::periodic_c3) {
    const cd A = prod_theta(chain_, [&](cd t) { return R.a(u - t); });
    const cd B = prod_theta(chain_, [&](cd t) { return R.b(u - t); });
    const cd V = prod_theta(chain_, [&](cd t) { return R.e(u - t); });
    return {A * Q(1, u - 1.0) * D(1, u),
            B * Q(1, u + 1.0) * Q(2, u - 1.0) * D(1, u) * D(2, u),
            B * Q(2, u + 1.0) * Q(3, u - 1.5) * D(2, u) * D(3, u + 0.5),
            B * Q(2, u + 1.0) * Q(3, u + 2.5) * D(2, u + 2.0) * D(3, u + 0.5),
            B * Q(1, u + 2.0) * Q(2, u + 3.0) * D(1, u + 3.0) * D(2, u + 2.0),
            V * Q(1, u + 4.0) * D(1, u + 3.0)};
  }
  const cd A = prod_theta(chain_, [&](cd t) { return R.a(u - t) * R.a(u + t); });
  const cd B = prod_theta(chain_, [&](cd t) { return R.b(u - t) * R.b(u + t); });
  const cd V = prod_theta(chain_, [&](cd t) { return R.e(u - t) * R.e(u + t); });
  auto H1 = [&](cd v) { return hbar1(v); };
  auto H2 = [&](cd v) { return hbar2(v); };
  return {0.25 * (u + 1.5) * (u + 4.0) * inv((u + 0.5) * (u + 2.0)) * A * Q(1, u - 1.0) * D(1, u) * H1(u),
          0.25 * u * (u + 1.5) * (u + 4.0) * inv((u + 0.5) * (u + 1.0) * (u + 2.0)) * B * Q(1, u + 1.0) *
              Q(2, u - 1.0) * D(1, u) * D(2, u) * H2(u + 1.0),
          0.25 * u * (u + 4.0) * inv((u + 1.0) * (u + 2.0)) * B * Q(2, u + 1.0) * Q(3, u - 1.5) * D(2, u) *
              D(3, u + 0.5) * H1(u + 1.0),
          0.25 * u * (u + 4.0) * inv((u + 2.0) * (u + 3.0)) * B * Q(2, u + 1.0) * Q(3, u + 2.5) * D(2, u + 2.0) *
              D(3, u + 0.5) * H2(u + 3.0),
          0.25 * u * (u + 2.5) * (u + 4.0) * inv((u + 2.0) * (u + 3.0) * (u + 3.5)) * B * Q(1, u + 2.0) *
              Q(2, u + 3.0) * D(1, u + 3.0) * D(2, u + 2.0) * H1(u + 3.0),
          0.25 * u * (u + 2.5) * inv((u + 2.0) * (u + 3.5)) * V * Q(1, u + 4.0) * D(1, u + 3.0) * H2(u + 4.0)};
}

std::vector<cd> TQEvaluator::c3_f(const BetheState& s, cd u) const {
  if (model_ == TQModel::periodic_c3) return {};
  const RMatrixFamily R(3);
  auto Q = [&](int m, cd v) { return q(s, m, v); };
  auto D = [&](int m, cd v) { return inv(q_den(s, m, v)); };
  const cd B = prod_theta(chain_, [&](cd t) { return R.b(u - t) * R.b(u + t); });
  auto G = [&](cd v) { return prod_theta(chain_, [&](cd t) { return (v - t) * (v + t); }); };
  const cd x = xbar();
  return {0.25 * u * (u + 1.5) * (u + 4.0) * inv(u + 2.0) * B * G(u + 1.0) * Q(2, u - 1.0) * D(1, u) * x,
          0.25 * u * (u + 4.0) * B * Q(2, u + 1.0) * D(3, u + 0.5) * x,
          0.25 * u * (u + 2.5) * (u + 4.0) * inv(u + 2.0) * B * G(u + 3.0) * Q(2, u + 3.0) * D(1, u + 3.0) * x};
}

std::vector<cd> TQEvaluator::c3_ztilde(const BetheState& s, cd u) const {
  auto z = c3_z(s, u);
  if (model_ == TQModel::open_c3 && opt_.include_f) {
    const auto f = c3_f(s, u);
    z[0] += f[0];
    z[2] += f[1];
    z[5] += f[2];
  }
  return z;
}

std::vector<cd> TQEvaluator::cn_z(const BetheState& s, cd u) const {
  const int n = chain_.n;
  const RMatrixFamily R(n);
  auto Q = [&](int m, cd v) { return q(s, m, v); };
  auto D = [&](int m, cd v) { return inv(q_den(s, m, v)); };
  const cd A = prod_theta(chain_, [&](cd t) { return R.a(u - t) * R.a(u + t); });
  const cd B = prod_theta(chain_, [&](cd t) { return R.b(u - t) * R.b(u + t); });
  const cd V = prod_theta(chain_, [&](cd t) { return R.e(u - t) * R.e(u + t); });
  const double h = n / 2.0, k = (n + 1) / 2.0;
  std::vector<cd> z;
  z.push_back(0.25 * (u + h) * (u + double(n) + 1.0) * inv((u + 0.5) * (u + k)) * A * Q(1, u - 1.0) * D(1, u) * H(1, u));
  for (int l = 2; l < n; ++l)
    z.push_back(0.25 * u * (u + h) * (u + double(n) + 1.0) * inv((u + (l - 1) / 2.0) * (u + l / 2.0) * (u + k)) * B *
                Q(l - 1, u + 1.0) * Q(l, u - 1.0) * D(l - 1, u) * D(l, u) * H(l, u));
  z.push_back(0.25 * u * (u + double(n) + 1.0) * inv((u + k) * (u + (n - 1) / 2.0)) * B * Q(n - 1, u + 1.0) * Q(n, u - 1.5) *
              D(n - 1, u) * D(n, u + 0.5) * H(n, u));
  z.push_back(0.25 * u * (u + double(n) + 1.0) * inv((u + k) * (u + (n + 3) / 2.0)) * B * Q(n - 1, u + 1.0) * Q(n, u + 2.5) *
              D(n - 1, u + 2.0) * D(n, u + 0.5) * H(n + 1, u));
  for (int l = n - 1; l >= 2; --l) {
    const double a1 = n - l + 1.0, a2 = n - l + 2.0;
    z.push_back(0.25 * u * (u + h + 1.0) * (u + double(n) + 1.0) *
                inv((u + double(n) - (l - 2) / 2.0) * (u + double(n) - (l - 3) / 2.0) * (u + k)) * B * Q(l - 1, u + a1) *
                Q(l, u + a2) * D(l - 1, u + a2) * D(l, u + a1) * H(2 * n - l + 1, u));
  }
  const cd hl = opt_.last_h_shifted ? H(2 * n, u + double(n) + 1.0) : H(2 * n, u);
  z.push_back(0.25 * u * (u + (n + 2) / 2.0) * inv((u + k) * (u + double(n) + 0.5)) * V * Q(1, u + double(n) + 1.0) * D(1, u + double(n)) * hl);
  return z;
}

std::vector<cd> TQEvaluator::cn_f(const BetheState& s, cd u) const {
  const int n = chain_.n;
  const RMatrixFamily R(n);
  auto Q = [&](int m, cd v) { return q(s, m, v); };
  auto D = [&](int m, cd v) { return inv(q_den(s, m, v)); };
  auto G = [&](cd v) { return prod_theta(chain_, [&](cd t) { return (v - t) * (v + t); }); };
  const cd B = prod_theta(chain_, [&](cd t) { return R.b(u - t) * R.b(u + t); });
  const cd x = xbar();
  const double h = n / 2.0, k = (n + 1) / 2.0;
  const cd lo = u * (u + h) * (u + double(n) + 1.0) * inv(u + k) * B * x;        // prefactor shared by f_1, f_l
  const cd hi = u * (u + h + 1.0) * (u + double(n) + 1.0) * inv(u + k) * B * x;  // prefactor shared by f_n, f_{n-l+1}
  // Slot j holds f_{j+1}.
  std::vector<cd> f(static_cast<std::size_t>(n), 0.0);
  auto put = [&](int j, cd v) { f[static_cast<std::size_t>(j - 1)] = v; };
  if (n != 2) {
    put(1, 0.25 * lo * G(u + 1.0) * Q(2, u - 1.0) * D(1, u));
    put(n, 0.25 * hi * G(u + double(n)) * Q(2, u + double(n)) * D(1, u + double(n)));
    for (int l = 2; l <= n / 2 - 1; ++l) {
      const double a = n + 2.0 - 2 * l;
      put(l, 0.25 * lo * Q(2 * l - 2, u + 1.0) * Q(2 * l, u - 1.0) * D(2 * l - 1, u));
      put(n - l + 1, 0.25 * hi * Q(2 * l, u + a) * Q(2 * l - 2, u + a) * D(2 * l - 1, u + a));
    }
  }
  if (n % 2 == 1) {
    put((n + 1) / 2, 0.25 * u * (u + double(n) + 1.0) * B * Q(n - 1, u + 1.0) * D(n, u + 0.5) * x);
  } else {
    const double c = opt_.even_f_prefactor;
    put(n / 2, c * lo * Q(n - 2, u + 1.0) * Q(n, u - 0.5) * Q(n, u - 1.5) * D(n - 1, u));
    put(n / 2 + 1, c * hi * Q(n - 2, u + 2.0) * Q(n, u + 1.5) * Q(n, u + 2.5) * D(n - 1, u + 2.0));
  }
  return f;
}

std::vector<cd> TQEvaluator::z_terms(const BetheState& s, cd u) const {
  check_counts(s);
  return model_ == TQModel::open_cn ? cn_z(s, u) : c3_z(s, u);
}

std::vector<cd> TQEvaluator::f_terms(const BetheState& s, cd u) const {
  check_counts(s);
  if (model_ == TQModel::open_cn) return cn_f(s, u);
  return c3_f(s, u);
}

std::vector<cd> TQEvaluator::q_zeros(const BetheState& s) const {
  const int lv = levels();
  std::vector<cd> zeros;
  for (int m = 1; m <= lv; ++m) {
    std::vector<double> shifts;
    if (model_ == TQModel::open_cn)
      shifts = m < lv ? std::vector<double>{0.0, double(chain_.n - m + 1)} : std::vector<double>{0.5};
    else
      shifts = m == 1 ? std::vector<double>{0.0, 3.0} : m == 2 ? std::vector<double>{0.0, 2.0} : std::vector<double>{0.5};
    for (cd l : s.roots[static_cast<std::size_t>(m - 1)])
      for (double sh : shifts) {
        zeros.push_back(l - m / 2.0 - sh);
        if (is_open(model_)) zeros.push_back(-l - m / 2.0 - sh);
      }
  }
  return zeros;
}

cd TQEvaluator::lambda(const BetheState& s, TransferKind kind, cd u) const {
  check_counts(s);
  std::vector<double> offsets{0.0};
  if (kind == TransferKind::t2) offsets = {0.5, -0.5};
  if (kind == TransferKind::t3) offsets = {1.0, 0.0, -1.0};
  double dist = std::numeric_limits<double>::infinity();
  cd nearest;
  for (cd z : q_zeros(s))
    for (double o : offsets)
      if (std::abs(u + o - z) < dist) dist = std::abs(u + o - z), nearest = z - o;
  if (dist < kPoleEps) throw PoleError("evaluation within 1e-8 of a Q-zero at u = " + where(nearest));
  if (dist >= kPoleSafe) return lambda_raw(s, kind, u);
  // Near a Q-zero the terms cancel; the eigenvalue is entire at a Bethe solution, so use its contour mean.
  cd acc = 0.0;
  for (int k = 0; k < kRing; ++k)
    acc += lambda_raw(s, kind, u + kSafeRadius * std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.5) / kRing));
  return acc / double(kRing);
}

cd TQEvaluator::lambda_raw(const BetheState& s, TransferKind kind, cd u) const {
  if (model_ == TQModel::open_cn) {
    if (kind != TransferKind::t) throw std::invalid_argument("C_n relations give the fundamental eigenvalue only");
    cd sum = 0.0;
    for (cd z : cn_z(s, u)) sum += z;
    if (opt_.include_f)
      for (cd f : cn_f(s, u)) sum += f;
    return sum;
  }
  const bool open = model_ == TQModel::open_c3;
  if (kind == TransferKind::t) {
    cd sum = 0.0;
    for (cd z : c3_ztilde(s, u)) sum += z;
    return sum;
  }
  const RMatrixFamily R(3);
  auto rho_vt = [&](cd w) { return R.rho_v_tilde(w); };
  auto varrho = [&](cd v) { return prod_theta(chain_, [&](cd t) { return c3::rho0_tilde(v - t) * c3::rho0_tilde(v + t); }); };
  const cd f_on = open && opt_.include_f ? 1.0 : 0.0;
  if (kind == TransferKind::t2) {
    const auto zp = c3_ztilde(s, u + 0.5), zm = c3_ztilde(s, u - 0.5);
    cd sum = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) sum += zp[i] * zm[j];
    if (!open) {
      sum -= opt_.periodic_exclusion_z3z4 ? zp[2] * zm[3] : zp[2] * zm[2];
      return sum * inv(prod_theta(chain_, [&](cd t) { return c3::rho0_tilde(u - t + 0.5); }));
    }
    const auto fp = c3_f(s, u + 0.5), fm = c3_f(s, u - 0.5);
    sum -= zp[2] * zm[3];
    sum -= f_on * (fp[0] * zm[1] + zp[4] * fm[2]);
    return 0.25 * inv((u - 0.5) * (u + 2.0) * (u + 2.0) * (u + 4.5) * varrho(u + 0.5)) * rho_vt(2.0 * u) * sum;
  }
  const auto zp = c3_ztilde(s, u + 1.0), z0 = c3_ztilde(s, u), zm = c3_ztilde(s, u - 1.0);
  cd sum = 0.0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      for (int k = j + 1; k < 6; ++k) sum += zp[i] * z0[j] * zm[k];
  for (int k = 4; k < 6; ++k) sum -= zp[2] * z0[3] * zm[k];
  for (int i = 0; i < 2; ++i) sum -= zp[i] * z0[2] * zm[3];
  for (int j = 2; j < 4; ++j) sum -= zp[1] * z0[j] * zm[4];
  if (!open) {
    return sum * inv(prod_theta(chain_, [&](cd t) {
             return c3::rho0_tilde(u - t + 1.0) * c3::rho0_tilde(u - t) * (u - t + 2.0);
           }));
  }
  const auto fp = c3_f(s, u + 1.0), fm = c3_f(s, u - 1.0);
  for (int j = 2; j < 6; ++j) sum -= f_on * fp[0] * z0[1] * zm[j];
  for (int i = 0; i < 4; ++i) sum -= f_on * zp[i] * z0[4] * fm[2];
  const cd poly = (u + 2.5) * (u + 2.5) * (u + 1.5) * (u + 1.5) * (u - 0.5) * (u + 4.5) * u * (u - 1.0) * (u + 2.0) *
                  (u + 2.0) * (u + 4.0) * (u + 5.0) * varrho(u + 1.0) * varrho(u) *
                  prod_theta(chain_, [&](cd t) { return (u + t + 2.0) * (u - t + 2.0); });
  return inv(64.0 * poly) * rho_vt(2.0 * u + 1.0) * rho_vt(2.0 * u) * rho_vt(2.0 * u - 1.0) * sum;
}

std::vector<cd> TQEvaluator::bae_residuals(const BetheState& s) const {
  check_counts(s);
  for (const auto& level : s.roots)
    for (std::size_t i = 0; i < level.size(); ++i)
      for (std::size_t j = i + 1; j < level.size(); ++j)
        if (std::abs(level[i] - level[j]) < 1e-10 || (is_open(model_) && std::abs(level[i] + level[j]) < 1e-10))
          throw DegenerateStateError("two Bethe roots of one level coincide at " + where(level[i]));
  auto Q = [&](int m, cd v) { return q(s, m, v); };
  auto G = [&](cd v) {
    if (model_ == TQModel::periodic_c3) return prod_theta(chain_, [&](cd t) { return v - t; });
    return prod_theta(chain_, [&](cd t) { return (v - t) * (v + t); });
  };
  const cd x = xbar();
  std::vector<cd> out;
  auto level = [&](int m) -> const std::vector<cd>& { return s.roots[static_cast<std::size_t>(m - 1)]; };

  if (model_ == TQModel::periodic_c3) {
    for (cd m : level(1)) {
      const cd lhs = Q(1, m + 0.5) * Q(2, m - 1.5) / (Q(1, m - 1.5) * Q(2, m - 0.5));
      const cd rhs = -G(m + 0.5) / G(m - 0.5);
      out.push_back(scaled(lhs, rhs, {lhs}));
    }
    for (cd m : level(2)) {
      const cd lhs = Q(1, m) * Q(2, m - 2.0) * Q(3, m - 0.5) / (Q(1, m - 1.0) * Q(2, m) * Q(3, m - 2.5));
      out.push_back(scaled(lhs, -1.0, {lhs}));
    }
    for (cd m : level(3)) {
      const cd lhs = opt_.printed_bae ? Q(2, m + 0.5) * Q(3, m - 3.0) / (Q(2, m - 0.5) * Q(3, m + 1.0))
                                      : Q(2, m) * Q(3, m - 3.5) / (Q(2, m - 2.0) * Q(3, m + 0.5));
      out.push_back(scaled(lhs, -1.0, {lhs}));
    }
    return out;
  }

  auto h1 = [&](cd v) { return hbar1(v); };
  auto h2 = [&](cd v) { return hbar2(v); };
  const int n = levels();
  // Level-1 equation (shared by the C_3 and C_n relations).
  for (cd l : level(1)) {
    if (model_ == TQModel::open_cn && n == 2) break;
    const cd t1 = h1(l - 0.5) / (l * (l - 0.5) * G(l - 0.5)) * Q(1, l - 1.5) / Q(2, l - 1.5);
    const cd t2 = h2(l + 0.5) / (l * (l + 0.5) * G(l + 0.5)) * Q(1, l + 0.5) / Q(2, l - 0.5);
    out.push_back(scaled(t1 + t2, -x, {t1, t2}));
  }
  if (model_ == TQModel::open_c3) {
    const double s2 = opt_.printed_bae ? 3.0 : 2.0;
    for (cd l : level(2)) {
      const cd lhs = Q(1, l) * Q(2, l - s2) * Q(3, l - 0.5) / (Q(1, l - 1.0) * Q(2, l) * Q(3, l - 2.5)) * h2(l) / h1(l);
      const cd rhs = -(l - 0.5) / (l + 0.5);
      out.push_back(scaled(lhs, rhs, {lhs}));
    }
    for (cd l : level(3)) {
      const cd t1 = h1(l - 1.0) / (l * (l - 1.0)) * Q(3, l - 3.5) / Q(2, l - 2.0);
      const cd t2 = h2(l + 1.0) / (l * (l + 1.0)) * Q(3, l + 0.5) / Q(2, l);
      out.push_back(scaled(t1 + t2, -x, {t1, t2}));
    }
    return out;
  }

  // C_n levels 2 .. n-2.
  for (int m = 2; m <= n - 2; ++m) {
    const double a = m / 2.0;
    for (cd l : level(m)) {
      if (m % 2 == 1) {
        const cd t1 = h1(l - 0.5) / (l * (l - 0.5)) * Q(m, l - a - 1.0) / (Q(m - 1, l - a) * Q(m + 1, l - a - 1.0));
        const cd t2 = h2(l + 0.5) / (l * (l + 0.5)) * Q(m, l - a + 1.0) / (Q(m - 1, l - a + 1.0) * Q(m + 1, l - a));
        out.push_back(scaled(t1 + t2, -x, {t1, t2}));
      } else {
        const cd lhs = Q(m - 1, l - a + 1.0) * Q(m, l - a - 1.0) * Q(m + 1, l - a) /
                       (Q(m - 1, l - a) * Q(m, l - a + 1.0) * Q(m + 1, l - a - 1.0)) * h2(l) / h1(l);
        out.push_back(scaled(lhs, -(l - 0.5) / (l + 0.5), {lhs}));
      }
    }
  }
  const double a = (n - 1) / 2.0, b = (n + 1) / 2.0;
  if (n % 2 == 1) {
    for (cd l : level(n - 1)) {
      const cd lhs = Q(n - 2, l - a + 1.0) * Q(n - 1, l - a - 1.0) * Q(n, l - a + 0.5) /
                     (Q(n - 2, l - a) * Q(n - 1, l - a + 1.0) * Q(n, l - a - 1.5)) * h2(l) / h1(l);
      out.push_back(scaled(lhs, -(l - 0.5) / (l + 0.5), {lhs}));
    }
    for (cd l : level(n)) {
      const cd t1 = h1(l - 1.0) / (l * (l - 1.0)) * Q(n, l - b - 1.5) / Q(n - 1, l - b);
      const cd t2 = h2(l + 1.0) / (l * (l + 1.0)) * Q(n, l - b + 2.5) / Q(n - 1, l - b + 2.0);
      out.push_back(scaled(t1 + t2, -x, {t1, t2}));
    }
  } else {
    for (cd l : level(n - 1)) {
      const cd t1 = h1(l - 0.5) / (l * (l - 0.5)) * Q(n - 1, l - a - 1.0) / (Q(n - 2, l - a) * Q(n, l - a - 1.5));
      const cd t2 = h2(l + 0.5) / (l * (l + 0.5)) * Q(n - 1, l - a + 1.0) / (Q(n - 2, l - a + 1.0) * Q(n, l - a + 0.5));
      out.push_back(scaled(t1 + t2, -x * Q(n, l - a - 0.5), {t1, t2}));
    }
    for (cd l : level(n)) {
      const cd t1 = h2(l - 0.5) / (l * (l - 1.0)) * Q(n, l - b - 1.5) / Q(n - 1, l - b);
      const cd t2 = h1(l + 0.5) / (l * (l + 1.0)) * Q(n, l - b + 2.5) / Q(n - 1, l - b + 2.0);
      out.push_back(scaled(t1 + t2, 0.0, {t1, t2}));
    }
  }
  return out;
}

double TQEvaluator::pole_residue(const BetheState& s) const {
  check_counts(s);
  double worst = 0.0;
  for (cd u0 : q_zeros(s)) {
    for (double r = 1e-3; r >= 1e-6; r *= 0.1) {
      try {
        cd acc = 0.0;
        double big = 0.0;
        for (int k = 0; k < kRing; ++k) {
          const cd w = r * std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.5) / kRing);
          const cd v = lambda_raw(s, TransferKind::t, u0 + w);
          acc += v * w;
          big = std::max(big, std::abs(v));
        }
        acc /= double(kRing);
        if (big > 0.0) worst = std::max(worst, std::abs(acc) / (r * big));
        break;
      } catch (const PoleError&) {
      }
    }
  }
  return worst;
}

namespace {

BetheState unflatten(const Vec& z, const std::vector<int>& counts) {
  BetheState s;
  Eigen::Index k = 0;
  for (int c : counts) {
    std::vector<cd> level;
    for (int i = 0; i < c; ++i) level.push_back(z(k++));
    s.roots.push_back(std::move(level));
  }
  return s;
}

// Residual vector; +inf when the state sits on a pole of the equations.
Vec residual_vector(const TQEvaluator& ev, const Vec& z, const std::vector<int>& counts) {
  if (!(z.cwiseAbs().maxCoeff() < kMaxRoot)) return Vec::Constant(z.size(), cd(std::numeric_limits<double>::infinity()));
  std::vector<cd> r;
  try {
    r = ev.bae_residuals(unflatten(z, counts));
  } catch (const DegenerateStateError&) {
    return Vec::Constant(z.size(), cd(std::numeric_limits<double>::infinity()));
  } catch (const std::invalid_argument&) {
    return Vec::Constant(z.size(), cd(std::numeric_limits<double>::infinity()));
  }
  Vec out(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) out(static_cast<Eigen::Index>(i)) = r[i];
  return out;
}

double norm_inf(const Vec& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (!std::isfinite(a)) return std::numeric_limits<double>::infinity();
    m = std::max(m, a);
  }
  return m;
}

// Representative of a state modulo ordering within levels and (open chains) lambda -> -lambda.
BetheState canonical(BetheState s, bool open) {
  for (auto& level : s.roots) {
    if (open)
      for (cd& l : level)
        if (l.real() < 0.0 || (l.real() == 0.0 && l.imag() < 0.0)) l = -l;
    std::sort(level.begin(), level.end(), [](cd a, cd b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
  }
  return s;
}

// Order-free distance: every root of one state must lie near some root of the other, level by level.
double state_distance(const BetheState& a, const BetheState& b) {
  double d = 0.0;
  for (std::size_t m = 0; m < a.roots.size(); ++m) {
    for (int pass = 0; pass < 2; ++pass) {
      const auto& x = pass ? b.roots[m] : a.roots[m];
      const auto& y = pass ? a.roots[m] : b.roots[m];
      for (cd r : x) {
        double best = std::numeric_limits<double>::infinity();
        for (cd t : y) best = std::min(best, std::abs(r - t));
        d = std::max(d, best);
      }
    }
  }
  return d;
}

// Roots that coincide, run off to infinity (asymptotic solutions of the periodic equations) or, for
// open chains, sit at 0 or pair with their negatives are not admissible.
bool admissible(const BetheState& s, bool open) {
  for (const auto& level : s.roots)
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (!(std::abs(level[i]) < kMaxRoot)) return false;
      if (open && std::abs(level[i]) < 1e-6) return false;
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        if (std::abs(level[i] - level[j]) < 1e-6) return false;
        if (open && std::abs(level[i] + level[j]) < 1e-6) return false;
      }
    }
  return true;
}

}  // namespace

SolveResult solve_bae(const TQEvaluator& ev, const std::vector<int>& counts, const SolveOptions& opt) {
  {
    BetheState probe;
    for (int c : counts) probe.roots.emplace_back(static_cast<std::size_t>(c), cd(1.0));
    ev.check_counts(probe);
  }
  SolveResult res;
  const bool open = ev.model() != TQModel::periodic_c3;
  int total = 0;
  for (int c : counts) total += c;
  if (total == 0) {
    BetheState empty;
    empty.roots.resize(counts.size());
    res.states.push_back(empty);
    res.residuals.push_back(0.0);
    res.converged_seeds = res.attempted_seeds = 1;
    return res;
  }

  std::mt19937_64 gen(opt.seed);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53); };
  res.best_residual = std::numeric_limits<double>::infinity();
  const Eigen::Index M = total;
  for (int seed = 0; seed < opt.seeds; ++seed) {
    ++res.attempted_seeds;
    Vec z(M);
    for (Eigen::Index i = 0; i < M; ++i) {
      const double r = uni(0.1, 3.0);
      const double phi = open ? uni(-0.5, 0.5) * std::numbers::pi : uni(-1.0, 1.0) * std::numbers::pi;
      z(i) = std::polar(r, phi);
    }
    Vec F = residual_vector(ev, z, counts);
    double fn = norm_inf(F);
    for (int it = 0; it < opt.max_iterations && std::isfinite(fn) && fn > 1e-15; ++it) {
      Mat J(M, M);
      for (Eigen::Index j = 0; j < M; ++j) {
        const double h = 1e-7 * std::max(1.0, std::abs(z(j)));
        Vec zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        J.col(j) = (residual_vector(ev, zp, counts) - residual_vector(ev, zm, counts)) / (2.0 * h);
      }
      const Vec step = J.colPivHouseholderQr().solve(-F);
      if (!step.allFinite()) break;
      double alpha = 1.0;
      bool improved = false;
      for (int k = 0; k < 11; ++k, alpha *= 0.5) {
        const Vec zt = z + alpha * step;
        const Vec Ft = residual_vector(ev, zt, counts);
        const double ft = norm_inf(Ft);
        if (ft < fn) {
          z = zt;
          F = Ft;
          fn = ft;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (std::isfinite(fn)) res.best_residual = std::min(res.best_residual, fn);
    if (!(fn < opt.tolerance)) continue;
    BetheState s = canonical(unflatten(z, counts), open);
    if (!admissible(s, open)) continue;
    ++res.converged_seeds;
    bool dup = false;
    for (const auto& t : res.states)
      if (state_distance(s, t) < opt.dedup_radius) dup = true;
    if (dup) continue;
    res.states.push_back(std::move(s));
    res.residuals.push_back(fn);
  }
  return res;
}

std::vector<cd> comparison_grid() {
  std::vector<cd> g;
  for (int k = 0; k < 10; ++k) g.push_back(std::polar(1.3 + 0.15 * k, 0.4 + 0.57 * k));
  return g;
}

MatchReport match_spectrum(const std::vector<std::function<cd(cd)>>& tq, const std::vector<PolynomialFit>& ed,
                           const std::vector<cd>& grid, double tol) {
  MatchReport rep;
  rep.grid = grid;
  std::vector<std::vector<cd>> edv(ed.size());
  std::vector<double> scale(ed.size(), 0.0);
  for (std::size_t j = 0; j < ed.size(); ++j)
    for (cd u : grid) {
      edv[j].push_back(ed[j](u));
      scale[j] = std::max(scale[j], std::abs(edv[j].back()));
    }
  struct Cost {
    double d;
    std::size_t i, j;
  };
  std::vector<Cost> costs;
  for (std::size_t i = 0; i < tq.size(); ++i) {
    std::vector<cd> tv;
    bool ok = true;
    for (cd u : grid) {
      try {
        tv.push_back(tq[i](u));
      } catch (const PoleError&) {
        ok = false;
        break;
      }
    }
    for (std::size_t j = 0; j < ed.size(); ++j) {
      double d = std::numeric_limits<double>::infinity();
      if (ok) {
        d = 0.0;
        for (std::size_t g = 0; g < grid.size(); ++g) d = std::max(d, std::abs(tv[g] - edv[j][g]) / scale[j]);
      }
      costs.push_back({d, i, j});
    }
  }
  std::stable_sort(costs.begin(), costs.end(), [](const Cost& a, const Cost& b) { return a.d < b.d; });
  std::vector<bool> used_tq(tq.size(), false), used_ed(ed.size(), false);
  rep.entries.resize(tq.size());
  for (std::size_t i = 0; i < tq.size(); ++i) rep.entries[i].state = static_cast<int>(i);
  for (const auto& c : costs) {
    if (used_tq[c.i] || used_ed[c.j]) continue;
    used_tq[c.i] = used_ed[c.j] = true;
    rep.entries[c.i] = {static_cast<int>(c.i), static_cast<int>(c.j), c.d, c.d < tol};
  }
  // Coverage counts distinct exact eigenvalue functions.
  std::vector<int> cls(ed.size(), -1);
  int classes = 0;
  for (std::size_t j = 0; j < ed.size(); ++j) {
    if (cls[j] >= 0) continue;
    cls[j] = classes;
    for (std::size_t k = j + 1; k < ed.size(); ++k) {
      double d = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g)
        d = std::max(d, std::abs(edv[j][g] - edv[k][g]) / std::max(scale[j], scale[k]));
      if (d < tol) cls[k] = classes;
    }
    ++classes;
  }
  std::vector<bool> hit(static_cast<std::size_t>(classes), false);
  for (const auto& e : rep.entries)
    if (e.matched) hit[static_cast<std::size_t>(cls[static_cast<std::size_t>(e.ed_index)])] = true;
  // A T-Q state also covers exact lines of the same class it was not paired with.
  for (std::size_t i = 0; i < tq.size(); ++i) {
    for (std::size_t j = 0; j < ed.size(); ++j) {
      if (hit[static_cast<std::size_t>(cls[j])]) continue;
      for (const auto& c : costs)
        if (c.i == i && c.j == j && c.d < tol) hit[static_cast<std::size_t>(cls[j])] = true;
    }
  }
  rep.coverage = classes ? double(std::count(hit.begin(), hit.end(), true)) / classes : 1.0;
  return rep;
}

cd energy(const PolynomialFit& lambda) {
  if (lambda.coefficients.size() < 2) return 0.0;
  const cd l0 = lambda.coefficients[0];
  if (std::abs(l0) < 1e-300) throw SingularityError("Lambda(0) vanishes; energy undefined");
  return lambda.coefficients[1] / l0;
}

cd energy(const TQEvaluator& ev, const BetheState& s) {
  const int deg = transfer_degree(ev.chain(), TransferKind::t);
  const auto nodes = chebyshev_nodes(deg + 3, -2.0, 1.0, 0.29);
  std::vector<cd> vals;
  for (cd u : nodes) vals.push_back(ev.lambda(s, TransferKind::t, u));
  return energy(fit_polynomial_heldout(nodes, vals, deg));
}

VerificationReport compare_cn_with_c3(const ChainSpec& chain, const BetheState& s, double tol) {
  VerificationReport rep;
  if (chain.n != 3 || chain.boundary != BoundaryKind::open) return rep;
  const TQEvaluator c3(chain, TQModel::open_c3), cn(chain, TQModel::open_cn);
  double dz = 0.0, df = 0.0, dl = 0.0;
  cd wz, wf, wl;
  for (cd u : comparison_grid()) {
    const auto za = c3.z_terms(s, u), zb = cn.z_terms(s, u);
    const auto fa = c3.f_terms(s, u), fb = cn.f_terms(s, u);
    double sz = 0.0, sf = 0.0, ez = 0.0, ef = 0.0;
    for (std::size_t i = 0; i < za.size(); ++i) {
      sz = std::max(sz, std::abs(za[i]));
      ez = std::max(ez, std::abs(za[i] - zb[i]));
    }
    for (std::size_t i = 0; i < fa.size(); ++i) {
      sf = std::max(sf, std::abs(fa[i]));
      ef = std::max(ef, std::abs(fa[i] - fb[i]));
    }
    const cd la = c3.lambda(s, TransferKind::t, u), lb = cn.lambda(s, TransferKind::t, u);
    const double el = std::abs(la - lb) / std::max(std::abs(la), 1e-300);
    if (sz > 0.0 && ez / sz > dz) dz = ez / sz, wz = u;
    if (sf > 0.0 && ef / sf > df) df = ef / sf, wf = u;
    if (el > dl) dl = el, wl = u;
  }
  rep.add("cn_vs_c3.z_terms", "rank-n Z-terms at n = 3 against the rank-3 Z-terms", dz, tol, {{"u", wz}});
  rep.add("cn_vs_c3.f_terms", "rank-n inhomogeneous terms at n = 3 against the rank-3 ones", df, tol, {{"u", wf}});
  rep.add("cn_vs_c3.lambda", "rank-n eigenvalue at n = 3 against the rank-3 eigenvalue", dl, tol, {{"u", wl}});
  return rep;
}

}  // namespace cnv
