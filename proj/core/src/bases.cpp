#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>

#include "cnvertex/fusion.hpp"

namespace cnv::c3 {

namespace {

// One amplitude of a basis vector; indices are 1-based as tabulated.
struct Term {
  double c;
  std::array<int, 3> idx;
};
using Vector = std::vector<Term>;

Term t2(double c, int i, int j) { return {c, {i, j, 0}}; }

Vector anti2(int i, int j) {
  const double c = 1.0 / std::sqrt(2.0);
  return {t2(c, i, j), t2(-c, j, i)};
}

void append_anti3(Vector& v, int i, int j, int k, double c) {
  const std::array<int, 3> base{i, j, k};
  std::array<int, 3> p{0, 1, 2};
  do {
    int inversions = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        if (p[a] > p[b]) ++inversions;
    const double sign = inversions % 2 ? -1.0 : 1.0;
    v.push_back({sign * c, {base[p[0]], base[p[1]], base[p[2]]}});
  } while (std::next_permutation(p.begin(), p.end()));
}

Vector anti3(int i, int j, int k, double c) {
  Vector v;
  append_anti3(v, i, j, k, c);
  return v;
}

Vector anti3(int i, int j, int k, double c, int i2, int j2, int k2, double c2) {
  Vector v;
  append_anti3(v, i, j, k, c);
  append_anti3(v, i2, j2, k2, c2);
  return v;
}

Mat isometry(const std::vector<Vector>& vecs, const std::vector<int>& dims) {
  const auto total = product(dims);
  Mat u = Mat::Zero(total, static_cast<Eigen::Index>(vecs.size()));
  for (std::size_t col = 0; col < vecs.size(); ++col)
    for (const Term& t : vecs[col]) {
      std::int64_t flat = 0;
      for (std::size_t f = 0; f < dims.size(); ++f) flat = flat * dims[f] + (t.idx[f] - 1);
      u(flat, static_cast<Eigen::Index>(col)) += t.c;
    }
  return u;
}

std::vector<Vector> psi0() {
  const double c = 1.0 / std::sqrt(6.0);
  return {{t2(c, 1, 6), t2(c, 2, 5), t2(c, 3, 4), t2(-c, 4, 3), t2(-c, 5, 2), t2(-c, 6, 1)}};
}

std::vector<Vector> psi14() {
  const double r12 = 1.0 / std::sqrt(12.0);
  return {anti2(1, 2),
          anti2(1, 3),
          anti2(1, 4),
          anti2(1, 5),
          {t2(0.5, 1, 6), t2(-0.5, 6, 1), t2(0.5, 4, 3), t2(-0.5, 3, 4)},
          anti2(2, 3),
          anti2(2, 4),
          {t2(-r12, 1, 6), t2(r12, 6, 1), t2(r12, 4, 3), t2(-r12, 3, 4), t2(2 * r12, 2, 5), t2(-2 * r12, 5, 2)},
          anti2(2, 6),
          anti2(3, 5),
          anti2(3, 6),
          anti2(4, 5),
          anti2(4, 6),
          anti2(5, 6)};
}

// Pairs (fused 14-dim index, V index).
std::vector<Vector> psi6() {
  const double k = std::sqrt(3.0 / 14.0);
  const double h = std::sqrt(0.5), s6 = std::sqrt(1.0 / 6.0), s23 = std::sqrt(2.0 / 3.0);
  return {{t2(-k, 1, 5), t2(-k, 2, 4), t2(k, 3, 3), t2(k, 4, 2), t2(k * h, 5, 1), t2(-k * s6, 8, 1)},
          {t2(k, 1, 6), t2(-k, 6, 4), t2(k, 7, 3), t2(k, 9, 1), t2(k * s23, 8, 2)},
          {t2(k, 2, 6), t2(k, 6, 5), t2(k, 10, 2), t2(k, 11, 1), t2(-k * h, 5, 3), t2(-k * s6, 8, 3)},
          {t2(k, 3, 6), t2(k, 7, 5), t2(k, 12, 2), t2(k, 13, 1), t2(-k * h, 5, 4), t2(-k * s6, 8, 4)},
          {t2(k, 4, 6), t2(k, 10, 4), t2(-k, 12, 3), t2(k, 14, 1), t2(k * s23, 8, 5)},
          {t2(k, 9, 5), t2(k, 11, 4), t2(-k, 13, 3), t2(-k, 14, 2), t2(k * h, 5, 6), t2(-k * s6, 8, 6)}};
}

std::vector<Vector> psi14_bar() {
  const double r3 = 1 / std::sqrt(3.0), r10 = 1 / std::sqrt(10.0), r2 = 1 / std::sqrt(2.0),
               r5 = 1 / std::sqrt(5.0), r8 = 1 / std::sqrt(8.0);
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  return {{t2(r3, 1, 3), t2(-r3, 2, 2), t2(r3, 6, 1)},
          {t2(r3, 1, 4), t2(-r3, 3, 2), t2(r3, 7, 1)},
          {t2(r10 * s2, 2, 4), t2(-r10 * s2, 3, 3), t2(r10 * s2, 4, 2), t2(-r10, 5, 1), t2(-r10 * s3, 8, 1)},
          {t2(r2, 4, 3), t2(-r2, 10, 1)},
          {t2(r2, 4, 4), t2(-r2, 12, 1)},
          {t2(r5 * s2, 5, 2), t2(-r5, 6, 4), t2(r5, 7, 3), t2(-r5, 9, 1)},
          {t2(r8, 5, 3), t2(-r8 * s3, 8, 3), t2(r8 * s2, 10, 2), t2(-r8 * s2, 11, 1)},
          {t2(r8, 5, 4), t2(-r8 * s3, 8, 4), t2(r8 * s2, 12, 2), t2(-r8 * s2, 13, 1)},
          {t2(r2, 9, 3), t2(-r2, 11, 2)},
          {t2(r2, 9, 4), t2(-r2, 13, 2)},
          {t2(r3, 10, 4), t2(-r3, 12, 3), t2(-r3, 14, 1)},
          {t2(r3, 11, 4), t2(-r3, 13, 3), t2(-r3, 14, 2)},
          {t2(1.0, 14, 3)},
          {t2(1.0, 14, 4)}};
}

// Antisymmetric triples in V (x) V (x) V.
std::vector<Vector> phi14() {
  const double c6 = 1 / std::sqrt(6.0), c12 = 1 / std::sqrt(12.0);
  return {anti3(1, 2, 3, c6),
          anti3(1, 2, 4, c6),
          anti3(1, 2, 5, c12, 1, 3, 4, -c12),
          anti3(1, 2, 6, c12, 2, 3, 4, c12),
          anti3(1, 3, 5, c6),
          anti3(1, 3, 6, c12, 2, 3, 5, -c12),
          anti3(1, 4, 5, c6),
          anti3(1, 4, 6, c12, 2, 4, 5, -c12),
          anti3(1, 5, 6, c12, 3, 4, 5, c12),
          anti3(2, 3, 6, c6),
          anti3(2, 4, 6, c6),
          anti3(2, 5, 6, c12, 3, 4, 6, -c12),
          anti3(3, 5, 6, c6),
          anti3(4, 5, 6, c6)};
}

// Pairs (tilde 14-dim index, V index).
std::vector<Vector> phi14_tilde() {
  const double q = std::sqrt(1.0 / 6.0), q12 = std::sqrt(1.0 / 12.0), s2 = std::sqrt(2.0);
  const double a = q * s2;
  return {{t2(-a, 1, 4), t2(a, 2, 3), t2(q, 3, 2), t2(q, 4, 1)},
          {t2(a, 1, 5), t2(a, 5, 2), t2(-q, 3, 3), t2(q, 6, 1)},
          {t2(a, 2, 5), t2(a, 7, 2), t2(-q, 3, 4), t2(q, 8, 1)},
          {t2(a, 5, 4), t2(-a, 7, 3), t2(q, 3, 5), t2(q, 9, 1)},
          {t2(2 * q12, 4, 5), t2(-2 * q12, 9, 2), t2(-q12, 3, 6), t2(q12, 6, 4), t2(-q12, 8, 3), t2(q12, 12, 1)},
          {t2(-a, 1, 6), t2(a, 10, 1), t2(q, 4, 3), t2(-q, 6, 2)},
          {t2(-a, 2, 6), t2(a, 11, 1), t2(q, 4, 4), t2(-q, 8, 2)},
          {t2(-0.5, 3, 6), t2(-0.5, 6, 4), t2(0.5, 8, 3), t2(0.5, 12, 1)},
          {t2(a, 10, 4), t2(-a, 11, 3), t2(-q, 4, 6), t2(-q, 12, 2)},
          {t2(-a, 5, 6), t2(a, 13, 1), t2(q, 6, 5), t2(-q, 9, 3)},
          {t2(-a, 10, 5), t2(-a, 13, 2), t2(-q, 6, 6), t2(q, 12, 3)},
          {t2(-a, 7, 6), t2(a, 14, 1), t2(q, 8, 5), t2(-q, 9, 4)},
          {t2(-a, 11, 5), t2(-a, 14, 2), t2(-q, 8, 6), t2(q, 12, 4)},
          {t2(-a, 13, 4), t2(a, 14, 3), t2(-q, 9, 6), t2(-q, 12, 5)}};
}

std::vector<Projector> build_all() {
  std::vector<Projector> out;
  out.push_back({ProjectorName::P1, "P1", {6, 6}, isometry(psi0(), {6, 6}), "R(u)", -4.0});
  out.push_back({ProjectorName::P14, "P14", {6, 6}, isometry(psi14(), {6, 6}), "R(u)", -1.0});
  out.push_back({ProjectorName::P14_123, "P14_123", {6, 6, 6}, isometry(phi14(), {6, 6, 6}),
                 "R12(-1) R13(-2) R23(-1)", 0.0});
  out.push_back({ProjectorName::P6_bar, "P6_bar", {14, 6}, isometry(psi6(), {14, 6}), "R_bar(u)", -3.5});
  out.push_back({ProjectorName::P14_bar, "P14_bar", {14, 6}, isometry(psi14_bar(), {14, 6}), "R_bar(u)", -1.5});
  out.push_back({ProjectorName::P14_tilde, "P14_tilde", {14, 6}, isometry(phi14_tilde(), {14, 6}), "R_tilde(u)",
                 -3.0});
  return out;
}

}  // namespace

const Projector& projector(ProjectorName name) {
  static const std::vector<Projector> all = build_all();
  return all[static_cast<std::size_t>(name)];
}

std::vector<ProjectorName> all_projectors() {
  return {ProjectorName::P1,     ProjectorName::P14,     ProjectorName::P14_123,
          ProjectorName::P6_bar, ProjectorName::P14_bar, ProjectorName::P14_tilde};
}

}  // namespace cnv::c3
