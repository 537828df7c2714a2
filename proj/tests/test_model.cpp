#include <gtest/gtest.h>

#include "cnvertex/model.hpp"

using namespace cnv;

namespace {

// 1-based entry R^{ij}_{kl}: row |i j>, column |k l>.
cd entry(const Mat& r, int d, int i, int j, int k, int l) { return r((i - 1) * d + (j - 1), (k - 1) * d + (l - 1)); }

double xi(int i, int n) { return i <= n ? 1.0 : -1.0; }

}  // namespace

TEST(Model, NamedEntriesOfC3R) {
  const RMatrixFamily R(3);
  const cd u(0.37, -1.21);
  const Mat r = R(u);
  const int d = 6;
  auto bar = [](int i) { return 7 - i; };
  for (int i = 1; i <= 6; ++i) {
    EXPECT_LT(std::abs(entry(r, d, i, i, i, i) - (1.0 + u) * (u + 4.0)), 1e-13);
    EXPECT_LT(std::abs(entry(r, d, i, bar(i), bar(i), i) - (2.0 * u + 4.0)), 1e-13);
    EXPECT_LT(std::abs(entry(r, d, i, bar(i), i, bar(i)) - u * (u + 3.0)), 1e-13);
    for (int j = 1; j <= 6; ++j) {
      if (j == i || j == bar(i)) continue;
      EXPECT_LT(std::abs(entry(r, d, i, j, i, j) - u * (u + 4.0)), 1e-13);
      EXPECT_LT(std::abs(entry(r, d, i, j, j, i) - (u + 4.0)), 1e-13);
      EXPECT_LT(std::abs(xi(i, 3) * xi(j, 3) * entry(r, d, i, bar(i), j, bar(j)) - (-u)), 1e-13);
    }
  }
  EXPECT_LT(std::abs(R.a(u) - (1.0 + u) * (u + 4.0)), 1e-15);
  EXPECT_LT(std::abs(R.e(u) - u * (u + 3.0)), 1e-15);
}

TEST(Model, GeneralRankFromDefinition) {
  // R = u(u+k) I + (u+k) P - u Q with Q^{ij}_{kl} = xi_i xi_k delta_{j, bar i} delta_{l, bar k}.
  for (int n : {2, 4}) {
    const RMatrixFamily R(n);
    const int d = 2 * n;
    const double k = n + 1.0;
    const cd u(-0.8, 0.45);
    Mat oracle = Mat::Zero(d * d, d * d);
    for (int i = 1; i <= d; ++i)
      for (int j = 1; j <= d; ++j)
        for (int a = 1; a <= d; ++a)
          for (int b = 1; b <= d; ++b) {
            cd v = 0.0;
            if (i == a && j == b) v += u * (u + k);
            if (i == b && j == a) v += u + k;
            if (j == d + 1 - i && b == d + 1 - a) v -= u * xi(i, n) * xi(a, n);
            oracle((i - 1) * d + j - 1, (a - 1) * d + b - 1) = v;
          }
    EXPECT_LT((R(u) - oracle).norm(), 1e-13) << "n=" << n;
    const double h = 1e-6;
    EXPECT_LT((R.derivative(u) - (R(u + h) - R(u - h)) / (2 * h)).norm() / R.derivative(u).norm(), 1e-8);
  }
}

TEST(Model, RPropertiesForSeveralRanks) {
  for (int n : {2, 3, 4}) {
    Sampler s(11);
    const VerificationReport rep = verify_r_properties(n, 10, 1e-10, s);
    EXPECT_EQ(rep.checks.size(), 4u);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
  }
}

TEST(Model, DegenerationRanksOfC3R) {
  const RMatrixFamily R(3);
  EXPECT_EQ(svd_rank(R(-4.0), 1e-10).rank, 1);
  EXPECT_EQ(svd_rank(R(-1.0), 1e-10).rank, 14);
  EXPECT_EQ(svd_rank(R(0.3), 1e-10).rank, 36);
}

TEST(Model, KMatricesHaveTheStatedForm) {
  BoundaryParams p;
  const cd u(0.2, 0.9);
  for (int n : {2, 3}) {
    const Mat km = k_minus(n, p, u);
    const int d = 2 * n;
    Mat oracle = p.zeta * Mat::Identity(d, d);
    for (int i = 0; i < n; ++i) {
      oracle(i, i) -= u;
      oracle(i + n, i + n) += u;
      oracle(i, i + n) += u * p.c1;
      oracle(i + n, i) += u * p.c2;
    }
    EXPECT_LT((km - oracle).norm(), 1e-14);
    // K+(u) = K-(-u - kappa) with tilded parameters.
    BoundaryParams q = p;
    q.zeta = p.zeta_t, q.c1 = p.c1_t, q.c2 = p.c2_t;
    EXPECT_LT((k_plus(n, p, u) - k_minus(n, q, -u - double(n + 1))).norm(), 1e-14);
  }
}

TEST(Model, ReflectionEquationsForSeveralRanks) {
  BoundaryParams p;
  for (int n : {2, 3, 4}) {
    Sampler s(5);
    const VerificationReport rep = verify_reflection_equations(n, p, 5, 1e-10, s);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " " << c.residual;
  }
}

TEST(Model, BoundaryFunctionsAndX) {
  BoundaryParams p;
  const cd u(0.4, -0.3);
  const cd sm = std::sqrt(1.0 + p.c1 * p.c2), sp = std::sqrt(1.0 + p.c1_t * p.c2_t);
  EXPECT_LT(std::abs(p.h1(u) - 2.0 * (sm * u + p.zeta)), 1e-14);
  EXPECT_LT(std::abs(p.h2_t(u) + 2.0 * (sp * u - p.zeta_t)), 1e-14);
  EXPECT_LT(std::abs(boundary_H1(p, u, Pairing::printed) - p.h1(u) * p.h1_t(u)), 1e-14);
  EXPECT_LT(std::abs(boundary_H1(p, u, Pairing::consistent) - p.h1(u) * p.h2_t(u)), 1e-14);
  EXPECT_LT(std::abs(boundary_H2(p, u, Pairing::consistent) - p.h2(u) * p.h1_t(u)), 1e-14);
  BoundaryParams diag;
  diag.c1 = diag.c2 = diag.c1_t = diag.c2_t = 0.0;
  EXPECT_TRUE(diag.diagonal());
  EXPECT_EQ(diag.x(), cd(0.0));
}

TEST(Model, SamplerIsDeterministicAndAvoidsPoints) {
  Sampler a(42), b(42);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(a.spectral(), b.spectral());
  Sampler c(1);
  for (int i = 0; i < 200; ++i) {
    const double x = c.uniform(-1.0, 2.0);
    EXPECT_GE(x, -1.0);
    EXPECT_LT(x, 2.0);
  }
}
