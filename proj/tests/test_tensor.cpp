#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "cnvertex/tensor.hpp"

using namespace cnv;

namespace {

Mat random_mat(int r, int c, unsigned seed) {
  std::mt19937 g(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cd(d(g), d(g));
  return m;
}

// Element of an operator on (d0 x d1 x d2) addressed by multi-indices, first factor most significant.
int idx3(int a, int b, int c, int d1, int d2) { return (a * d1 + b) * d2 + c; }

}  // namespace

TEST(Tensor, KronMatchesEntrywiseDefinition) {
  const Mat a = random_mat(2, 3, 1), b = random_mat(3, 2, 2);
  const Mat k = kron(a, b);
  ASSERT_EQ(k.rows(), 6);
  ASSERT_EQ(k.cols(), 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 2; ++q) EXPECT_EQ(k(i * 3 + p, j * 2 + q), a(i, j) * b(p, q));
}

TEST(Tensor, EmbedOnNonAdjacentFactorsMatchesLoopOracle) {
  // op acts on factors (2, 0) in that order, identity on factor 1.
  const std::vector<int> dims{2, 3, 2};
  const Mat op = random_mat(4, 4, 3);
  const Mat e = embed(op, {2, 0}, dims);
  Mat oracle = Mat::Zero(12, 12);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 2; ++c)
        for (int a2 = 0; a2 < 2; ++a2)
          for (int c2 = 0; c2 < 2; ++c2)
            oracle(idx3(a, b, c, 3, 2), idx3(a2, b, c2, 3, 2)) = op(c * 2 + a, c2 * 2 + a2);
  EXPECT_LT((e - oracle).norm(), 1e-14);
}

TEST(Tensor, ApplyEmbeddedAgreesWithDenseEmbedding) {
  const std::vector<int> dims{3, 2, 2};
  const Mat op = random_mat(6, 6, 4);
  const Mat x = random_mat(12, 5, 5);
  const Mat y = random_mat(5, 12, 6);
  const Mat e = embed(op, {0, 2}, dims);
  EXPECT_LT((apply_embedded(op, {0, 2}, dims, x) - e * x).norm(), 1e-13);
  EXPECT_LT((apply_embedded_right(y, op, {0, 2}, dims) - y * e).norm(), 1e-13);
}

TEST(Tensor, PartialTraceOfProductIsTraceTimesOperator) {
  const Mat a = random_mat(3, 3, 7), b = random_mat(2, 2, 8);
  EXPECT_LT((partial_trace(kron(a, b), {3, 2}, 0) - a.trace() * b).norm(), 1e-13);
  EXPECT_LT((partial_trace(kron(a, b), {3, 2}, 1) - b.trace() * a).norm(), 1e-13);
}

TEST(Tensor, PartialTransposeOfProduct) {
  const Mat a = random_mat(2, 2, 9), b = random_mat(3, 3, 10);
  EXPECT_LT((partial_transpose(kron(a, b), {2, 3}, 0) - kron(Mat(a.transpose()), b)).norm(), 1e-14);
  EXPECT_LT((partial_transpose(kron(a, b), {2, 3}, 1) - kron(a, Mat(b.transpose()))).norm(), 1e-14);
}

TEST(Tensor, SwapFactorsExchangesKronOrder) {
  const Mat a = random_mat(2, 2, 11), b = random_mat(3, 3, 12);
  const Mat s = swap_factors(2, 3);
  EXPECT_LT((s * kron(a, b) * s.transpose() - kron(b, a)).norm(), 1e-14);
}

TEST(Tensor, SvdRankAndPrincipalAngle) {
  const Mat u = orthonormalize(random_mat(8, 3, 13));
  const Mat low = u * random_mat(3, 8, 14);
  const RankResult r = svd_rank(low, 1e-10);
  EXPECT_EQ(r.rank, 3);
  EXPECT_LT(subspace_distance(r.isometry, u), 1e-12);
  EXPECT_GT(subspace_distance(r.isometry, orthonormalize(random_mat(8, 3, 15))), 0.1);
  EXPECT_THROW(svd_rank(low, 0.0), std::invalid_argument);
}

TEST(Tensor, SimultaneousBasisOfCommutingOperators) {
  const Mat s = random_mat(5, 5, 16);
  const Mat si = s.inverse();
  Vec d1(5), d2(5);
  d1 << 1.0, 1.0, 2.0, 3.0, 3.0;  // degenerate in the first operator only
  d2 << 4.0, 5.0, 6.0, 7.0, 8.0;
  const Mat a = s * d1.asDiagonal() * si, b = s * d2.asDiagonal() * si;
  const SimultaneousBasis sb = simultaneous_eigbasis({a, b}, 3);
  EXPECT_LT(sb.max_residual, 1e-10);
  ASSERT_EQ(sb.vectors.cols(), 5);
  for (Eigen::Index j = 0; j < 5; ++j) {
    const Vec v = sb.vectors.col(j);
    EXPECT_LT((a * v - sb.eigenvalues[0](j) * v).norm(), 1e-9);
    EXPECT_LT((b * v - sb.eigenvalues[1](j) * v).norm(), 1e-9);
  }
}

TEST(Tensor, PolynomialFitRecoversCoefficientsAndReportsHeldout) {
  const std::vector<cd> c{cd(1.0, 2.0), cd(-3.0, 0.5), cd(0.0, 0.0), cd(2.0, -1.0), cd(0.25, 0.0)};
  auto p = [&](cd u) {
    cd s = 0.0;
    for (int k = 4; k >= 0; --k) s = s * u + c[static_cast<std::size_t>(k)];
    return s;
  };
  std::vector<cd> nodes = chebyshev_nodes(5, -5.0, 1.5, 0.37);
  nodes.push_back(cd(0.7, -0.3));
  nodes.push_back(cd(-3.9, 0.6));
  std::vector<cd> vals;
  for (cd u : nodes) vals.push_back(p(u));
  const PolynomialFit f = fit_polynomial_heldout(nodes, vals, 4);
  EXPECT_LT(f.residual, 1e-12);
  for (int k = 0; k < 5; ++k) EXPECT_LT(std::abs(f.coefficients[static_cast<std::size_t>(k)] - c[static_cast<std::size_t>(k)]), 1e-11);
  // Too low a degree is caught by the held-out points.
  EXPECT_GT(fit_polynomial_heldout(nodes, vals, 3).residual, 1e-3);
}

TEST(Tensor, ChebyshevNodesAvoidDegenerationPoints) {
  const auto nodes = chebyshev_nodes(15, -5.0, 1.5, 0.37);
  ASSERT_EQ(nodes.size(), 15u);
  for (cd u : nodes) {
    EXPECT_NEAR(u.imag(), 0.37, 1e-15);
    for (double bad : {-4.0, -1.0, -3.5, -3.0, 0.0}) EXPECT_GT(std::abs(u - bad), 0.3);
  }
}

TEST(Tensor, CapacityCapFollowsEnvironment) {
  ::unsetenv("CNV_MAX_ENTRIES");
  EXPECT_EQ(capacity_cap(), std::int64_t{1} << 28);
  ::setenv("CNV_MAX_ENTRIES", "1000", 1);
  EXPECT_EQ(capacity_cap(), 1000);
  EXPECT_THROW(check_capacity(1001, "probe"), CapacityError);
  EXPECT_NO_THROW(check_capacity(1000, "probe"));
  ::unsetenv("CNV_MAX_ENTRIES");
}

TEST(Tensor, DenseOperatorRejectsMismatchedShape) {
  EXPECT_THROW(DenseOperator({{"a", 2}, {"b", 3}}, Mat::Identity(5, 5)), std::invalid_argument);
  const DenseOperator a({{"a", 2}}, random_mat(2, 2, 17)), b({{"b", 3}}, random_mat(3, 3, 18));
  const DenseOperator k = kron(a, b);
  EXPECT_EQ(k.dims(), (std::vector<int>{2, 3}));
  EXPECT_EQ(partial_trace(k, 0).dims(), (std::vector<int>{3}));
}
