#include <gtest/gtest.h>

#include "cnvertex/bethe.hpp"

using namespace cnv;

namespace {

std::vector<PolynomialFit> ed_lines(const ChainSpec& c) {
  const Spectrum sp = spectrum(TransferMatrices(c), 7);
  std::vector<PolynomialFit> out;
  for (const auto& l : sp.lines) out.push_back(l.lambda);
  return out;
}

std::vector<std::function<cd(cd)>> tq_lines(const TQEvaluator& ev, const std::vector<BetheState>& states) {
  std::vector<std::function<cd(cd)>> out;
  for (const auto& s : states) out.push_back([&ev, s](cd u) { return ev.lambda(s, TransferKind::t, u); });
  return out;
}

// Polynomial with the given monomial coefficients, built through the fitting routine.
PolynomialFit poly(const std::vector<cd>& c) {
  std::vector<cd> u, v;
  for (int k = 0; k < 8; ++k) {
    u.push_back(cd(-2.0 + 0.5 * k, 0.3));
    cd acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * u.back() + *it;
    v.push_back(acc);
  }
  return fit_polynomial(u, v, static_cast<int>(c.size()) - 1);
}

}  // namespace

TEST(Bethe, MatchingSeparatesPerturbedEigenvalues) {
  const std::vector<PolynomialFit> ed{poly({cd(1.0), cd(2.0), cd(0.5)}), poly({cd(-3.0), cd(0.0), cd(1.0)})};
  const auto grid = comparison_grid();
  ASSERT_EQ(grid.size(), 10u);
  std::vector<std::function<cd(cd)>> exact{[&](cd u) { return ed[1](u); }, [&](cd u) { return ed[0](u); }};
  const MatchReport m = match_spectrum(exact, ed, grid, 1e-8);
  ASSERT_EQ(m.entries.size(), 2u);
  for (const auto& e : m.entries) {
    EXPECT_TRUE(e.matched);
    EXPECT_EQ(e.ed_index, 1 - e.state);
    EXPECT_LT(e.distance, 1e-14);
  }
  EXPECT_DOUBLE_EQ(m.coverage, 1.0);

  std::vector<std::function<cd(cd)>> perturbed{[&](cd u) { return 1.001 * ed[0](u); }};
  const MatchReport p = match_spectrum(perturbed, ed, grid, 1e-8);
  ASSERT_EQ(p.entries.size(), 1u);
  EXPECT_FALSE(p.entries[0].matched);
  EXPECT_NEAR(p.entries[0].distance, 1e-3, 1e-6);
  EXPECT_DOUBLE_EQ(p.coverage, 0.0);
}

TEST(Bethe, EnergyIsScaleInvariantAndRejectsZeroAtOrigin) {
  const PolynomialFit a = poly({cd(2.0, 1.0), cd(-0.5, 0.3), cd(1.0)});
  PolynomialFit b = a;
  for (cd& c : b.coefficients) c *= cd(-3.0, 2.0);
  EXPECT_LT(std::abs(energy(a) - energy(b)), 1e-14);
  EXPECT_LT(std::abs(energy(a) - cd(-0.5, 0.3) / cd(2.0, 1.0)), 1e-15);
  PolynomialFit z;
  z.degree = 1;
  z.coefficients = {cd(0.0), cd(1.0)};
  EXPECT_THROW(energy(z), SingularityError);
}

TEST(Bethe, InputValidation) {
  const ChainSpec open{3, {cd(0.27)}, BoundaryKind::open, {}};
  const TQEvaluator ev(open, TQModel::open_c3);
  EXPECT_EQ(ev.minimal_counts(), (std::vector<int>{1, 0, 0}));
  EXPECT_THROW(ev.check_counts(BetheState{{{}, {}, {}}}), std::invalid_argument);
  EXPECT_THROW(ev.check_counts(BetheState{{{cd(1e-13)}, {}, {}}}), std::invalid_argument);
  EXPECT_THROW(ev.check_counts(BetheState{{{cd(0.3)}, {}}}), std::invalid_argument);
  EXPECT_THROW(TQEvaluator(open, TQModel::periodic_c3), std::invalid_argument);
  const ChainSpec per{2, {cd(0.2)}, BoundaryKind::periodic, {}};
  EXPECT_THROW(TQEvaluator(per, TQModel::periodic_c3), std::invalid_argument);

  const BetheState twin{{{cd(0.4, 0.1), cd(0.4, 0.1)}, {}, {}}};
  const ChainSpec open2{3, {cd(0.2), cd(0.35)}, BoundaryKind::open, {}};
  const TQEvaluator ev2(open2, TQModel::open_c3);
  EXPECT_THROW(ev2.bae_residuals(twin), DegenerateStateError);
}

TEST(Bethe, PoleGuardAndContourMeanNearQZeros) {
  const ChainSpec c{3, {cd(0.27)}, BoundaryKind::open, {}};
  const TQEvaluator ev(c, TQModel::open_c3);
  const BetheState s{{{cd(0.6, 0.4)}, {}, {}}};
  // Level-1 Q-ratios have poles at lambda - 1/2 unless the state solves the Bethe equations.
  EXPECT_THROW(ev.lambda(s, TransferKind::t, cd(0.1, 0.4)), PoleError);
  EXPECT_NO_THROW(ev.lambda(s, TransferKind::t, cd(0.1 + 1e-4, 0.4)));
  EXPECT_GT(ev.pole_residue(s), 1e-6);
}

TEST(Bethe, OneSiteOpenC3StateMatchesExactDiagonalization) {
  const ChainSpec c{3, {cd(0.27)}, BoundaryKind::open, {}};
  const TQEvaluator ev(c, TQModel::open_c3);
  const SolveResult r = solve_bae(ev, {1, 0, 0});
  ASSERT_FALSE(r.states.empty());
  // Frozen root of the (1, 0, 0) sector for theta = 0.27 and the default boundary parameters.
  const cd frozen(0.170317787954, 0.244093044207);
  bool found = false;
  for (const auto& s : r.states)
    for (cd l : s.roots[0]) found = found || std::abs(l - frozen) < 1e-8 || std::abs(l + frozen) < 1e-8;
  EXPECT_TRUE(found);
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    EXPECT_LT(r.residuals[i], 1e-11);
    EXPECT_LT(ev.pole_residue(r.states[i]), 1e-8);
  }
  const MatchReport m = match_spectrum(tq_lines(ev, r.states), ed_lines(c), comparison_grid(), 1e-8);
  for (const auto& e : m.entries) EXPECT_TRUE(e.matched) << "state " << e.state << " distance " << e.distance;
  // All six eigenvalues of the one-site chain coincide in Lambda(0) = 6 zeta zeta~ rho(-theta).
  const RMatrixFamily R(3);
  EXPECT_LT(rel_diff(ev.lambda(r.states[0], TransferKind::t, 0.0),
                     6.0 * c.params.zeta * c.params.zeta_t * R.rho_v(-c.theta[0])),
            1e-10);
}

TEST(Bethe, RootReflectionLeavesEigenvalueUnchanged) {
  const ChainSpec c{3, {cd(0.27)}, BoundaryKind::open, {}};
  const TQEvaluator ev(c, TQModel::open_c3);
  const BetheState s{{{cd(0.9, -0.3)}, {}, {}}}, f{{{cd(-0.9, 0.3)}, {}, {}}};
  for (cd u : comparison_grid())
    EXPECT_LT(rel_diff(ev.lambda(s, TransferKind::t, u), ev.lambda(f, TransferKind::t, u)), 1e-12);
}

TEST(Bethe, GeneralRankRelationsAgreeWithDedicatedC3Relations) {
  const ChainSpec c{3, {cd(0.27)}, BoundaryKind::open, {}};
  const BetheState s{{{cd(0.9, -0.3)}, {}, {}}};
  const VerificationReport rep = compare_cn_with_c3(c, s, 1e-7);
  EXPECT_FALSE(rep.checks.empty());
  for (const auto& ch : rep.checks) EXPECT_TRUE(ch.pass) << ch.name << " " << ch.residual;
}

TEST(Bethe, RankTwoOpenChainMatchesExactDiagonalization) {
  const ChainSpec c{2, {cd(0.23)}, BoundaryKind::open, {}};
  const TQEvaluator ev(c, TQModel::open_cn);
  const SolveResult r = solve_bae(ev, ev.minimal_counts());
  ASSERT_FALSE(r.states.empty());
  const MatchReport m = match_spectrum(tq_lines(ev, r.states), ed_lines(c), comparison_grid(), 1e-7);
  for (const auto& e : m.entries) EXPECT_TRUE(e.matched) << "state " << e.state << " distance " << e.distance;
}

TEST(Bethe, DiagonalBoundaryRemovesInhomogeneousTerms) {
  ChainSpec c{3, {cd(0.27)}, BoundaryKind::open, {}};
  c.params.c1 = c.params.c2 = c.params.c1_t = c.params.c2_t = 0.0;
  const TQEvaluator ev(c, TQModel::open_c3);
  EXPECT_EQ(ev.xbar(), cd(0.0));
  const BetheState s{{{cd(0.9, -0.3)}, {}, {}}};
  for (cd u : {cd(0.3, 0.2), cd(-1.4, 0.7)})
    for (cd f : ev.f_terms(s, u)) EXPECT_LT(std::abs(f), 1e-12);
}

TEST(Bethe, PeriodicVacuumIsTheEmptyState) {
  const ChainSpec c{3, {cd(0.0), cd(0.0)}, BoundaryKind::periodic, {}};
  const TQEvaluator ev(c, TQModel::periodic_c3);
  const BetheState vac{std::vector<std::vector<cd>>(3)};
  const TransferMatrices tm(c);
  for (cd u : comparison_grid()) EXPECT_LT(rel_diff(ev.lambda(vac, TransferKind::t, u), tm(TransferKind::t, u)(0, 0)), 1e-12);
  EXPECT_LT(ev.pole_residue(vac), 1e-14);
}
