#include <gtest/gtest.h>

#include "cnvertex/suites.hpp"

using namespace cnv;

TEST(Suites, ParseNamesRoundTrip) {
  for (Suite s : {Suite::r_properties, Suite::fusion, Suite::operator_identities, Suite::asymptotics, Suite::spectrum,
                  Suite::bethe, Suite::all})
    EXPECT_EQ(parse_suite(to_string(s)), s);
  EXPECT_THROW(parse_suite("everything"), std::invalid_argument);
  EXPECT_EQ(parse_boundary("periodic"), BoundaryKind::periodic);
  EXPECT_EQ(parse_boundary("open"), BoundaryKind::open);
  EXPECT_THROW(parse_boundary("twisted"), std::invalid_argument);
  EXPECT_EQ(expand(Suite::all).size(), 6u);
  EXPECT_EQ(expand(Suite::fusion), (std::vector<Suite>{Suite::fusion}));
}

TEST(Suites, ToleranceOverrideReplacesEveryDefault) {
  RunConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.tolerances().bae, 1e-11);
  EXPECT_DOUBLE_EQ(cfg.tolerances().cn_match, 1e-7);
  cfg.tol = 1e-5;
  const Tolerances t = cfg.tolerances();
  for (double v : {t.r_properties, t.reflection, t.commutativity, t.projector_angle, t.closure, t.operator_identity,
                   t.special_value, t.eigen_relation, t.bae, t.tq_match, t.cn_match, t.vacuum, t.energy,
                   t.energy_consistency, t.diagonal_limit, t.symmetry})
    EXPECT_DOUBLE_EQ(v, 1e-5);
}

TEST(Suites, ChainValidation) {
  RunConfig cfg;
  cfg.sites = 99;
  EXPECT_THROW(cfg.chain(), CapacityError);
  cfg.sites = 2;
  cfg.theta = {cd(0.2)};
  EXPECT_THROW(cfg.chain(), std::invalid_argument);
  cfg.theta.clear();
  const ChainSpec a = cfg.chain(), b = cfg.chain();
  EXPECT_EQ(a.theta, b.theta);
  cfg.seed = 8;
  EXPECT_NE(cfg.chain().theta, a.theta);
}

TEST(Suites, Applicability) {
  RunConfig cfg;
  cfg.n = 2;
  EXPECT_FALSE(applicable(Suite::fusion, cfg));
  EXPECT_TRUE(applicable(Suite::bethe, cfg));
  cfg.boundary = BoundaryKind::periodic;
  EXPECT_FALSE(applicable(Suite::bethe, cfg));
  EXPECT_TRUE(applicable(Suite::r_properties, cfg));
  cfg.n = 3;
  EXPECT_TRUE(applicable(Suite::fusion, cfg));
  EXPECT_TRUE(applicable(Suite::bethe, cfg));
}

TEST(Suites, ConcurrentRunIsOrderedAndDeterministic) {
  RunConfig cfg;
  cfg.n = 2;
  cfg.boundary = BoundaryKind::periodic;
  const auto a = run_suites(Suite::all, cfg);
  const auto b = run_suites(Suite::all, cfg);
  ASSERT_EQ(a.size(), 6u);
  ASSERT_EQ(a.size(), b.size());
  const auto order = expand(Suite::all);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].suite, order[i]);
    ASSERT_EQ(a[i].report.checks.size(), b[i].report.checks.size());
    for (std::size_t j = 0; j < a[i].report.checks.size(); ++j) {
      EXPECT_EQ(a[i].report.checks[j].name, b[i].report.checks[j].name);
      EXPECT_EQ(a[i].report.checks[j].residual, b[i].report.checks[j].residual);
    }
  }
  EXPECT_FALSE(a[1].applicable);  // fusion at rank 2
  EXPECT_TRUE(run_suite(Suite::all, cfg).all_pass());
}

TEST(Suites, RankThreeRProperties) {
  RunConfig cfg;
  const VerificationReport rep = run_suite(Suite::r_properties, cfg);
  EXPECT_GT(rep.checks.size(), 4u);
  EXPECT_TRUE(rep.all_pass());
}

TEST(Suites, OpenOneSiteBetheRun) {
  RunConfig cfg;
  const BetheRun r = run_bethe(cfg);
  EXPECT_EQ(r.model, TQModel::open_c3);
  EXPECT_EQ(r.counts, (std::vector<int>{1, 0, 0}));
  EXPECT_FALSE(r.solve.states.empty());
  EXPECT_FALSE(r.notes.empty());
  const Check* solve = r.report.find("bethe.solve");
  ASSERT_NE(solve, nullptr);
  EXPECT_TRUE(solve->pass);
  for (const auto& e : r.match.entries) EXPECT_TRUE(e.matched) << e.state;
  cfg.counts = {1, 0};
  EXPECT_THROW(run_bethe(cfg), std::invalid_argument);
}
