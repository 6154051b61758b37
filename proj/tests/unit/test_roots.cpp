#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "treemax/roots.hpp"

using namespace treemax;

namespace {

ModelSpec walk_model() {
  ModelSpec s;
  s.c = law::ExpDiffExp{2.0, 1.0};
  return s;
}

ModelSpec lognormal_binary() {
  ModelSpec s;
  s.n = law::CountConstant{2};
  s.c = law::LogNormal{-1.0, std::sqrt(0.5)};
  return s;
}

ModelSpec constant_model(std::uint32_t n, double c) {
  ModelSpec s;
  s.n = law::CountConstant{n};
  s.c = law::Constant{c};
  return s;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(SolveAlpha, WalkModel) {
  const RootSolveResult r = solve_alpha(walk_model());
  EXPECT_NEAR(r.alpha, 1.0, 1e-8);
  EXPECT_NEAR(r.mu_alpha, oracle::mm1::mlog(1.0), 1e-8);
  EXPECT_EQ(r.method, RootMethod::closed_form);
  EXPECT_LT(r.residual, 1e-10);
}

TEST(SolveAlpha, LognormalBinary) {
  const RootSolveResult r = solve_alpha(lognormal_binary());
  EXPECT_NEAR(r.alpha, oracle::lognormal_alpha(-1.0, 0.5, 2.0), 1e-8);
  EXPECT_NEAR(r.alpha, 2.0 + 2.0 * std::sqrt(1.0 - std::log(2.0)), 1e-8);
  EXPECT_GT(r.mu_alpha, 0.0);
}

TEST(SolveAlpha, DecreasingMomentHasNoIncreasingRoot) {
  EXPECT_EQ(code_of([] { solve_alpha(constant_model(2, 0.5)); }), ErrorCode::NoIncreasingRoot);
}

TEST(SolveAlpha, TwoPointWeights) {
  // m(theta) = 0.4 (0.5^theta + 2^theta) crosses 1 upward at theta = 1.
  ModelSpec s;
  s.n = law::CountTwoPoint{0, 2, 0.6};
  s.c = law::TwoPoint{0.5, 2.0, 0.5};
  const RootSolveResult r = solve_alpha(s);
  EXPECT_NEAR(r.alpha, 1.0, 1e-9);
  EXPECT_NEAR(r.mu_alpha, 0.6 * std::log(2.0), 1e-9);
}

TEST(SolveAlpha, MonteCarloMomentsGiveAnInterval) {
  ModelSpec s;
  s.custom = [](CounterStream& st) {
    RootVectorSample v;
    v.q = 1.0;
    v.n = 1;
    // C = exp(S - T), S ~ Exp(2), T ~ Exp(1)
    v.c = {std::exp(-std::log(st.uniform_open()) / 2.0 + std::log(st.uniform_open()))};
    return v;
  };
  RootSolveOptions opt;
  opt.n_mc = 400000;
  opt.bracket = {0.2, 1.8};
  const RootSolveResult r = solve_alpha(s, opt);
  EXPECT_EQ(r.method, RootMethod::monte_carlo);
  ASSERT_TRUE(r.ci.has_value());
  EXPECT_LT(r.ci->lo, r.ci->hi);
  EXPECT_NEAR(r.alpha, 1.0, 0.1);
  EXPECT_NEAR(r.mu_alpha, 0.5, 0.1);
}

TEST(Rho, Examples) {
  EXPECT_DOUBLE_EQ(compute_rho(constant_model(2, 0.5), 1.0).rho_beta, 1.0);
  const ContractionProfile exploding = compute_rho(constant_model(1, 2.0), 0.5);
  EXPECT_NEAR(exploding.rho_beta, std::sqrt(2.0), 1e-15);
  EXPECT_FALSE(exploding.usable);
  const ContractionProfile walk = compute_rho(walk_model(), 0.5);
  EXPECT_NEAR(walk.rho_beta, 8.0 / 9.0, 1e-15);
  EXPECT_TRUE(walk.usable);
  EXPECT_DOUBLE_EQ(walk.q_beta, 1.0);
}

TEST(SelectBeta, WalkModel) {
  const ContractionProfile p = select_beta(walk_model(), 1.0);
  EXPECT_DOUBLE_EQ(p.beta, 0.75);
  EXPECT_NEAR(p.rho_beta, 32.0 / 35.0, 1e-14);
  EXPECT_NEAR(p.rho_beta, oracle::mm1::m(0.75), 1e-14);
}

TEST(SelectBeta, ExplodingModelHasNoContractiveBeta) {
  EXPECT_EQ(code_of([] { select_beta(constant_model(1, 2.0), 1.0); }), ErrorCode::NoContractiveBeta);
}

TEST(SelectBeta, Lognormal) {
  const double alpha = solve_alpha(lognormal_binary()).alpha;
  const ContractionProfile p = select_beta(lognormal_binary(), alpha);
  EXPECT_GT(p.beta, alpha / 2.0);
  EXPECT_LT(p.beta, alpha);
  EXPECT_LT(p.rho_beta, 1.0);
  EXPECT_NEAR(p.rho_beta, oracle::lognormal_m(p.beta, -1.0, 0.5, 2.0), 1e-12);
}

TEST(Conditions, WalkModelCollapsesToOneTerm) {
  const ConditionReport r = check_conditions(walk_model(), 1.0);
  EXPECT_FALSE(r.alpha_above_one);
  EXPECT_TRUE(r.moment_condition_ok);
  // N = 1: E[(C^(1/(1+e)))^(1+e)] = E[C] = m(1) = 1 for every eps
  for (const ConditionItem& item : r.items) {
    if (item.name.rfind("E[(sum", 0) == 0) EXPECT_NEAR(item.value, 1.0, 1e-12) << item.name;
  }
}

TEST(Conditions, BoundedModelPasses) {
  ModelSpec s;
  s.n = law::CountTwoPoint{1, 3, 0.5};
  s.c = law::Uniform{0.1, 0.6};
  const ConditionReport r = check_conditions(s, 1.5);
  EXPECT_TRUE(r.alpha_above_one);
  EXPECT_TRUE(r.moment_condition_ok);
  for (const ConditionItem& item : r.items) EXPECT_NE(item.status, ConditionStatus::fail) << item.name;
}

TEST(Conditions, MonteCarloConditionHasStandardError) {
  ModelSpec s;
  s.n = law::Poisson{2.0};
  s.c = law::Uniform{0.0, 1.0};
  const ConditionReport r = check_conditions(s, 2.0);
  bool found = false;
  for (const ConditionItem& item : r.items) {
    if (item.name.rfind("E[(sum", 0) == 0) {
      found = true;
      EXPECT_GT(item.se, 0.0);
      // E[(sum C_i)^2] = E[N] E[C^2] + E[N(N-1)] E[C]^2 = 2/3 + 4/4
      EXPECT_NEAR(item.value, 2.0 / 3.0 + 1.0, 4.0 * item.se);
    }
  }
  EXPECT_TRUE(found);
}
