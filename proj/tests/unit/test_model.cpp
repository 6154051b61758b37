#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "treemax/model.hpp"

using namespace treemax;

namespace {

ModelSpec constant_model(double q, std::uint32_t n, double c) {
  ModelSpec s;
  s.q = law::Constant{q};
  s.n = law::CountConstant{n};
  s.c = law::Constant{c};
  return s;
}

ModelSpec lognormal_binary() {
  ModelSpec s;
  s.n = law::CountConstant{2};
  s.c = law::LogNormal{-1.0, std::sqrt(0.5)};
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

TEST(Validate, ConstantModelPasses) {
  const ValidationReport r = validate_model(constant_model(1.0, 2, 0.5));
  EXPECT_TRUE(r.ok());
}

TEST(Validate, ZeroQIsRejected) {
  EXPECT_EQ(code_of([] { validate_model(constant_model(0.0, 2, 0.5)); }), ErrorCode::RejectedModel);
}

TEST(Validate, ExplodingWeightsPassHere) {
  EXPECT_TRUE(validate_model(constant_model(1.0, 1, 2.0)).ok());
}

TEST(Validate, NegativeWeightsOnlyForTheLinearRecursion) {
  ModelSpec s = constant_model(1.0, 2, 0.5);
  s.c = law::Uniform{-0.5, 0.5};
  EXPECT_EQ(code_of([&] { validate_model(s, RecursionKind::max); }), ErrorCode::RejectedModel);
  EXPECT_NO_THROW(validate_model(s, RecursionKind::linear));
}

TEST(Validate, JointTableProbabilitiesMustSumToOne) {
  ModelSpec s;
  s.joint = JointTable{{{0.5, {0.5, 0.5}, std::nullopt}, {0.4, {}, std::nullopt}}};
  EXPECT_EQ(code_of([&] { validate_model(s); }), ErrorCode::RejectedModel);
  s.joint->atoms[1].prob = 0.5;
  EXPECT_NO_THROW(validate_model(s));
}

TEST(Validate, CoupledDependenceNeedsConditionalLaws) {
  ModelSpec s;
  s.joint = JointTable{{{1.0, {0.5}, std::nullopt}}};
  s.dependence = Dependence::q_coupled;
  EXPECT_EQ(code_of([&] { validate_model(s); }), ErrorCode::RejectedModel);
}

TEST(RootVector, DeterministicSpec) {
  const ModelSpec s = constant_model(1.0, 2, 0.5);
  CounterStream stream{5};
  const RootVectorSample v = sample_root_vector(s, stream);
  EXPECT_EQ(v.q, 1.0);
  EXPECT_EQ(v.n, 2u);
  EXPECT_EQ(v.c, (std::vector<double>{0.5, 0.5}));
}

TEST(RootVector, SameKeySameSample) {
  const ModelSpec s = lognormal_binary();
  const NodeKey k = NodeKey::root(3, 8);
  const RootVectorSample a = sample_root_vector(s, k);
  const RootVectorSample b = sample_root_vector(s, k);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.c, b.c);
  CounterStream s1{9}, s2{9};
  EXPECT_EQ(sample_root_vector(s, s1).c, sample_root_vector(s, s2).c);
}

TEST(RootVector, MeanWeightOfTheWalkModel) {
  ModelSpec s;
  s.c = law::ExpDiffExp{2.0, 1.0};
  const MomentBatch batch(s, 100000, 17);
  const Estimate mean_c = batch.m(1.0);
  EXPECT_LT(std::abs(mean_c.value - 1.0), 3.0 * mean_c.se);
}

TEST(RootVector, JointTableFrequencies) {
  ModelSpec s;
  s.joint = JointTable{{{0.2, {}, std::nullopt}, {0.5, {1.0}, std::nullopt}, {0.3, {0.25, 0.75}, std::nullopt}}};
  std::map<std::uint32_t, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const RootVectorSample v = sample_root_vector(s, NodeKey::root(1, static_cast<std::uint64_t>(i)));
    ++counts[v.n];
    if (v.n == 2) ASSERT_EQ(v.c, (std::vector<double>{0.25, 0.75}));
  }
  for (auto [k, p] : std::map<std::uint32_t, double>{{0, 0.2}, {1, 0.5}, {2, 0.3}}) {
    const double se = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(counts[k] / double(n), p, 3.0 * se) << k;
  }
}

TEST(RootVector, CustomSamplerIsUsed) {
  ModelSpec s;
  s.custom = [](CounterStream& st) {
    RootVectorSample v;
    v.q = st.uniform();
    v.n = 3;
    v.c = {0.1, 0.2, 0.3};
    return v;
  };
  const RootVectorSample v = sample_root_vector(s, NodeKey::root(1, 1));
  EXPECT_EQ(v.n, 3u);
  EXPECT_GE(v.q, 0.0);
  EXPECT_LT(v.q, 1.0);
}

TEST(Moments, ConstantModel) {
  const ModelSpec s = constant_model(1.0, 2, 0.5);
  EXPECT_EQ(moment_m(s, 1.0, 1000).value, 1.0);
  EXPECT_TRUE(moment_m(s, 1.0, 1000).closed_form);
  EXPECT_NEAR(moment_mlog(s, 1.0, 1000).value, -std::log(2.0), 1e-15);
}

TEST(Moments, LognormalClosedForm) {
  const ModelSpec s = lognormal_binary();
  for (double theta : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    EXPECT_NEAR(moment_m(s, theta, 1000).value, oracle::lognormal_m(theta, -1.0, 0.5, 2.0), 1e-12);
  }
  EXPECT_DOUBLE_EQ(moment_m(s, 0.0, 1000).value, 2.0);
  const double alpha = 2.0 + 2.0 * std::sqrt(1.0 - std::log(2.0));
  EXPECT_NEAR(moment_m(s, alpha, 1000).value, 1.0, 1e-9);
}

TEST(Moments, WalkModelDerivative) {
  ModelSpec s;
  s.c = law::ExpDiffExp{2.0, 1.0};
  EXPECT_NEAR(moment_mlog(s, 1.0, 1000).value, 0.5, 1e-12);
}

TEST(Moments, MonteCarloAgreesWithClosedForm) {
  for (const ModelSpec& s : {lognormal_binary(), [] {
         ModelSpec m;
         m.n = law::Poisson{1.5};
         m.c = law::Uniform{0.0, 1.2};
         m.q = law::Exponential{1.0};
         return m;
       }()}) {
    const MomentBatch batch(s, 200000, 4);
    for (double theta : {0.5, 1.0, 2.0}) {
      const Estimate closed = moment_m(s, theta, 0);
      ASSERT_TRUE(closed.closed_form);
      const Estimate mc = batch.m(theta);
      EXPECT_LE(std::abs(mc.value - closed.value), 3.0 * mc.se) << theta;
      const Estimate closed_log = moment_mlog(s, theta, 0);
      const Estimate mc_log = batch.mlog(theta);
      EXPECT_LE(std::abs(mc_log.value - closed_log.value), 3.0 * mc_log.se) << theta;
    }
  }
}

TEST(Moments, QMoments) {
  ModelSpec s;
  s.q = law::TwoPoint{-1.0, 2.0, 0.3};
  EXPECT_NEAR(moment_q_abs(s, 1.0, 0).value, 0.3 + 1.4, 1e-15);
  EXPECT_NEAR(moment_q_pos(s, 2.0, 0).value, 0.7 * 4.0, 1e-15);
}

TEST(Moments, CommonRandomNumbersMakeMSmooth) {
  ModelSpec s;
  s.custom = [](CounterStream& st) {
    RootVectorSample v;
    v.q = 1.0;
    v.n = 2;
    v.c = {st.uniform(), st.uniform()};
    return v;
  };
  const MomentBatch batch(s, 5000, 2);
  // m is convex in theta on every fixed batch.
  double prev = batch.m(0.5).value, cur = batch.m(1.0).value;
  for (double theta = 1.5; theta <= 4.0; theta += 0.5) {
    const double next = batch.m(theta).value;
    EXPECT_LE(cur, 0.5 * (prev + next) + 1e-12);
    prev = cur;
    cur = next;
  }
}
