#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "treemax/error.hpp"
#include "treemax/laws.hpp"
#include "treemax/rng.hpp"

using namespace treemax;

namespace {

struct MeanSe {
  double mean;
  double se;
};

template <class F>
MeanSe mc_mean(std::size_t n, std::uint64_t seed, F&& draw) {
  CounterStream s = aux_stream(seed, 99);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw(s);
    sum += x;
    sq += x * x;
  }
  const double m = sum / static_cast<double>(n);
  const double var = (sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
  return {m, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

TEST(Rng, ChildKeysDependOnlyOnParentAndIndex) {
  const NodeKey root = NodeKey::root(42, 3);
  EXPECT_EQ(root.child(1).child(0), NodeKey::root(42, 3).child(1).child(0));
  EXPECT_NE(root.child(0), root.child(1));
  EXPECT_NE(NodeKey::root(42, 3), NodeKey::root(42, 4));
  EXPECT_NE(NodeKey::root(42, 3), NodeKey::root(43, 3));
  EXPECT_NE(root.lane_key(Lane::q), root.lane_key(Lane::q_hat));
}

TEST(Rng, StreamIsAPureFunctionOfKeyAndCounter) {
  CounterStream a{123}, b{123};
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  CounterStream c{123, 5};
  CounterStream d{123};
  for (int i = 0; i < 5; ++i) d.next_u64();
  EXPECT_EQ(c.next_u64(), d.next_u64());
}

TEST(Rng, UniformsStayInRangeAndLookUniform) {
  CounterStream s{7};
  std::size_t below_half = 0;
  const std::size_t n = 200000;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = s.uniform();
    const double v = s.uniform_open();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    below_half += u < 0.5;
  }
  EXPECT_NEAR(static_cast<double>(below_half) / n, 0.5, 3.0 * 0.5 / std::sqrt(double(n)));
}

TEST(Rng, AuxStreamsAreDisjointByTag) {
  std::set<std::uint64_t> first;
  for (std::uint64_t tag = 0; tag < 100; ++tag) first.insert(aux_stream(1, tag).next_u64());
  EXPECT_EQ(first.size(), 100u);
}

TEST(Laws, ExpDiffExpMeanIsOne) {
  const RealLaw c = law::ExpDiffExp{2.0, 1.0};
  const MeanSe est = mc_mean(100000, 1, [&](CounterStream& s) { return sample(c, s); });
  EXPECT_LT(std::abs(est.mean - 1.0), 3.0 * est.se);
  EXPECT_NEAR(*power_moment(c, 1.0), 1.0, 1e-15);
}

TEST(Laws, ClosedFormMomentsMatchMonteCarlo) {
  const std::vector<std::pair<RealLaw, double>> cases = {
      {law::Uniform{0.0, 2.0}, 1.5},        {law::Exponential{1.5}, 0.7},
      {law::LogNormal{-1.0, 0.7}, 2.0},     {law::Pareto{1.0, 4.0}, 1.5},
      {law::TwoPoint{0.5, 2.0, 0.3}, 1.3},  {law::Table{{0.25, 1.0, 3.0}, {0.2, 0.5, 0.3}}, 0.8},
      {law::ExpDiffExp{2.0, 1.0}, 0.5},     {law::Constant{1.7}, 2.5},
  };
  for (const auto& [l, theta] : cases) {
    const auto closed = power_moment(l, theta);
    ASSERT_TRUE(closed.has_value()) << family_name(l);
    const MeanSe est = mc_mean(200000, 3, [&](CounterStream& s) { return std::pow(sample(l, s), theta); });
    EXPECT_LE(std::abs(est.mean - *closed), 3.0 * est.se + 1e-12) << family_name(l);
  }
}

TEST(Laws, ExpDiffExpMomentsMatchTheWalkOracle) {
  const RealLaw c = law::ExpDiffExp{2.0, 1.0};
  for (double theta : {0.25, 0.5, 1.0, 1.5}) {
    EXPECT_NEAR(*power_moment(c, theta), oracle::mm1::m(theta), 1e-12);
    EXPECT_NEAR(*power_log_moment(c, theta), oracle::mm1::mlog(theta), 1e-12);
  }
  EXPECT_TRUE(std::isinf(*power_moment(c, 2.5)));
}

TEST(Laws, NormalMeanAndSupport) {
  const RealLaw q = law::Normal{0.3, 2.0};
  const MeanSe est = mc_mean(100000, 5, [&](CounterStream& s) { return sample(q, s); });
  EXPECT_LT(std::abs(est.mean - 0.3), 3.0 * est.se);
  EXPECT_TRUE(std::isinf(support(q).lo));
  EXPECT_FALSE(power_moment(q, 1.0).has_value());
}

TEST(Laws, TwoPointCdfAndPositivePart) {
  const RealLaw q = law::TwoPoint{-1.0, 1.0, 0.5};
  EXPECT_DOUBLE_EQ(*cdf(q, -1.0), 0.5);
  EXPECT_DOUBLE_EQ(*prob_less(q, -1.0), 0.0);
  EXPECT_DOUBLE_EQ(*prob_less(q, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(*positive_part_moment(q, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(*abs_moment(q, 3.0), 1.0);
}

TEST(Laws, CountLaws) {
  const CountLaw p = law::Poisson{2.5};
  const MeanSe est = mc_mean(100000, 9, [&](CounterStream& s) { return static_cast<double>(sample(p, s)); });
  EXPECT_LT(std::abs(est.mean - 2.5), 3.0 * est.se);
  EXPECT_FALSE(max_value(p).has_value());
  EXPECT_EQ(*max_value(CountLaw{law::CountTwoPoint{0, 2, 0.6}}), 2u);
  EXPECT_TRUE(always_zero(CountLaw{law::CountConstant{0}}));
  EXPECT_DOUBLE_EQ(mean(CountLaw{law::CountTable{{0, 2}, {0.6, 0.4}}}), 0.8);
}

TEST(Laws, ParameterChecks) {
  EXPECT_THROW(check_parameters(RealLaw{law::Uniform{1.0, 0.0}}), Error);
  EXPECT_THROW(check_parameters(RealLaw{law::Exponential{-1.0}}), Error);
  EXPECT_THROW(check_parameters(RealLaw{law::Table{{1.0, 2.0}, {0.5, 0.6}}}), Error);
  EXPECT_THROW(check_parameters(CountLaw{law::Poisson{-0.5}}), Error);
  EXPECT_NO_THROW(check_parameters(RealLaw{law::LogNormal{-1.0, std::sqrt(0.5)}}));
}

TEST(Laws, SamplingIsDeterministicGivenStreamState) {
  const RealLaw l = law::LogNormal{0.0, 1.0};
  CounterStream a{77}, b{77};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample(l, a), sample(l, b));
}
