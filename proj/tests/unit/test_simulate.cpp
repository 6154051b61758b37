#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "treemax/simulate.hpp"

using namespace treemax;

namespace {

ModelSpec constant_model(double q, std::uint32_t n, double c) {
  ModelSpec s;
  s.q = law::Constant{q};
  s.n = law::CountConstant{n};
  s.c = law::Constant{c};
  return s;
}

ModelSpec walk_model() {
  ModelSpec s;
  s.c = law::ExpDiffExp{2.0, 1.0};
  return s;
}

ModelSpec random_tree() {
  ModelSpec s;
  s.q = law::Exponential{1.0};
  s.n = law::Poisson{1.6};
  s.c = law::Uniform{0.0, 1.0};
  return s;
}

TraversalConfig cfg(std::uint32_t depth, Functional mode) {
  TraversalConfig c;
  c.depth = depth;
  c.mode = mode;
  return c;
}

}  // namespace

TEST(Functional, MaxOfConstantBinaryTreeIsTheRoot) {
  const ModelSpec s = constant_model(1.0, 2, 0.5);
  for (std::uint32_t n : {0u, 1u, 5u, 12u}) {
    EXPECT_EQ(sample_functional(s, cfg(n, Functional::max), NodeKey::root(1, 0)).value, 1.0);
  }
}

TEST(Functional, LinearOfConstantBinaryTreeCountsGenerations) {
  const ModelSpec s = constant_model(1.0, 2, 0.5);
  for (std::uint32_t n : {0u, 1u, 5u, 12u}) {
    EXPECT_DOUBLE_EQ(sample_functional(s, cfg(n, Functional::linear), NodeKey::root(1, 0)).value, n + 1.0);
  }
}

TEST(Functional, SinglePathGrows) {
  const ModelSpec s = constant_model(1.0, 1, 2.0);
  for (std::uint32_t n : {0u, 3u, 10u, 40u}) {
    EXPECT_EQ(sample_functional(s, cfg(n, Functional::max), NodeKey::root(1, 0)).value, std::ldexp(1.0, n));
  }
}

TEST(Functional, MaxSwitchesToLogDomainOnOverflow) {
  const ModelSpec s = constant_model(1.0, 1, 2.0);
  const FunctionalValue v = sample_functional(s, cfg(2000, Functional::max), NodeKey::root(1, 0));
  ASSERT_TRUE(v.log_value.has_value());
  EXPECT_NEAR(*v.log_value, 2000.0 * std::log(2.0), 1e-9);
  const SampleSet set = run_replicas(s, cfg(2000, Functional::max), 3, 1);
  EXPECT_TRUE(set.log_domain);
  for (double x : set.values) EXPECT_NEAR(x, 2000.0 * std::log(2.0), 1e-9);
}

TEST(Functional, LinearOverflowIsAnError) {
  const ModelSpec s = constant_model(1.0, 1, 2.0);
  try {
    sample_functional(s, cfg(2000, Functional::linear), NodeKey::root(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Overflow);
  }
}

TEST(Functional, AdditiveIsLogOfMax) {
  ModelSpec s = walk_model();
  s.q = law::Uniform{0.5, 2.0};
  for (std::uint64_t i = 0; i < 50; ++i) {
    const double r = sample_functional(s, cfg(30, Functional::max), NodeKey::root(4, i)).value;
    const double x = sample_functional(s, cfg(30, Functional::additive_max), NodeKey::root(4, i)).value;
    EXPECT_NEAR(x, std::log(r), 1e-12);
  }
}

TEST(Functional, AdditiveNeedsPositiveQ) {
  ModelSpec s = walk_model();
  s.q = law::Uniform{-0.5, 2.0};
  EXPECT_THROW(sample_functional(s, cfg(3, Functional::additive_max), NodeKey::root(4, 0)), Error);
}

TEST(Functional, CoupledPairMatchesSeparateRuns) {
  const ModelSpec s = random_tree();
  for (std::uint64_t i = 0; i < 100; ++i) {
    const NodeKey root = NodeKey::root(9, i);
    const FunctionalValue both = sample_functional(s, cfg(8, Functional::both_coupled), root);
    EXPECT_EQ(both.value, sample_functional(s, cfg(8, Functional::max), root).value);
    EXPECT_EQ(*both.paired, sample_functional(s, cfg(8, Functional::linear), root).value);
  }
}

TEST(Functional, MaxBelowLinearOnNonnegativeModels) {
  const SampleSet set = run_replicas(random_tree(), cfg(10, Functional::both_coupled), 2000, 5);
  ASSERT_TRUE(set.paired_values.has_value());
  for (std::size_t i = 0; i < set.values.size(); ++i) EXPECT_LE(set.values[i], (*set.paired_values)[i]);
}

TEST(Functional, MaxNondecreasingInDepth) {
  const ModelSpec s = random_tree();
  for (std::uint64_t i = 0; i < 200; ++i) {
    double prev = -INFINITY;
    for (std::uint32_t n = 0; n <= 12; ++n) {
      const double v = sample_functional(s, cfg(n, Functional::max), NodeKey::root(2, i)).value;
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Functional, ChildOrderDoesNotChangeValues) {
  const ModelSpec s = random_tree();
  for (std::uint64_t i = 0; i < 100; ++i) {
    TraversalConfig fwd = cfg(9, Functional::both_coupled), rev = fwd;
    rev.order = ChildOrder::reverse;
    const FunctionalValue a = sample_functional(s, fwd, NodeKey::root(3, i));
    const FunctionalValue b = sample_functional(s, rev, NodeKey::root(3, i));
    EXPECT_EQ(a.value, b.value);
    EXPECT_NEAR(*a.paired, *b.paired, 1e-12 * std::abs(*a.paired));
  }
}

TEST(Functional, PruningZeroWeightsChangesNothing) {
  ModelSpec s = random_tree();
  s.c = law::TwoPoint{0.0, 0.9, 0.5};
  for (std::uint64_t i = 0; i < 100; ++i) {
    TraversalConfig full = cfg(10, Functional::both_coupled), pruned = full;
    pruned.prune_zero = true;
    const FunctionalValue a = sample_functional(s, full, NodeKey::root(3, i));
    const FunctionalValue b = sample_functional(s, pruned, NodeKey::root(3, i));
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(*a.paired, *b.paired);
  }
}

TEST(Iterated, ZeroTerminalIsOneGenerationShorter) {
  const ModelSpec s = random_tree();
  for (std::uint32_t n : {1u, 4u, 9u}) {
    TraversalConfig c = cfg(n, Functional::max);
    c.terminal_law = law::Constant{0.0};
    for (std::uint64_t i = 0; i < 100; ++i) {
      const NodeKey root = NodeKey::root(8, i);
      EXPECT_EQ(sample_iterated(s, c, root), sample_functional(s, cfg(n - 1, Functional::max), root).value);
    }
  }
}

TEST(Iterated, HandEnumeration) {
  TraversalConfig c = cfg(2, Functional::max);
  c.terminal_law = law::Constant{10.0};
  EXPECT_EQ(sample_iterated(constant_model(1.0, 1, 0.5), c, NodeKey::root(1, 0)), 2.5);
}

TEST(Iterated, RunReplicasUsesTheTerminalLaw) {
  TraversalConfig c = cfg(2, Functional::max);
  c.terminal_law = law::Constant{10.0};
  const SampleSet set = run_replicas(constant_model(1.0, 1, 0.5), c, 4, 1);
  EXPECT_TRUE(set.iterated);
  for (double v : set.values) EXPECT_EQ(v, 2.5);
}

TEST(Truncation, Examples) {
  ContractionProfile p;
  p.beta = 0.5;
  p.rho_beta = 0.5;
  p.usable = true;
  EXPECT_NEAR(truncation_bound(p, 1.0, 10, 1.0).bound, std::ldexp(1.0, -10), 1e-18);
  p.rho_beta = 8.0 / 9.0;
  EXPECT_NEAR(truncation_bound(p, 1.0, 40, 1.0).bound, std::pow(8.0 / 9.0, 40), 1e-15);
  EXPECT_NEAR(truncation_bound(p, 1.0, 40, 1.0).bound, 8.993e-3, 1e-6);
  EXPECT_NEAR(truncation_bound(p, 2.0, 40, 0.25).bound, std::pow(0.25, -0.5) * 2.0 * std::pow(8.0 / 9.0, 40), 1e-15);
  EXPECT_EQ(truncation_bound(p, 1.0, 0, 1e-6).bound, 1.0);
}

TEST(Truncation, DepthForTarget) {
  ContractionProfile p;
  p.beta = 0.75;
  p.rho_beta = 32.0 / 35.0;
  p.usable = true;
  const std::uint32_t n = depth_for_target(p, 1.0, 1.0, 1e-3);
  EXPECT_LE(truncation_bound(p, 1.0, n, 1.0).bound, 1e-3);
  EXPECT_GT(truncation_bound(p, 1.0, n - 1, 1.0).bound, 1e-3);
  EXPECT_EQ(n, 78u);
}

TEST(Truncation, UnusableProfile) {
  ContractionProfile p;
  p.beta = 0.5;
  p.rho_beta = std::sqrt(2.0);
  try {
    truncation_bound(p, 1.0, 3, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnusableProfile);
  }
}

TEST(Replicas, IdenticalAcrossParallelism) {
  const ModelSpec s = random_tree();
  for (std::size_t replicas : {4u, 37u}) {
    const SampleSet a = run_replicas(s, cfg(8, Functional::both_coupled), replicas, 11, 1);
    const SampleSet b = run_replicas(s, cfg(8, Functional::both_coupled), replicas, 11, 4);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(*a.paired_values, *b.paired_values);
  }
}

TEST(Replicas, ReplicaValueDependsOnlyOnSeedAndIndex) {
  const ModelSpec s = random_tree();
  const SampleSet a = run_replicas(s, cfg(6, Functional::max), 20, 3);
  const SampleSet b = run_replicas(s, cfg(6, Functional::max), 10, 3);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.values[i], b.values[i]);
  EXPECT_EQ(a.values[7], sample_functional(s, cfg(6, Functional::max), replica_root(3, 7)).value);
}

TEST(Replicas, TruncationBoundAttached) {
  ContractionProfile p;
  p.beta = 0.5;
  p.rho_beta = 8.0 / 9.0;
  p.usable = true;
  const SampleSet set = run_replicas(walk_model(), cfg(40, Functional::max), 5, 1, 1, TruncationInput{p, 1.0, 1.0});
  ASSERT_TRUE(set.trunc_bound.has_value());
  EXPECT_NEAR(set.trunc_bound->bound, std::pow(8.0 / 9.0, 40), 1e-15);
}

TEST(Replicas, WalkModelMatchesExactLaw) {
  // R = 1 v sup of the walk: an atom 0.5 at 1, then P(R > t) = 0.5 / t.
  const std::size_t n = 20000;
  const SampleSet set = run_replicas(walk_model(), cfg(78, Functional::max), n, 2024);
  std::vector<double> above;
  for (double v : set.values) {
    ASSERT_GE(v, 1.0);
    if (v > 1.0) above.push_back(v);
  }
  const double atom = oracle::mm1::cdf(1.0);
  EXPECT_NEAR(1.0 - double(above.size()) / n, atom, 3.0 * std::sqrt(atom * (1 - atom) / n));
  const double d = oracle::ks_continuous(above, [&](double t) { return (oracle::mm1::cdf(t) - atom) / (1 - atom); });
  // 1.63 / sqrt(n) is the 1% Kolmogorov quantile.
  EXPECT_LT(d, 1.63 / std::sqrt(double(above.size())));
}

TEST(Census, GenerationSizesOfBinaryTree) {
  const TreeCensus c = census(constant_model(1.0, 2, 0.5), 10, NodeKey::root(1, 0));
  ASSERT_EQ(c.generation_sizes.size(), 11u);
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_EQ(c.generation_sizes[k], std::uint64_t{1} << k);
  EXPECT_EQ(c.node_visits, (std::uint64_t{1} << 11) - 1);
  EXPECT_LE(c.peak_stack, 11u);
}

TEST(Census, GenerationRecursionHolds) {
  ModelSpec s = random_tree();
  for (std::uint64_t i = 0; i < 50; ++i) {
    const TreeCensus c = census(s, 12, NodeKey::root(6, i));
    std::uint64_t total = 0;
    for (std::size_t k = 1; k < c.generation_sizes.size(); ++k) {
      EXPECT_EQ(c.generation_sizes[k], c.offspring_of_parents[k]);
    }
    for (auto z : c.generation_sizes) total += z;
    EXPECT_EQ(total, c.node_visits);
    const TreeCensus r = census(s, 12, NodeKey::root(6, i), ChildOrder::reverse);
    EXPECT_EQ(r.generation_sizes, c.generation_sizes);
  }
}

TEST(Census, MeanGenerationSizeIsGeometric) {
  const ModelSpec s = random_tree();
  const std::size_t reps = 4000;
  double z5 = 0.0, sq = 0.0;
  for (std::uint64_t i = 0; i < reps; ++i) {
    const double z = static_cast<double>(census(s, 5, NodeKey::root(12, i)).generation_sizes[5]);
    z5 += z;
    sq += z * z;
  }
  const double mean = z5 / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  EXPECT_NEAR(mean, std::pow(1.6, 5), 3.0 * se);
}

TEST(Functional, NamesRoundTrip) {
  for (Functional f : {Functional::max, Functional::linear, Functional::both_coupled, Functional::additive_max}) {
    EXPECT_EQ(functional_from_string(to_string(f)), f);
  }
  EXPECT_THROW(functional_from_string("nope"), Error);
}
