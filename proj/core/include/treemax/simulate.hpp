#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treemax/model.hpp"
#include "treemax/roots.hpp"
#include "treemax/traversal.hpp"

namespace treemax {

/// Functional computed over generations 0..depth of one tree.
///   max          R^(n)  = max over nodes of Q * Pi
///   linear       R_L^(n) = sum over nodes of Q * Pi
///   both_coupled (R^(n), R_L^(n)) on the same tree
///   additive_max X^(n) = log R^(n), requires Q > 0
enum class Functional { max, linear, both_coupled, additive_max };
std::string to_string(Functional f);
Functional functional_from_string(const std::string& s);

struct TraversalConfig {
  std::uint32_t depth = 0;
  Functional mode = Functional::max;
  /// Law of the leaf values R_0^*. When set, generation `depth` contributes
  /// R_0^* * Pi instead of Q * Pi (max mode only).
  std::optional<RealLaw> terminal_law;
  bool prune_zero = false;
  ChildOrder order = ChildOrder::forward;
};

struct FunctionalValue {
  double value = 0.0;
  std::optional<double> paired;  // linear value in both_coupled mode
  /// Max mode only: log of the largest positive term (-inf if none). Used when
  /// the linear-domain value overflows.
  std::optional<double> log_value;
};

/// Root key of one replica.
inline NodeKey replica_root(std::uint64_t seed, std::uint64_t replica) {
  return NodeKey::root(seed, replica);
}

/// One realization of the functional selected by cfg.mode. Throws Overflow when
/// a linear sum saturates.
FunctionalValue sample_functional(const ModelSpec& spec, const TraversalConfig& cfg, NodeKey root);

/// One realization of R_n^* = R^(n-1) v V_n(R_0^*), n = cfg.depth >= 1.
double sample_iterated(const ModelSpec& spec, const TraversalConfig& cfg, NodeKey root);

struct TruncationBound {
  double beta = 0.0;
  double rho_beta = 0.0;
  double moment = 0.0;  // E[|R_0^*|^beta] or E[|Q|^beta]
  double epsilon = 1.0;
  std::uint32_t depth = 0;
  double bound = 0.0;   // eps^-beta rho^depth moment, capped at 1
};

/// P(|V_n| > eps) <= eps^-beta rho_beta^n E[|R_0^*|^beta]. Throws UnusableProfile
/// when rho_beta >= 1.
TruncationBound truncation_bound(const ContractionProfile& profile, double moment,
                                 std::uint32_t depth, double epsilon);

/// Smallest depth whose bound is <= target.
std::uint32_t depth_for_target(const ContractionProfile& profile, double moment, double epsilon,
                               double target, std::uint32_t max_depth = 100000);

struct TruncationInput {
  ContractionProfile profile;
  double moment = 1.0;
  double epsilon = 1.0;
};

struct SampleSet {
  std::vector<double> values;
  std::optional<std::vector<double>> paired_values;
  std::uint64_t seed = 0;
  std::uint32_t depth = 0;
  std::size_t replica_count = 0;
  Functional mode = Functional::max;
  bool iterated = false;
  /// Values are log R^(n) because some replica overflowed in linear domain.
  bool log_domain = false;
  std::optional<TruncationBound> trunc_bound;
};

/// Replicas 0..replicas-1 of the configured functional (or of R_n^* when the
/// config has a terminal law). Bit-identical for any parallelism.
SampleSet run_replicas(const ModelSpec& spec, const TraversalConfig& cfg, std::size_t replicas,
                       std::uint64_t seed, unsigned parallelism = 1,
                       const std::optional<TruncationInput>& trunc = std::nullopt);

/// Diagnostic counts of one tree: Z_k per generation and sum of N over
/// generation k-1, which must match exactly.
struct TreeCensus {
  std::vector<std::uint64_t> generation_sizes;    // Z_0..Z_depth
  std::vector<std::uint64_t> offspring_of_parents;  // [k] = sum of N over generation k-1
  std::uint64_t node_visits = 0;
  std::size_t peak_stack = 0;
};

TreeCensus census(const ModelSpec& spec, std::uint32_t depth, NodeKey root,
                  ChildOrder order = ChildOrder::forward);

}  // namespace treemax
