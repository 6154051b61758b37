#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treemax/model.hpp"

namespace treemax {

/// A root vector together with a second label Q' drawn from the conditional
/// law of Q given (N, C), conditionally independent of Q.
struct ResampledVector {
  double q = 0.0;
  double q_hat = 0.0;
  std::uint32_t n = 0;
  std::vector<double> c;
};

/// Throws UnsupportedDependence for custom samplers, which expose no
/// conditional law.
ResampledVector conditional_resample(const ModelSpec& spec, NodeKey key);
ResampledVector conditional_resample(const ModelSpec& spec, CounterStream& stream);

struct SymmetrizedModel {
  ModelSpec base;
  /// Same tree law with Q replaced by (Q - Q')/2.
  ModelSpec spec;
};

/// Throws DegenerateSymmetrization when Q is a deterministic function of
/// (N, C), so that (Q - Q')/2 = 0.
SymmetrizedModel symmetrize_model(const ModelSpec& spec);

struct LevyRow {
  double t = 0.0;
  double p_linear = 0.0;  // P(|R_L| > t)
  double p_max = 0.0;     // P(max |Pi Q| > t)
  double margin = 0.0;    // p_linear - p_max / 2
  double se = 0.0;        // of the paired margin
  bool violated = false;  // margin < -3 se
};

struct LevyReport {
  std::vector<LevyRow> rows;
  std::size_t violations = 0;
  std::uint32_t depth = 0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double band = 3.0;
};

struct CheckOptions {
  std::uint32_t depth = 12;
  std::size_t replicas = 100000;
  std::uint64_t seed = 1;
  unsigned parallelism = 1;
};

/// Compares P(|R_L^(n)| > t) with P(max_i |Pi_i Q_i| > t) / 2 on the same
/// trees. The ModelSpec overload accepts any model (negative controls).
LevyReport check_levy_inequality(const SymmetrizedModel& sym, const std::vector<double>& t_grid,
                                 const CheckOptions& options = {});
LevyReport check_levy_inequality(const ModelSpec& spec, const std::vector<double>& t_grid,
                                 const CheckOptions& options = {});

struct SandwichRow {
  double t = 0.0;
  double p_symmetric = 0.0;  // P(|R_bar| > t)
  double p_linear = 0.0;     // P(|R_L| > t)
  double margin = 0.0;       // 2 p_linear - p_symmetric
  double se = 0.0;
  bool checked = false;      // t > 0 and both tails below 1/2
  bool violated = false;
};

struct SandwichReport {
  bool skipped = false;
  std::string note;
  std::vector<SandwichRow> rows;
  std::size_t violations = 0;
  /// Replicas where |R_bar| > (|R_L| + |R_hat|)/2 beyond rounding.
  std::size_t pathwise_violations = 0;
  std::uint32_t depth = 0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double band = 3.0;
};

/// P(|R_bar| > t) <= 2 P(|R_L| > t) with R_bar built from (Q - Q')/2 on the same
/// trees as R_L. A degenerate model yields a skipped report with a note.
SandwichReport check_sandwich(const ModelSpec& spec, const std::vector<double>& t_grid,
                              const CheckOptions& options = {});

}  // namespace treemax
