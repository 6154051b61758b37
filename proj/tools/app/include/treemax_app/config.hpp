#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "treemax/model.hpp"
#include "treemax/roots.hpp"
#include "treemax/simulate.hpp"

namespace treemax::app {

struct GridSpec {
  double lo = 1.0;
  double hi = 100.0;
  std::size_t points = 30;
};

struct RunSection {
  std::uint64_t seed = 0;
  std::size_t replicas = 10000;
  std::optional<std::uint32_t> depth;
  std::optional<double> target_trunc_error;
  double trunc_epsilon = 1.0;
  unsigned parallelism = 1;
  Functional mode = Functional::max;
  std::optional<RealLaw> terminal;
  bool prune_zero = false;
};

struct SymmetrySection {
  std::uint32_t depth = 12;
  std::size_t replicas = 100000;
  GridSpec t_grid{0.05, 2.0, 20};
};

struct EstimateSection {
  Interval bracket{1e-3, 50.0};
  double tol = 1e-12;
  std::size_t n_mc = 100000;
  std::optional<std::size_t> hill_k;
  /// Subset of: hill, ccdf, expectation, integral, negative_tail, linear_k.
  std::optional<std::vector<std::string>> estimators;
  std::size_t n_outer = 1000000;
  std::size_t n_weights = 100000;
  std::optional<double> v_max;
  std::optional<GridSpec> ccdf_grid;
  bool certificate = false;
  std::optional<SymmetrySection> symmetry;
};

struct OutputSection {
  std::string directory = "results";
};

struct ExperimentConfig {
  ModelSpec model;
  RunSection run;
  EstimateSection estimate;
  OutputSection output;
};

/// Parses the YAML experiment config. Every failure, including unknown keys,
/// is a ConfigError whose message carries the line number.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace treemax::app
