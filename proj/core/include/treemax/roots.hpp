#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "treemax/model.hpp"

namespace treemax {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// theta -> E[sum C_i^theta] and E[sum C_i^theta log C_i]. Uses the closed
/// form when the model has one; otherwise one cached batch of root vectors
/// shared by every theta.
class MomentFunction {
 public:
  MomentFunction(const ModelSpec& spec, std::size_t n_mc, std::uint64_t seed);

  Estimate m(double theta) const;
  Estimate mlog(double theta) const;
  bool closed_form() const { return !batch_; }

 private:
  MomentOracle oracle_;
  std::shared_ptr<const MomentBatch> batch_;
};

enum class RootMethod { closed_form, monte_carlo };
std::string to_string(RootMethod m);

struct RootSolveResult {
  double alpha = 0.0;
  double mu_alpha = 0.0;     // E[sum C_i^alpha log C_i]
  double mu_alpha_se = 0.0;  // 0 for closed forms
  double residual = 0.0;     // |m(alpha) - 1|
  RootMethod method = RootMethod::closed_form;
  std::optional<Interval> ci;  // Monte Carlo only (delta method, 95%)
};

struct RootSolveOptions {
  Interval bracket{1e-3, 50.0};
  double tol = 1e-12;
  std::size_t grid_points = 400;
  /// Smallest derivative accepted as a strict increasing crossing.
  double mu_tol = 1e-10;
  std::size_t n_mc = 100000;
  std::uint64_t seed = 1;
};

/// Root of m(alpha) = 1 at the increasing crossing (the larger root when m
/// crosses 1 twice). Throws NoIncreasingRoot or, for Monte Carlo moments,
/// AmbiguousRoot.
RootSolveResult solve_alpha(const ModelSpec& spec, const RootSolveOptions& options = {});

struct ContractionProfile {
  double beta = 0.0;
  double rho_beta = 0.0;  // E[sum C_i^beta]
  double rho_se = 0.0;
  double q_beta = 0.0;    // E[|Q|^beta]
  double q_beta_se = 0.0;
  bool q_finite = true;   // stability diagnostic for q_beta passed
  bool usable = false;    // rho_beta < 1 (by 3 s.e. under Monte Carlo) and q_finite
};

ContractionProfile compute_rho(const ModelSpec& spec, double beta, std::size_t n_mc = 100000,
                               std::uint64_t seed = 1);

enum class ConditionStatus { pass, bounded, unstable, fail };
std::string to_string(ConditionStatus s);

struct ConditionItem {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  ConditionStatus status = ConditionStatus::pass;
  std::string detail;
};

struct ConditionReport {
  bool alpha_above_one = false;
  std::vector<ConditionItem> items;
  /// The applicable moment condition passed (diagnostically) for some entry.
  bool moment_condition_ok = false;
};

/// Report-only check of the moment hypotheses at alpha: E[(sum C_i)^alpha]
/// when alpha > 1, otherwise E[(sum C_i^{alpha/(1+eps)})^{1+eps}] for each
/// eps in the grid; plus E[(Q^+)^alpha] and E[|Q|^alpha].
ConditionReport check_conditions(const ModelSpec& spec, double alpha,
                                 const std::vector<double>& eps_grid = {0.1, 0.25, 0.5, 0.75},
                                 std::size_t n_mc = 100000, std::uint64_t seed = 1);

/// A beta in (alpha/2, alpha) with rho_beta < 1 and E[(sum C_i^beta)^{alpha/beta}]
/// finite (diagnostic). Grid starts at 3 alpha / 4 and moves down, then up.
/// Throws NoContractiveBeta when the grid is exhausted.
ContractionProfile select_beta(const ModelSpec& spec, double alpha, std::size_t n_mc = 100000,
                               std::uint64_t seed = 1);

/// E[(sum_i C_i^a)^b] with its diagnostic status. Closed or deterministic
/// when the model allows it.
ConditionItem power_sum_moment(const ModelSpec& spec, double a, double b, std::size_t n_mc,
                               std::uint64_t seed, const std::string& name);

}  // namespace treemax
