#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treemax/model.hpp"
#include "treemax/roots.hpp"

namespace treemax {

struct CcdfPoint {
  double t = 0.0;
  double p = 0.0;   // fraction of samples > t
  double se = 0.0;  // binomial standard error
};

/// Throws EmptyGrid when the grid or the sample is empty.
std::vector<CcdfPoint> empirical_ccdf(std::span<const double> samples, const std::vector<double>& t_grid);

/// n points spaced evenly in log between lo and hi (both > 0).
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Empirical p-quantile (type 7, linear interpolation) of a sorted sample.
double sorted_quantile(std::span<const double> sorted, double p);

struct TailDiagnosticRow {
  double t = 0.0;
  double scaled = 0.0;  // P(R > t) t^alpha
  double se = 0.0;
};

/// The (t, P(R > t) t^alpha) table, flat at H in the power-law regime.
std::vector<TailDiagnosticRow> tail_diagnostic(std::span<const double> samples, double alpha,
                                               const std::vector<double>& t_grid);

enum class TailMethod { hill, ccdf_fit, expectation_form, integral_form, linear_expectation };
std::string to_string(TailMethod m);

struct TailEstimate {
  std::optional<double> alpha_hat;
  std::optional<double> h_hat;
  double se = 0.0;
  Interval ci;  // 95%
  TailMethod method = TailMethod::hill;
  std::size_t n_used = 0;
};

/// alpha_hat = 1 / mean of log(X_(i) / X_(k+1)) over the top k order
/// statistics, with CI alpha_hat (1 +- 1.96 / sqrt k). Throws DegenerateTail
/// when the top k+1 samples coincide.
TailEstimate hill_estimator(std::span<const double> samples, std::size_t k);

struct HExpectationOptions {
  std::size_t n_outer = 1000000;
  std::uint64_t seed = 1;
  /// Disjoint groups of the R sample used for the batch-means standard error.
  std::size_t groups = 20;
};

/// H from E[(Q^+)^a v max_i (C_i R_i^+)^a - sum_i (C_i R_i^+)^a] / (a mu), with
/// a fresh root vector per outer draw and R_i resampled from r_samples.
/// Throws NegativeBeyondCI when the estimate is below -3 s.e.
TailEstimate estimate_H_expectation(const ModelSpec& spec, double alpha, double mu_alpha,
                                    std::span<const double> r_samples,
                                    const HExpectationOptions& options = {});

struct IntegrandPoint {
  double v = 0.0;
  double value = 0.0;  // v^(a-1) (P(R > v) - E sum 1(C_i R > v)) / mu
  double se = 0.0;
};

struct HIntegralOptions {
  /// Upper limit of the integral; default is the 1 - 1/sqrt(n) quantile of the
  /// n positive samples, clamped to [0.9, 0.999].
  std::optional<double> v_max;
  /// Number of root vectors in the independent weight batch.
  std::size_t n_weights = 100000;
  std::size_t grid_points = 60;
  std::uint64_t seed = 1;
  /// Explicit points for the integrand table; empty means a log grid over
  /// the 1st to 99.99th percentile of the positive samples.
  std::vector<double> v_grid;
};

struct HIntegralResult {
  TailEstimate estimate;
  double v_max = 0.0;
  std::vector<IntegrandPoint> integrand;
  /// Set when the integrand CI straddles 0 over more than half the grid mass.
  bool cancellation_warning = false;
  double straddle_fraction = 0.0;
};

/// H from (1/mu) int_0^v_max v^(a-1) (P(R > v) - E sum 1(C_i R > v)) dv. The
/// integral is evaluated exactly over the empirical law of r_samples and an
/// independent batch of weight vectors (the same R draws feed both terms).
HIntegralResult estimate_H_integral(const ModelSpec& spec, double alpha, double mu_alpha,
                                    std::span<const double> r_samples,
                                    const HIntegralOptions& options = {});

/// E[sum |C_i|^theta log |C_i|], the derivative constant of the linear case.
Estimate moment_abs_mlog(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed = 1);

/// K = E[|sum C_i R_i + Q|^a - sum |C_i R_i|^a] / (a E[sum |C_i|^a log |C_i|]).
TailEstimate estimate_K_linear(const ModelSpec& spec, double alpha, double mu_alpha_abs,
                               std::span<const double> rl_samples,
                               const HExpectationOptions& options = {});

struct NegativeTailRow {
  double t = 0.0;
  double p = 0.0;       // P(R < -t)
  double se = 0.0;
  double scaled = 0.0;  // P(R < -t) t^alpha
  std::optional<double> envelope;  // P(Q < -t) t^alpha when the law of Q gives it
  bool within_envelope = true;
};

struct NegativeTailReport {
  std::vector<NegativeTailRow> rows;
  bool within_envelope = true;
};

/// Rows of P(R < -t) t^alpha, expected to decay to 0. When `spec` is given and
/// the law of Q has a closed-form CDF, adds the envelope P(Q < -t) t^alpha
/// (checked to 3 s.e.).
NegativeTailReport negative_tail_check(std::span<const double> samples, double alpha,
                                       const std::vector<double>& t_grid,
                                       const ModelSpec* spec = nullptr);

/// Kolmogorov-Smirnov distance between two samples.
double ks_distance(std::span<const double> a, std::span<const double> b);

}  // namespace treemax
