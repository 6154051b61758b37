#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treemax/model.hpp"
#include "treemax/roots.hpp"

namespace treemax {

/// K = (1/beta) int_0^inf (e^-u - 1 + u) u^(-alpha/beta - 1) du, finite for
/// alpha/2 < beta < alpha.
double minorant_k_constant(double alpha, double beta);

/// E[D^beta] for D with density (alpha/2) x^(alpha-1) on [0, 2^(1/alpha)],
/// by quadrature.
double minorant_d_moment(double alpha, double beta);

/// Closed form alpha 2^(beta/alpha) / (alpha + beta) of the same moment.
double minorant_d_moment_closed(double alpha, double beta);

struct CertificateOptions {
  std::size_t n_mc = 200000;
  std::uint64_t seed = 1;
  std::uint32_t r_max = 100000;
  /// Quantile levels searched for q, ascending.
  std::size_t quantile_steps = 1000;
};

struct PositivityCertificate {
  double alpha = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double rho_beta = 0.0;
  double q = 0.0;
  std::uint32_t r = 0;
  double k_const = 0.0;
  double d_beta_moment = 0.0;
  double d_beta_moment_closed = 0.0;
  double q_pos_alpha = 0.0;      // E[(Q^+)^alpha]
  double q_pos_alpha_se = 0.0;
  double q_pos_beta = 0.0;       // E[(Q^+)^beta]
  double q_tail = 0.0;           // E[(Q^+)^alpha 1(Q^+ > q)]
  double weight_power_sum = 0.0; // E[(sum C_i^beta)^(alpha/beta)] or its bound
  /// Values of the two r conditions at the chosen r (each must be below
  /// delta/6 and delta/2 respectively).
  double condition_a = 0.0;
  double condition_b = 0.0;
  std::uint32_t r_a = 0;  // smallest r meeting condition a alone
  std::uint32_t r_b = 0;  // smallest r meeting condition b alone
  std::string binding;    // "a" or "b"
  /// Certified lower bound E[(Q^+)^alpha] - delta on the H numerator of the
  /// minorizing tree.
  double lower_bound = 0.0;
  /// Lower bound on H itself: lower_bound 2^-r / (alpha mu_alpha).
  double h_lower_bound = 0.0;
};

/// Constants of the minorizing construction for H > 0. Throws
/// CertificateFailed when E[(Q^+)^alpha] is not positive beyond 3 s.e., when a
/// plug-in moment diagnostic fails, or when no r <= r_max satisfies both
/// conditions.
PositivityCertificate certify_H_positive(const ModelSpec& spec, double alpha, double mu_alpha,
                                         const ContractionProfile& profile,
                                         const CertificateOptions& options = {});

}  // namespace treemax
