#include "treemax/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "treemax/tails.hpp"

namespace treemax {

namespace {

// (e^-u - 1 + u) / u^2 without cancellation for small u.
double exp_remainder_ratio(double u) {
  if (u < 0.1) {
    double term = 0.5, sum = 0.0;
    for (int k = 3; k < 14; ++k) {
      sum += term;
      term *= -u / k;
    }
    return sum;
  }
  return (std::expm1(-u) + u) / (u * u);
}

void check_exponents(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > alpha / 2.0) || !(beta < alpha)) {
    throw Error(ErrorCode::InvalidArgument, "need alpha/2 < beta < alpha");
  }
}

// Smallest r >= 1 with coef * base^r < target.
std::uint32_t smallest_r(double coef, double base, double target, std::uint32_t cap) {
  if (coef * base < target) return 1;
  const double guess = std::log(target / coef) / std::log(base);
  if (!std::isfinite(guess) || guess > static_cast<double>(cap) + 2.0) return cap + 1;
  auto r = static_cast<std::uint32_t>(std::max(1.0, std::floor(guess)));
  while (r > 1 && coef * std::pow(base, r - 1) < target) --r;
  while (!(coef * std::pow(base, r) < target)) {
    if (r > cap) return cap + 1;
    ++r;
  }
  return r;
}

}  // namespace

double minorant_k_constant(double alpha, double beta) {
  check_exponents(alpha, beta);
  const double s = alpha / beta;
  boost::math::quadrature::tanh_sinh<double> near_zero;
  const double inner = near_zero.integrate(
      [s](double u) { return u <= 0.0 ? 0.0 : exp_remainder_ratio(u) * std::pow(u, 1.0 - s); }, 0.0, 1.0);
  // On [1, inf) the algebraic parts integrate in closed form.
  boost::math::quadrature::exp_sinh<double> tail;
  const double decaying = tail.integrate([s](double u) { return std::exp(-u) * std::pow(u, -s - 1.0); },
                                         1.0, std::numeric_limits<double>::infinity());
  const double outer = decaying - 1.0 / s + 1.0 / (s - 1.0);
  return (inner + outer) / beta;
}

double minorant_d_moment(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "need alpha, beta > 0");
  const double d = std::pow(2.0, 1.0 / alpha);
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(
      [alpha, beta](double x) { return x <= 0.0 ? 0.0 : 0.5 * alpha * std::pow(x, alpha + beta - 1.0); }, 0.0, d);
}

double minorant_d_moment_closed(double alpha, double beta) {
  return alpha * std::pow(2.0, beta / alpha) / (alpha + beta);
}

PositivityCertificate certify_H_positive(const ModelSpec& spec, double alpha, double mu_alpha,
                                         const ContractionProfile& profile,
                                         const CertificateOptions& options) {
  PositivityCertificate cert;
  cert.alpha = alpha;
  cert.beta = profile.beta;
  cert.rho_beta = profile.rho_beta;

  const Estimate q_alpha = moment_q_pos(spec, alpha, options.n_mc, options.seed);
  cert.q_pos_alpha = q_alpha.value;
  cert.q_pos_alpha_se = q_alpha.se;
  if (!(q_alpha.value > 3.0 * q_alpha.se) || !(q_alpha.value > 0.0)) {
    throw Error(ErrorCode::CertificateFailed,
                "precondition: E[(Q^+)^alpha] = " + std::to_string(q_alpha.value) + " is not positive");
  }
  if (!std::isfinite(q_alpha.value)) {
    throw Error(ErrorCode::CertificateFailed, "E[(Q^+)^alpha] is not finite");
  }
  if (!(profile.beta > alpha / 2.0 && profile.beta < alpha)) {
    throw Error(ErrorCode::CertificateFailed, "beta outside (alpha/2, alpha)");
  }
  if (!profile.usable || !(profile.rho_beta < 1.0)) {
    throw Error(ErrorCode::CertificateFailed, "contraction profile not usable (rho_beta >= 1)");
  }
  cert.delta = 0.5 * std::min(q_alpha.value, 1.0);
  const double sixth = cert.delta / 6.0;

  // q: smallest quantile of Q^+ with E[(Q^+)^alpha 1(Q^+ > q)] < delta/6.
  {
    const MomentBatch batch(spec, std::max<std::size_t>(options.n_mc, 2), options.seed);
    std::vector<double> qp(batch.size());
    for (std::size_t k = 0; k < qp.size(); ++k) qp[k] = std::max(batch.q(k), 0.0);
    std::sort(qp.begin(), qp.end());
    // suffix[k] = sum over j >= k of qp[j]^alpha
    std::vector<double> suffix(qp.size() + 1, 0.0);
    for (std::size_t k = qp.size(); k-- > 0;) suffix[k] = suffix[k + 1] + std::pow(qp[k], alpha);
    const double n = static_cast<double>(qp.size());
    auto tail_at = [&](double q) {
      const auto first = std::upper_bound(qp.begin(), qp.end(), q) - qp.begin();
      return suffix[static_cast<std::size_t>(first)] / n;
    };
    bool found = false;
    for (std::size_t k = 0; k <= options.quantile_steps; ++k) {
      const double q = sorted_quantile(qp, static_cast<double>(k) / static_cast<double>(options.quantile_steps));
      if (!(q > 0.0)) continue;
      const double t = tail_at(q);
      if (t < sixth) {
        cert.q = q;
        cert.q_tail = t;
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::CertificateFailed, "no quantile q meets the delta/6 tail condition");
  }

  const Estimate q_beta = moment_q_pos(spec, profile.beta, options.n_mc, options.seed);
  if (!std::isfinite(q_beta.value)) throw Error(ErrorCode::CertificateFailed, "E[(Q^+)^beta] not finite");
  cert.q_pos_beta = q_beta.value;

  const ConditionItem weights = power_sum_moment(spec, profile.beta, alpha / profile.beta, options.n_mc,
                                                 options.seed, "E[(sum C_i^beta)^(alpha/beta)]");
  if (!(weights.status == ConditionStatus::pass || weights.status == ConditionStatus::bounded) ||
      !std::isfinite(weights.value)) {
    throw Error(ErrorCode::CertificateFailed, "plug-in diagnostic failed for " + weights.name);
  }
  cert.weight_power_sum = weights.value;

  cert.k_const = minorant_k_constant(alpha, profile.beta);
  cert.d_beta_moment = minorant_d_moment(alpha, profile.beta);
  cert.d_beta_moment_closed = minorant_d_moment_closed(alpha, profile.beta);

  const double one_minus_rho = 1.0 - profile.rho_beta;
  const double coef_a = std::pow(cert.q, alpha) * cert.q_pos_beta / (sixth * one_minus_rho);
  const double coef_b = cert.k_const * cert.weight_power_sum *
                        std::pow(cert.q_pos_beta / one_minus_rho, alpha / profile.beta);
  const double base = cert.d_beta_moment;
  cert.r_a = smallest_r(coef_a, base, sixth, options.r_max);
  cert.r_b = smallest_r(coef_b, base, cert.delta / 2.0, options.r_max);
  cert.binding = cert.r_a >= cert.r_b ? "a" : "b";
  cert.r = std::max(cert.r_a, cert.r_b);
  if (cert.r > options.r_max) {
    throw Error(ErrorCode::CertificateFailed,
                "no r <= " + std::to_string(options.r_max) + " satisfies condition " + cert.binding);
  }
  cert.condition_a = coef_a * std::pow(base, cert.r);
  cert.condition_b = coef_b * std::pow(base, cert.r);
  cert.lower_bound = q_alpha.value - cert.delta;
  if (mu_alpha > 0.0) {
    cert.h_lower_bound = cert.lower_bound * std::exp2(-static_cast<double>(cert.r)) / (alpha * mu_alpha);
  }
  return cert;
}

}  // namespace treemax
