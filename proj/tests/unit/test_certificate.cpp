#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "treemax/certificate.hpp"

using namespace treemax;

namespace {

ModelSpec walk_model() {
  ModelSpec s;
  s.c = law::ExpDiffExp{2.0, 1.0};
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

TEST(KConstant, TrapezoidOracleAtThreeHalves) {
  const double alpha = 1.5, beta = 1.0;
  const double k_beta = minorant_k_constant(alpha, beta) * beta;
  EXPECT_NEAR(k_beta, oracle::k_integral_trapezoid(1.5), 1e-6);
  EXPECT_NEAR(k_beta, oracle::k_integral_gamma(1.5), 1e-6);
  EXPECT_NEAR(k_beta, 4.0 * std::sqrt(M_PI) / 3.0, 1e-6);
}

TEST(KConstant, AcrossTheAdmissibleRange) {
  for (double s : {1.05, 1.2, 4.0 / 3.0, 1.7, 1.9}) {
    const double beta = 0.8, alpha = s * beta;
    const double k = minorant_k_constant(alpha, beta);
    EXPECT_NEAR(k * beta, oracle::k_integral_gamma(s), 1e-6 * oracle::k_integral_gamma(s)) << s;
  }
}

TEST(KConstant, RejectsBetaOutsideRange) {
  EXPECT_THROW(minorant_k_constant(1.0, 0.4), Error);
  EXPECT_THROW(minorant_k_constant(1.0, 1.0), Error);
}

TEST(DMoment, QuadratureMatchesClosedForm) {
  for (auto [alpha, beta] : {std::pair{1.0, 0.75}, {3.1, 2.3}, {0.5, 0.3}}) {
    EXPECT_NEAR(minorant_d_moment(alpha, beta), minorant_d_moment_closed(alpha, beta), 1e-10);
  }
  EXPECT_NEAR(minorant_d_moment_closed(1.0, 0.75), std::pow(2.0, 0.75) / 1.75, 1e-15);
}

TEST(Certificate, WalkModel) {
  ContractionProfile p = compute_rho(walk_model(), 0.75);
  const PositivityCertificate c = certify_H_positive(walk_model(), 1.0, 0.5, p);
  EXPECT_DOUBLE_EQ(c.q_pos_alpha, 1.0);
  EXPECT_DOUBLE_EQ(c.delta, 0.5);
  EXPECT_DOUBLE_EQ(c.lower_bound, 0.5);
  EXPECT_GT(c.lower_bound, 0.0);
  EXPECT_NEAR(c.k_const * 0.75, oracle::k_integral_gamma(4.0 / 3.0), 1e-6);
  EXPECT_GE(c.r, 1u);
  EXPECT_EQ(c.r, std::max(c.r_a, c.r_b));
  EXPECT_LT(c.condition_a, c.delta / 6.0);
  EXPECT_LT(c.condition_b, c.delta / 2.0);
  EXPECT_GT(c.h_lower_bound, 0.0);
  EXPECT_NEAR(c.h_lower_bound, 0.5 * std::exp2(-double(c.r)) / 0.5, 1e-300 + 1e-12 * c.h_lower_bound);
}

TEST(Certificate, SmallestRIsMinimal) {
  ContractionProfile p = compute_rho(walk_model(), 0.75);
  const PositivityCertificate c = certify_H_positive(walk_model(), 1.0, 0.5, p);
  const double base = c.d_beta_moment;
  ASSERT_GT(c.r, 1u);
  // one fewer generation must violate the binding inequality
  if (c.binding == "a") {
    EXPECT_GE(c.condition_a / base, c.delta / 6.0);
  } else {
    EXPECT_GE(c.condition_b / base, c.delta / 2.0);
  }
}

TEST(Certificate, NonPositiveQFails) {
  ModelSpec s = walk_model();
  s.q = law::Uniform{-1.0, 0.0};
  const ContractionProfile p = compute_rho(s, 0.75);
  EXPECT_EQ(code_of([&] { certify_H_positive(s, 1.0, 0.5, p); }), ErrorCode::CertificateFailed);
}

TEST(Certificate, UnusableProfileFails) {
  ContractionProfile p;
  p.beta = 0.75;
  p.rho_beta = 1.2;
  EXPECT_EQ(code_of([&] { certify_H_positive(walk_model(), 1.0, 0.5, p); }), ErrorCode::CertificateFailed);
  p.beta = 0.3;
  p.rho_beta = 0.9;
  p.usable = true;
  EXPECT_EQ(code_of([&] { certify_H_positive(walk_model(), 1.0, 0.5, p); }), ErrorCode::CertificateFailed);
}

TEST(Certificate, RMaxReportsBindingInequality) {
  ContractionProfile p = compute_rho(walk_model(), 0.75);
  CertificateOptions opt;
  opt.r_max = 5;
  try {
    certify_H_positive(walk_model(), 1.0, 0.5, p, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CertificateFailed);
    EXPECT_NE(std::string(e.what()).find("condition"), std::string::npos);
  }
}

TEST(Certificate, RandomQUsesAQuantile) {
  ModelSpec s = walk_model();
  s.q = law::Exponential{1.0};
  const ContractionProfile p = compute_rho(s, 0.75);
  const PositivityCertificate c = certify_H_positive(s, 1.0, 0.5, p);
  EXPECT_NEAR(c.q_pos_alpha, 1.0, 1e-12);
  EXPECT_LT(c.q_tail, c.delta / 6.0);
  // E[Q 1(Q > q)] = (q + 1) e^-q for Exp(1)
  EXPECT_LT((c.q + 1.0) * std::exp(-c.q), c.delta / 6.0 + 0.01);
}
