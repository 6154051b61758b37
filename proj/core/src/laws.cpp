#include "treemax/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>

#include "treemax/error.hpp"

namespace treemax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// x^theta with the continuous extension used throughout: 0^theta = 0 for
// theta > 0.
double pow_term(double x, double theta) { return std::pow(x, theta); }

double pow_log_term(double x, double theta) {
  if (x == 0.0) return 0.0;
  return std::pow(x, theta) * std::log(x);
}

double abs_pow(double x, double theta) { return std::pow(std::abs(x), theta); }

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Antiderivative of x^theta log x for x >= 0, theta > -1.
double pow_log_antiderivative(double x, double theta) {
  if (x == 0.0) return 0.0;
  const double t1 = theta + 1.0;
  return std::pow(x, t1) * (std::log(x) / t1 - 1.0 / (t1 * t1));
}

// Antiderivative of |x|^theta.
double abs_pow_antiderivative(double x, double theta) {
  const double t1 = theta + 1.0;
  return std::copysign(std::pow(std::abs(x), t1) / t1, x);
}

template <class F>
double atom_sum(const std::vector<double>& values, const std::vector<double>& probs, F f) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += probs[i] * f(values[i]);
  return s;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

void check_probability_vector(const std::vector<double>& probs, std::size_t n_values) {
  require(!probs.empty() && probs.size() == n_values, "table values and probs differ in length");
  double total = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0, "table probability must be in [0, 1]");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-9, "table probabilities must sum to 1");
}

std::size_t pick_atom(const std::vector<double>& probs, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return i;
  }
  return probs.size() - 1;
}

}  // namespace

double sample(const RealLaw& law, CounterStream& s) {
  return std::visit(
      overloaded{
          [](const law::Constant& l) { return l.value; },
          [&](const law::Uniform& l) { return l.lo + (l.hi - l.lo) * s.uniform(); },
          [&](const law::Exponential& l) { return -std::log1p(-s.uniform()) / l.rate; },
          [&](const law::TwoPoint& l) { return s.uniform() < l.p_a ? l.a : l.b; },
          [&](const law::Table& l) { return l.values[pick_atom(l.probs, s.uniform())]; },
          [&](const law::LogNormal& l) {
            const double u1 = s.uniform_open();
            const double u2 = s.uniform();
            const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            return std::exp(l.mu + l.sigma * z);
          },
          [&](const law::ExpDiffExp& l) {
            const double e1 = -std::log1p(-s.uniform()) / l.rate_s;
            const double e2 = -std::log1p(-s.uniform()) / l.rate_t;
            return std::exp(e1 - e2);
          },
          [&](const law::Pareto& l) { return l.scale * std::pow(s.uniform_open(), -1.0 / l.shape); },
          [&](const law::Normal& l) {
            const double u1 = s.uniform_open();
            const double u2 = s.uniform();
            const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            return l.mu + l.sigma * z;
          },
      },
      law);
}

std::uint32_t sample(const CountLaw& law, CounterStream& s) {
  return std::visit(
      overloaded{
          [](const law::CountConstant& l) { return l.value; },
          [&](const law::Poisson& l) {
            // Inversion; the mean is capped by check_parameters.
            const double u = s.uniform();
            std::uint32_t k = 0;
            double p = std::exp(-l.mean);
            double cumulative = p;
            while (u >= cumulative && k < 100000) {
              ++k;
              p *= l.mean / k;
              cumulative += p;
              if (p == 0.0 && k > l.mean) break;
            }
            return k;
          },
          [&](const law::CountTwoPoint& l) { return s.uniform() < l.p_a ? l.a : l.b; },
          [&](const law::CountTable& l) { return l.values[pick_atom(l.probs, s.uniform())]; },
      },
      law);
}

Support support(const RealLaw& law) {
  return std::visit(
      overloaded{
          [](const law::Constant& l) { return Support{l.value, l.value}; },
          [](const law::Uniform& l) { return Support{l.lo, l.hi}; },
          [](const law::Exponential&) { return Support{0.0, kInf}; },
          [](const law::TwoPoint& l) {
            double lo = kInf, hi = -kInf;
            if (l.p_a > 0.0) lo = std::min(lo, l.a), hi = std::max(hi, l.a);
            if (l.p_a < 1.0) lo = std::min(lo, l.b), hi = std::max(hi, l.b);
            return Support{lo, hi};
          },
          [](const law::Table& l) {
            double lo = kInf, hi = -kInf;
            for (std::size_t i = 0; i < l.values.size(); ++i) {
              if (l.probs[i] <= 0.0) continue;
              lo = std::min(lo, l.values[i]);
              hi = std::max(hi, l.values[i]);
            }
            return Support{lo, hi};
          },
          [](const law::LogNormal&) { return Support{0.0, kInf}; },
          [](const law::ExpDiffExp&) { return Support{0.0, kInf}; },
          [](const law::Pareto& l) { return Support{l.scale, kInf}; },
          [](const law::Normal& l) {
            return l.sigma == 0.0 ? Support{l.mu, l.mu} : Support{-kInf, kInf};
          },
      },
      law);
}

bool is_degenerate(const RealLaw& law) {
  const Support s = support(law);
  return s.lo == s.hi;
}

std::string family_name(const RealLaw& law) {
  return std::visit(overloaded{
                        [](const law::Constant&) { return std::string("constant"); },
                        [](const law::Uniform&) { return std::string("uniform"); },
                        [](const law::Exponential&) { return std::string("exponential"); },
                        [](const law::TwoPoint&) { return std::string("two_point"); },
                        [](const law::Table&) { return std::string("table"); },
                        [](const law::LogNormal&) { return std::string("lognormal"); },
                        [](const law::ExpDiffExp&) { return std::string("exp_diff_exp"); },
                        [](const law::Pareto&) { return std::string("pareto"); },
                        [](const law::Normal&) { return std::string("normal"); },
                    },
                    law);
}

std::string family_name(const CountLaw& law) {
  return std::visit(overloaded{
                        [](const law::CountConstant&) { return std::string("constant"); },
                        [](const law::Poisson&) { return std::string("poisson"); },
                        [](const law::CountTwoPoint&) { return std::string("two_point"); },
                        [](const law::CountTable&) { return std::string("table"); },
                    },
                    law);
}

std::optional<double> power_moment(const RealLaw& law, double theta) {
  if (support(law).lo < 0.0) return std::nullopt;
  return std::visit(
      overloaded{
          [&](const law::Constant& l) -> std::optional<double> { return pow_term(l.value, theta); },
          [&](const law::Uniform& l) -> std::optional<double> {
            if (l.hi == l.lo) return pow_term(l.lo, theta);
            if (theta <= -1.0) return l.lo > 0.0 ? std::nullopt : std::optional<double>(kInf);
            return (std::pow(l.hi, theta + 1.0) - std::pow(l.lo, theta + 1.0)) /
                   ((theta + 1.0) * (l.hi - l.lo));
          },
          [&](const law::Exponential& l) -> std::optional<double> {
            if (theta <= -1.0) return kInf;
            return std::tgamma(theta + 1.0) / std::pow(l.rate, theta);
          },
          [&](const law::TwoPoint& l) -> std::optional<double> {
            return l.p_a * pow_term(l.a, theta) + (1.0 - l.p_a) * pow_term(l.b, theta);
          },
          [&](const law::Table& l) -> std::optional<double> {
            return atom_sum(l.values, l.probs, [&](double x) { return pow_term(x, theta); });
          },
          [&](const law::LogNormal& l) -> std::optional<double> {
            return std::exp(theta * l.mu + 0.5 * theta * theta * l.sigma * l.sigma);
          },
          [&](const law::ExpDiffExp& l) -> std::optional<double> {
            if (theta >= l.rate_s || theta <= -l.rate_t) return kInf;
            return l.rate_s / (l.rate_s - theta) * l.rate_t / (l.rate_t + theta);
          },
          [&](const law::Pareto& l) -> std::optional<double> {
            if (theta >= l.shape) return kInf;
            return l.shape * std::pow(l.scale, theta) / (l.shape - theta);
          },
          [&](const law::Normal& l) -> std::optional<double> {
            return pow_term(l.mu, theta);  // sigma == 0 here (support.lo >= 0)
          },
      },
      law);
}

std::optional<double> power_log_moment(const RealLaw& law, double theta) {
  if (support(law).lo < 0.0) return std::nullopt;
  return std::visit(
      overloaded{
          [&](const law::Constant& l) -> std::optional<double> {
            return pow_log_term(l.value, theta);
          },
          [&](const law::Uniform& l) -> std::optional<double> {
            if (l.hi == l.lo) return pow_log_term(l.lo, theta);
            if (theta <= -1.0) return std::nullopt;
            return (pow_log_antiderivative(l.hi, theta) - pow_log_antiderivative(l.lo, theta)) /
                   (l.hi - l.lo);
          },
          [&](const law::Exponential& l) -> std::optional<double> {
            if (theta <= -1.0) return std::nullopt;
            return std::tgamma(theta + 1.0) / std::pow(l.rate, theta) *
                   (boost::math::digamma(theta + 1.0) - std::log(l.rate));
          },
          [&](const law::TwoPoint& l) -> std::optional<double> {
            return l.p_a * pow_log_term(l.a, theta) + (1.0 - l.p_a) * pow_log_term(l.b, theta);
          },
          [&](const law::Table& l) -> std::optional<double> {
            return atom_sum(l.values, l.probs, [&](double x) { return pow_log_term(x, theta); });
          },
          [&](const law::LogNormal& l) -> std::optional<double> {
            const double s2 = l.sigma * l.sigma;
            return (l.mu + theta * s2) * std::exp(theta * l.mu + 0.5 * theta * theta * s2);
          },
          [&](const law::ExpDiffExp& l) -> std::optional<double> {
            if (theta >= l.rate_s || theta <= -l.rate_t) return kInf;
            const double m = l.rate_s / (l.rate_s - theta) * l.rate_t / (l.rate_t + theta);
            return m * (1.0 / (l.rate_s - theta) - 1.0 / (l.rate_t + theta));
          },
          [&](const law::Pareto& l) -> std::optional<double> {
            if (theta >= l.shape) return kInf;
            const double m = l.shape * std::pow(l.scale, theta) / (l.shape - theta);
            return m * (std::log(l.scale) + 1.0 / (l.shape - theta));
          },
          [&](const law::Normal& l) -> std::optional<double> { return pow_log_term(l.mu, theta); },
      },
      law);
}

std::optional<double> abs_moment(const RealLaw& law, double theta) {
  return std::visit(
      overloaded{
          [&](const law::Constant& l) -> std::optional<double> { return abs_pow(l.value, theta); },
          [&](const law::Uniform& l) -> std::optional<double> {
            if (l.hi == l.lo) return abs_pow(l.lo, theta);
            if (theta <= -1.0) return std::nullopt;
            return (abs_pow_antiderivative(l.hi, theta) - abs_pow_antiderivative(l.lo, theta)) /
                   (l.hi - l.lo);
          },
          [&](const law::TwoPoint& l) -> std::optional<double> {
            return l.p_a * abs_pow(l.a, theta) + (1.0 - l.p_a) * abs_pow(l.b, theta);
          },
          [&](const law::Table& l) -> std::optional<double> {
            return atom_sum(l.values, l.probs, [&](double x) { return abs_pow(x, theta); });
          },
          [&](const law::Normal& l) -> std::optional<double> {
            if (l.sigma == 0.0) return abs_pow(l.mu, theta);
            if (l.mu != 0.0 || theta <= -1.0) return std::nullopt;
            return std::pow(l.sigma, theta) * std::pow(2.0, theta / 2.0) *
                   std::tgamma((theta + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
          },
          [&](const auto&) -> std::optional<double> { return power_moment(law, theta); },
      },
      law);
}

std::optional<double> positive_part_moment(const RealLaw& law, double theta) {
  const Support s = support(law);
  if (s.hi <= 0.0) return 0.0;
  if (s.lo >= 0.0) return power_moment(law, theta);
  return std::visit(
      overloaded{
          [&](const law::Uniform& l) -> std::optional<double> {
            if (theta <= -1.0) return std::nullopt;
            return (abs_pow_antiderivative(l.hi, theta) - abs_pow_antiderivative(0.0, theta)) /
                   (l.hi - l.lo);
          },
          [&](const law::TwoPoint& l) -> std::optional<double> {
            return l.p_a * pow_term(std::max(l.a, 0.0), theta) +
                   (1.0 - l.p_a) * pow_term(std::max(l.b, 0.0), theta);
          },
          [&](const law::Table& l) -> std::optional<double> {
            return atom_sum(l.values, l.probs,
                            [&](double x) { return pow_term(std::max(x, 0.0), theta); });
          },
          [&](const law::Normal& l) -> std::optional<double> {
            if (l.mu != 0.0 || theta <= -1.0) return std::nullopt;
            return 0.5 * *abs_moment(law, theta);
          },
          [&](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      law);
}

std::optional<double> cdf(const RealLaw& law, double x) {
  return std::visit(
      overloaded{
          [&](const law::Constant& l) -> std::optional<double> { return x >= l.value ? 1.0 : 0.0; },
          [&](const law::Uniform& l) -> std::optional<double> {
            if (x < l.lo) return 0.0;
            if (x >= l.hi) return 1.0;
            return (x - l.lo) / (l.hi - l.lo);
          },
          [&](const law::Exponential& l) -> std::optional<double> {
            return x <= 0.0 ? 0.0 : -std::expm1(-l.rate * x);
          },
          [&](const law::TwoPoint& l) -> std::optional<double> {
            return (x >= l.a ? l.p_a : 0.0) + (x >= l.b ? 1.0 - l.p_a : 0.0);
          },
          [&](const law::Table& l) -> std::optional<double> {
            return atom_sum(l.values, l.probs, [&](double v) { return v <= x ? 1.0 : 0.0; });
          },
          [&](const law::LogNormal& l) -> std::optional<double> {
            if (x <= 0.0) return 0.0;
            return standard_normal_cdf((std::log(x) - l.mu) / l.sigma);
          },
          [&](const law::ExpDiffExp& l) -> std::optional<double> {
            if (x <= 0.0) return 0.0;
            const double y = std::log(x);
            const double s = l.rate_s, t = l.rate_t;
            if (y < 0.0) return s / (s + t) * std::exp(t * y);
            return 1.0 - t / (s + t) * std::exp(-s * y);
          },
          [&](const law::Pareto& l) -> std::optional<double> {
            return x < l.scale ? 0.0 : 1.0 - std::pow(l.scale / x, l.shape);
          },
          [&](const law::Normal& l) -> std::optional<double> {
            if (l.sigma == 0.0) return x >= l.mu ? 1.0 : 0.0;
            return standard_normal_cdf((x - l.mu) / l.sigma);
          },
      },
      law);
}

std::optional<double> prob_less(const RealLaw& law, double x) {
  return std::visit(
      overloaded{
          [&](const law::Constant& l) -> std::optional<double> { return x > l.value ? 1.0 : 0.0; },
          [&](const law::TwoPoint& l) -> std::optional<double> {
            return (x > l.a ? l.p_a : 0.0) + (x > l.b ? 1.0 - l.p_a : 0.0);
          },
          [&](const law::Table& l) -> std::optional<double> {
            return atom_sum(l.values, l.probs, [&](double v) { return v < x ? 1.0 : 0.0; });
          },
          [&](const law::Normal& l) -> std::optional<double> {
            if (l.sigma == 0.0) return x > l.mu ? 1.0 : 0.0;
            return cdf(law, x);
          },
          [&](const auto&) -> std::optional<double> { return cdf(law, x); },
      },
      law);
}

double mean(const CountLaw& law) {
  return std::visit(overloaded{
                        [](const law::CountConstant& l) { return double(l.value); },
                        [](const law::Poisson& l) { return l.mean; },
                        [](const law::CountTwoPoint& l) { return l.p_a * l.a + (1.0 - l.p_a) * l.b; },
                        [](const law::CountTable& l) {
                          double m = 0.0;
                          for (std::size_t i = 0; i < l.values.size(); ++i) m += l.probs[i] * l.values[i];
                          return m;
                        },
                    },
                    law);
}

std::optional<std::uint32_t> max_value(const CountLaw& law) {
  return std::visit(overloaded{
                        [](const law::CountConstant& l) -> std::optional<std::uint32_t> { return l.value; },
                        [](const law::Poisson&) -> std::optional<std::uint32_t> { return std::nullopt; },
                        [](const law::CountTwoPoint& l) -> std::optional<std::uint32_t> {
                          std::uint32_t m = 0;
                          if (l.p_a > 0.0) m = std::max(m, l.a);
                          if (l.p_a < 1.0) m = std::max(m, l.b);
                          return m;
                        },
                        [](const law::CountTable& l) -> std::optional<std::uint32_t> {
                          std::uint32_t m = 0;
                          for (std::size_t i = 0; i < l.values.size(); ++i)
                            if (l.probs[i] > 0.0) m = std::max(m, l.values[i]);
                          return m;
                        },
                    },
                    law);
}

bool always_zero(const CountLaw& law) {
  const auto m = max_value(law);
  return m && *m == 0;
}

void check_parameters(const RealLaw& law) {
  std::visit(
      overloaded{
          [](const law::Constant& l) { require(std::isfinite(l.value), "constant must be finite"); },
          [](const law::Uniform& l) {
            require(std::isfinite(l.lo) && std::isfinite(l.hi) && l.lo <= l.hi,
                    "uniform requires finite lo <= hi");
          },
          [](const law::Exponential& l) { require(l.rate > 0.0 && std::isfinite(l.rate), "exponential rate must be > 0"); },
          [](const law::TwoPoint& l) {
            require(std::isfinite(l.a) && std::isfinite(l.b), "two_point values must be finite");
            require(l.p_a >= 0.0 && l.p_a <= 1.0, "two_point p_a must be in [0, 1]");
          },
          [](const law::Table& l) {
            check_probability_vector(l.probs, l.values.size());
            for (double v : l.values) require(std::isfinite(v), "table values must be finite");
          },
          [](const law::LogNormal& l) {
            require(std::isfinite(l.mu) && l.sigma > 0.0 && std::isfinite(l.sigma),
                    "lognormal requires finite mu and sigma > 0");
          },
          [](const law::ExpDiffExp& l) {
            require(l.rate_s > 0.0 && l.rate_t > 0.0, "exp_diff_exp rates must be > 0");
          },
          [](const law::Pareto& l) {
            require(l.scale > 0.0 && l.shape > 0.0, "pareto scale and shape must be > 0");
          },
          [](const law::Normal& l) {
            require(std::isfinite(l.mu) && l.sigma >= 0.0 && std::isfinite(l.sigma),
                    "normal requires finite mu and sigma >= 0");
          },
      },
      law);
}

void check_parameters(const CountLaw& law) {
  std::visit(overloaded{
                 [](const law::CountConstant&) {},
                 [](const law::Poisson& l) {
                   require(l.mean >= 0.0 && l.mean <= 500.0, "poisson mean must be in [0, 500]");
                 },
                 [](const law::CountTwoPoint& l) {
                   require(l.p_a >= 0.0 && l.p_a <= 1.0, "two_point p_a must be in [0, 1]");
                 },
                 [](const law::CountTable& l) { check_probability_vector(l.probs, l.values.size()); },
             },
             law);
}

}  // namespace treemax
