#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "treemax/rng.hpp"

namespace treemax {

// Real-valued families. Used for Q, for the weights C_i and for terminal
// values of the iterated process.
namespace law {

struct Constant {
  double value = 0.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};
struct Exponential {
  double rate = 1.0;
};
/// a with probability p_a, b otherwise.
struct TwoPoint {
  double a = 0.0;
  double b = 1.0;
  double p_a = 0.5;
};
struct Table {
  std::vector<double> values;
  std::vector<double> probs;
};
/// exp(Y), Y ~ Normal(mu, sigma^2).
struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};
/// exp(S - T) with S ~ Exp(rate_s), T ~ Exp(rate_t) independent.
struct ExpDiffExp {
  double rate_s = 1.0;
  double rate_t = 1.0;
};
/// P(X > x) = (scale / x)^shape for x >= scale.
struct Pareto {
  double scale = 1.0;
  double shape = 1.0;
};
struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
};

struct CountConstant {
  std::uint32_t value = 1;
};
struct Poisson {
  double mean = 1.0;
};
struct CountTwoPoint {
  std::uint32_t a = 0;
  std::uint32_t b = 1;
  double p_a = 0.5;
};
struct CountTable {
  std::vector<std::uint32_t> values;
  std::vector<double> probs;
};

}  // namespace law

using RealLaw = std::variant<law::Constant, law::Uniform, law::Exponential, law::TwoPoint,
                             law::Table, law::LogNormal, law::ExpDiffExp, law::Pareto,
                             law::Normal>;

using CountLaw =
    std::variant<law::CountConstant, law::Poisson, law::CountTwoPoint, law::CountTable>;

struct Support {
  double lo;
  double hi;
};

double sample(const RealLaw& law, CounterStream& stream);
std::uint32_t sample(const CountLaw& law, CounterStream& stream);

Support support(const RealLaw& law);
/// True when the law is a point mass.
bool is_degenerate(const RealLaw& law);
std::string family_name(const RealLaw& law);
std::string family_name(const CountLaw& law);

/// E[X^theta] for a law supported on [0, inf). nullopt when no closed form
/// is known or the support reaches below 0; +inf when the moment diverges.
std::optional<double> power_moment(const RealLaw& law, double theta);
/// E[X^theta log X], with 0^theta log 0 taken as 0.
std::optional<double> power_log_moment(const RealLaw& law, double theta);
/// E[|X|^theta].
std::optional<double> abs_moment(const RealLaw& law, double theta);
/// E[(X^+)^theta].
std::optional<double> positive_part_moment(const RealLaw& law, double theta);
/// P(X <= x).
std::optional<double> cdf(const RealLaw& law, double x);
/// P(X < x).
std::optional<double> prob_less(const RealLaw& law, double x);

double mean(const CountLaw& law);
/// Largest value in the support, nullopt when unbounded.
std::optional<std::uint32_t> max_value(const CountLaw& law);
/// P(N = 0) = 1.
bool always_zero(const CountLaw& law);

/// Throws InvalidArgument when parameters are out of range.
void check_parameters(const RealLaw& law);
void check_parameters(const CountLaw& law);

}  // namespace treemax
