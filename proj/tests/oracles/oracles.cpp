#include "oracles.hpp"

#include <cmath>
#include <numeric>

namespace oracle {

namespace mm1 {

double m(double theta) { return kServiceRate / (kServiceRate - theta) * kArrivalRate / (kArrivalRate + theta); }

double mlog(double theta) {
  return m(theta) * (1.0 / (kServiceRate - theta) - 1.0 / (kArrivalRate + theta));
}

double ccdf(double t) {
  if (t < 1.0) return 1.0;
  const double rho = kArrivalRate / kServiceRate;
  return rho * std::exp(-(kServiceRate - kArrivalRate) * std::log(t));
}

double cdf(double t) { return 1.0 - ccdf(t); }

}  // namespace mm1

double lognormal_m(double theta, double mu, double var, double n) {
  return n * std::exp(mu * theta + 0.5 * var * theta * theta);
}

double lognormal_alpha(double mu, double var, double n) {
  return (-mu + std::sqrt(mu * mu - 2.0 * var * std::log(n))) / var;
}

double DiscreteLaw::cdf(double t) const {
  const auto k = std::upper_bound(x.begin(), x.end(), t) - x.begin();
  return std::accumulate(p.begin(), p.begin() + k, 0.0);
}

double DiscreteLaw::cdf_below(double t) const {
  const auto k = std::lower_bound(x.begin(), x.end(), t) - x.begin();
  return std::accumulate(p.begin(), p.begin() + k, 0.0);
}

using Joint = std::map<std::pair<double, double>, double>;

std::map<std::pair<double, double>, double> enumerate_tree(const FiniteModel& model, unsigned depth) {
  if (depth == 0) {
    Joint out;
    for (auto [q, pq] : model.q) out[{q, q}] += pq;
    return out;
  }
  const Joint sub = enumerate_tree(model, depth - 1);
  // one child's contribution (C R, C R_L)
  Joint child;
  for (auto [c, pc] : model.c) {
    for (const auto& [v, ps] : sub) child[{c * v.first, c * v.second}] += pc * ps;
  }
  Joint out;
  for (auto [q, pq] : model.q) {
    for (auto [n, pn] : model.n) {
      Joint acc{{{q, q}, pq * pn}};
      for (unsigned i = 0; i < n; ++i) {
        Joint next;
        for (const auto& [a, pa] : acc) {
          for (const auto& [b, pb] : child) {
            next[{std::max(a.first, b.first), a.second + b.second}] += pa * pb;
          }
        }
        acc.swap(next);
      }
      for (const auto& [k, p] : acc) out[k] += p;
    }
  }
  return out;
}

DiscreteLaw marginal(const Joint& joint, bool linear) {
  std::map<double, double> m;
  for (const auto& [k, p] : joint) m[linear ? k.second : k.first] += p;
  DiscreteLaw law;
  for (auto [x, p] : m) {
    law.x.push_back(x);
    law.p.push_back(p);
  }
  return law;
}

double ks_discrete(std::vector<double> samples, const DiscreteLaw& law) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0, f = 0.0;
  for (std::size_t k = 0; k < law.x.size(); ++k) {
    const double x = law.x[k];
    const double below = static_cast<double>(std::lower_bound(samples.begin(), samples.end(), x) - samples.begin()) / n;
    const double at = static_cast<double>(std::upper_bound(samples.begin(), samples.end(), x) - samples.begin()) / n;
    d = std::max(d, std::abs(below - f));
    f += law.p[k];
    d = std::max(d, std::abs(at - f));
  }
  return d;
}

double ks_band_discrete(const DiscreteLaw& law, std::size_t n) {
  double worst = 0.0, f = 0.0;
  for (double p : law.p) {
    f += p;
    worst = std::max(worst, f * (1.0 - f));
  }
  return 3.0 * std::sqrt(worst / static_cast<double>(n));
}

namespace {

double remainder_term(double u) {
  if (u < 0.5) {
    // sum_{k >= 2} (-u)^k / k!
    double term = u * u / 2.0, sum = 0.0;
    for (int k = 2; k < 30; ++k) {
      sum += term;
      term *= -u / (k + 1);
    }
    return sum;
  }
  return std::exp(-u) - 1.0 + u;
}

}  // namespace

double k_integral_trapezoid(double s, double step, double x_lo, double x_hi) {
  auto f = [s](double x) { return remainder_term(std::exp(x)) * std::exp(-s * x); };
  const auto n = static_cast<long>(std::ceil((x_hi - x_lo) / step));
  const double h = (x_hi - x_lo) / static_cast<double>(n);
  double sum = 0.5 * (f(x_lo) + f(x_hi));
  for (long i = 1; i < n; ++i) sum += f(x_lo + h * static_cast<double>(i));
  return sum * h;
}

double k_integral_gamma(double s) { return std::tgamma(-s); }

double half_difference_uniform_cdf(double x) {
  if (x <= -0.5) return 0.0;
  if (x >= 0.5) return 1.0;
  if (x < 0.0) return 2.0 * (x + 0.5) * (x + 0.5);
  return 1.0 - 2.0 * (0.5 - x) * (0.5 - x);
}

}  // namespace oracle
