#include "treemax/tails.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace treemax {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  // Sample variance.
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  }
};

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return s;
}

void require_samples(std::span<const double> samples, const char* what) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": no samples");
  for (double x : samples) {
    if (std::isnan(x)) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": NaN sample");
  }
}

Interval ci95(double value, double se) { return {value - kZ95 * se, value + kZ95 * se}; }

// Number of elements of a sorted vector that are strictly below x.
std::size_t count_below(const std::vector<double>& sorted, double x) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
}

std::size_t count_above(const std::vector<double>& sorted, double x) {
  return static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x));
}

struct GroupedMean {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Outer loop shared by the H and K expectation forms: a fresh root vector
// and, for each child, a draw from the R sample. The R sample is split into
// disjoint groups, each outer draw resamples from one group only, and the
// standard error comes from the spread of the group means. This accounts for
// the randomness of the R sample as well as of the outer draws.
template <class F>
GroupedMean outer_loop(const ModelSpec& spec, std::span<const double> r_samples,
                       const HExpectationOptions& options, F&& f) {
  if (options.n_outer < 2) throw Error(ErrorCode::InvalidArgument, "n_outer must be >= 2");
  const std::size_t n = r_samples.size();
  const std::size_t groups = std::clamp<std::size_t>(n / 50, std::min<std::size_t>(n, 2), options.groups);
  std::vector<Accumulator> acc(groups);
  std::vector<double> r;
  for (std::size_t j = 0; j < options.n_outer; ++j) {
    const std::size_t g = j % groups;
    const std::size_t lo = g * n / groups;
    const std::size_t size = (g + 1) * n / groups - lo;
    CounterStream stream = aux_stream(options.seed, stream_tag::outer, j);
    const RootVectorSample v = sample_root_vector(spec, stream);
    r.resize(v.n);
    for (std::uint32_t i = 0; i < v.n; ++i) {
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(stream.uniform() * static_cast<double>(size)),
                                             size - 1);
      r[i] = r_samples[lo + idx];
    }
    acc[g].add(f(v, r));
  }
  GroupedMean out;
  out.n = options.n_outer;
  if (groups == 1) {
    out.mean = acc[0].mean();
    out.se = std::sqrt(acc[0].variance() / static_cast<double>(acc[0].n));
    return out;
  }
  Accumulator means;
  for (const auto& a : acc) means.add(a.mean());
  out.mean = means.mean();
  out.se = std::sqrt(means.variance() / static_cast<double>(groups));
  return out;
}

}  // namespace

std::vector<CcdfPoint> empirical_ccdf(std::span<const double> samples, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw Error(ErrorCode::EmptyGrid, "empty t grid");
  if (samples.empty()) throw Error(ErrorCode::EmptyGrid, "no samples");
  const std::vector<double> sorted = sorted_copy(samples);
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const double p = static_cast<double>(count_above(sorted, t)) / n;
    out.push_back({t, p, std::sqrt(p * (1.0 - p) / n)});
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) {
    throw Error(ErrorCode::EmptyGrid, "log grid needs 0 < lo <= hi and n >= 1");
  }
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
  p = std::clamp(p, 0.0, 1.0);
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<TailDiagnosticRow> tail_diagnostic(std::span<const double> samples, double alpha,
                                               const std::vector<double>& t_grid) {
  std::vector<TailDiagnosticRow> out;
  for (const CcdfPoint& p : empirical_ccdf(samples, t_grid)) {
    const double scale = std::pow(p.t, alpha);
    out.push_back({p.t, p.p * scale, p.se * scale});
  }
  return out;
}

std::string to_string(TailMethod m) {
  switch (m) {
    case TailMethod::hill: return "hill";
    case TailMethod::ccdf_fit: return "ccdf_fit";
    case TailMethod::expectation_form: return "expectation_form";
    case TailMethod::integral_form: return "integral_form";
    case TailMethod::linear_expectation: return "linear_expectation";
  }
  return "?";
}

TailEstimate hill_estimator(std::span<const double> samples, std::size_t k) {
  require_samples(samples, "hill_estimator");
  if (k < 1 || k >= samples.size()) {
    throw Error(ErrorCode::InvalidArgument, "hill_estimator needs 1 <= k < n");
  }
  std::vector<double> top(samples.begin(), samples.end());
  std::nth_element(top.begin(), top.begin() + static_cast<std::ptrdiff_t>(k), top.end(),
                   std::greater<>());
  const double threshold = top[k];  // X_(k+1)
  if (!(threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "hill_estimator needs X_(k+1) > 0");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(top[i] / threshold);
  if (!(sum > 0.0)) throw Error(ErrorCode::DegenerateTail, "top order statistics coincide");
  const double alpha = static_cast<double>(k) / sum;
  TailEstimate e;
  e.alpha_hat = alpha;
  e.se = alpha / std::sqrt(static_cast<double>(k));
  e.ci = ci95(alpha, e.se);
  e.method = TailMethod::hill;
  e.n_used = k;
  return e;
}

TailEstimate estimate_H_expectation(const ModelSpec& spec, double alpha, double mu_alpha,
                                    std::span<const double> r_samples,
                                    const HExpectationOptions& options) {
  require_samples(r_samples, "estimate_H_expectation");
  if (!(alpha > 0.0) || !(mu_alpha > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need alpha > 0 and mu_alpha > 0");
  }
  const GroupedMean acc =
      outer_loop(spec, r_samples, options, [alpha](const RootVectorSample& v, const std::vector<double>& r) {
        double largest = v.q > 0.0 ? std::pow(v.q, alpha) : 0.0;
        double sum = 0.0;
        for (std::uint32_t i = 0; i < v.n; ++i) {
          const double x = v.c[i] * std::max(r[i], 0.0);
          const double xa = x > 0.0 ? std::pow(x, alpha) : 0.0;
          largest = std::max(largest, xa);
          sum += xa;
        }
        return largest - sum;
      });
  const double scale = alpha * mu_alpha;
  TailEstimate e;
  e.h_hat = acc.mean / scale;
  e.se = acc.se / scale;
  e.ci = ci95(*e.h_hat, e.se);
  e.method = TailMethod::expectation_form;
  e.n_used = acc.n;
  if (*e.h_hat < -3.0 * e.se) {
    throw Error(ErrorCode::NegativeBeyondCI,
                "H estimate " + std::to_string(*e.h_hat) + " below -3 s.e. (" + std::to_string(e.se) + ")");
  }
  return e;
}

HIntegralResult estimate_H_integral(const ModelSpec& spec, double alpha, double mu_alpha,
                                    std::span<const double> r_samples,
                                    const HIntegralOptions& options) {
  require_samples(r_samples, "estimate_H_integral");
  if (!(alpha > 0.0) || !(mu_alpha > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need alpha > 0 and mu_alpha > 0");
  }
  if (options.n_weights < 2) throw Error(ErrorCode::InvalidArgument, "n_weights must be >= 2");

  // R^+ sorted, with prefix sums of (R^+)^alpha.
  std::vector<double> r;
  r.reserve(r_samples.size());
  for (double x : r_samples) r.push_back(std::max(x, 0.0));
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  std::vector<double> r_pow_prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) r_pow_prefix[k + 1] = r_pow_prefix[k] + std::pow(r[k], alpha);

  std::vector<double> positives;
  for (double x : r) {
    if (x > 0.0) positives.push_back(x);
  }

  HIntegralResult result;
  double v_max = 0.0;
  if (options.v_max) {
    v_max = *options.v_max;
  } else if (!positives.empty()) {
    const double level = 1.0 - 1.0 / std::sqrt(static_cast<double>(positives.size()));
    v_max = sorted_quantile(positives, std::clamp(level, 0.9, 0.999));
  }
  result.v_max = v_max;

  // Independent batch of weight vectors, flattened, with owners.
  const std::size_t m = options.n_weights;
  std::vector<double> c_flat;
  std::vector<std::size_t> offsets{0};
  for (std::size_t j = 0; j < m; ++j) {
    CounterStream stream = aux_stream(options.seed, stream_tag::weights_batch, j);
    const RootVectorSample v = sample_root_vector(spec, stream);
    for (double c : v.c) {
      if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "integral form needs C >= 0");
      c_flat.push_back(c);
    }
    offsets.push_back(c_flat.size());
  }
  std::vector<double> c_sorted = c_flat;
  std::sort(c_sorted.begin(), c_sorted.end());
  std::vector<double> c_pow_prefix(c_sorted.size() + 1, 0.0);
  for (std::size_t k = 0; k < c_sorted.size(); ++k) {
    c_pow_prefix[k + 1] = c_pow_prefix[k] + (c_sorted[k] > 0.0 ? std::pow(c_sorted[k], alpha) : 0.0);
  }

  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  const double scale = alpha * mu_alpha;

  if (v_max > 0.0) {
    const double v_pow = std::pow(v_max, alpha);
    // Term of each R: min(R, V)^a - E_C sum_i min(C_i R, V)^a.
    Accumulator by_r;
    for (double x : r) {
      double a = 0.0, b = 0.0;
      if (x > 0.0) {
        a = x < v_max ? std::pow(x, alpha) : v_pow;
        const std::size_t below = count_below(c_sorted, v_max / x);
        b = (std::pow(x, alpha) * c_pow_prefix[below] +
             v_pow * static_cast<double>(c_sorted.size() - below)) / dm;
      }
      by_r.add(a - b);
    }
    // Term of each weight vector: E_R sum_i min(C_i R, V)^a.
    Accumulator by_c;
    for (std::size_t j = 0; j < m; ++j) {
      double b = 0.0;
      for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i) {
        const double c = c_flat[i];
        if (c <= 0.0) continue;
        const std::size_t below = count_below(r, v_max / c);
        b += (std::pow(c, alpha) * r_pow_prefix[below] + v_pow * static_cast<double>(n - below)) / dn;
      }
      by_c.add(b);
    }
    const double value = by_r.mean();
    const double var = by_r.variance() / dn + by_c.variance() / dm;
    result.estimate.h_hat = value / scale;
    result.estimate.se = std::sqrt(var) / scale;
  } else {
    result.estimate.h_hat = 0.0;
    result.estimate.se = 0.0;
  }
  result.estimate.ci = ci95(*result.estimate.h_hat, result.estimate.se);
  result.estimate.method = TailMethod::integral_form;
  result.estimate.n_used = n;

  // Integrand on a log grid over the bulk of the positive samples.
  std::vector<double> grid = options.v_grid;
  if (grid.empty() && positives.size() >= 2) {
    const double lo = sorted_quantile(positives, 0.01);
    const double hi = std::max(lo, sorted_quantile(positives, 0.9999));
    grid = log_grid(lo, hi, hi > lo ? options.grid_points : 1);
  }
  std::sort(grid.begin(), grid.end());
  if (!grid.empty() && !(grid.front() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "integrand grid must be positive");
  }
  if (!grid.empty()) {
    double total_mass = 0.0, straddle_mass = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double v = grid[g];
      Accumulator by_r;
      for (double x : r) {
        const double ind = x > v ? 1.0 : 0.0;
        const double other = x > 0.0 ? static_cast<double>(count_above(c_sorted, v / x)) / dm : 0.0;
        by_r.add(ind - other);
      }
      Accumulator by_c;
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i) {
          if (c_flat[i] > 0.0) s += static_cast<double>(count_above(r, v / c_flat[i])) / dn;
        }
        by_c.add(s);
      }
      const double factor = std::pow(v, alpha - 1.0) / mu_alpha;
      IntegrandPoint p;
      p.v = v;
      p.value = factor * by_r.mean();
      p.se = factor * std::sqrt(by_r.variance() / dn + by_c.variance() / dm);
      result.integrand.push_back(p);

      const double left = g > 0 ? grid[g - 1] : v;
      const double right = g + 1 < grid.size() ? grid[g + 1] : v;
      const double width = 0.5 * (right - left);
      const double mass = std::abs(p.value) * width;
      total_mass += mass;
      if (std::abs(p.value) <= kZ95 * p.se) straddle_mass += mass;
    }
    result.straddle_fraction = total_mass > 0.0 ? straddle_mass / total_mass : 1.0;
    result.cancellation_warning = result.straddle_fraction > 0.5;
  }
  return result;
}

Estimate moment_abs_mlog(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed) {
  const MomentBatch batch(spec, std::max<std::size_t>(n_mc, 2), seed);
  return stable_mean(
      batch,
      [theta](double, MomentBatch::Span w) {
        double s = 0.0;
        for (double c : w) {
          const double a = std::abs(c);
          if (a > 0.0) s += std::pow(a, theta) * std::log(a);
        }
        return s;
      },
      "E[sum |C_i|^theta log |C_i|]");
}

TailEstimate estimate_K_linear(const ModelSpec& spec, double alpha, double mu_alpha_abs,
                               std::span<const double> rl_samples,
                               const HExpectationOptions& options) {
  require_samples(rl_samples, "estimate_K_linear");
  if (!(alpha > 0.0) || !(mu_alpha_abs > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need alpha > 0 and mu > 0");
  }
  const GroupedMean acc =
      outer_loop(spec, rl_samples, options, [alpha](const RootVectorSample& v, const std::vector<double>& r) {
        double total = v.q;
        double sum = 0.0;
        for (std::uint32_t i = 0; i < v.n; ++i) {
          const double x = v.c[i] * r[i];
          total += x;
          sum += std::pow(std::abs(x), alpha);
        }
        return std::pow(std::abs(total), alpha) - sum;
      });
  const double scale = alpha * mu_alpha_abs;
  TailEstimate e;
  e.h_hat = acc.mean / scale;
  e.se = acc.se / scale;
  e.ci = ci95(*e.h_hat, e.se);
  e.method = TailMethod::linear_expectation;
  e.n_used = acc.n;
  return e;
}

NegativeTailReport negative_tail_check(std::span<const double> samples, double alpha,
                                       const std::vector<double>& t_grid, const ModelSpec* spec) {
  if (t_grid.empty()) throw Error(ErrorCode::EmptyGrid, "empty t grid");
  require_samples(samples, "negative_tail_check");
  const std::vector<double> sorted = sorted_copy(samples);
  const double n = static_cast<double>(sorted.size());
  const bool has_envelope = spec && !spec->custom && !spec->symmetrized &&
                            !(spec->dependence == Dependence::q_coupled && spec->joint);
  NegativeTailReport report;
  for (double t : t_grid) {
    NegativeTailRow row;
    row.t = t;
    row.p = static_cast<double>(count_below(sorted, -t)) / n;
    row.se = std::sqrt(row.p * (1.0 - row.p) / n);
    const double scale = std::pow(t, alpha);
    row.scaled = row.p * scale;
    if (has_envelope) {
      if (const auto p_q = prob_less(spec->q, -t)) {
        row.envelope = *p_q * scale;
        row.within_envelope = row.p <= *p_q + 3.0 * std::max(row.se, 1.0 / n);
      }
    }
    report.within_envelope &= row.within_envelope;
    report.rows.push_back(row);
  }
  return report;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "ks_distance of empty sample");
  const std::vector<double> x = sorted_copy(a);
  const std::vector<double> y = sorted_copy(b);
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

}  // namespace treemax
