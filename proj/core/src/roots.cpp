#include "treemax/roots.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "treemax/error.hpp"

namespace treemax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

bool n_is_constant_one(const ModelSpec& spec) {
  if (spec.joint || spec.custom) return false;
  const auto* n = std::get_if<law::CountConstant>(&spec.n);
  return n && n->value == 1;
}

// (N_max * C_max) when both are bounded.
std::optional<double> bounded_weight_sum(const ModelSpec& spec) {
  if (spec.custom) return std::nullopt;
  if (spec.joint) {
    double best = 0.0;
    for (const auto& atom : spec.joint->atoms) {
      double s = 0.0;
      for (double w : atom.weights) s += std::abs(w);
      best = std::max(best, s);
    }
    return best;
  }
  const auto n_max = max_value(spec.n);
  if (!n_max) return std::nullopt;
  if (*n_max == 0) return 0.0;
  const Support s = support(spec.c);
  if (!std::isfinite(s.hi) || !std::isfinite(s.lo)) return std::nullopt;
  return *n_max * std::max(std::abs(s.lo), std::abs(s.hi));
}

}  // namespace

MomentFunction::MomentFunction(const ModelSpec& spec, std::size_t n_mc, std::uint64_t seed)
    : oracle_(moment_oracle(spec)) {
  const bool closed = oracle_.m && oracle_.mlog && oracle_.m(1.0) && oracle_.mlog(1.0);
  if (!closed) {
    batch_ = std::make_shared<MomentBatch>(spec, std::max<std::size_t>(n_mc, 2), seed);
  }
}

Estimate MomentFunction::m(double theta) const {
  if (!batch_) {
    if (const auto v = oracle_.m(theta)) return {*v, 0.0, true};
    throw Error(ErrorCode::NonFiniteMoment, "no closed form for m at theta = " + fmt(theta));
  }
  return batch_->m(theta);
}

Estimate MomentFunction::mlog(double theta) const {
  if (!batch_) {
    if (const auto v = oracle_.mlog(theta)) return {*v, 0.0, true};
    throw Error(ErrorCode::NonFiniteMoment, "no closed form for mlog at theta = " + fmt(theta));
  }
  return batch_->mlog(theta);
}

std::string to_string(RootMethod m) {
  return m == RootMethod::closed_form ? "closed_form" : "monte_carlo";
}

RootSolveResult solve_alpha(const ModelSpec& spec, const RootSolveOptions& options) {
  const double lo = options.bracket.lo;
  const double hi = options.bracket.hi;
  if (!(lo > 0.0 && hi > lo) || options.grid_points < 2) {
    throw Error(ErrorCode::InvalidArgument, "bracket must satisfy 0 < lo < hi");
  }
  const MomentFunction moments(spec, options.n_mc, options.seed);
  auto f = [&](double theta) {
    const double v = moments.m(theta).value - 1.0;
    return std::isnan(v) ? kInf : v;
  };

  // Scan a log-spaced grid for the last upward crossing of 1.
  const std::size_t k = options.grid_points;
  std::vector<double> grid(k), values(k);
  const double step = std::log(hi / lo) / static_cast<double>(k - 1);
  for (std::size_t i = 0; i < k; ++i) {
    grid[i] = i + 1 == k ? hi : lo * std::exp(step * static_cast<double>(i));
    values[i] = f(grid[i]);
  }
  std::optional<std::size_t> crossing;
  bool any_below = false, any_above = false;
  for (std::size_t i = 0; i < k; ++i) {
    (values[i] < 0.0 ? any_below : any_above) = true;
    if (i + 1 < k && values[i] < 0.0 && values[i + 1] >= 0.0) crossing = i;
  }
  if (!crossing) {
    std::string why = !any_above   ? "m(theta) < 1 on the whole bracket"
                      : !any_below ? "m(theta) >= 1 on the whole bracket"
                                   : "only a decreasing crossing of m(theta) = 1";
    throw Error(ErrorCode::NoIncreasingRoot,
                why + " [" + fmt(lo) + ", " + fmt(hi) + "]");
  }

  double a = grid[*crossing];
  double b = grid[*crossing + 1];
  double fa = values[*crossing];
  double fb = values[*crossing + 1];
  // Shrink until the upper end is finite (m may blow up past a pole).
  for (int it = 0; it < 200 && !std::isfinite(fb); ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm < 0.0) {
      a = mid, fa = fm;
    } else {
      b = mid, fb = fm;
    }
  }
  if (!std::isfinite(fb)) {
    throw Error(ErrorCode::NoIncreasingRoot, "m(theta) jumps to infinity without crossing 1");
  }

  double root = a;
  if (fb == 0.0) {
    root = b;
  } else {
    const double tol = options.tol;
    auto close_enough = [tol](double x, double y) { return std::abs(x - y) <= tol; };
    boost::uintmax_t max_iter = 500;
    const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, close_enough, max_iter);
    root = 0.5 * (r.first + r.second);
  }

  RootSolveResult result;
  result.alpha = root;
  const Estimate m_at = moments.m(root);
  const Estimate mu = moments.mlog(root);
  result.residual = std::abs(m_at.value - 1.0);
  result.mu_alpha = mu.value;
  result.mu_alpha_se = mu.se;
  result.method = moments.closed_form() ? RootMethod::closed_form : RootMethod::monte_carlo;

  if (!(mu.value > options.mu_tol)) {
    throw Error(ErrorCode::NoIncreasingRoot,
                "tangent crossing at alpha = " + fmt(root) + " (mu_alpha = " + fmt(mu.value) + ")");
  }
  if (result.method == RootMethod::monte_carlo) {
    if (mu.value <= 3.0 * mu.se) {
      throw Error(ErrorCode::AmbiguousRoot, "sign of mu_alpha not resolved by the sample");
    }
    const double se_alpha = m_at.se / mu.value;
    result.ci = Interval{root - 1.959963984540054 * se_alpha, root + 1.959963984540054 * se_alpha};
  }
  return result;
}

ContractionProfile compute_rho(const ModelSpec& spec, double beta, std::size_t n_mc,
                               std::uint64_t seed) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be > 0");
  ContractionProfile p;
  p.beta = beta;
  const MomentFunction moments(spec, n_mc, seed);
  const Estimate rho = moments.m(beta);
  p.rho_beta = rho.value;
  p.rho_se = rho.se;
  try {
    const Estimate q = moment_q_abs(spec, beta, n_mc, seed);
    p.q_beta = q.value;
    p.q_beta_se = q.se;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFiniteMoment) throw;
    p.q_beta = kInf;
    p.q_finite = false;
  }
  p.usable = std::isfinite(p.rho_beta) && p.rho_beta + 3.0 * p.rho_se < 1.0 && p.q_finite;
  return p;
}

std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::pass: return "pass";
    case ConditionStatus::bounded: return "bounded";
    case ConditionStatus::unstable: return "unstable";
    case ConditionStatus::fail: return "fail";
  }
  return "?";
}

ConditionItem power_sum_moment(const ModelSpec& spec, double a, double b, std::size_t n_mc,
                               std::uint64_t seed, const std::string& name) {
  ConditionItem item;
  item.name = name;
  if (const auto bound = bounded_weight_sum(spec)) {
    // sum C_i^a <= N_max * C_max^a, deterministic.
    double per_term = 0.0;
    std::uint32_t n_max = 0;
    if (spec.joint) {
      for (const auto& atom : spec.joint->atoms) {
        double s = 0.0;
        for (double w : atom.weights) s += std::pow(std::abs(w), a);
        per_term = std::max(per_term, s);
      }
      item.value = std::pow(per_term, b);
    } else {
      n_max = *max_value(spec.n);
      const Support s = support(spec.c);
      const double c_max = std::max(std::abs(s.lo), std::abs(s.hi));
      item.value = n_max == 0 ? 0.0 : std::pow(n_max * std::pow(c_max, a), b);
    }
    item.status = ConditionStatus::bounded;
    item.detail = "deterministic bound from bounded N and C";
    return item;
  }
  if (n_is_constant_one(spec)) {
    if (const auto v = power_moment(spec.c, a * b)) {
      item.value = *v;
      item.status = std::isfinite(*v) ? ConditionStatus::pass : ConditionStatus::fail;
      item.detail = "closed form, N = 1";
      return item;
    }
  }
  const MomentBatch batch(spec, std::max<std::size_t>(n_mc, 2), seed);
  try {
    const Estimate e = stable_mean(
        batch,
        [a, b](double, MomentBatch::Span w) {
          double s = 0.0;
          for (double c : w) s += std::pow(std::abs(c), a);
          return std::pow(s, b);
        },
        name);
    item.value = e.value;
    item.se = e.se;
    item.status = ConditionStatus::pass;
    item.detail = "Monte Carlo, stability diagnostic passed (heuristic)";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFiniteMoment) throw;
    item.value = kInf;
    item.status = ConditionStatus::unstable;
    item.detail = e.what();
  }
  return item;
}

ConditionReport check_conditions(const ModelSpec& spec, double alpha,
                                 const std::vector<double>& eps_grid, std::size_t n_mc,
                                 std::uint64_t seed) {
  ConditionReport report;
  report.alpha_above_one = alpha > 1.0;
  if (report.alpha_above_one) {
    ConditionItem item = power_sum_moment(spec, 1.0, alpha, n_mc, seed, "E[(sum C_i)^alpha]");
    report.moment_condition_ok =
        item.status == ConditionStatus::pass || item.status == ConditionStatus::bounded;
    report.items.push_back(std::move(item));
  } else {
    for (double eps : eps_grid) {
      if (!(eps > 0.0 && eps < 1.0)) continue;
      ConditionItem item = power_sum_moment(spec, alpha / (1.0 + eps), 1.0 + eps, n_mc, seed,
                                            "E[(sum C_i^{alpha/(1+eps)})^{1+eps}], eps=" + fmt(eps));
      report.moment_condition_ok |=
          item.status == ConditionStatus::pass || item.status == ConditionStatus::bounded;
      report.items.push_back(std::move(item));
    }
  }

  auto q_item = [&](const char* name, auto fn) {
    ConditionItem item;
    item.name = name;
    try {
      const Estimate e = fn(spec, alpha, n_mc, seed);
      item.value = e.value;
      item.se = e.se;
      item.status = ConditionStatus::pass;
      item.detail = e.closed_form ? "closed form" : "Monte Carlo (heuristic)";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteMoment) throw;
      item.value = kInf;
      item.status = ConditionStatus::unstable;
      item.detail = e.what();
    }
    report.items.push_back(std::move(item));
  };
  q_item("E[(Q^+)^alpha]", moment_q_pos);
  q_item("E[|Q|^alpha]", moment_q_abs);
  return report;
}

ContractionProfile select_beta(const ModelSpec& spec, double alpha, std::size_t n_mc,
                               std::uint64_t seed) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  constexpr int kSteps = 24;
  const double start = 0.75 * alpha;
  const double h = (alpha / 4.0) / kSteps;
  std::vector<double> candidates;
  for (int i = 0; i < kSteps; ++i) candidates.push_back(start - i * h);  // down to > alpha/2
  for (int i = 1; i < kSteps; ++i) candidates.push_back(start + i * h);  // up to < alpha

  const MomentFunction moments(spec, n_mc, seed);
  for (double beta : candidates) {
    const Estimate rho = moments.m(beta);
    if (!(std::isfinite(rho.value) && rho.value + 3.0 * rho.se < 1.0)) continue;
    const ConditionItem power = power_sum_moment(spec, beta, alpha / beta, n_mc, seed,
                                                 "E[(sum C_i^beta)^{alpha/beta}]");
    if (power.status != ConditionStatus::pass && power.status != ConditionStatus::bounded) continue;
    ContractionProfile p = compute_rho(spec, beta, n_mc, seed);
    if (p.usable) return p;
  }
  throw Error(ErrorCode::NoContractiveBeta,
              "no beta in (alpha/2, alpha) with rho_beta < 1, alpha = " + fmt(alpha));
}

}  // namespace treemax
