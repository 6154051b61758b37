#include "treemax/symmetry.hpp"

#include <algorithm>
#include <cmath>

#include "treemax/parallel.hpp"
#include "treemax/simulate.hpp"
#include "treemax/traversal.hpp"

namespace treemax {

namespace {

bool conditionally_degenerate(const ModelSpec& spec) {
  if (spec.dependence == Dependence::q_coupled && spec.joint) {
    for (const auto& atom : spec.joint->atoms) {
      if (!is_degenerate(atom.q_given ? *atom.q_given : spec.q)) return false;
    }
    return true;
  }
  return is_degenerate(spec.q);
}

struct PairedMean {
  double mean = 0.0;
  double se = 0.0;
};

PairedMean paired(const std::vector<double>& d) {
  double s = 0.0, s2 = 0.0;
  for (double x : d) {
    s += x;
    s2 += x * x;
  }
  const auto n = static_cast<double>(d.size());
  const double mean = s / n;
  const double var = d.size() > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace

ResampledVector conditional_resample(const ModelSpec& spec, NodeKey key) {
  if (spec.custom) {
    throw Error(ErrorCode::UnsupportedDependence,
                "custom sampler exposes no conditional law of Q given (N, C)");
  }
  const NodeShape shape = draw_shape(spec, key);
  ResampledVector out;
  out.q = draw_q_raw(spec, key, shape);
  out.q_hat = draw_q_resample(spec, key, shape);
  out.n = shape.n;
  out.c.reserve(shape.n);
  for (std::uint32_t i = 0; i < shape.n; ++i) out.c.push_back(draw_weight(spec, key, shape, i, key.child(i)));
  return out;
}

ResampledVector conditional_resample(const ModelSpec& spec, CounterStream& stream) {
  return conditional_resample(spec, NodeKey{stream.next_u64()});
}

SymmetrizedModel symmetrize_model(const ModelSpec& spec) {
  if (spec.custom) {
    throw Error(ErrorCode::UnsupportedDependence,
                "custom sampler exposes no conditional law of Q given (N, C)");
  }
  if (spec.symmetrized) throw Error(ErrorCode::InvalidArgument, "model is already symmetrized");
  if (conditionally_degenerate(spec)) {
    throw Error(ErrorCode::DegenerateSymmetrization,
                "Q is a deterministic function of (N, C); (Q - Q')/2 = 0");
  }
  SymmetrizedModel sym;
  sym.base = spec;
  sym.spec = spec;
  sym.spec.symmetrized = true;
  return sym;
}

LevyReport check_levy_inequality(const SymmetrizedModel& sym, const std::vector<double>& t_grid,
                                 const CheckOptions& options) {
  return check_levy_inequality(sym.spec, t_grid, options);
}

LevyReport check_levy_inequality(const ModelSpec& spec, const std::vector<double>& t_grid,
                                 const CheckOptions& options) {
  if (options.replicas < 2) throw Error(ErrorCode::InvalidArgument, "replicas must be >= 2");
  std::vector<double> linear(options.replicas), largest(options.replicas);
  parallel_for(options.replicas, options.parallelism, [&](std::size_t i) {
    CompensatedSum sum;
    double m = 0.0;
    auto visitor = [&](NodeContext& ctx) {
      const double pi = ctx.pi();
      if (pi == 0.0) return;
      const double t = ctx.q() * pi;
      sum.add(t);
      m = std::max(m, std::abs(t));
    };
    traverse(spec, replica_root(options.seed, i), options.depth, TraverseOptions{}, visitor);
    const double v = sum.value();
    if (!std::isfinite(v)) throw Error(ErrorCode::Overflow, "linear sum saturated");
    linear[i] = v;
    largest[i] = m;
  });

  LevyReport report;
  report.depth = options.depth;
  report.replicas = options.replicas;
  report.seed = options.seed;
  std::vector<double> d(options.replicas);
  for (double t : t_grid) {
    double above_linear = 0.0, above_max = 0.0;
    for (std::size_t i = 0; i < options.replicas; ++i) {
      const double a = std::abs(linear[i]) > t ? 1.0 : 0.0;
      const double b = largest[i] > t ? 1.0 : 0.0;
      above_linear += a;
      above_max += b;
      d[i] = a - 0.5 * b;
    }
    const PairedMean pm = paired(d);
    LevyRow row;
    row.t = t;
    row.p_linear = above_linear / static_cast<double>(options.replicas);
    row.p_max = above_max / static_cast<double>(options.replicas);
    row.margin = pm.mean;
    row.se = pm.se;
    row.violated = pm.mean < -report.band * pm.se;
    report.violations += row.violated ? 1 : 0;
    report.rows.push_back(row);
  }
  return report;
}

SandwichReport check_sandwich(const ModelSpec& spec, const std::vector<double>& t_grid,
                              const CheckOptions& options) {
  SandwichReport report;
  report.depth = options.depth;
  report.replicas = options.replicas;
  report.seed = options.seed;
  try {
    symmetrize_model(spec);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSymmetrization) throw;
    report.skipped = true;
    report.note = e.what();
    return report;
  }
  if (options.replicas < 2) throw Error(ErrorCode::InvalidArgument, "replicas must be >= 2");

  std::vector<double> linear(options.replicas), symmetric(options.replicas);
  std::vector<char> pathwise_bad(options.replicas, 0);
  parallel_for(options.replicas, options.parallelism, [&](std::size_t i) {
    CompensatedSum r, r_hat, r_bar;
    double scale = 0.0;
    auto visitor = [&](NodeContext& ctx) {
      const double pi = ctx.pi();
      if (pi == 0.0) return;
      const double q = ctx.q_raw();
      const double q_prime = ctx.q_resample();
      r.add(q * pi);
      r_hat.add(-q_prime * pi);
      r_bar.add(0.5 * (q - q_prime) * pi);
      scale += std::abs(q * pi) + std::abs(q_prime * pi);
    };
    traverse(spec, replica_root(options.seed, i), options.depth, TraverseOptions{}, visitor);
    const double a = r.value(), b = r_hat.value(), c = r_bar.value();
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
      throw Error(ErrorCode::Overflow, "linear sum saturated");
    }
    linear[i] = a;
    symmetric[i] = c;
    pathwise_bad[i] = std::abs(c) > 0.5 * (std::abs(a) + std::abs(b)) + 1e-12 * scale;
  });
  for (char bad : pathwise_bad) report.pathwise_violations += bad ? 1 : 0;

  const auto n = static_cast<double>(options.replicas);
  std::vector<double> d(options.replicas);
  for (double t : t_grid) {
    double above_sym = 0.0, above_lin = 0.0;
    for (std::size_t i = 0; i < options.replicas; ++i) {
      const double a = std::abs(symmetric[i]) > t ? 1.0 : 0.0;
      const double b = std::abs(linear[i]) > t ? 1.0 : 0.0;
      above_sym += a;
      above_lin += b;
      d[i] = 2.0 * b - a;
    }
    const PairedMean pm = paired(d);
    SandwichRow row;
    row.t = t;
    row.p_symmetric = above_sym / n;
    row.p_linear = above_lin / n;
    row.margin = pm.mean;
    row.se = pm.se;
    row.checked = t > 0.0 && row.p_symmetric < 0.5 && row.p_linear < 0.5;
    row.violated = row.checked && pm.mean < -report.band * pm.se;
    report.violations += row.violated ? 1 : 0;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace treemax
