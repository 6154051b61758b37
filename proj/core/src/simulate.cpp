#include "treemax/simulate.hpp"

#include <cmath>
#include <limits>

#include "treemax/parallel.hpp"

namespace treemax {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double term(double q, double pi) { return (q == 0.0 || pi == 0.0) ? 0.0 : q * pi; }

struct MaxVisitor {
  double best = kNegInf;
  void operator()(NodeContext& ctx) { best = std::max(best, term(ctx.q(), ctx.pi())); }
};

// Positive terms compared through log(Q) + log(Pi); nonpositive ones directly.
struct LogMaxVisitor {
  double best_log = kNegInf;
  double best_nonpositive = kNegInf;
  bool require_positive = false;
  void operator()(NodeContext& ctx) {
    const double q = ctx.q();
    if (q > 0.0) {
      if (ctx.pi() > 0.0) best_log = std::max(best_log, std::log(q) + ctx.log_pi());
      else best_nonpositive = std::max(best_nonpositive, 0.0);
    } else {
      if (require_positive) throw Error(ErrorCode::InvalidArgument, "additive mode needs Q > 0");
      best_nonpositive = std::max(best_nonpositive, term(q, ctx.pi()));
    }
  }
};

struct LinearVisitor {
  CompensatedSum sum;
  void operator()(NodeContext& ctx) {
    const double t = term(ctx.q(), ctx.pi());
    if (t != 0.0) sum.add(t);
  }
};

struct CoupledVisitor {
  double best = kNegInf;
  CompensatedSum sum;
  void operator()(NodeContext& ctx) {
    const double t = term(ctx.q(), ctx.pi());
    best = std::max(best, t);
    if (t != 0.0) sum.add(t);
  }
};

struct IteratedVisitor {
  const RealLaw* terminal;
  std::uint32_t depth;
  double best = kNegInf;
  void operator()(NodeContext& ctx) {
    const double v = ctx.depth() == depth ? ctx.terminal(*terminal) : ctx.q();
    best = std::max(best, term(v, ctx.pi()));
  }
};

double finite_sum(const CompensatedSum& sum) {
  const double v = sum.value();
  if (!std::isfinite(v)) throw Error(ErrorCode::Overflow, "linear sum saturated");
  return v;
}

bool q_strictly_positive(const ModelSpec& spec) {
  if (spec.custom || spec.symmetrized) return false;
  if (spec.dependence == Dependence::q_coupled && spec.joint) {
    for (const auto& atom : spec.joint->atoms) {
      const RealLaw& q = atom.q_given ? *atom.q_given : spec.q;
      if (!(support(q).lo > 0.0)) return false;
    }
    return true;
  }
  return support(spec.q).lo > 0.0;
}

void check_config(const ModelSpec& spec, const TraversalConfig& cfg) {
  if (cfg.terminal_law && cfg.mode != Functional::max) {
    throw Error(ErrorCode::InvalidArgument, "terminal_law requires mode max");
  }
  if (cfg.mode == Functional::additive_max && !q_strictly_positive(spec)) {
    throw Error(ErrorCode::InvalidArgument, "additive mode requires Q > 0 a.s.");
  }
}

}  // namespace

std::string to_string(Functional f) {
  switch (f) {
    case Functional::max: return "max";
    case Functional::linear: return "linear";
    case Functional::both_coupled: return "both_coupled";
    case Functional::additive_max: return "additive_max";
  }
  return "?";
}

Functional functional_from_string(const std::string& s) {
  if (s == "max") return Functional::max;
  if (s == "linear") return Functional::linear;
  if (s == "both_coupled") return Functional::both_coupled;
  if (s == "additive_max") return Functional::additive_max;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + s + "'");
}

FunctionalValue sample_functional(const ModelSpec& spec, const TraversalConfig& cfg, NodeKey root) {
  check_config(spec, cfg);
  TraverseOptions options{cfg.order, cfg.prune_zero, false};
  FunctionalValue out;

  auto log_pass = [&](bool require_positive) {
    TraverseOptions log_options = options;
    log_options.track_log_pi = true;
    LogMaxVisitor v;
    v.require_positive = require_positive;
    traverse(spec, root, cfg.depth, log_options, v);
    return v;
  };

  switch (cfg.mode) {
    case Functional::max: {
      MaxVisitor v;
      traverse(spec, root, cfg.depth, options, v);
      out.value = v.best;
      if (std::isinf(v.best) && v.best > 0.0) {
        const LogMaxVisitor lv = log_pass(false);
        out.log_value = lv.best_log;
      }
      break;
    }
    case Functional::additive_max: {
      const LogMaxVisitor lv = log_pass(true);
      out.value = lv.best_log;
      out.log_value = lv.best_log;
      break;
    }
    case Functional::linear: {
      LinearVisitor v;
      traverse(spec, root, cfg.depth, options, v);
      out.value = finite_sum(v.sum);
      break;
    }
    case Functional::both_coupled: {
      CoupledVisitor v;
      traverse(spec, root, cfg.depth, options, v);
      out.paired = finite_sum(v.sum);
      out.value = v.best;
      break;
    }
  }
  return out;
}

double sample_iterated(const ModelSpec& spec, const TraversalConfig& cfg, NodeKey root) {
  if (!cfg.terminal_law) throw Error(ErrorCode::InvalidArgument, "iterated process needs terminal_law");
  if (cfg.depth < 1) throw Error(ErrorCode::InvalidArgument, "iterated process needs depth >= 1");
  check_config(spec, cfg);
  IteratedVisitor v{&*cfg.terminal_law, cfg.depth};
  traverse(spec, root, cfg.depth, TraverseOptions{cfg.order, cfg.prune_zero, false}, v);
  if (std::isinf(v.best) && v.best > 0.0) throw Error(ErrorCode::Overflow, "iterated value overflowed");
  return v.best;
}

TruncationBound truncation_bound(const ContractionProfile& profile, double moment,
                                 std::uint32_t depth, double epsilon) {
  if (!(profile.rho_beta < 1.0)) {
    throw Error(ErrorCode::UnusableProfile,
                "rho_beta = " + std::to_string(profile.rho_beta) + " is not < 1");
  }
  if (!(epsilon > 0.0) || !(moment >= 0.0) || !(profile.beta > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "truncation bound needs eps > 0, beta > 0, moment >= 0");
  }
  TruncationBound b;
  b.beta = profile.beta;
  b.rho_beta = profile.rho_beta;
  b.moment = moment;
  b.epsilon = epsilon;
  b.depth = depth;
  b.bound = std::min(1.0, std::pow(epsilon, -profile.beta) * std::pow(profile.rho_beta, depth) * moment);
  return b;
}

std::uint32_t depth_for_target(const ContractionProfile& profile, double moment, double epsilon,
                               double target, std::uint32_t max_depth) {
  if (!(target > 0.0)) throw Error(ErrorCode::InvalidArgument, "target must be positive");
  if (truncation_bound(profile, moment, 0, epsilon).bound <= target) return 0;
  if (profile.rho_beta <= 0.0) return 1;
  const double scale = std::pow(epsilon, -profile.beta) * moment;
  double guess = std::ceil(std::log(target / scale) / std::log(profile.rho_beta));
  std::uint32_t n = guess < 1.0 ? 1 : guess > max_depth ? max_depth : static_cast<std::uint32_t>(guess);
  while (n > 1 && truncation_bound(profile, moment, n - 1, epsilon).bound <= target) --n;
  while (truncation_bound(profile, moment, n, epsilon).bound > target) {
    if (n >= max_depth) {
      throw Error(ErrorCode::InvalidArgument, "target needs depth beyond " + std::to_string(max_depth));
    }
    ++n;
  }
  return n;
}

SampleSet run_replicas(const ModelSpec& spec, const TraversalConfig& cfg, std::size_t replicas,
                       std::uint64_t seed, unsigned parallelism,
                       const std::optional<TruncationInput>& trunc) {
  if (replicas < 1) throw Error(ErrorCode::InvalidArgument, "replicas must be >= 1");
  check_config(spec, cfg);

  SampleSet set;
  set.seed = seed;
  set.depth = cfg.depth;
  set.replica_count = replicas;
  set.mode = cfg.mode;
  set.iterated = cfg.terminal_law.has_value();
  set.values.resize(replicas);
  if (cfg.mode == Functional::both_coupled) set.paired_values.emplace(replicas);
  std::vector<double> log_values;
  if (cfg.mode == Functional::max && !set.iterated) {
    log_values.assign(replicas, std::numeric_limits<double>::quiet_NaN());
  }

  parallel_for(replicas, parallelism, [&](std::size_t i) {
    const NodeKey root = replica_root(seed, i);
    if (set.iterated) {
      set.values[i] = sample_iterated(spec, cfg, root);
      return;
    }
    const FunctionalValue v = sample_functional(spec, cfg, root);
    set.values[i] = v.value;
    if (set.paired_values) (*set.paired_values)[i] = *v.paired;
    if (v.log_value && !log_values.empty()) log_values[i] = *v.log_value;
  });

  // Any overflow switches the whole set to the log domain.
  bool overflow = false;
  for (std::size_t i = 0; i < log_values.size(); ++i) overflow |= !std::isnan(log_values[i]);
  if (overflow) {
    for (std::size_t i = 0; i < replicas; ++i) {
      if (std::isnan(log_values[i])) {
        const double v = set.values[i];
        log_values[i] = v > 0.0 ? std::log(v) : kNegInf;
      }
    }
    set.values = std::move(log_values);
    set.log_domain = true;
  }
  if (cfg.mode == Functional::additive_max) set.log_domain = true;

  if (trunc) set.trunc_bound = truncation_bound(trunc->profile, trunc->moment, cfg.depth, trunc->epsilon);
  return set;
}

TreeCensus census(const ModelSpec& spec, std::uint32_t depth, NodeKey root, ChildOrder order) {
  TreeCensus out;
  out.generation_sizes.assign(depth + 1, 0);
  out.offspring_of_parents.assign(depth + 1, 0);
  auto visitor = [&](NodeContext& ctx) {
    ++out.generation_sizes[ctx.depth()];
    if (ctx.depth() < depth) out.offspring_of_parents[ctx.depth() + 1] += ctx.shape().n;
  };
  const TraversalStats stats = traverse(spec, root, depth, TraverseOptions{order, false, false}, visitor);
  out.node_visits = stats.node_visits;
  out.peak_stack = stats.peak_stack;
  return out;
}

}  // namespace treemax
