#include "treemax/model.hpp"

#include <cmath>
#include <limits>

namespace treemax {
namespace {

RootVectorSample custom_vector(const ModelSpec& spec, NodeKey key) {
  CounterStream stream{key.lane_key(Lane::custom)};
  RootVectorSample s = spec.custom(stream);
  if (s.c.size() != s.n) {
    throw Error(ErrorCode::InvalidArgument, "custom sampler returned c.size() != n");
  }
  return s;
}

bool is_point_mass_at(const RealLaw& law, double value) {
  const Support s = support(law);
  return s.lo == value && s.hi == value;
}

void reject(ValidationReport& report, const std::string& name, const std::string& detail) {
  report.items.push_back({name, CheckStatus::fail, detail});
  throw Error(ErrorCode::RejectedModel, name + ": " + detail);
}

}  // namespace

NodeShape draw_shape(const ModelSpec& spec, NodeKey key) {
  if (spec.custom) return {custom_vector(spec, key).n, nullptr};
  CounterStream stream{key.lane_key(Lane::count)};
  if (spec.joint) {
    const auto& atoms = spec.joint->atoms;
    const double u = stream.uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
      cumulative += atoms[i].prob;
      if (u < cumulative) return {static_cast<std::uint32_t>(atoms[i].weights.size()), &atoms[i]};
    }
    const JointAtom& last = atoms.back();
    return {static_cast<std::uint32_t>(last.weights.size()), &last};
  }
  return {sample(spec.n, stream), nullptr};
}

double draw_q_raw(const ModelSpec& spec, NodeKey key, const NodeShape& shape) {
  if (spec.custom) return custom_vector(spec, key).q;
  CounterStream stream{key.lane_key(Lane::q)};
  if (spec.dependence == Dependence::q_coupled && shape.atom && shape.atom->q_given) {
    return sample(*shape.atom->q_given, stream);
  }
  return sample(spec.q, stream);
}

double draw_q_resample(const ModelSpec& spec, NodeKey key, const NodeShape& shape) {
  if (spec.custom) {
    throw Error(ErrorCode::UnsupportedDependence,
                "custom sampler exposes no conditional law of Q given (N, C)");
  }
  CounterStream stream{key.lane_key(Lane::q_hat)};
  if (spec.dependence == Dependence::q_coupled && shape.atom && shape.atom->q_given) {
    return sample(*shape.atom->q_given, stream);
  }
  return sample(spec.q, stream);
}

double draw_q(const ModelSpec& spec, NodeKey key, const NodeShape& shape) {
  const double q = draw_q_raw(spec, key, shape);
  if (!spec.symmetrized) return q;
  return 0.5 * (q - draw_q_resample(spec, key, shape));
}

double draw_weight(const ModelSpec& spec, NodeKey parent_key, const NodeShape& parent,
                   std::uint32_t index, NodeKey child_key) {
  if (spec.custom) return custom_vector(spec, parent_key).c[index];
  if (parent.atom) return parent.atom->weights[index];
  CounterStream stream{child_key.lane_key(Lane::weight)};
  return sample(spec.c, stream);
}

RootVectorSample sample_root_vector(const ModelSpec& spec, NodeKey key) {
  RootVectorSample out;
  const NodeShape shape = draw_shape(spec, key);
  out.q = draw_q(spec, key, shape);
  out.n = shape.n;
  out.c.reserve(shape.n);
  for (std::uint32_t i = 0; i < shape.n; ++i) {
    out.c.push_back(draw_weight(spec, key, shape, i, key.child(i)));
  }
  return out;
}

RootVectorSample sample_root_vector(const ModelSpec& spec, CounterStream& stream) {
  return sample_root_vector(spec, NodeKey{stream.next_u64()});
}

// ---------------------------------------------------------------------------

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::asserted: return "asserted";
    case CheckStatus::not_asserted: return "not_asserted";
  }
  return "?";
}

bool ValidationReport::ok() const {
  for (const auto& item : items)
    if (item.status == CheckStatus::fail) return false;
  return true;
}

ValidationReport validate_model(const ModelSpec& spec, RecursionKind kind) {
  ValidationReport report;

  try {
    check_parameters(spec.q);
    if (!spec.joint) {
      check_parameters(spec.n);
      check_parameters(spec.c);
    }
  } catch (const Error& e) {
    reject(report, "parameters", e.what());
  }
  report.items.push_back({"parameters", CheckStatus::pass, "all law parameters in range"});

  if (spec.joint) {
    double total = 0.0;
    for (const auto& atom : spec.joint->atoms) {
      if (!(atom.prob >= 0.0)) reject(report, "joint_table", "negative atom probability");
      total += atom.prob;
      if (atom.q_given) {
        try {
          check_parameters(*atom.q_given);
        } catch (const Error& e) {
          reject(report, "joint_table", e.what());
        }
      }
    }
    if (spec.joint->atoms.empty() || std::abs(total - 1.0) > 1e-9) {
      reject(report, "joint_table", "atom probabilities must sum to 1");
    }
  }

  // Dependence declaration must match what the model can express.
  if (spec.dependence == Dependence::q_coupled && !spec.custom) {
    bool all_conditional = spec.joint.has_value();
    if (spec.joint)
      for (const auto& atom : spec.joint->atoms) all_conditional &= atom.q_given.has_value();
    if (!all_conditional) {
      reject(report, "dependence",
             "q_coupled requires a joint table with a conditional Q law per atom");
    }
  }
  report.items.push_back({"dependence", CheckStatus::pass,
                          spec.dependence == Dependence::q_coupled ? "q_coupled" : "q_independent"});

  // P(|Q| > 0) > 0
  if (spec.custom) {
    report.items.push_back({"q_nonzero", CheckStatus::asserted, "custom sampler, not checkable"});
  } else {
    bool q_zero = false;
    if (spec.dependence == Dependence::q_coupled && spec.joint) {
      q_zero = true;
      for (const auto& atom : spec.joint->atoms)
        if (atom.prob > 0.0) q_zero &= is_point_mass_at(*atom.q_given, 0.0);
    } else {
      q_zero = is_point_mass_at(spec.q, 0.0);
    }
    if (q_zero) reject(report, "q_nonzero", "Q = 0 almost surely; need P(|Q| > 0) > 0");
    report.items.push_back({"q_nonzero", CheckStatus::pass, "P(|Q| > 0) > 0"});
  }

  report.items.push_back(
      {"n_finite", CheckStatus::pass, "every sampler returns a finite integer N"});

  // Nonnegative weights for the max recursion.
  if (spec.custom) {
    report.items.push_back({"weights_nonnegative", CheckStatus::asserted,
                            "custom sampler, checked per node during traversal"});
  } else {
    double lo = std::numeric_limits<double>::infinity();
    if (spec.joint) {
      for (const auto& atom : spec.joint->atoms)
        for (double w : atom.weights) lo = std::min(lo, w);
    } else if (!always_zero(spec.n)) {
      lo = support(spec.c).lo;
    }
    if (kind == RecursionKind::max && lo < 0.0) {
      reject(report, "weights_nonnegative", "the max recursion needs C_i >= 0");
    }
    report.items.push_back({"weights_nonnegative", CheckStatus::pass,
                            lo >= 0.0 ? "C_i >= 0" : "mixed-sign weights (linear recursion)"});
  }

  report.items.push_back({"nonarithmetic",
                          spec.nonarithmetic_asserted ? CheckStatus::asserted
                                                      : CheckStatus::not_asserted,
                          "user assertion; never inferred from samples"});
  return report;
}

// ---------------------------------------------------------------------------

MomentOracle moment_oracle(const ModelSpec& spec) {
  MomentOracle oracle;
  if (spec.custom) return oracle;

  if (spec.joint) {
    const JointTable table = *spec.joint;
    oracle.m = [table](double theta) -> std::optional<double> {
      double s = 0.0;
      for (const auto& atom : table.atoms)
        for (double w : atom.weights) s += atom.prob * std::pow(w, theta);
      return s;
    };
    oracle.mlog = [table](double theta) -> std::optional<double> {
      double s = 0.0;
      for (const auto& atom : table.atoms)
        for (double w : atom.weights)
          if (w != 0.0) s += atom.prob * std::pow(w, theta) * std::log(w);
      return s;
    };
  } else {
    const double mean_n = mean(spec.n);
    const RealLaw c = spec.c;
    oracle.m = [mean_n, c](double theta) -> std::optional<double> {
      if (mean_n == 0.0) return 0.0;
      const auto mc = power_moment(c, theta);
      if (!mc) return std::nullopt;
      return mean_n * *mc;
    };
    oracle.mlog = [mean_n, c](double theta) -> std::optional<double> {
      if (mean_n == 0.0) return 0.0;
      const auto mc = power_log_moment(c, theta);
      if (!mc) return std::nullopt;
      return mean_n * *mc;
    };
  }

  if (spec.symmetrized) {
    // (Q - Q')/2 has no closed-form moments in general.
    return oracle;
  }

  if (spec.dependence == Dependence::q_coupled && spec.joint) {
    const JointTable table = *spec.joint;
    auto mix = [table](auto moment_fn) {
      return [table, moment_fn](double theta) -> std::optional<double> {
        double s = 0.0;
        for (const auto& atom : table.atoms) {
          const auto v = moment_fn(*atom.q_given, theta);
          if (!v) return std::nullopt;
          s += atom.prob * *v;
        }
        return s;
      };
    };
    oracle.q_abs = mix([](const RealLaw& l, double t) { return abs_moment(l, t); });
    oracle.q_pos = mix([](const RealLaw& l, double t) { return positive_part_moment(l, t); });
  } else {
    const RealLaw q = spec.q;
    oracle.q_abs = [q](double theta) { return abs_moment(q, theta); };
    oracle.q_pos = [q](double theta) { return positive_part_moment(q, theta); };
  }
  return oracle;
}

MomentBatch::MomentBatch(const ModelSpec& spec, std::size_t size, std::uint64_t seed) {
  if (size == 0) throw Error(ErrorCode::InvalidArgument, "moment batch size must be >= 1");
  q_.reserve(size);
  offsets_.reserve(size + 1);
  offsets_.push_back(0);
  for (std::size_t k = 0; k < size; ++k) {
    CounterStream stream = aux_stream(seed, stream_tag::moments, k);
    RootVectorSample s = sample_root_vector(spec, stream);
    q_.push_back(s.q);
    c_.insert(c_.end(), s.c.begin(), s.c.end());
    offsets_.push_back(c_.size());
  }
}

Estimate MomentBatch::finish(double sum, double sum_sq, std::size_t n) {
  Estimate e;
  const double nn = static_cast<double>(n);
  e.value = sum / nn;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - nn * e.value * e.value) / (nn - 1.0));
    e.se = std::sqrt(var / nn);
  }
  return e;
}

Estimate MomentBatch::m(double theta) const {
  return mean_of([theta](double, Span w) {
    double s = 0.0;
    for (double c : w) s += std::pow(std::abs(c), theta);
    return s;
  });
}

Estimate MomentBatch::mlog(double theta) const {
  return mean_of([theta](double, Span w) {
    double s = 0.0;
    for (double c : w)
      if (c != 0.0) s += std::pow(std::abs(c), theta) * std::log(std::abs(c));
    return s;
  });
}

Estimate MomentBatch::q_abs(double theta) const {
  return mean_of([theta](double q, Span) { return std::pow(std::abs(q), theta); });
}

Estimate MomentBatch::q_pos(double theta) const {
  return mean_of([theta](double q, Span) { return std::pow(std::max(q, 0.0), theta); });
}

namespace {

Estimate closed_or_mc(const MomentOracle::Fn& closed, const ModelSpec& spec, double theta,
                      std::size_t n_mc, std::uint64_t seed, const char* what,
                      double (*term)(double, MomentBatch::Span, double)) {
  if (closed) {
    if (const auto v = closed(theta)) {
      if (std::isinf(*v)) {
        throw Error(ErrorCode::NonFiniteMoment, std::string(what) + " diverges (closed form)");
      }
      return {*v, 0.0, true};
    }
  }
  const MomentBatch batch(spec, std::max<std::size_t>(n_mc, 2), seed);
  return stable_mean(
      batch, [&](double q, MomentBatch::Span w) { return term(q, w, theta); }, what);
}

}  // namespace

Estimate moment_m(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed) {
  return closed_or_mc(moment_oracle(spec).m, spec, theta, n_mc, seed, "m(theta)",
                      [](double, MomentBatch::Span w, double t) {
                        double s = 0.0;
                        for (double c : w) s += std::pow(std::abs(c), t);
                        return s;
                      });
}

Estimate moment_mlog(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed) {
  return closed_or_mc(moment_oracle(spec).mlog, spec, theta, n_mc, seed,
                      "E[sum C^theta log C]", [](double, MomentBatch::Span w, double t) {
                        double s = 0.0;
                        for (double c : w)
                          if (c != 0.0) s += std::pow(std::abs(c), t) * std::log(std::abs(c));
                        return s;
                      });
}

Estimate moment_q_abs(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed) {
  return closed_or_mc(moment_oracle(spec).q_abs, spec, theta, n_mc, seed, "E[|Q|^theta]",
                      [](double q, MomentBatch::Span, double t) { return std::pow(std::abs(q), t); });
}

Estimate moment_q_pos(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed) {
  return closed_or_mc(moment_oracle(spec).q_pos, spec, theta, n_mc, seed, "E[(Q^+)^theta]",
                      [](double q, MomentBatch::Span, double t) {
                        return std::pow(std::max(q, 0.0), t);
                      });
}

}  // namespace treemax
