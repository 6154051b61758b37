#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "treemax/error.hpp"
#include "treemax/laws.hpp"
#include "treemax/rng.hpp"

namespace treemax {

/// One realization of the generic branching vector (Q, N, C_1, ..., C_N).
struct RootVectorSample {
  double q = 0.0;
  std::uint32_t n = 0;
  std::vector<double> c;
};

enum class Dependence { q_independent, q_coupled };

/// Which recursion a model is meant for; the max recursion needs C >= 0.
enum class RecursionKind { max, linear };

/// One atom of a finite joint law of (N, C_1, ..., C_N). Under q_coupled
/// dependence the atom carries the conditional law of Q given the atom.
struct JointAtom {
  double prob = 0.0;
  std::vector<double> weights;  // N = weights.size()
  std::optional<RealLaw> q_given;
};

struct JointTable {
  std::vector<JointAtom> atoms;
};

/// Black-box sampler for arbitrary dependence. It exposes no conditional law
/// of Q, so symmetrization refuses it.
using CustomSampler = std::function<RootVectorSample(CounterStream&)>;

struct ModelSpec {
  RealLaw q = law::Constant{1.0};
  CountLaw n = law::CountConstant{1};
  RealLaw c = law::Constant{1.0};  // i.i.d. given N
  std::optional<JointTable> joint;  // replaces (n, c) when set
  Dependence dependence = Dependence::q_independent;
  bool nonarithmetic_asserted = false;
  /// When set, the Q of every node is (Q - Q')/2 with Q' a conditionally
  /// independent copy of Q given (N, C). See symmetry.hpp.
  bool symmetrized = false;
  CustomSampler custom;
};

// ---------------------------------------------------------------------------
// Per-node draws. All of them are pure functions of the node key.

struct NodeShape {
  std::uint32_t n = 0;
  const JointAtom* atom = nullptr;
};

NodeShape draw_shape(const ModelSpec& spec, NodeKey key);
/// Q as seen by the recursion (already symmetrized when spec.symmetrized).
double draw_q(const ModelSpec& spec, NodeKey key, const NodeShape& shape);
/// The raw label Q and its conditional resample Q', ignoring `symmetrized`.
double draw_q_raw(const ModelSpec& spec, NodeKey key, const NodeShape& shape);
double draw_q_resample(const ModelSpec& spec, NodeKey key, const NodeShape& shape);
/// Weight C_(index+1) of the parent; drawn on the child's own weight lane.
double draw_weight(const ModelSpec& spec, NodeKey parent_key, const NodeShape& parent,
                   std::uint32_t index, NodeKey child_key);

RootVectorSample sample_root_vector(const ModelSpec& spec, NodeKey key);

/// Draw from an auxiliary stream (moment batches, outer Monte Carlo loops).
RootVectorSample sample_root_vector(const ModelSpec& spec, CounterStream& stream);

// ---------------------------------------------------------------------------
// Validation

enum class CheckStatus { pass, fail, asserted, not_asserted };
std::string to_string(CheckStatus s);

struct ValidationItem {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool ok() const;
};

/// Checks the standing hypotheses. Throws RejectedModel when Q = 0 a.s. or,
/// in max mode, when a weight can be negative.
ValidationReport validate_model(const ModelSpec& spec, RecursionKind kind = RecursionKind::max);

// ---------------------------------------------------------------------------
// Moments

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  bool closed_form = false;
};

/// Closed forms of the moments. Each member returns nullopt when no closed
/// form is known at that theta, and +inf when the moment diverges.
struct MomentOracle {
  using Fn = std::function<std::optional<double>(double)>;
  Fn m;
  Fn mlog;
  Fn q_abs;
  Fn q_pos;
};

MomentOracle moment_oracle(const ModelSpec& spec);

/// Cached batch of root vectors used for Monte Carlo moments. Reusing one
/// batch across theta (common random numbers) makes m(theta) a smooth
/// deterministic function of theta for a fixed seed.
class MomentBatch {
 public:
  MomentBatch(const ModelSpec& spec, std::size_t size, std::uint64_t seed);

  std::size_t size() const { return offsets_.size() - 1; }

  /// Mean and standard error of f(sample) over the batch, where f receives
  /// (q, weights).
  template <class F>
  Estimate mean_of(F&& f) const {
    double sum = 0.0, sum_sq = 0.0;
    const std::size_t n = size();
    for (std::size_t k = 0; k < n; ++k) {
      const double v = f(q_[k], weights(k));
      sum += v;
      sum_sq += v * v;
    }
    return finish(sum, sum_sq, n);
  }

  struct Span {
    const double* data;
    std::size_t size;
    const double* begin() const { return data; }
    const double* end() const { return data + size; }
  };
  Span weights(std::size_t k) const {
    return {c_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  double q(std::size_t k) const { return q_[k]; }

  Estimate m(double theta) const;
  Estimate mlog(double theta) const;
  Estimate q_abs(double theta) const;
  Estimate q_pos(double theta) const;

  static Estimate finish(double sum, double sum_sq, std::size_t n);

 private:
  std::vector<double> q_;
  std::vector<double> c_;
  std::vector<std::size_t> offsets_;
};

/// Stability diagnostic: the estimate over the first half of the batch and
/// over the whole batch must agree within 5 standard errors. Throws
/// NonFiniteMoment otherwise. This is a heuristic, not a proof.
template <class F>
Estimate stable_mean(const MomentBatch& batch, F&& f, const std::string& what);

/// m(theta) = E[sum_i |C_i|^theta] (C >= 0 in max mode). Closed form when
/// known, else Monte Carlo over n_mc draws with seed.
Estimate moment_m(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed = 1);
/// E[sum_i |C_i|^theta log |C_i|], with 0^theta log 0 = 0.
Estimate moment_mlog(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed = 1);
/// E[|Q|^theta] and E[(Q^+)^theta].
Estimate moment_q_abs(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed = 1);
Estimate moment_q_pos(const ModelSpec& spec, double theta, std::size_t n_mc, std::uint64_t seed = 1);

/// Purpose tags for auxiliary streams.
namespace stream_tag {
inline constexpr std::uint64_t moments = 0x6D6F6D656E7473ULL;
inline constexpr std::uint64_t outer = 0x6F75746572ULL;
inline constexpr std::uint64_t resample = 0x726573616D706CULL;
inline constexpr std::uint64_t weights_batch = 0x77626174636820ULL;
inline constexpr std::uint64_t q_batch = 0x71626174636820ULL;
}  // namespace stream_tag

// ---------------------------------------------------------------------------

template <class F>
Estimate stable_mean(const MomentBatch& batch, F&& f, const std::string& what) {
  const std::size_t n = batch.size();
  const std::size_t half = n / 2;
  double sum = 0.0, sum_sq = 0.0, half_sum = 0.0, half_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = f(batch.q(k), batch.weights(k));
    sum += v;
    sum_sq += v * v;
    if (k + 1 == half) half_sum = sum, half_sq = sum_sq;
  }
  const Estimate full = MomentBatch::finish(sum, sum_sq, n);
  if (!std::isfinite(full.value)) {
    throw Error(ErrorCode::NonFiniteMoment, what + " is not finite on the batch");
  }
  if (half >= 2) {
    const Estimate first = MomentBatch::finish(half_sum, half_sq, half);
    const double band = 5.0 * std::max(full.se, 1e-300);
    if (std::abs(first.value - full.value) > band && full.se > 0.0) {
      throw Error(ErrorCode::NonFiniteMoment,
                  what + " unstable under doubling of the sample (heuristic diagnostic)");
    }
  }
  return full;
}

}  // namespace treemax
