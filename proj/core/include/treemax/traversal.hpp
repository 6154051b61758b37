#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "treemax/model.hpp"
#include "treemax/rng.hpp"

namespace treemax {

/// Visit order of children. Every node's random vector is keyed by its
/// address, so the order never changes what a node draws.
enum class ChildOrder { forward, reverse };

/// Lazily drawn view of one node during a traversal.
class NodeContext {
 public:
  NodeContext(const ModelSpec& spec, NodeKey key, std::uint32_t depth, double pi, double log_pi)
      : spec_(&spec), key_(key), depth_(depth), pi_(pi), log_pi_(log_pi) {}

  NodeKey key() const { return key_; }
  std::uint32_t depth() const { return depth_; }
  /// Product of weights along the path from the root; 1 at the root.
  double pi() const { return pi_; }
  /// log(pi), only tracked when the visitor asks for it.
  double log_pi() const { return log_pi_; }

  const NodeShape& shape() {
    if (!shape_) shape_ = draw_shape(*spec_, key_);
    return *shape_;
  }
  double q() { return draw_q(*spec_, key_, q_shape()); }
  double q_raw() { return draw_q_raw(*spec_, key_, q_shape()); }
  double q_resample() { return draw_q_resample(*spec_, key_, q_shape()); }
  double terminal(const RealLaw& law) const {
    CounterStream stream{key_.lane_key(Lane::terminal)};
    return sample(law, stream);
  }

 private:
  // Q only depends on the node shape when it is coupled to (N, C).
  const NodeShape& q_shape() {
    if (spec_->dependence == Dependence::q_coupled || spec_->custom) return shape();
    static const NodeShape empty{};
    return empty;
  }

  const ModelSpec* spec_;
  NodeKey key_;
  std::uint32_t depth_;
  double pi_;
  double log_pi_;
  std::optional<NodeShape> shape_;
};

struct TraverseOptions {
  ChildOrder order = ChildOrder::forward;
  /// Do not expand nodes whose path weight is exactly 0 (the node itself is
  /// still visited; all of its descendants would carry weight 0).
  bool prune_zero = false;
  bool track_log_pi = false;
};

struct TraversalStats {
  std::uint64_t node_visits = 0;
  std::size_t peak_stack = 0;
};

struct TraversalFrame {
  NodeKey key;
  NodeShape shape;
  double pi;
  double log_pi;
  std::uint32_t depth;
  std::uint32_t next;
};

/// Depth-first traversal of generations 0..max_depth of the weighted
/// branching tree rooted at `root`. Calls visitor(NodeContext&) once per node.
/// Working memory is one frame per generation; `stack` is scratch space that
/// can be reused across replicas.
template <class Visitor>
TraversalStats traverse(const ModelSpec& spec, NodeKey root, std::uint32_t max_depth,
                        const TraverseOptions& options, Visitor& visitor,
                        std::vector<TraversalFrame>& stack) {
  TraversalStats stats;
  stack.clear();
  stack.reserve(static_cast<std::size_t>(max_depth) + 1);

  NodeContext root_ctx(spec, root, 0, 1.0, 0.0);
  visitor(root_ctx);
  stats.node_visits = 1;
  if (max_depth == 0) return stats;
  const NodeShape root_shape = root_ctx.shape();
  if (root_shape.n == 0) return stats;
  stack.push_back(TraversalFrame{root, root_shape, 1.0, 0.0, 0, 0});
  stats.peak_stack = 1;

  while (!stack.empty()) {
    TraversalFrame& top = stack.back();
    if (top.next == top.shape.n) {
      stack.pop_back();
      continue;
    }
    const std::uint32_t index =
        options.order == ChildOrder::forward ? top.next : top.shape.n - 1 - top.next;
    ++top.next;

    const NodeKey child = top.key.child(index);
    const double c = draw_weight(spec, top.key, top.shape, index, child);
    const double pi = top.pi * c;
    const double log_pi = options.track_log_pi ? top.log_pi + std::log(c) : 0.0;
    const std::uint32_t depth = top.depth + 1;

    NodeContext ctx(spec, child, depth, pi, log_pi);
    visitor(ctx);
    ++stats.node_visits;

    if (depth < max_depth && !(options.prune_zero && pi == 0.0)) {
      const NodeShape shape = ctx.shape();
      if (shape.n > 0) {
        stack.push_back(TraversalFrame{child, shape, pi, log_pi, depth, 0});
        stats.peak_stack = std::max(stats.peak_stack, stack.size());
      }
    }
  }
  return stats;
}

template <class Visitor>
TraversalStats traverse(const ModelSpec& spec, NodeKey root, std::uint32_t max_depth,
                        const TraverseOptions& options, Visitor& visitor) {
  std::vector<TraversalFrame> stack;
  return traverse(spec, root, max_depth, options, visitor, stack);
}

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace treemax
