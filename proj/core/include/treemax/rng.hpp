#pragma once

#include <cstdint>

namespace treemax {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent random lanes attached to one node of the tree. A node's
/// weight C_(i) is drawn from the `weight` lane of child i, so every
/// variable is a pure function of (seed, replica, address, lane, counter).
enum class Lane : std::uint64_t {
  q = 0x51A7E5C0FFEE0001ULL,
  q_hat = 0x51A7E5C0FFEE0002ULL,
  count = 0x51A7E5C0FFEE0003ULL,
  weight = 0x51A7E5C0FFEE0004ULL,
  terminal = 0x51A7E5C0FFEE0005ULL,
  custom = 0x51A7E5C0FFEE0006ULL,
};

/// Hash of a node address. The root key depends on (seed, replica); a child
/// key depends only on its parent key and its child index, so the key of a
/// node never depends on the order in which the tree is visited.
class NodeKey {
 public:
  constexpr NodeKey() = default;
  constexpr explicit NodeKey(std::uint64_t value) : value_(value) {}

  static constexpr NodeKey root(std::uint64_t seed, std::uint64_t replica) noexcept {
    return NodeKey{mix64(mix64(seed ^ 0x7265706C69636173ULL) + (replica + 1) * kGolden)};
  }

  /// `index` is 0-based (child i = index + 1 in 1-based address notation).
  constexpr NodeKey child(std::uint32_t index) const noexcept {
    return NodeKey{mix64(value_ ^ mix64((static_cast<std::uint64_t>(index) + 1) * kGolden +
                                        0x6368696C64ULL))};
  }

  constexpr std::uint64_t lane_key(Lane lane) const noexcept {
    return mix64(value_ ^ static_cast<std::uint64_t>(lane));
  }

  constexpr std::uint64_t value() const noexcept { return value_; }
  friend constexpr bool operator==(NodeKey, NodeKey) = default;

 private:
  std::uint64_t value_ = 0;
};

/// Counter-based stream: output k is mix(key, k). Cheap to construct, holds
/// no heap state and can be recreated at any point from its key.
class CounterStream {
 public:
  constexpr explicit CounterStream(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  constexpr std::uint64_t next_u64() noexcept {
    const std::uint64_t x = key_ + (++counter_) * kGolden;
    return mix64(mix64(x) ^ key_);
  }

  /// Uniform on [0, 1) with 53 bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0, 1).
  constexpr double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Stream for auxiliary purposes (moment batches, resampling, ...), kept
/// disjoint from the tree streams by a purpose tag.
inline constexpr CounterStream aux_stream(std::uint64_t seed, std::uint64_t tag,
                                          std::uint64_t index = 0) noexcept {
  return CounterStream{mix64(mix64(seed ^ tag) + (index + 1) * kGolden)};
}

}  // namespace treemax
