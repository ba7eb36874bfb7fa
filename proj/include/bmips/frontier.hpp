#pragma once

#include <cassert>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace bmips {

inline constexpr std::uint32_t kNoDimension = std::numeric_limits<std::uint32_t>::max();

/// (z, t): the value z_jt currently pointed at by cursor t.
struct FrontierEntry {
  double z = -std::numeric_limits<double>::infinity();
  std::uint32_t t = kNoDimension;

  friend bool operator==(const FrontierEntry&, const FrontierEntry&) = default;
};

inline constexpr FrontierEntry kExhausted{};

/// Strict total order used by every frontier: larger z first, then smaller t.
inline bool outranks(const FrontierEntry& a, const FrontierEntry& b) noexcept {
  return a.z > b.z || (a.z == b.z && a.t < b.t);
}

// Both frontiers expose the same operations so the screening loops can be
// written once:
//   assign(entries)  initial fill, one entry per cursor
//   top()            current maximum
//   replace_top(z)   the top's cursor moved on; its new value is z
//   remove_top()     the top's cursor is exhausted
//   empty()

/// Binary max-heap over at most k entries. replace_top is the pop+push pair of
/// the k-way merge fused into one sift-down.
class MaxHeapFrontier {
 public:
  void clear() { heap_.clear(); }
  void reserve(std::size_t k) { heap_.reserve(k); }

  /// O(k log k): one push per entry.
  void assign(std::span<const FrontierEntry> entries) {
    heap_.clear();
    for (const auto& e : entries) push(e);
  }

  void push(FrontierEntry e) {
    std::size_t i = heap_.size();
    heap_.push_back(e);
    while (i > 0) {
      const std::size_t parent = (i - 1) / 2;
      if (!outranks(heap_[i], heap_[parent])) break;
      std::swap(heap_[i], heap_[parent]);
      i = parent;
    }
  }

  void pop() {
    assert(!heap_.empty());
    heap_.front() = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) sift_down(0);
  }

  const FrontierEntry& top() const {
    assert(!heap_.empty());
    return heap_.front();
  }

  void replace_top(double z) {
    assert(!heap_.empty());
    heap_.front().z = z;
    sift_down(0);
  }

  void remove_top() { pop(); }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }

  std::span<const FrontierEntry> entries() const noexcept { return heap_; }

 private:
  void sift_down(std::size_t i) {
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t best = i;
      const std::size_t l = 2 * i + 1;
      const std::size_t r = l + 1;
      if (l < n && outranks(heap_[l], heap_[best])) best = l;
      if (r < n && outranks(heap_[r], heap_[best])) best = r;
      if (best == i) return;
      std::swap(heap_[i], heap_[best]);
      i = best;
    }
  }

  std::vector<FrontierEntry> heap_;
};

/**
 * Selection (winner) tree over k streams.
 *
 * buf_ has 2*K slots where K is the smallest power of two >= k. Slot 1 is the
 * root, the leaf for stream t sits at K + t, and node i has children 2i and
 * 2i+1. Every internal node holds the winner of its two children, so top() is
 * O(1) and update() walks one root path in O(log k). Unused and exhausted
 * leaves hold the (-inf, none) sentinel.
 */
class SelectionTreeFrontier {
 public:
  void reserve(std::size_t k) { buf_.reserve(2 * leaf_count_for(k)); }

  /// O(k) bottom-up construction; entries[t].t must equal t.
  void assign(std::span<const FrontierEntry> entries) {
    leaves_ = leaf_count_for(entries.size());
    buf_.assign(2 * leaves_, kExhausted);
    for (std::size_t t = 0; t < entries.size(); ++t) {
      assert(entries[t].t == t);
      buf_[leaves_ + t] = entries[t];
    }
    for (std::size_t i = leaves_ - 1; i >= 1; --i) play(i);
  }

  const FrontierEntry& top() const { return buf_[1]; }

  void update(std::uint32_t t, double z) { set_leaf(t, FrontierEntry{z, t}); }

  void replace_top(double z) { update(top().t, z); }

  void remove_top() { set_leaf(top().t, kExhausted); }

  bool empty() const noexcept { return buf_.size() < 2 || buf_[1].t == kNoDimension; }

  std::size_t leaf_count() const noexcept { return leaves_; }

  /// Raw slots, index 0 unused. Exposed for invariant checks.
  std::span<const FrontierEntry> slots() const noexcept { return buf_; }

  static std::size_t leaf_count_for(std::size_t k) {
    std::size_t p = 1;
    while (p < k) p <<= 1;
    return p;
  }

 private:
  void play(std::size_t i) {
    const auto& l = buf_[2 * i];
    const auto& r = buf_[2 * i + 1];
    buf_[i] = outranks(l, r) ? l : r;
  }

  void set_leaf(std::uint32_t t, FrontierEntry e) {
    std::size_t i = leaves_ + t;
    buf_[i] = e;
    while (i > 1) {
      i >>= 1;
      play(i);
    }
  }

  std::size_t leaves_ = 1;
  std::vector<FrontierEntry> buf_;
};

}  // namespace bmips
