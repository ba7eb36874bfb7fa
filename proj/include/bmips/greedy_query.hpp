#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "bmips/frontier.hpp"
#include "bmips/greedy_index.hpp"
#include "bmips/matrix.hpp"

namespace bmips {

/// Walks one sorted index column in the conditional order for one query
/// value: forward (descending h_jt) when w_t > 0, backward otherwise. Every
/// operation is O(1).
class ConditionalCursor {
 public:
  ConditionalCursor() = default;

  ConditionalCursor(std::span<const Index> column, float query_value)
      : forward_(query_value > 0.0f),
        cur_(forward_ ? column.data() : column.data() + column.size() - 1),
        remaining_(column.size() - 1),
        size_(column.size()) {
    assert(!column.empty());
  }

  Index current() const { return *cur_; }
  bool has_next() const { return remaining_ > 0; }

  Index next() {
    assert(has_next());
    cur_ += forward_ ? 1 : -1;
    --remaining_;
    return *cur_;
  }

  bool forward() const { return forward_; }
  /// 0-based number of steps taken so far.
  std::size_t position() const { return size_ - 1 - remaining_; }

 private:
  bool forward_ = true;
  const Index* cur_ = nullptr;
  std::size_t remaining_ = 0;
  std::size_t size_ = 0;
};

enum class FrontierKind { kHeap, kSelectionTree };
enum class ScreenVariant { kBasic, kImproved };

struct ScreenOptions {
  ScreenVariant variant = ScreenVariant::kImproved;
  FrontierKind frontier = FrontierKind::kSelectionTree;
};

/// Per-query diagnostics, overwritten by every screen call.
struct ScreenStats {
  std::size_t budget = 0;          // effective (clamped) budget
  bool budget_clamped = false;     // requested budget exceeded n
  std::size_t frontier_pops = 0;   // top() consumptions of the frontier
  std::size_t joint_emissions = 0; // (j, t) entries of Z consumed
  std::size_t cursor_advances = 0; // next() calls over all cursors
  double screen_seconds = 0.0;     // preprocessing + screening
  double rank_seconds = 0.0;       // filled in by budgeted_search
};

class GreedySearcher;
template <typename Frontier>
class JointIterator;

/**
 * Reusable scratch for one in-flight query: k cursors, both frontier kinds,
 * the visited flags and the candidate list. Allocation-free after the first
 * query. Not thread-safe; give each thread its own context.
 */
class QueryContext {
 public:
  QueryContext() = default;
  QueryContext(std::size_t n, std::size_t k) { ensure(n, k); }

  void ensure(std::size_t n, std::size_t k);

  /// Candidate list of the last screen call, in greedy order.
  std::span<const Index> candidates() const noexcept { return out_; }
  const ScreenStats& stats() const noexcept { return stats_; }
  ScreenStats& stats() noexcept { return stats_; }

  std::span<const ConditionalCursor> cursors() const noexcept { return cursors_; }
  const MaxHeapFrontier& heap() const noexcept { return heap_; }
  const SelectionTreeFrontier& tree() const noexcept { return tree_; }

  /// Full O(n) scan; intended for tests.
  bool visited_is_clear() const;

 private:
  friend class GreedySearcher;
  template <typename Frontier>
  friend class JointIterator;

  template <typename Frontier>
  Frontier& frontier() {
    if constexpr (std::is_same_v<Frontier, MaxHeapFrontier>) {
      return heap_;
    } else {
      return tree_;
    }
  }

  std::vector<ConditionalCursor> cursors_;
  std::vector<FrontierEntry> initial_;
  MaxHeapFrontier heap_;
  SelectionTreeFrontier tree_;
  std::vector<std::uint8_t> visited_;
  std::vector<Index> out_;
  ScreenStats stats_;
};

/**
 * Greedy-MIPS candidate screening over a candidate matrix and its sorted
 * index. Holds references only; both must outlive the searcher.
 *
 * The screen visits entries z_jt = h_jt * w_t of the implicit matrix in
 * descending order (a k-way merge of the k conditional orders) and collects
 * each newly seen candidate until `budget` distinct ones are found. The
 * result is therefore the first B candidates by max_t z_jt.
 */
class GreedySearcher {
 public:
  GreedySearcher(const Matrix& h, const GreedyIndex& index);

  const Matrix& matrix() const noexcept { return h_; }
  const GreedyIndex& index() const noexcept { return index_; }

  QueryContext make_context() const { return QueryContext(h_.rows(), h_.cols()); }

  /// Query-dependent preprocessing: one cursor per dimension and a frontier
  /// holding each cursor's first value. Throws on a malformed query.
  void preprocess(QueryContext& ctx, std::span<const float> w,
                  FrontierKind kind) const;

  /// Fills ctx.candidates() with min(budget, n) candidates. budget == 0
  /// throws std::invalid_argument; budget > n is clamped and flagged in stats.
  std::span<const Index> screen(QueryContext& ctx, std::span<const float> w,
                                std::size_t budget, ScreenOptions opts = {}) const;

 private:
  template <typename Frontier>
  void preprocess_impl(QueryContext& ctx, std::span<const float> w) const;
  template <typename Frontier>
  void screen_basic(QueryContext& ctx, std::span<const float> w,
                    std::size_t budget) const;
  template <typename Frontier>
  void screen_improved(QueryContext& ctx, std::span<const float> w,
                       std::size_t budget) const;

  void validate_query(std::span<const float> w) const;

  const Matrix& h_;
  const GreedyIndex& index_;
};

/**
 * Enumerates all nk entries (j, t) of the implicit matrix in nonincreasing z
 * order. Ties go to the smaller t, and within one t to the earlier cursor
 * position. Construction runs the preprocessing step, O(k log k) for the heap
 * and O(k) for the selection tree; each next() is O(log k).
 */
template <typename Frontier>
class JointIterator {
 public:
  using Pair = std::pair<Index, std::uint32_t>;

  JointIterator(const GreedySearcher& searcher, QueryContext& ctx,
                std::span<const float> w)
      : h_(searcher.matrix()), ctx_(ctx), w_(w), total_(h_.rows() * h_.cols()) {
    searcher.preprocess(ctx, w,
                        std::is_same_v<Frontier, MaxHeapFrontier>
                            ? FrontierKind::kHeap
                            : FrontierKind::kSelectionTree);
  }

  Pair current() const {
    const auto& top = frontier().top();
    return {ctx_.cursors_[top.t].current(), top.t};
  }

  double current_value() const { return frontier().top().z; }

  bool has_next() const { return emitted_ + 1 < total_; }

  Pair next() {
    assert(has_next());
    auto& q = frontier();
    const std::uint32_t t = q.top().t;
    auto& cursor = ctx_.cursors_[t];
    if (cursor.has_next()) {
      const Index j = cursor.next();
      ++ctx_.stats_.cursor_advances;
      q.replace_top(implicit_entry_unchecked(h_, j, t, w_));
    } else {
      q.remove_top();
    }
    ++emitted_;
    return current();
  }

 private:
  Frontier& frontier() const { return ctx_.template frontier<Frontier>(); }

  const Matrix& h_;
  QueryContext& ctx_;
  std::span<const float> w_;
  std::size_t total_;
  std::size_t emitted_ = 0;
};

}  // namespace bmips
