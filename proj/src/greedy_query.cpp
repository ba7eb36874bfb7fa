#include "bmips/greedy_query.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bmips {

void QueryContext::ensure(std::size_t n, std::size_t k) {
  if (visited_.size() != n) visited_.assign(n, 0);
  cursors_.reserve(k);
  initial_.reserve(k);
  heap_.reserve(k);
  tree_.reserve(k);
  out_.reserve(n);
}

bool QueryContext::visited_is_clear() const {
  return std::all_of(visited_.begin(), visited_.end(),
                     [](std::uint8_t v) { return v == 0; });
}

GreedySearcher::GreedySearcher(const Matrix& h, const GreedyIndex& index)
    : h_(h), index_(index) {
  if (!index.matches(h)) {
    throw std::invalid_argument("greedy index shape does not match the matrix");
  }
}

void GreedySearcher::validate_query(std::span<const float> w) const {
  if (w.size() != h_.cols()) {
    throw std::invalid_argument("query dimension " + std::to_string(w.size()) +
                                " does not match matrix dimension " +
                                std::to_string(h_.cols()));
  }
  for (float v : w) {
    if (!std::isfinite(v)) throw DataError("query contains a non-finite value");
  }
}

template <typename Frontier>
void GreedySearcher::preprocess_impl(QueryContext& ctx,
                                     std::span<const float> w) const {
  const std::size_t k = h_.cols();
  ctx.ensure(h_.rows(), k);
  ctx.cursors_.clear();
  ctx.initial_.clear();
  for (std::uint32_t t = 0; t < k; ++t) {
    const auto& cursor = ctx.cursors_.emplace_back(index_.column(t), w[t]);
    ctx.initial_.push_back({implicit_entry_unchecked(h_, cursor.current(), t, w), t});
  }
  ctx.template frontier<Frontier>().assign(ctx.initial_);
}

void GreedySearcher::preprocess(QueryContext& ctx, std::span<const float> w,
                                FrontierKind kind) const {
  validate_query(w);
  ctx.stats_ = ScreenStats{};
  if (kind == FrontierKind::kHeap) {
    preprocess_impl<MaxHeapFrontier>(ctx, w);
  } else {
    preprocess_impl<SelectionTreeFrontier>(ctx, w);
  }
}

// Walk the joint order and append every index not seen before. O(Bk log k).
template <typename Frontier>
void GreedySearcher::screen_basic(QueryContext& ctx, std::span<const float> w,
                                  std::size_t budget) const {
  JointIterator<Frontier> joint(*this, ctx, w);
  auto& visited = ctx.visited_;
  auto& out = ctx.out_;
  out.clear();
  auto [j, t] = joint.current();
  for (;;) {
    ++ctx.stats_.joint_emissions;
    ++ctx.stats_.frontier_pops;
    if (!visited[j]) {
      visited[j] = 1;
      out.push_back(j);
      if (out.size() == budget) break;
    }
    std::tie(j, t) = joint.next();
  }
  for (Index c : out) visited[c] = 0;
}

// Same output as screen_basic, but entries whose index is already in the
// candidate list are skipped inside the cursor instead of going through the
// frontier. At most B + k - 1 frontier pops, O(Bk) overall.
template <typename Frontier>
void GreedySearcher::screen_improved(QueryContext& ctx, std::span<const float> w,
                                     std::size_t budget) const {
  preprocess_impl<Frontier>(ctx, w);
  auto& q = ctx.template frontier<Frontier>();
  auto& visited = ctx.visited_;
  auto& out = ctx.out_;
  auto& stats = ctx.stats_;
  out.clear();

  while (out.size() < budget) {
    assert(!q.empty());
    const std::uint32_t t = q.top().t;
    ++stats.frontier_pops;
    ++stats.joint_emissions;
    auto& cursor = ctx.cursors_[t];
    Index j = cursor.current();
    if (!visited[j]) {
      visited[j] = 1;
      out.push_back(j);
    }
    bool reinserted = false;
    while (cursor.has_next()) {
      j = cursor.next();
      ++stats.cursor_advances;
      if (!visited[j]) {
        q.replace_top(implicit_entry_unchecked(h_, j, t, w));
        reinserted = true;
        break;
      }
      ++stats.joint_emissions;
    }
    if (!reinserted) q.remove_top();
  }
  for (Index c : out) visited[c] = 0;
}

std::span<const Index> GreedySearcher::screen(QueryContext& ctx,
                                              std::span<const float> w,
                                              std::size_t budget,
                                              ScreenOptions opts) const {
  if (budget == 0) throw std::invalid_argument("budget must be at least 1");
  validate_query(w);
  const auto start = std::chrono::steady_clock::now();
  const bool clamped = budget > h_.rows();
  budget = std::min(budget, h_.rows());
  ctx.stats_ = ScreenStats{};

  const bool heap = opts.frontier == FrontierKind::kHeap;
  if (opts.variant == ScreenVariant::kImproved) {
    heap ? screen_improved<MaxHeapFrontier>(ctx, w, budget)
         : screen_improved<SelectionTreeFrontier>(ctx, w, budget);
  } else {
    heap ? screen_basic<MaxHeapFrontier>(ctx, w, budget)
         : screen_basic<SelectionTreeFrontier>(ctx, w, budget);
  }

  ctx.stats_.budget = budget;
  ctx.stats_.budget_clamped = clamped;
  ctx.stats_.screen_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ctx.out_;
}

}  // namespace bmips
