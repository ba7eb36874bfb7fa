#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bmips/greedy_query.hpp"
#include "bmips/matrix.hpp"

namespace bmips {

struct ScoredItem {
  Index index = 0;
  double score = 0.0;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Result order: higher score first, ties by ascending index.
inline bool ranks_before(const ScoredItem& a, const ScoredItem& b) noexcept {
  return a.score > b.score || (a.score == b.score && a.index < b.index);
}

/// Top-K (index, h_j^T w) pairs, best first.
struct RankedResult {
  std::vector<ScoredItem> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  std::vector<Index> indices() const;
};

enum class SelectMethod {
  kPartial,   // nth_element then sort the selected block: O(m + K log K)
  kFullSort,  // reference path, sorts all m scored items
};

/// Scratch buffers for the ranking stage.
struct RankScratch {
  std::vector<double> scores;
  std::vector<ScoredItem> items;
};

/// Keeps the best min(k, items.size()) of `items`, sorted, in `out`.
void select_top(std::span<ScoredItem> items, std::size_t k, SelectMethod method,
                RankedResult& out);

/// Exact ranking of a candidate list. Throws std::invalid_argument on K == 0,
/// duplicate or out-of-range indices; an empty list gives an empty result.
RankedResult rank_candidates(const Matrix& h, std::span<const float> w,
                             std::span<const Index> candidates, std::size_t k,
                             SelectMethod method = SelectMethod::kPartial);

/// Unchecked variant for candidate lists known to be valid (e.g. the output of
/// a screen). Reuses `scratch` and `out`.
void rank_candidates_into(const Matrix& h, std::span<const float> w,
                          std::span<const Index> candidates, std::size_t k,
                          RankScratch& scratch, RankedResult& out,
                          SelectMethod method = SelectMethod::kPartial);

/// Naive-MIPS: score all n candidates and select the exact top-K.
RankedResult naive_topk(const Matrix& h, std::span<const float> w, std::size_t k,
                        SelectMethod method = SelectMethod::kPartial);

void naive_topk_into(const Matrix& h, std::span<const float> w, std::size_t k,
                     RankScratch& scratch, RankedResult& out,
                     SelectMethod method = SelectMethod::kPartial);

/// Greedy screen followed by exact ranking of the screened candidates. The
/// screening and ranking times are written to ctx.stats().
RankedResult budgeted_search(const GreedySearcher& searcher, QueryContext& ctx,
                             std::span<const float> w, std::size_t budget,
                             std::size_t k, ScreenOptions opts = {});

void budgeted_search_into(const GreedySearcher& searcher, QueryContext& ctx,
                          std::span<const float> w, std::size_t budget,
                          std::size_t k, RankScratch& scratch, RankedResult& out,
                          ScreenOptions opts = {});

}  // namespace bmips
