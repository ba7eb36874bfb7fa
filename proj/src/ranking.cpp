#include "bmips/ranking.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>

namespace bmips {

std::vector<Index> RankedResult::indices() const {
  std::vector<Index> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.index);
  return ids;
}

void select_top(std::span<ScoredItem> items, std::size_t k, SelectMethod method,
                RankedResult& out) {
  const std::size_t keep = std::min(k, items.size());
  if (method == SelectMethod::kPartial) {
    if (keep < items.size()) {
      std::nth_element(items.begin(), items.begin() + keep, items.end(),
                       ranks_before);
    }
    std::sort(items.begin(), items.begin() + keep, ranks_before);
  } else {
    std::sort(items.begin(), items.end(), ranks_before);
  }
  out.entries.assign(items.begin(), items.begin() + keep);
}

void rank_candidates_into(const Matrix& h, std::span<const float> w,
                          std::span<const Index> candidates, std::size_t k,
                          RankScratch& scratch, RankedResult& out,
                          SelectMethod method) {
  scratch.scores.resize(candidates.size());
  score_gather(h, w, candidates, scratch.scores);
  scratch.items.resize(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    scratch.items[i] = {candidates[i], scratch.scores[i]};
  }
  select_top(scratch.items, k, method, out);
}

RankedResult rank_candidates(const Matrix& h, std::span<const float> w,
                             std::span<const Index> candidates, std::size_t k,
                             SelectMethod method) {
  if (k == 0) throw std::invalid_argument("K must be at least 1");
  if (w.size() != h.cols()) {
    throw std::invalid_argument("query dimension does not match the matrix");
  }
  std::vector<Index> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty() && sorted.back() >= h.rows()) {
    throw std::invalid_argument("candidate index " + std::to_string(sorted.back()) +
                                " out of range");
  }
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("duplicate index in candidate list");
  }
  RankScratch scratch;
  RankedResult out;
  rank_candidates_into(h, w, candidates, k, scratch, out, method);
  return out;
}

void naive_topk_into(const Matrix& h, std::span<const float> w, std::size_t k,
                     RankScratch& scratch, RankedResult& out,
                     SelectMethod method) {
  const std::size_t n = h.rows();
  scratch.scores.resize(n);
  score_rows(h, w, 0, scratch.scores);
  scratch.items.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    scratch.items[j] = {static_cast<Index>(j), scratch.scores[j]};
  }
  select_top(scratch.items, k, method, out);
}

RankedResult naive_topk(const Matrix& h, std::span<const float> w, std::size_t k,
                        SelectMethod method) {
  if (k == 0) throw std::invalid_argument("K must be at least 1");
  if (w.size() != h.cols()) {
    throw std::invalid_argument("query dimension does not match the matrix");
  }
  RankScratch scratch;
  RankedResult out;
  naive_topk_into(h, w, k, scratch, out, method);
  return out;
}

void budgeted_search_into(const GreedySearcher& searcher, QueryContext& ctx,
                          std::span<const float> w, std::size_t budget,
                          std::size_t k, RankScratch& scratch, RankedResult& out,
                          ScreenOptions opts) {
  if (k == 0) throw std::invalid_argument("K must be at least 1");
  const auto candidates = searcher.screen(ctx, w, budget, opts);
  const auto start = std::chrono::steady_clock::now();
  rank_candidates_into(searcher.matrix(), w, candidates, k, scratch, out);
  ctx.stats().rank_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RankedResult budgeted_search(const GreedySearcher& searcher, QueryContext& ctx,
                             std::span<const float> w, std::size_t budget,
                             std::size_t k, ScreenOptions opts) {
  RankScratch scratch;
  RankedResult out;
  budgeted_search_into(searcher, ctx, w, budget, k, scratch, out, opts);
  return out;
}

}  // namespace bmips
