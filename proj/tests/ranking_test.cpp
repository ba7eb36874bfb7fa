#include <random>

#include <gtest/gtest.h>

#include "bmips/ranking.hpp"
#include "oracles.hpp"

using namespace bmips;

namespace {

const std::vector<float> kToyQuery = {1.0f, 1.0f, 0.1f};

void expect_entries(const RankedResult& r, std::vector<std::pair<Index, double>> expected) {
  ASSERT_EQ(r.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(r.entries[i].index, expected[i].first) << "rank " << i;
    EXPECT_NEAR(r.entries[i].score, expected[i].second, 1e-6) << "rank " << i;
  }
}

std::vector<Index> all_rows(std::size_t n) {
  std::vector<Index> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = static_cast<Index>(j);
  return v;
}

}  // namespace

TEST(RankCandidatesTest, ToyScreenedSet) {
  const Matrix h = toy_matrix();
  const std::vector<Index> c = {5, 0, 6};
  expect_entries(rank_candidates(h, kToyQuery, c, 3), {{0, 6.9}, {5, 5.9}, {6, 2.9}});
  expect_entries(rank_candidates(h, kToyQuery, c, 3, SelectMethod::kFullSort),
                 {{0, 6.9}, {5, 5.9}, {6, 2.9}});
}

TEST(RankCandidatesTest, SingletonAndLargeK) {
  const Matrix h = toy_matrix();
  const std::vector<Index> one = {3};
  expect_entries(rank_candidates(h, kToyQuery, one, 5), {{3, 4.9}});
  const std::vector<Index> c = {6, 2, 4};
  expect_entries(rank_candidates(h, kToyQuery, c, 10), {{6, 2.9}, {4, 1.9}, {2, 0.9}});
  EXPECT_TRUE(rank_candidates(h, kToyQuery, std::vector<Index>{}, 3).empty());
}

TEST(RankCandidatesTest, Errors) {
  const Matrix h = toy_matrix();
  EXPECT_THROW(rank_candidates(h, kToyQuery, std::vector<Index>{1, 2, 1}, 3),
               std::invalid_argument);
  EXPECT_THROW(rank_candidates(h, kToyQuery, std::vector<Index>{7}, 3), std::invalid_argument);
  EXPECT_THROW(rank_candidates(h, kToyQuery, std::vector<Index>{1}, 0), std::invalid_argument);
  EXPECT_THROW(rank_candidates(h, std::vector<float>{1}, std::vector<Index>{1}, 1),
               std::invalid_argument);
}

TEST(NaiveTopkTest, Toy) {
  const Matrix h = toy_matrix();
  expect_entries(naive_topk(h, kToyQuery, 3), {{0, 6.9}, {5, 5.9}, {3, 4.9}});
}

TEST(NaiveTopkTest, SingleRowAndZeroQuery) {
  expect_entries(naive_topk(Matrix(1, 2, {2, 3}), std::vector<float>{1, 1}, 4), {{0, 5.0}});
  const auto r = naive_topk(toy_matrix(), std::vector<float>{0, 0, 0}, 4);
  expect_entries(r, {{0, 0}, {1, 0}, {2, 0}, {3, 0}});
}

TEST(NaiveTopkTest, MatchesFullSortOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    const std::size_t k = 1 + rng() % 10;
    const Matrix h = oracle::random_matrix(n, k, rng, false, trial % 2 == 0);
    const auto w = oracle::random_vector(k, rng);
    const std::size_t topk = 1 + rng() % 30;
    const auto expected = oracle::topk(h, w, topk);
    for (auto method : {SelectMethod::kPartial, SelectMethod::kFullSort}) {
      const auto r = naive_topk(h, w, topk, method);
      ASSERT_EQ(r.size(), expected.size());
      for (std::size_t i = 0; i < expected.size(); ++i) {
        ASSERT_EQ(r.entries[i].index, expected[i].first);
        ASSERT_EQ(r.entries[i].score, expected[i].second);
      }
    }
  }
}

TEST(BudgetedSearchTest, ToyComposition) {
  const Matrix h = toy_matrix();
  const GreedyIndex index = GreedyIndex::build(h);
  const GreedySearcher s(h, index);
  QueryContext ctx = s.make_context();
  expect_entries(budgeted_search(s, ctx, kToyQuery, 3, 3), {{0, 6.9}, {5, 5.9}, {6, 2.9}});
  EXPECT_GE(ctx.stats().screen_seconds, 0.0);
  EXPECT_GE(ctx.stats().rank_seconds, 0.0);
  // B = K = 1: the greedy winner, candidate 6
  expect_entries(budgeted_search(s, ctx, kToyQuery, 1, 1), {{5, 5.9}});
}

TEST(BudgetedSearchTest, FullBudgetEqualsNaive) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const std::size_t k = 1 + rng() % 12;
    const Matrix h = oracle::random_matrix(n, k, rng, trial % 3 == 0, trial % 2 == 0);
    const auto w = oracle::random_vector(k, rng);
    const GreedyIndex index = GreedyIndex::build(h);
    const GreedySearcher s(h, index);
    QueryContext ctx = s.make_context();
    const std::size_t topk = 1 + rng() % 20;
    ASSERT_EQ(budgeted_search(s, ctx, w, n, topk).entries, naive_topk(h, w, topk).entries);
  }
}

TEST(BudgetedSearchTest, PrecisionMonotoneInBudget) {
  std::mt19937_64 rng(33);
  const Matrix h = oracle::random_matrix(300, 6, rng);
  const GreedyIndex index = GreedyIndex::build(h);
  const GreedySearcher s(h, index);
  QueryContext ctx = s.make_context();
  for (int q = 0; q < 20; ++q) {
    const auto w = oracle::random_vector(6, rng);
    const auto truth = naive_topk(h, w, 10).indices();
    std::size_t last_hits = 0;
    for (std::size_t budget = 1; budget <= 300; budget += 7) {
      const auto got = budgeted_search(s, ctx, w, budget, 10).indices();
      std::size_t hits = 0;
      for (Index j : got) hits += std::count(truth.begin(), truth.end(), j);
      ASSERT_GE(hits, last_hits);
      last_hits = hits;
    }
  }
}

TEST(RankCandidatesTest, PartialAndFullSortAgreeOnTies) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix h = oracle::random_matrix(80, 3, rng, false, true);
    const auto w = std::vector<float>{1, 0.5f, -1};
    const auto rows = all_rows(80);
    const std::size_t topk = 1 + rng() % 80;
    EXPECT_EQ(rank_candidates(h, w, rows, topk, SelectMethod::kPartial).entries,
              rank_candidates(h, w, rows, topk, SelectMethod::kFullSort).entries);
  }
}
