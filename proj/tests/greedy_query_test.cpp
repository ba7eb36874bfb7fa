#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "bmips/greedy_query.hpp"
#include "oracles.hpp"

using namespace bmips;

namespace {

const std::vector<float> kToyQuery = {1.0f, 1.0f, 0.1f};

std::vector<Index> to_vec(std::span<const Index> s) { return {s.begin(), s.end()}; }

std::vector<Index> zero_based(std::initializer_list<Index> one_based) {
  std::vector<Index> v;
  for (Index j : one_based) v.push_back(j - 1);
  return v;
}

constexpr ScreenOptions kAllOptions[] = {
    {ScreenVariant::kBasic, FrontierKind::kHeap},
    {ScreenVariant::kBasic, FrontierKind::kSelectionTree},
    {ScreenVariant::kImproved, FrontierKind::kHeap},
    {ScreenVariant::kImproved, FrontierKind::kSelectionTree},
};

struct Toy : ::testing::Test {
  Matrix h = toy_matrix();
  GreedyIndex index = GreedyIndex::build(h);
  GreedySearcher searcher{h, index};
  QueryContext ctx = searcher.make_context();
};

}  // namespace

TEST_F(Toy, CursorStartsAndDirections) {
  ConditionalCursor c2(index.column(1), 1.0f);
  EXPECT_TRUE(c2.forward());
  EXPECT_EQ(c2.current(), 5u);  // s_2[1] = 6
  ConditionalCursor c1(index.column(0), -1.0f);
  EXPECT_FALSE(c1.forward());
  EXPECT_EQ(c1.current(), 2u);  // s_1[7] = 3
  ConditionalCursor c3(index.column(2), 0.1f);
  EXPECT_EQ(c3.current(), 0u);
  ConditionalCursor zero(index.column(0), 0.0f);
  EXPECT_FALSE(zero.forward());
}

TEST_F(Toy, CursorWalk) {
  ConditionalCursor c(index.column(1), 1.0f);
  std::vector<Index> seen = {c.current()};
  while (c.has_next()) seen.push_back(c.next());
  EXPECT_EQ(seen, zero_based({6, 7, 1, 2, 3, 4, 5}));
  EXPECT_EQ(c.position(), 6u);
  EXPECT_FALSE(c.has_next());
}

TEST(CursorTest, SingleRowHasNoNext) {
  const std::vector<Index> column = {0};
  EXPECT_FALSE(ConditionalCursor(column, 1.0f).has_next());
  EXPECT_FALSE(ConditionalCursor(column, -1.0f).has_next());
}

TEST_F(Toy, PreprocessFrontier) {
  searcher.preprocess(ctx, kToyQuery, FrontierKind::kSelectionTree);
  EXPECT_EQ(ctx.tree().top(), (FrontierEntry{7, 1}));
  for (std::uint32_t t = 0; t < 3; ++t) {
    EXPECT_EQ(ctx.tree().slots()[ctx.tree().leaf_count() + t].t, t);
  }
  EXPECT_EQ(ctx.tree().slots()[4].z, -1.0);
  EXPECT_EQ(ctx.tree().slots()[5].z, 7.0);
  EXPECT_NEAR(ctx.tree().slots()[6].z, 6.9, 1e-6);

  searcher.preprocess(ctx, kToyQuery, FrontierKind::kHeap);
  EXPECT_EQ(ctx.heap().top(), (FrontierEntry{7, 1}));
  std::vector<FrontierEntry> entries(ctx.heap().entries().begin(), ctx.heap().entries().end());
  std::sort(entries.begin(), entries.end(), [](auto& a, auto& b) { return a.t < b.t; });
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0], (FrontierEntry{-1, 0}));
  EXPECT_EQ(entries[1], (FrontierEntry{7, 1}));
  EXPECT_NEAR(entries[2].z, 6.9, 1e-6);
}

TEST_F(Toy, PreprocessBackwardStarts) {
  const std::vector<float> w = {-1, -1, -1};
  searcher.preprocess(ctx, w, FrontierKind::kSelectionTree);
  const auto leaves = ctx.tree().slots().subspan(ctx.tree().leaf_count(), 3);
  EXPECT_EQ(leaves[0], (FrontierEntry{7, 0}));
  EXPECT_EQ(leaves[1], (FrontierEntry{-1, 1}));
  EXPECT_EQ(leaves[2], (FrontierEntry{-9, 2}));
}

TEST(PreprocessTest, SingleDimensionFrontier) {
  const Matrix h(3, 1, {1, 2, 3});
  const GreedyIndex index = GreedyIndex::build(h);
  GreedySearcher s(h, index);
  QueryContext ctx = s.make_context();
  s.preprocess(ctx, std::vector<float>{2.0f}, FrontierKind::kHeap);
  EXPECT_EQ(ctx.heap().size(), 1u);
  EXPECT_EQ(ctx.heap().top(), (FrontierEntry{6, 0}));
}

TEST_F(Toy, PreprocessErrors) {
  EXPECT_THROW(searcher.preprocess(ctx, std::vector<float>{1, 1}, FrontierKind::kHeap),
               std::invalid_argument);
  EXPECT_THROW(searcher.preprocess(ctx, std::vector<float>{1, 1, NAN}, FrontierKind::kHeap),
               DataError);
  const Matrix other(7, 2, std::vector<float>(14, 1.0f));
  EXPECT_THROW(GreedySearcher(other, index), std::invalid_argument);
}

TEST_F(Toy, JointIteratorFirstEmissions) {
  JointIterator<SelectionTreeFrontier> joint(searcher, ctx, kToyQuery);
  using P = JointIterator<SelectionTreeFrontier>::Pair;
  EXPECT_EQ(joint.current(), (P{5, 1}));
  EXPECT_EQ(joint.next(), (P{0, 2}));
  EXPECT_EQ(joint.next(), (P{6, 1}));
}

TEST(JointIteratorTest, FullDrainMatchesOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 23;
    const std::size_t k = 1 + trial % 7;
    const Matrix h = oracle::random_matrix(n, k, rng, false, true);
    auto w = oracle::random_vector(k, rng);
    if (trial % 5 == 0) w[0] = 0.0f;
    const GreedyIndex index = GreedyIndex::build(h);
    const GreedySearcher s(h, index);
    QueryContext ctx = s.make_context();
    const auto expected = oracle::joint_order(h, w);

    auto drain = [&](auto joint) {
      std::set<std::pair<Index, std::uint32_t>> distinct;
      for (std::size_t r = 0; r < expected.size(); ++r) {
        const auto [j, t] = joint.current();
        ASSERT_EQ(j, expected[r].j) << "trial " << trial << " r " << r;
        ASSERT_EQ(t, expected[r].t);
        ASSERT_EQ(joint.current_value(), expected[r].z);
        distinct.insert({j, t});
        if (r + 1 < expected.size()) {
          ASSERT_TRUE(joint.has_next());
          joint.next();
        }
      }
      EXPECT_FALSE(joint.has_next());
      EXPECT_EQ(distinct.size(), n * k);
    };
    drain(JointIterator<MaxHeapFrontier>(s, ctx, w));
    drain(JointIterator<SelectionTreeFrontier>(s, ctx, w));
  }
}

TEST(JointIteratorTest, SingleDimensionFollowsColumn) {
  const Matrix h(4, 1, {3, 1, 4, 1});
  const GreedyIndex index = GreedyIndex::build(h);
  const GreedySearcher s(h, index);
  QueryContext ctx = s.make_context();
  JointIterator<SelectionTreeFrontier> joint(s, ctx, std::vector<float>{2.0f});
  std::vector<Index> seen = {joint.current().first};
  while (joint.has_next()) seen.push_back(joint.next().first);
  EXPECT_EQ(seen, to_vec(index.column(0)));
}

TEST_F(Toy, ScreenBudgetThree) {
  for (const auto& opts : kAllOptions) {
    EXPECT_EQ(to_vec(searcher.screen(ctx, kToyQuery, 3, opts)), zero_based({6, 1, 7}));
    EXPECT_TRUE(ctx.visited_is_clear());
  }
}

TEST_F(Toy, ScreenBudgetSeven) {
  for (const auto& opts : kAllOptions) {
    EXPECT_EQ(to_vec(searcher.screen(ctx, kToyQuery, 7, opts)),
              zero_based({6, 1, 7, 2, 3, 4, 5}));
  }
  EXPECT_EQ(to_vec(searcher.screen(ctx, kToyQuery, 7)), oracle::greedy_rank(h, kToyQuery));
}

TEST_F(Toy, ImprovedScreenIterationThree) {
  searcher.screen(ctx, kToyQuery, 3);
  const auto& st = ctx.stats();
  EXPECT_EQ(st.frontier_pops, 3u);
  EXPECT_LE(st.frontier_pops, 3u + 3 - 1);
  // one advance each in iterations 1 and 2, two in iteration 3 (j=1 skipped)
  EXPECT_EQ(st.cursor_advances, 4u);
  const auto& c2 = ctx.cursors()[1];
  EXPECT_EQ(c2.position(), 3u);
  EXPECT_EQ(c2.current(), 1u);  // s_2[4] = 2
  EXPECT_LE(st.joint_emissions, 3u * 3);
}

TEST_F(Toy, BudgetErrorsAndClamp) {
  EXPECT_THROW(searcher.screen(ctx, kToyQuery, 0), std::invalid_argument);
  const auto c = searcher.screen(ctx, kToyQuery, 100);
  EXPECT_EQ(c.size(), 7u);
  EXPECT_TRUE(ctx.stats().budget_clamped);
  EXPECT_EQ(ctx.stats().budget, 7u);
}

TEST(ScreenPropertyTest, OracleEquivalenceAndBounds) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng() % 120;
    const std::size_t k = 1 + rng() % 16;
    const bool nonneg = trial % 3 == 0;
    const Matrix h = oracle::random_matrix(n, k, rng, nonneg, trial % 4 == 1);
    auto w = oracle::random_vector(k, rng, nonneg && trial % 2 == 0);
    if (trial % 7 == 0) w[rng() % k] = 0.0f;
    const std::size_t budget = 1 + rng() % n;
    const GreedyIndex index = GreedyIndex::build(h);
    const GreedySearcher s(h, index);
    QueryContext ctx = s.make_context();
    auto expected = oracle::greedy_rank(h, w);
    expected.resize(budget);
    for (const auto& opts : kAllOptions) {
      const auto c = to_vec(s.screen(ctx, w, budget, opts));
      ASSERT_EQ(c, expected) << "trial " << trial;
      EXPECT_TRUE(ctx.visited_is_clear());
      EXPECT_LE(ctx.stats().joint_emissions, budget * k);
      EXPECT_GE(ctx.stats().frontier_pops, budget);
      EXPECT_LE(ctx.stats().frontier_pops, ctx.stats().joint_emissions);
    }
  }
}

// Every improved-screen pop either appends a new candidate or consumes an entry
// whose candidate was appended through another dimension after the entry was
// pushed. The second kind is not limited to the k - 1 ties at the start: here
// cursor 2 trails cursor 1 through the same rows and goes stale after each
// append, so B = 3 takes 5 pops, one more than B + k - 1.
TEST(ScreenPropertyTest, StalePopsCanExceedInitialTies) {
  const Matrix h(4, 2, {10, 9.9f, 9, 8.9f, 8, 7.9f, 7, 6.9f});
  const GreedyIndex index = GreedyIndex::build(h);
  const GreedySearcher s(h, index);
  QueryContext ctx = s.make_context();
  const std::vector<float> w = {1, 1};
  for (auto kind : {FrontierKind::kHeap, FrontierKind::kSelectionTree}) {
    EXPECT_EQ(to_vec(s.screen(ctx, w, 3, {ScreenVariant::kImproved, kind})),
              (std::vector<Index>{0, 1, 2}));
    EXPECT_EQ(ctx.stats().frontier_pops, 5u);
    EXPECT_LE(ctx.stats().joint_emissions, 3u * 2);
  }
}

TEST(ScreenPropertyTest, PopsEqualBudgetWithoutSharedRows) {
  // distinct leaders per dimension and disjoint orders: no entry ever goes stale
  const Matrix h(6, 2, {9, 0, 0, 9, 8, 0, 0, 8, 7, 0, 0, 7});
  const GreedyIndex index = GreedyIndex::build(h);
  const GreedySearcher s(h, index);
  QueryContext ctx = s.make_context();
  s.screen(ctx, std::vector<float>{1, 1}, 4);
  EXPECT_EQ(ctx.stats().frontier_pops, 4u);
}

TEST(ScreenPropertyTest, ImprovedEqualsBasicOnLargerInstances) {
  std::mt19937_64 rng(77);
  for (int seed = 0; seed < 100; ++seed) {
    const Matrix h = oracle::random_matrix(256, 8, rng);
    const auto w = oracle::random_vector(8, rng);
    const GreedyIndex index = GreedyIndex::build(h);
    const GreedySearcher s(h, index);
    QueryContext ctx = s.make_context();
    const auto basic = to_vec(s.screen(ctx, w, 64, {ScreenVariant::kBasic}));
    const auto improved = to_vec(s.screen(ctx, w, 64, {ScreenVariant::kImproved}));
    ASSERT_EQ(basic, improved);
  }
}

TEST(ScreenPropertyTest, SingleDimensionIdealProcedure) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    const Matrix h = oracle::random_matrix(n, 1, rng, false, trial % 2 == 0);
    const GreedyIndex index = GreedyIndex::build(h);
    const GreedySearcher s(h, index);
    QueryContext ctx = s.make_context();
    const std::size_t budget = 1 + rng() % n;
    auto col = to_vec(index.column(0));
    auto pos = to_vec(s.screen(ctx, std::vector<float>{0.5f}, budget));
    EXPECT_EQ(pos, std::vector<Index>(col.begin(), col.begin() + budget));
    std::reverse(col.begin(), col.end());
    auto neg = to_vec(s.screen(ctx, std::vector<float>{-0.5f}, budget));
    EXPECT_EQ(neg, std::vector<Index>(col.begin(), col.begin() + budget));
  }
}

TEST(ScreenPropertyTest, InnerProductBoundedByDimensionTimesMaxEntry) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix h = oracle::random_matrix(32, 1 + trial % 9, rng);
    const auto w = oracle::random_vector(h.cols(), rng);
    for (Index j = 0; j < h.rows(); ++j) {
      double best = -INFINITY;
      for (std::size_t t = 0; t < h.cols(); ++t) best = std::max(best, implicit_entry(h, j, t, w));
      EXPECT_LE(inner_product(h, j, w), static_cast<double>(h.cols()) * best + 1e-12);
    }
  }
}

TEST(ScreenPropertyTest, ContextReuseAcrossQueries) {
  std::mt19937_64 rng(6);
  const Matrix h = oracle::random_matrix(100, 5, rng);
  const GreedyIndex index = GreedyIndex::build(h);
  const GreedySearcher s(h, index);
  QueryContext ctx = s.make_context();
  for (int q = 0; q < 30; ++q) {
    const auto w = oracle::random_vector(5, rng);
    QueryContext fresh = s.make_context();
    const auto a = to_vec(s.screen(ctx, w, 1 + q * 3));
    const auto b = to_vec(s.screen(fresh, w, 1 + q * 3));
    ASSERT_EQ(a, b);
  }
}
