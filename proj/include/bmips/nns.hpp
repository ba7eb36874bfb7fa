#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bmips/matrix.hpp"

namespace bmips {

enum class ReductionVariant {
  kA,  // append sqrt(M - |h|^2): all norms become exactly sqrt(M)
  kB,  // scale, then append 1/2 - |h|^(2^i) for i = 1..kbar
};

ReductionVariant parse_reduction(const std::string& name);

/**
 * Candidate set augmented so that Euclidean nearest-neighbour order follows
 * inner-product order. Stored in double so the equal-norm property holds to
 * rounding error of the original data.
 */
struct ReducedCandidateSet {
  ReductionVariant variant = ReductionVariant::kA;
  std::size_t rows = 0;
  std::size_t dim = 0;            // k + 1 (A) or k + kbar (B)
  std::vector<double> values;     // rows x dim, row-major
  double max_sq_norm = 0.0;       // M, variant A
  double scale = 1.0;             // factor applied to H, variant B
  double max_norm_bound = 0.0;    // U, variant B
  std::size_t extra_dims = 0;     // 1 (A) or kbar (B)

  std::span<const double> row(std::size_t j) const {
    return {values.data() + j * dim, dim};
  }
};

/// h_j -> [h_j; sqrt(M - |h_j|^2)] with M = max_j |h_j|^2.
ReducedCandidateSet reduce_a(const Matrix& h);
/// w -> [w; 0].
std::vector<double> reduce_query_a(std::span<const float> w);

/// Scales H by U / max_j |h_j| when some row is longer than U (otherwise
/// leaves it unscaled), then appends 1/2 - |h_j|^(2^i) for i = 1..kbar.
/// Requires 0 < U < 1.
ReducedCandidateSet reduce_b(const Matrix& h, double max_norm_bound,
                             std::size_t extra_dims);
/// w -> [w; 0_kbar].
std::vector<double> reduce_query_b(std::span<const float> w, std::size_t extra_dims);

/// Dispatches on set.variant.
std::vector<double> reduce_query(const ReducedCandidateSet& set,
                                 std::span<const float> w);

inline constexpr double kDefaultReductionU = 0.83;
inline constexpr std::size_t kDefaultReductionKbar = 3;

struct LshParams {
  std::size_t bits = 8;     // a: random projections ANDed into one key
  std::size_t tables = 16;  // b: hyper-hashes ORed together
  std::uint64_t seed = 0;
};

/// Reusable per-query scratch for LshIndex::screen.
struct LshScratch {
  std::vector<std::uint8_t> seen;
  std::vector<Index> out;
};

/**
 * Sign-random-projection LSH with AND/OR amplification. Each of the b tables
 * hashes a vector to an a-bit key whose bit i is 1[<r_i, x> >= 0]; a query's
 * candidate set is the union of its b buckets.
 */
class LshIndex {
 public:
  static LshIndex build(const ReducedCandidateSet& set, const LshParams& params);

  const LshParams& params() const noexcept { return params_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return rows_; }

  std::uint64_t signature(std::size_t table, std::span<const double> x) const;

  std::span<const Index> bucket(std::size_t table, std::uint64_t key) const;

  /// Union of the query's buckets, duplicate-free, in first-seen order.
  std::span<const Index> screen(std::span<const double> reduced_query,
                                LshScratch& scratch) const;

 private:
  struct Table {
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> ranges;
    std::vector<Index> members;  // grouped by key
  };

  LshParams params_;
  std::size_t dim_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> planes_;  // tables * bits hyperplanes of length dim_
  std::vector<Table> tables_;
};

}  // namespace bmips
