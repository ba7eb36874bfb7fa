#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bmips/matrix.hpp"

namespace bmips {

/// splitmix64 finalizer; derives independent per-query seeds from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/**
 * Query-independent part of the sampling screen: per dimension t, an alias
 * table drawing j with probability |h_jt| / c_t, where c_t = sum_j |h_jt|.
 * Columns with c_t == 0 are marked unusable and never drawn from.
 */
class SamplerIndex {
 public:
  /// Throws std::invalid_argument if every entry of H is zero.
  static SamplerIndex build(const Matrix& h);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double column_weight(std::size_t t) const { return weights_[t]; }
  bool usable(std::size_t t) const { return weights_[t] > 0.0; }

  /// O(1) alias draw from column t; t must be usable.
  Index draw_row(std::size_t t, std::mt19937_64& rng) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> weights_;  // c_t
  std::vector<double> accept_;   // k blocks of n acceptance thresholds
  std::vector<Index> alias_;     // k blocks of n aliases
};

struct SampledEntry {
  Index j = 0;
  std::uint32_t t = 0;
};

/// Samples (j, t) with probability |w_t h_jt| / sum |w_t h_jt|: first t from
/// |w_t| c_t through a cumulative array, then j | t from the alias table.
class QuerySampler {
 public:
  QuerySampler(const SamplerIndex& index, std::span<const float> w);

  /// True when every |w_t| c_t is zero, i.e. nothing can be drawn.
  bool empty() const noexcept { return total_ <= 0.0; }

  SampledEntry draw(std::mt19937_64& rng) const;

 private:
  const SamplerIndex& index_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

inline constexpr std::size_t kMaxSamples = std::size_t{1} << 31;

struct SampleScratch {
  std::vector<std::uint32_t> counts;
  std::vector<Index> touched;
  std::vector<Index> out;
};

/// Draws `samples` entries, counts hits per candidate and returns up to
/// `budget` candidates with the most hits (ties by ascending index).
std::span<const Index> sample_screen(const SamplerIndex& index,
                                     std::span<const float> w, std::size_t samples,
                                     std::size_t budget, std::uint64_t seed,
                                     SampleScratch& scratch);

}  // namespace bmips
