#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bmips/matrix.hpp"

namespace bmips {

/**
 * Query-independent part of Greedy-MIPS: one index array per dimension with
 * the candidates sorted by that column in descending order.
 *
 * column(t)[0] is the candidate with the largest h_jt; ties are ordered by
 * ascending candidate index. Reading a column backwards gives the ascending
 * order, which is what a query with w_t <= 0 needs.
 *
 * Built in O(kn log n) time, O(kn) space. Immutable after construction and
 * safe to share between threads.
 */
class GreedyIndex {
 public:
  GreedyIndex() = default;

  static GreedyIndex build(const Matrix& h);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const Index> column(std::size_t t) const {
    return {sorted_.data() + t * rows_, rows_};
  }

  /// True if this index was built for a matrix of the same shape.
  bool matches(const Matrix& h) const noexcept {
    return h.rows() == rows_ && h.cols() == cols_;
  }

  // File layout: "GIDX", u32 version, u64 n, u64 k, then k blocks of n
  // little-endian u32 candidate indices (0-based).
  std::vector<std::uint8_t> to_bytes() const;

  /// Validates magic, shape against the companion matrix and the permutation
  /// property of every column. Throws DataError on any violation.
  static GreedyIndex from_bytes(std::span<const std::uint8_t> bytes,
                                const Matrix& companion);

  void save(const std::filesystem::path& path) const;
  static GreedyIndex load(const std::filesystem::path& path,
                          const Matrix& companion);

  friend bool operator==(const GreedyIndex&, const GreedyIndex&) = default;

 private:
  GreedyIndex(std::size_t rows, std::size_t cols, std::vector<Index> sorted)
      : rows_(rows), cols_(cols), sorted_(std::move(sorted)) {}

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Index> sorted_;  // column-major: k blocks of n
};

inline constexpr std::uint32_t kIndexFormatVersion = 1;

}  // namespace bmips
