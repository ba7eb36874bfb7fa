#include "bmips/greedy_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <utility>

namespace bmips {

GreedyIndex GreedyIndex::build(const Matrix& h) {
  const std::size_t n = h.rows();
  const std::size_t k = h.cols();
  if (n == 0) throw std::invalid_argument("cannot index an empty matrix");
  if (n > std::numeric_limits<Index>::max()) {
    throw std::invalid_argument("too many candidates for 32-bit indices");
  }

  std::vector<Index> sorted(n * k);
  std::vector<std::pair<float, Index>> column(n);
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      column[j] = {h.at(j, t), static_cast<Index>(j)};
    }
    // stable: equal values keep ascending j
    std::stable_sort(column.begin(), column.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    auto* dst = sorted.data() + t * n;
    for (std::size_t r = 0; r < n; ++r) dst[r] = column[r].second;
  }
  return GreedyIndex(n, k, std::move(sorted));
}

std::vector<std::uint8_t> GreedyIndex::to_bytes() const {
  io::ByteWriter w;
  w.reserve(24 + sorted_.size() * 4);
  w.put_magic("GIDX");
  w.put_u32(kIndexFormatVersion);
  w.put_u64(rows_);
  w.put_u64(cols_);
  for (Index j : sorted_) w.put_u32(j);
  return w.take();
}

GreedyIndex GreedyIndex::from_bytes(std::span<const std::uint8_t> bytes,
                                    const Matrix& companion) {
  io::ByteReader r(bytes);
  r.expect_magic("GIDX");
  const auto version = r.get_u32();
  if (version != kIndexFormatVersion) {
    throw DataError("unsupported index format version " + std::to_string(version));
  }
  const auto n = r.get_u64();
  const auto k = r.get_u64();
  if (n != companion.rows() || k != companion.cols()) {
    throw DataError("index shape " + std::to_string(n) + "x" + std::to_string(k) +
                    " does not match matrix shape " +
                    std::to_string(companion.rows()) + "x" +
                    std::to_string(companion.cols()));
  }
  if (n == 0 || n > r.remaining() / 4 / k) {
    throw DataError("truncated index payload");
  }
  std::vector<Index> sorted(n * k);
  for (auto& j : sorted) j = r.get_u32();
  if (r.remaining() != 0) throw DataError("trailing bytes after index payload");

  std::vector<std::uint8_t> seen(n);
  for (std::size_t t = 0; t < k; ++t) {
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      const Index j = sorted[t * n + p];
      if (j >= n || seen[j]) {
        throw DataError("index column " + std::to_string(t) +
                        " is not a permutation (bad entry " + std::to_string(j) +
                        " at position " + std::to_string(p) + ")");
      }
      seen[j] = 1;
    }
  }
  return GreedyIndex(n, k, std::move(sorted));
}

void GreedyIndex::save(const std::filesystem::path& path) const {
  io::write_file(path, to_bytes());
}

GreedyIndex GreedyIndex::load(const std::filesystem::path& path,
                              const Matrix& companion) {
  return from_bytes(io::read_file(path), companion);
}

}  // namespace bmips
