#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bmips {

// Candidate and query indices are 0-based everywhere inside the library.
// Text output produced by the CLI shifts them to 1-based item numbers.
using Index = std::uint32_t;

/// Raised for malformed, truncated or non-finite input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Dense row-major n x k matrix of 32-bit reals.
 *
 * Used both for the candidate set (one row per item embedding) and for a batch
 * of queries (one row per query vector). Immutable after construction; all
 * entries are finite.
 */
class Matrix {
 public:
  Matrix() = default;

  /// Takes ownership of `values` (n*k entries, row-major). Throws DataError on
  /// non-finite values and std::invalid_argument on a shape mismatch.
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  float at(std::size_t row, std::size_t col) const {
    return values_[row * cols_ + col];
  }

  std::span<const float> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }

  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

/// Throws DataError if any value is NaN or infinite.
void check_finite(std::span<const float> values);

// Every product h_jt * w_t is formed in double, which is exact for two floats,
// and the k products are summed strictly left to right (t = 0, 1, ..., k-1).
// Any code that needs bit-identical scores must go through these functions.

/// z_jt = h_jt * w_t, exact in double.
inline double implicit_entry_unchecked(const Matrix& h, Index j, std::size_t t,
                                       std::span<const float> w) {
  return static_cast<double>(h.at(j, t)) * static_cast<double>(w[t]);
}

inline double dot_unchecked(std::span<const float> row,
                            std::span<const float> w) {
  double acc = 0.0;
  for (std::size_t t = 0; t < row.size(); ++t) {
    acc += static_cast<double>(row[t]) * static_cast<double>(w[t]);
  }
  return acc;
}

/// h_j^T w. Throws std::out_of_range / std::invalid_argument on bad input.
double inner_product(const Matrix& h, Index j, std::span<const float> w);

/// z_jt = h_jt * w_t with bounds checks.
double implicit_entry(const Matrix& h, Index j, std::size_t t,
                      std::span<const float> w);

/// Scores rows [first, first + out.size()) against w. Rows are processed in
/// interleaved groups for throughput, but each row keeps the left-to-right
/// order, so out[i] == dot_unchecked(h.row(first + i), w) bit for bit.
void score_rows(const Matrix& h, std::span<const float> w, std::size_t first,
                std::span<double> out);

/// Scores an arbitrary list of rows; same bit-exactness guarantee.
void score_gather(const Matrix& h, std::span<const float> w,
                  std::span<const Index> rows, std::span<double> out);

/// Number of elements of `values` that are >= x (1 for a unique maximum).
std::size_t rank_of(double x, std::span<const double> values);

enum class FileFormat { kBinary, kText };

/// Parses "bin"/"binary" or "txt"/"text".
FileFormat parse_format(const std::string& name);

/// Picks kText for a ".txt" extension and kBinary otherwise.
FileFormat format_for_path(const std::filesystem::path& path);

// Binary layout: "BMIP", u32 version, u64 rows, u64 cols, then rows*cols
// little-endian IEEE-754 floats in row-major order.
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

std::vector<std::uint8_t> matrix_to_bytes(const Matrix& m);
Matrix matrix_from_bytes(std::span<const std::uint8_t> bytes);

std::string matrix_to_text(const Matrix& m);
Matrix matrix_from_text(const std::string& text);

void save_matrix(const Matrix& m, const std::filesystem::path& path,
                 FileFormat format);
Matrix load_matrix(const std::filesystem::path& path, FileFormat format);
/// Format inferred from the extension.
Matrix load_matrix(const std::filesystem::path& path);

enum class Distribution { kNormal, kNonnegUniform };

Distribution parse_distribution(const std::string& name);
const char* to_string(Distribution d);

/// Deterministic synthetic matrix: standard-normal or uniform [0, 1) entries.
Matrix generate_synthetic(std::size_t rows, std::size_t cols,
                          std::uint64_t seed, Distribution dist);

/// The 7 x 3 toy candidate set used throughout the tests and docs.
Matrix toy_matrix();

// Raw byte helpers shared by the matrix and index file formats.
namespace io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

class ByteWriter {
 public:
  void put_magic(const char (&magic)[5]);
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f32(float v);
  std::vector<std::uint8_t> take() { return std::move(buf_); }
  void reserve(std::size_t n) { buf_.reserve(n); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(const char (&magic)[5]);
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  float get_f32();
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n);

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace io

}  // namespace bmips
