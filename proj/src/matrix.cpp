#include "bmips/matrix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

namespace bmips {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) {
    throw std::invalid_argument("matrix dimensions must be positive");
  }
  if (values_.size() != rows_ * cols_) {
    throw std::invalid_argument("matrix payload size " +
                                std::to_string(values_.size()) +
                                " does not match " + std::to_string(rows_) +
                                "x" + std::to_string(cols_));
  }
  check_finite(values_);
}

void check_finite(std::span<const float> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError("non-finite value at flat offset " + std::to_string(i));
    }
  }
}

namespace {

void check_query(const Matrix& h, std::span<const float> w) {
  if (w.size() != h.cols()) {
    throw std::invalid_argument("query dimension " + std::to_string(w.size()) +
                                " does not match matrix dimension " +
                                std::to_string(h.cols()));
  }
}

void check_row(const Matrix& h, Index j) {
  if (j >= h.rows()) {
    throw std::out_of_range("row index " + std::to_string(j) +
                            " out of range for " + std::to_string(h.rows()) +
                            " rows");
  }
}

}  // namespace

double inner_product(const Matrix& h, Index j, std::span<const float> w) {
  check_row(h, j);
  check_query(h, w);
  return dot_unchecked(h.row(j), w);
}

double implicit_entry(const Matrix& h, Index j, std::size_t t,
                      std::span<const float> w) {
  check_row(h, j);
  check_query(h, w);
  if (t >= h.cols()) {
    throw std::out_of_range("dimension index " + std::to_string(t) +
                            " out of range");
  }
  return implicit_entry_unchecked(h, j, t, w);
}

namespace {

// Eight independent accumulator chains hide the add latency while every
// individual chain still runs t = 0..k-1 in order.
constexpr std::size_t kInterleave = 8;

template <typename RowPtr>
void score_block(RowPtr row_ptr, std::size_t count, std::span<const float> w,
                 double* out) {
  const std::size_t k = w.size();
  std::size_t i = 0;
  for (; i + kInterleave <= count; i += kInterleave) {
    const float* r[kInterleave];
    double acc[kInterleave] = {};
    for (std::size_t u = 0; u < kInterleave; ++u) r[u] = row_ptr(i + u);
    for (std::size_t t = 0; t < k; ++t) {
      const double wt = w[t];
      for (std::size_t u = 0; u < kInterleave; ++u) {
        acc[u] += static_cast<double>(r[u][t]) * wt;
      }
    }
    for (std::size_t u = 0; u < kInterleave; ++u) out[i + u] = acc[u];
  }
  for (; i < count; ++i) {
    out[i] = dot_unchecked({row_ptr(i), k}, w);
  }
}

}  // namespace

void score_rows(const Matrix& h, std::span<const float> w, std::size_t first,
                std::span<double> out) {
  const float* base = h.values().data();
  const std::size_t k = h.cols();
  score_block([&](std::size_t i) { return base + (first + i) * k; },
              out.size(), w, out.data());
}

void score_gather(const Matrix& h, std::span<const float> w,
                  std::span<const Index> rows, std::span<double> out) {
  const float* base = h.values().data();
  const std::size_t k = h.cols();
  score_block(
      [&](std::size_t i) { return base + static_cast<std::size_t>(rows[i]) * k; },
      rows.size(), w, out.data());
}

std::size_t rank_of(double x, std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("rank_of on an empty set");
  std::size_t rank = 0;
  for (double v : values) rank += (v >= x) ? 1 : 0;
  return rank;
}

FileFormat parse_format(const std::string& name) {
  if (name == "bin" || name == "binary") return FileFormat::kBinary;
  if (name == "txt" || name == "text") return FileFormat::kText;
  throw std::invalid_argument("unknown format '" + name + "' (expected bin or txt)");
}

FileFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".txt" ? FileFormat::kText : FileFormat::kBinary;
}

// ---------------------------------------------------------------------------
// Byte-level I/O

namespace io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

void ByteWriter::put_magic(const char (&magic)[5]) {
  buf_.insert(buf_.end(), magic, magic + 4);
}

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

void ByteReader::need(std::size_t n) {
  if (remaining() < n) {
    throw DataError("truncated payload: need " + std::to_string(n) +
                    " more bytes, have " + std::to_string(remaining()));
  }
}

void ByteReader::expect_magic(const char (&magic)[5]) {
  need(4);
  if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
    throw DataError(std::string("malformed header: expected magic '") + magic + "'");
  }
  pos_ += 4;
}

std::uint32_t ByteReader::get_u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::get_u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
  pos_ += 8;
  return v;
}

float ByteReader::get_f32() { return std::bit_cast<float>(get_u32()); }

}  // namespace io

// ---------------------------------------------------------------------------
// Matrix files

std::vector<std::uint8_t> matrix_to_bytes(const Matrix& m) {
  io::ByteWriter w;
  w.reserve(24 + m.values().size() * 4);
  w.put_magic("BMIP");
  w.put_u32(kMatrixFormatVersion);
  w.put_u64(m.rows());
  w.put_u64(m.cols());
  for (float v : m.values()) w.put_f32(v);
  return w.take();
}

Matrix matrix_from_bytes(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_magic("BMIP");
  const auto version = r.get_u32();
  if (version != kMatrixFormatVersion) {
    throw DataError("unsupported matrix format version " + std::to_string(version));
  }
  const auto rows = r.get_u64();
  const auto cols = r.get_u64();
  if (rows == 0 || cols == 0) throw DataError("malformed header: zero dimension");
  if (rows > r.remaining() / 4 / cols) {
    throw DataError("truncated payload: header declares " + std::to_string(rows) +
                    "x" + std::to_string(cols) + " values");
  }
  std::vector<float> values(rows * cols);
  for (auto& v : values) v = r.get_f32();
  if (r.remaining() != 0) throw DataError("trailing bytes after matrix payload");
  check_finite(values);
  return Matrix(rows, cols, std::move(values));
}

std::string matrix_to_text(const Matrix& m) {
  std::ostringstream os;
  os.precision(9);  // enough digits to round-trip a float
  os << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (t) os << ' ';
      os << row[t];
    }
    os << '\n';
  }
  return os.str();
}

Matrix matrix_from_text(const std::string& text) {
  std::istringstream in(text);
  long long rows = 0;
  long long cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw DataError("malformed header: expected positive 'n k'");
  }
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(rows * cols));
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const float v = std::strtof(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      throw DataError("malformed value '" + token + "'");
    }
    values.push_back(v);
  }
  if (values.size() != static_cast<std::size_t>(rows * cols)) {
    throw DataError("truncated payload: expected " + std::to_string(rows * cols) +
                    " values, found " + std::to_string(values.size()));
  }
  check_finite(values);
  return Matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                std::move(values));
}

void save_matrix(const Matrix& m, const std::filesystem::path& path,
                 FileFormat format) {
  if (format == FileFormat::kBinary) {
    io::write_file(path, matrix_to_bytes(m));
  } else {
    const auto text = matrix_to_text(m);
    io::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()),
                          text.size()});
  }
}

Matrix load_matrix(const std::filesystem::path& path, FileFormat format) {
  const auto bytes = io::read_file(path);
  if (format == FileFormat::kBinary) return matrix_from_bytes(bytes);
  return matrix_from_text(std::string(bytes.begin(), bytes.end()));
}

Matrix load_matrix(const std::filesystem::path& path) {
  return load_matrix(path, format_for_path(path));
}

// ---------------------------------------------------------------------------
// Synthetic data

Distribution parse_distribution(const std::string& name) {
  if (name == "normal") return Distribution::kNormal;
  if (name == "nonneg-uniform" || name == "uniform") {
    return Distribution::kNonnegUniform;
  }
  throw std::invalid_argument("unknown distribution '" + name +
                              "' (expected normal or nonneg-uniform)");
}

const char* to_string(Distribution d) {
  return d == Distribution::kNormal ? "normal" : "nonneg-uniform";
}

Matrix generate_synthetic(std::size_t rows, std::size_t cols,
                          std::uint64_t seed, Distribution dist) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("synthetic matrix dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<float> values(rows * cols);
  if (dist == Distribution::kNormal) {
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (auto& v : values) v = normal(rng);
  } else {
    // 24 random mantissa bits: exactly representable, always < 1.
    for (auto& v : values) {
      v = static_cast<float>(rng() >> 40) * 0x1.0p-24f;
    }
  }
  return Matrix(rows, cols, std::move(values));
}

Matrix toy_matrix() {
  return Matrix(7, 3,
                {-5, 5, 69,  //
                 -6, 4, 59,  //
                 -7, 3, 49,  //
                 -1, 2, 39,  //
                 -2, 1, 29,  //
                 -3, 7, 19,  //
                 -4, 6, 9});
}

}  // namespace bmips
