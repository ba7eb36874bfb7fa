#include "bmips/nns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bmips {

ReductionVariant parse_reduction(const std::string& name) {
  if (name == "A" || name == "a") return ReductionVariant::kA;
  if (name == "B" || name == "b") return ReductionVariant::kB;
  throw std::invalid_argument("unknown reduction variant '" + name +
                              "' (expected A or B)");
}

namespace {

double squared_norm(std::span<const float> row) {
  double s = 0.0;
  for (float v : row) s += static_cast<double>(v) * v;
  return s;
}

}  // namespace

ReducedCandidateSet reduce_a(const Matrix& h) {
  ReducedCandidateSet set;
  set.variant = ReductionVariant::kA;
  set.rows = h.rows();
  set.dim = h.cols() + 1;
  set.extra_dims = 1;

  std::vector<double> norms(h.rows());
  for (std::size_t j = 0; j < h.rows(); ++j) norms[j] = squared_norm(h.row(j));
  set.max_sq_norm = *std::max_element(norms.begin(), norms.end());

  set.values.resize(set.rows * set.dim);
  for (std::size_t j = 0; j < h.rows(); ++j) {
    double* dst = set.values.data() + j * set.dim;
    const auto src = h.row(j);
    std::copy(src.begin(), src.end(), dst);
    dst[h.cols()] = std::sqrt(std::max(0.0, set.max_sq_norm - norms[j]));
  }
  return set;
}

std::vector<double> reduce_query_a(std::span<const float> w) {
  std::vector<double> q(w.begin(), w.end());
  q.push_back(0.0);
  return q;
}

ReducedCandidateSet reduce_b(const Matrix& h, double max_norm_bound,
                             std::size_t extra_dims) {
  if (!(max_norm_bound > 0.0 && max_norm_bound < 1.0)) {
    throw std::invalid_argument("reduction bound U must satisfy 0 < U < 1");
  }
  ReducedCandidateSet set;
  set.variant = ReductionVariant::kB;
  set.rows = h.rows();
  set.dim = h.cols() + extra_dims;
  set.extra_dims = extra_dims;
  set.max_norm_bound = max_norm_bound;

  double max_norm = 0.0;
  for (std::size_t j = 0; j < h.rows(); ++j) {
    max_norm = std::max(max_norm, std::sqrt(squared_norm(h.row(j))));
  }
  set.scale = max_norm > max_norm_bound ? max_norm_bound / max_norm : 1.0;

  set.values.resize(set.rows * set.dim);
  for (std::size_t j = 0; j < h.rows(); ++j) {
    double* dst = set.values.data() + j * set.dim;
    const auto src = h.row(j);
    double sq = 0.0;
    for (std::size_t t = 0; t < h.cols(); ++t) {
      dst[t] = set.scale * src[t];
      sq += dst[t] * dst[t];
    }
    // |h|^(2^i) by repeated squaring of |h|^2
    double power = sq;
    for (std::size_t i = 0; i < extra_dims; ++i) {
      dst[h.cols() + i] = 0.5 - power;
      power *= power;
    }
  }
  return set;
}

std::vector<double> reduce_query_b(std::span<const float> w, std::size_t extra_dims) {
  std::vector<double> q(w.begin(), w.end());
  q.resize(w.size() + extra_dims, 0.0);
  return q;
}

std::vector<double> reduce_query(const ReducedCandidateSet& set,
                                 std::span<const float> w) {
  if (w.size() + set.extra_dims != set.dim) {
    throw std::invalid_argument("query dimension does not match the reduced set");
  }
  return set.variant == ReductionVariant::kA ? reduce_query_a(w)
                                             : reduce_query_b(w, set.extra_dims);
}

// ---------------------------------------------------------------------------

LshIndex LshIndex::build(const ReducedCandidateSet& set, const LshParams& params) {
  if (params.bits == 0 || params.bits > 64) {
    throw std::invalid_argument("lsh.a must be in [1, 64]");
  }
  if (params.tables == 0) throw std::invalid_argument("lsh.b must be at least 1");
  if (set.rows == 0) throw std::invalid_argument("cannot hash an empty set");

  LshIndex index;
  index.params_ = params;
  index.dim_ = set.dim;
  index.rows_ = set.rows;

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  index.planes_.resize(params.tables * params.bits * set.dim);
  for (auto& v : index.planes_) v = normal(rng);

  std::vector<std::uint64_t> keys(set.rows);
  std::vector<Index> order(set.rows);
  index.tables_.resize(params.tables);
  for (std::size_t b = 0; b < params.tables; ++b) {
    for (std::size_t j = 0; j < set.rows; ++j) keys[j] = index.signature(b, set.row(j));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return keys[x] < keys[y]; });
    auto& table = index.tables_[b];
    table.members = order;
    for (std::size_t p = 0; p < set.rows;) {
      std::size_t q = p;
      while (q < set.rows && keys[order[q]] == keys[order[p]]) ++q;
      table.ranges.emplace(keys[order[p]],
                           std::pair{static_cast<std::uint32_t>(p),
                                     static_cast<std::uint32_t>(q - p)});
      p = q;
    }
  }
  return index;
}

std::uint64_t LshIndex::signature(std::size_t table,
                                  std::span<const double> x) const {
  std::uint64_t key = 0;
  const double* plane = planes_.data() + table * params_.bits * dim_;
  for (std::size_t i = 0; i < params_.bits; ++i, plane += dim_) {
    double dot = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) dot += plane[d] * x[d];
    key |= std::uint64_t{dot >= 0.0} << i;
  }
  return key;
}

std::span<const Index> LshIndex::bucket(std::size_t table, std::uint64_t key) const {
  const auto& t = tables_[table];
  const auto it = t.ranges.find(key);
  if (it == t.ranges.end()) return {};
  return {t.members.data() + it->second.first, it->second.second};
}

std::span<const Index> LshIndex::screen(std::span<const double> reduced_query,
                                        LshScratch& scratch) const {
  if (reduced_query.size() != dim_) {
    throw std::invalid_argument("reduced query has the wrong dimension");
  }
  if (scratch.seen.size() != rows_) scratch.seen.assign(rows_, 0);
  scratch.out.clear();
  for (std::size_t b = 0; b < tables_.size(); ++b) {
    for (Index j : bucket(b, signature(b, reduced_query))) {
      if (!scratch.seen[j]) {
        scratch.seen[j] = 1;
        scratch.out.push_back(j);
      }
    }
  }
  for (Index j : scratch.out) scratch.seen[j] = 0;
  return scratch.out;
}

}  // namespace bmips
