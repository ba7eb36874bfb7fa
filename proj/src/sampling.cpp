#include "bmips/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmips {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Vose's alias method over weights[0..n).
void build_alias(std::span<const double> weights, double total,
                 std::span<double> accept, std::span<Index> alias) {
  const std::size_t n = weights.size();
  std::vector<double> scaled(n);
  std::vector<Index> small;
  std::vector<Index> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<Index>(i));
  }
  while (!small.empty() && !large.empty()) {
    const Index s = small.back();
    small.pop_back();
    const Index l = large.back();
    accept[s] = scaled[s];
    alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (Index i : large) {
    accept[i] = 1.0;
    alias[i] = i;
  }
  for (Index i : small) {
    accept[i] = 1.0;
    alias[i] = i;
  }
}

}  // namespace

SamplerIndex SamplerIndex::build(const Matrix& h) {
  SamplerIndex index;
  index.rows_ = h.rows();
  index.cols_ = h.cols();
  index.weights_.assign(h.cols(), 0.0);
  index.accept_.assign(h.rows() * h.cols(), 1.0);
  index.alias_.assign(h.rows() * h.cols(), 0);

  std::vector<double> column(h.rows());
  bool any = false;
  for (std::size_t t = 0; t < h.cols(); ++t) {
    double total = 0.0;
    for (std::size_t j = 0; j < h.rows(); ++j) {
      column[j] = std::fabs(static_cast<double>(h.at(j, t)));
      total += column[j];
    }
    index.weights_[t] = total;
    if (total <= 0.0) continue;
    any = true;
    build_alias(column, total,
                std::span(index.accept_).subspan(t * h.rows(), h.rows()),
                std::span(index.alias_).subspan(t * h.rows(), h.rows()));
  }
  if (!any) throw std::invalid_argument("cannot sample from an all-zero matrix");
  return index;
}

Index SamplerIndex::draw_row(std::size_t t, std::mt19937_64& rng) const {
  const double u = uniform01(rng) * static_cast<double>(rows_);
  const auto slot = std::min(static_cast<std::size_t>(u), rows_ - 1);
  const std::size_t base = t * rows_;
  return (u - static_cast<double>(slot)) < accept_[base + slot] ? static_cast<Index>(slot)
                                                                 : alias_[base + slot];
}

QuerySampler::QuerySampler(const SamplerIndex& index, std::span<const float> w)
    : index_(index), cumulative_(index.cols()) {
  if (w.size() != index.cols()) {
    throw std::invalid_argument("query dimension does not match the sampler");
  }
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (index.usable(t)) total_ += std::fabs(static_cast<double>(w[t])) * index.column_weight(t);
    cumulative_[t] = total_;
  }
}

SampledEntry QuerySampler::draw(std::mt19937_64& rng) const {
  const double u = uniform01(rng) * total_;
  // first t with cumulative > u; zero-weight dimensions are never selected
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) {
    it = std::lower_bound(cumulative_.begin(), cumulative_.end(), total_);
  }
  const auto t = static_cast<std::uint32_t>(it - cumulative_.begin());
  return {index_.draw_row(t, rng), t};
}

std::span<const Index> sample_screen(const SamplerIndex& index,
                                     std::span<const float> w, std::size_t samples,
                                     std::size_t budget, std::uint64_t seed,
                                     SampleScratch& scratch) {
  if (samples == 0 || samples > kMaxSamples) {
    throw std::invalid_argument("sample count must be in [1, 2^31]");
  }
  if (budget == 0) throw std::invalid_argument("budget must be at least 1");

  scratch.out.clear();
  const QuerySampler sampler(index, w);
  if (sampler.empty()) return scratch.out;

  if (scratch.counts.size() != index.rows()) scratch.counts.assign(index.rows(), 0);
  scratch.touched.clear();
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const Index j = sampler.draw(rng).j;
    if (scratch.counts[j]++ == 0) scratch.touched.push_back(j);
  }

  auto& touched = scratch.touched;
  const auto& counts = scratch.counts;
  const auto better = [&](Index a, Index b) {
    return counts[a] > counts[b] || (counts[a] == counts[b] && a < b);
  };
  const std::size_t keep = std::min(budget, touched.size());
  if (keep < touched.size()) {
    std::nth_element(touched.begin(), touched.begin() + keep, touched.end(), better);
  }
  std::sort(touched.begin(), touched.begin() + keep, better);
  scratch.out.assign(touched.begin(), touched.begin() + keep);

  for (Index j : touched) scratch.counts[j] = 0;
  return scratch.out;
}

}  // namespace bmips
