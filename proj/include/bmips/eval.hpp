#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bmips/matrix.hpp"
#include "bmips/nns.hpp"
#include "bmips/ranking.hpp"

namespace bmips {

inline constexpr std::size_t kTruthDepth = 20;

/// Exact top-20 (or top-n when n < 20) per query.
struct GroundTruth {
  std::vector<std::vector<ScoredItem>> per_query;
};

/// `threads` == 0 uses one thread per hardware core.
GroundTruth compute_ground_truth(const Matrix& h, const Matrix& queries,
                                 std::size_t depth = kTruthDepth,
                                 std::size_t threads = 1);

/// |top-K(result) ∩ top-K(truth)| / min(K, |truth|). An empty result scores 0.
double precision_at(std::span<const ScoredItem> result,
                    std::span<const ScoredItem> truth, std::size_t k);

/// Method names accepted by the sweep.
const std::vector<std::string>& valid_methods();

struct SweepConfig {
  // Dataset: files if matrix_path is set, otherwise synthetic.
  std::filesystem::path matrix_path;
  std::filesystem::path query_path;
  std::size_t n = std::size_t{1} << 14;
  std::size_t k = 32;
  Distribution distribution = Distribution::kNormal;
  std::uint64_t seed = 1;
  std::size_t num_queries = 2000;
  std::uint64_t query_seed = 2;

  std::vector<std::string> methods = {"naive", "greedy", "lsh", "sample"};
  std::vector<std::size_t> budgets;  // empty: 2^5 .. 2^ceil(log2 n), capped at n
  std::size_t top_k = 10;

  std::vector<std::size_t> lsh_bits = {4, 8, 12, 16};
  std::vector<std::size_t> lsh_tables = {4, 16, 64};
  std::uint64_t lsh_seed = 3;
  ReductionVariant reduction = ReductionVariant::kA;
  double reduction_u = kDefaultReductionU;
  std::size_t reduction_kbar = kDefaultReductionKbar;

  std::vector<std::size_t> sample_counts;  // empty: S = B
  std::uint64_t sample_seed = 4;

  std::size_t repetitions = 3;
  std::size_t threads = 1;  // ground truth only; timed loops are single-threaded
  std::string machine_note;
};

/// Parses "key = value" lines ('#' starts a comment). Unknown keys throw.
SweepConfig parse_sweep_config(const std::string& text, SweepConfig base = {});
/// Applies one key/value pair; throws std::invalid_argument on bad input.
void apply_config_value(SweepConfig& config, const std::string& key,
                        const std::string& value);
void validate(const SweepConfig& config);

std::vector<std::size_t> default_budget_grid(std::size_t n);

struct Dataset {
  Matrix candidates;
  Matrix queries;
};

Dataset make_dataset(const SweepConfig& config);

struct ReportRow {
  std::string method;
  std::string params;
  double prec5 = 0.0;
  double prec10 = 0.0;
  double screen_us = 0.0;  // mean per query, median over repetitions
  double rank_us = 0.0;
  double query_us = 0.0;
  double speedup = 0.0;    // naive query_us / query_us
  double build_seconds = 0.0;
  double mean_candidates = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::map<std::string, std::string> metadata;
};

EvalReport run_sweep(const SweepConfig& config);
EvalReport run_sweep(const SweepConfig& config, const Dataset& data);

/// Median over `repetitions` runs of the naive mean per-query time in
/// microseconds, after one warmup pass.
double time_naive_us(const Matrix& h, const Matrix& queries, std::size_t k,
                     std::size_t repetitions);

void emit_csv(const EvalReport& report, const std::filesystem::path& path);
std::vector<ReportRow> parse_csv(const std::filesystem::path& path);
/// method,params,speedup,prec@5,prec@10 sorted by method, then speedup.
void emit_curve_data(const EvalReport& report, const std::filesystem::path& path);
void emit_metadata(const EvalReport& report, const std::filesystem::path& path);

/// "query_id,rank,item_index,score" rows with 1-based ids, ranks and items.
void write_results_csv(std::ostream& os,
                       const std::vector<RankedResult>& results);

}  // namespace bmips
