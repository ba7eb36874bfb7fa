#include "bmips/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "bmips/greedy_index.hpp"
#include "bmips/greedy_query.hpp"
#include "bmips/sampling.hpp"

namespace bmips {

GroundTruth compute_ground_truth(const Matrix& h, const Matrix& queries,
                                 std::size_t depth, std::size_t threads) {
  if (queries.cols() != h.cols()) {
    throw std::invalid_argument("query dimension does not match the matrix");
  }
  GroundTruth truth;
  truth.per_query.resize(queries.rows());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, queries.rows()));

  auto work = [&](std::size_t first, std::size_t step) {
    RankScratch scratch;
    RankedResult result;
    for (std::size_t q = first; q < queries.rows(); q += step) {
      naive_topk_into(h, queries.row(q), depth, scratch, result);
      truth.per_query[q] = std::move(result.entries);
    }
  };
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(work, i, threads);
    for (auto& th : pool) th.join();
  }
  return truth;
}

double precision_at(std::span<const ScoredItem> result,
                    std::span<const ScoredItem> truth, std::size_t k) {
  const std::size_t denom = std::min(k, truth.size());
  if (denom == 0 || result.empty()) return 0.0;
  const auto top_result = result.first(std::min(k, result.size()));
  const auto top_truth = truth.first(denom);
  std::size_t hits = 0;
  for (const auto& r : top_result) {
    for (const auto& t : top_truth) {
      if (r.index == t.index) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(denom);
}

const std::vector<std::string>& valid_methods() {
  static const std::vector<std::string> methods = {
      "naive", "greedy", "greedy-heap", "greedy-basic", "lsh", "sample"};
  return methods;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (value.empty() || pos != value.size()) {
    throw std::invalid_argument("config key '" + key + "' expects a non-negative integer, got '" +
                                value + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (value.empty() || pos != value.size()) {
    throw std::invalid_argument("config key '" + key + "' expects a number, got '" +
                                value + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(value)) out.push_back(parse_u64(key, item));
  return out;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(values[i]);
  }
  return s;
}

}  // namespace

void apply_config_value(SweepConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "matrix") {
    c.matrix_path = value;
  } else if (key == "query_file") {
    c.query_path = value;
  } else if (key == "n") {
    c.n = parse_u64(key, value);
  } else if (key == "k") {
    c.k = parse_u64(key, value);
  } else if (key == "dist") {
    c.distribution = parse_distribution(value);
  } else if (key == "seed") {
    c.seed = parse_u64(key, value);
  } else if (key == "queries") {
    c.num_queries = parse_u64(key, value);
  } else if (key == "query_seed") {
    c.query_seed = parse_u64(key, value);
  } else if (key == "methods") {
    c.methods = split_list(value);
  } else if (key == "budgets") {
    c.budgets = parse_size_list(key, value);
  } else if (key == "lsh.a") {
    c.lsh_bits = parse_size_list(key, value);
  } else if (key == "lsh.b") {
    c.lsh_tables = parse_size_list(key, value);
  } else if (key == "lsh.seed") {
    c.lsh_seed = parse_u64(key, value);
  } else if (key == "reduce.variant") {
    c.reduction = parse_reduction(value);
  } else if (key == "reduce.U") {
    c.reduction_u = parse_double(key, value);
  } else if (key == "reduce.kbar") {
    c.reduction_kbar = parse_u64(key, value);
  } else if (key == "sample.S") {
    c.sample_counts = parse_size_list(key, value);
  } else if (key == "sample.seed") {
    c.sample_seed = parse_u64(key, value);
  } else if (key == "repetitions") {
    c.repetitions = parse_u64(key, value);
  } else if (key == "threads") {
    c.threads = parse_u64(key, value);
  } else if (key == "machine_note") {
    c.machine_note = value;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

SweepConfig parse_sweep_config(const std::string& text, SweepConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

void validate(const SweepConfig& c) {
  if (c.matrix_path.empty() && (c.n == 0 || c.k == 0)) {
    throw std::invalid_argument("synthetic n and k must be positive");
  }
  if (c.num_queries == 0) throw std::invalid_argument("queries must be positive");
  if (c.methods.empty()) throw std::invalid_argument("no methods selected");
  for (const auto& m : c.methods) {
    const auto& valid = valid_methods();
    if (std::find(valid.begin(), valid.end(), m) == valid.end()) {
      std::string list;
      for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
      throw std::invalid_argument("unknown method '" + m + "' (valid: " + list + ")");
    }
  }
  for (auto b : c.budgets) {
    if (b == 0) throw std::invalid_argument("budgets must be positive");
  }
  for (auto s : c.sample_counts) {
    if (s == 0 || s > kMaxSamples) throw std::invalid_argument("sample.S out of range");
  }
  for (auto a : c.lsh_bits) {
    if (a == 0 || a > 64) throw std::invalid_argument("lsh.a must be in [1, 64]");
  }
  for (auto b : c.lsh_tables) {
    if (b == 0) throw std::invalid_argument("lsh.b must be positive");
  }
  if (!(c.reduction_u > 0.0 && c.reduction_u < 1.0)) {
    throw std::invalid_argument("reduce.U must be in (0, 1)");
  }
  if (c.repetitions == 0) throw std::invalid_argument("repetitions must be positive");
  if (c.top_k < 10) throw std::invalid_argument("top_k must be at least 10");
}

std::vector<std::size_t> default_budget_grid(std::size_t n) {
  std::vector<std::size_t> grid;
  for (std::size_t b = 32;; b *= 2) {
    grid.push_back(std::min(b, n));
    if (b >= n) break;
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

Matrix first_rows(const Matrix& m, std::size_t rows) {
  if (rows >= m.rows()) return m;
  const auto values = m.values().first(rows * m.cols());
  return Matrix(rows, m.cols(), {values.begin(), values.end()});
}

}  // namespace

Dataset make_dataset(const SweepConfig& c) {
  Dataset data;
  if (!c.matrix_path.empty()) {
    data.candidates = load_matrix(c.matrix_path);
  } else {
    data.candidates = generate_synthetic(c.n, c.k, c.seed, c.distribution);
  }
  if (!c.query_path.empty()) {
    data.queries = first_rows(load_matrix(c.query_path), c.num_queries);
    if (data.queries.cols() != data.candidates.cols()) {
      throw DataError("query file dimension does not match the candidate matrix");
    }
  } else {
    data.queries = generate_synthetic(c.num_queries, data.candidates.cols(),
                                      c.query_seed, c.distribution);
  }
  return data;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

struct QueryTiming {
  double screen = 0.0;
  double rank = 0.0;
  std::size_t candidates = 0;
};

// Runs one query of a method: fills the top-K result and its timing split.
using QueryFn =
    std::function<void(std::size_t, std::span<const float>, RankedResult&, QueryTiming&)>;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// One untimed pass for quality and warmup, then `reps` timed passes.
ReportRow evaluate(const Dataset& data, const GroundTruth& truth,
                   std::size_t reps, const QueryFn& fn) {
  ReportRow row;
  const std::size_t nq = data.queries.rows();
  RankedResult result;
  QueryTiming timing;
  double candidates = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    fn(q, data.queries.row(q), result, timing);
    row.prec5 += precision_at(result.entries, truth.per_query[q], 5);
    row.prec10 += precision_at(result.entries, truth.per_query[q], 10);
    candidates += static_cast<double>(timing.candidates);
  }
  row.prec5 /= static_cast<double>(nq);
  row.prec10 /= static_cast<double>(nq);
  row.mean_candidates = candidates / static_cast<double>(nq);

  std::vector<double> screen_us;
  std::vector<double> rank_us;
  std::vector<double> total_us;
  for (std::size_t r = 0; r < reps; ++r) {
    double screen = 0.0;
    double rank = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      fn(q, data.queries.row(q), result, timing);
      screen += timing.screen;
      rank += timing.rank;
    }
    const double scale = 1e6 / static_cast<double>(nq);
    screen_us.push_back(screen * scale);
    rank_us.push_back(rank * scale);
    total_us.push_back((screen + rank) * scale);
  }
  row.screen_us = median(screen_us);
  row.rank_us = median(rank_us);
  row.query_us = median(total_us);
  return row;
}

QueryFn naive_fn(const Matrix& h, std::size_t k, RankScratch& scratch) {
  return [&h, k, &scratch](std::size_t, std::span<const float> w, RankedResult& out,
                           QueryTiming& timing) {
    const auto t0 = Clock::now();
    naive_topk_into(h, w, k, scratch, out);
    timing.screen = 0.0;
    timing.rank = seconds_between(t0, Clock::now());
    timing.candidates = h.rows();
  };
}

ScreenOptions greedy_options(const std::string& method) {
  if (method == "greedy-heap") return {ScreenVariant::kImproved, FrontierKind::kHeap};
  if (method == "greedy-basic") return {ScreenVariant::kBasic, FrontierKind::kSelectionTree};
  return {ScreenVariant::kImproved, FrontierKind::kSelectionTree};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double time_naive_us(const Matrix& h, const Matrix& queries, std::size_t k,
                     std::size_t repetitions) {
  Dataset data{h, queries};
  GroundTruth empty;
  empty.per_query.resize(queries.rows());
  RankScratch scratch;
  return evaluate(data, empty, repetitions, naive_fn(h, k, scratch)).query_us;
}

EvalReport run_sweep(const SweepConfig& config) {
  validate(config);
  return run_sweep(config, make_dataset(config));
}

EvalReport run_sweep(const SweepConfig& config, const Dataset& data) {
  validate(config);
  const Matrix& h = data.candidates;
  const std::size_t n = h.rows();
  const std::size_t top_k = config.top_k;
  const auto budgets = config.budgets.empty() ? default_budget_grid(n) : config.budgets;

  EvalReport report;
  auto& meta = report.metadata;
  meta["n"] = std::to_string(n);
  meta["k"] = std::to_string(h.cols());
  meta["queries"] = std::to_string(data.queries.rows());
  meta["dataset"] = config.matrix_path.empty()
                        ? std::string("synthetic-") + to_string(config.distribution)
                        : config.matrix_path.string();
  meta["seed"] = std::to_string(config.seed);
  meta["query_seed"] = std::to_string(config.query_seed);
  meta["budget_grid"] = join(budgets);
  meta["repetitions"] = std::to_string(config.repetitions);
  meta["truth_depth"] = std::to_string(kTruthDepth);
  meta["machine_note"] = config.machine_note.empty() ? "single-threaded timing"
                                                     : config.machine_note;

  const GroundTruth truth = compute_ground_truth(h, data.queries, kTruthDepth, config.threads);

  RankScratch scratch;
  const ReportRow naive = evaluate(data, truth, config.repetitions, naive_fn(h, top_k, scratch));
  meta["naive_query_us"] = format_double(naive.query_us);
  auto finish = [&](ReportRow row, std::string method, std::string params) {
    row.method = std::move(method);
    row.params = std::move(params);
    row.speedup = row.query_us > 0.0 ? naive.query_us / row.query_us : 0.0;
    report.rows.push_back(std::move(row));
  };

  bool greedy_built = false;
  GreedyIndex greedy_index;
  double greedy_build_seconds = 0.0;

  for (const auto& method : config.methods) {
    if (method == "naive") {
      finish(naive, method, "-");
    } else if (method.rfind("greedy", 0) == 0) {
      if (!greedy_built) {
        const auto t0 = Clock::now();
        greedy_index = GreedyIndex::build(h);
        greedy_build_seconds = seconds_between(t0, Clock::now());
        greedy_built = true;
      }
      const GreedySearcher searcher(h, greedy_index);
      QueryContext ctx = searcher.make_context();
      const ScreenOptions opts = greedy_options(method);
      for (std::size_t b : budgets) {
        const QueryFn fn = [&, b](std::size_t, std::span<const float> w, RankedResult& out,
                                  QueryTiming& timing) {
          budgeted_search_into(searcher, ctx, w, b, top_k, scratch, out, opts);
          timing.screen = ctx.stats().screen_seconds;
          timing.rank = ctx.stats().rank_seconds;
          timing.candidates = ctx.candidates().size();
        };
        auto row = evaluate(data, truth, config.repetitions, fn);
        row.build_seconds = greedy_build_seconds;
        finish(std::move(row), method, "B=" + std::to_string(b));
      }
    } else if (method == "lsh") {
      const auto t0 = Clock::now();
      const ReducedCandidateSet reduced =
          config.reduction == ReductionVariant::kA
              ? reduce_a(h)
              : reduce_b(h, config.reduction_u, config.reduction_kbar);
      const double reduce_seconds = seconds_between(t0, Clock::now());
      meta["lsh_reduction"] = config.reduction == ReductionVariant::kA ? "A" : "B";
      for (std::size_t a : config.lsh_bits) {
        for (std::size_t b : config.lsh_tables) {
          const auto t1 = Clock::now();
          const LshIndex lsh = LshIndex::build(reduced, {a, b, config.lsh_seed});
          const double build_seconds = reduce_seconds + seconds_between(t1, Clock::now());
          LshScratch lsh_scratch;
          const QueryFn fn = [&](std::size_t, std::span<const float> w, RankedResult& out,
                                 QueryTiming& timing) {
            const auto s0 = Clock::now();
            const auto reduced_query = reduce_query(reduced, w);
            const auto candidates = lsh.screen(reduced_query, lsh_scratch);
            const auto s1 = Clock::now();
            rank_candidates_into(h, w, candidates, top_k, scratch, out);
            timing.screen = seconds_between(s0, s1);
            timing.rank = seconds_between(s1, Clock::now());
            timing.candidates = candidates.size();
          };
          auto row = evaluate(data, truth, config.repetitions, fn);
          row.build_seconds = build_seconds;
          finish(std::move(row), method,
                 "a=" + std::to_string(a) + ";b=" + std::to_string(b));
        }
      }
    } else if (method == "sample") {
      const auto t0 = Clock::now();
      const SamplerIndex sampler = SamplerIndex::build(h);
      const double build_seconds = seconds_between(t0, Clock::now());
      SampleScratch sample_scratch;
      const std::vector<std::size_t> counts =
          config.sample_counts.empty() ? std::vector<std::size_t>{0} : config.sample_counts;
      if (!config.sample_counts.empty()) meta["sample_note"] = "S != B is an extension";
      for (std::size_t s_cfg : counts) {
        for (std::size_t b : budgets) {
          const std::size_t s = s_cfg == 0 ? b : s_cfg;
          const QueryFn fn = [&, s, b](std::size_t q, std::span<const float> w,
                                       RankedResult& out, QueryTiming& timing) {
            const auto s0 = Clock::now();
            const auto candidates = sample_screen(sampler, w, s, b,
                                                  derive_seed(config.sample_seed, q),
                                                  sample_scratch);
            const auto s1 = Clock::now();
            rank_candidates_into(h, w, candidates, top_k, scratch, out);
            timing.screen = seconds_between(s0, s1);
            timing.rank = seconds_between(s1, Clock::now());
            timing.candidates = candidates.size();
          };
          auto row = evaluate(data, truth, config.repetitions, fn);
          row.build_seconds = build_seconds;
          finish(std::move(row), method,
                 "S=" + std::to_string(s) + ";B=" + std::to_string(b));
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output

namespace {

constexpr const char* kCsvHeader =
    "method,params,prec@5,prec@10,screen_us,rank_us,query_us,speedup,build_s,"
    "mean_candidates";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void emit_csv(const EvalReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.method << ',' << r.params << ',' << format_double(r.prec5) << ','
        << format_double(r.prec10) << ',' << format_double(r.screen_us) << ','
        << format_double(r.rank_us) << ',' << format_double(r.query_us) << ','
        << format_double(r.speedup) << ',' << format_double(r.build_seconds) << ','
        << format_double(r.mean_candidates) << '\n';
  }
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::vector<ReportRow> parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw DataError("unexpected CSV header in '" + path.string() + "'");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw DataError("malformed CSV row: " + line);
    ReportRow r;
    r.method = f[0];
    r.params = f[1];
    r.prec5 = std::stod(f[2]);
    r.prec10 = std::stod(f[3]);
    r.screen_us = std::stod(f[4]);
    r.rank_us = std::stod(f[5]);
    r.query_us = std::stod(f[6]);
    r.speedup = std::stod(f[7]);
    r.build_seconds = std::stod(f[8]);
    r.mean_candidates = std::stod(f[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_curve_data(const EvalReport& report, const std::filesystem::path& path) {
  std::vector<const ReportRow*> rows;
  for (const auto& r : report.rows) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow* a, const ReportRow* b) {
    return a->method != b->method ? a->method < b->method : a->speedup < b->speedup;
  });
  auto out = open_out(path);
  out << "method,params,speedup,prec@5,prec@10\n";
  for (const auto* r : rows) {
    out << r->method << ',' << r->params << ',' << format_double(r->speedup) << ','
        << format_double(r->prec5) << ',' << format_double(r->prec10) << '\n';
  }
}

void emit_metadata(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json j = report.metadata;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_results_csv(std::ostream& os, const std::vector<RankedResult>& results) {
  os << "query_id,rank,item_index,score\n";
  char buf[32];
  for (std::size_t q = 0; q < results.size(); ++q) {
    const auto& entries = results[q].entries;
    for (std::size_t r = 0; r < entries.size(); ++r) {
      std::snprintf(buf, sizeof buf, "%.9g", entries[r].score);
      os << q + 1 << ',' << r + 1 << ',' << entries[r].index + 1 << ',' << buf << '\n';
    }
  }
}

}  // namespace bmips
