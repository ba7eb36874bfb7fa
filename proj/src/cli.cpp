#include "bmips/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>

#include <CLI11.hpp>

#include "bmips/eval.hpp"
#include "bmips/greedy_index.hpp"
#include "bmips/greedy_query.hpp"
#include "bmips/nns.hpp"
#include "bmips/ranking.hpp"
#include "bmips/sampling.hpp"

namespace bmips::cli {
namespace {

using Clock = std::chrono::steady_clock;

struct GenArgs {
  std::size_t n = 0;
  std::size_t k = 0;
  std::string dist = "normal";
  std::uint64_t seed = 1;
  std::string out;
  std::string queries;
  std::size_t num_queries = 100;
  std::optional<std::uint64_t> query_seed;
  std::string format;
};

struct BuildArgs {
  std::string matrix;
  std::string out;
};

struct QueryArgs {
  std::string matrix;
  std::string index;
  std::string queries;
  std::size_t budget = 256;
  std::size_t topk = 10;
  std::string method = "greedy";
  std::string out;
  std::uint64_t seed = 0;
  std::size_t lsh_a = 8;
  std::size_t lsh_b = 16;
  std::string reduce = "A";
  std::optional<std::size_t> samples;
};

struct BenchArgs {
  std::string config;
  std::optional<std::size_t> queries;
  std::string out = "bench";
  std::optional<std::string> methods;
  std::optional<std::size_t> n;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dist;
  std::optional<std::string> budgets;
  std::optional<std::size_t> repetitions;
  std::optional<std::string> matrix;
  std::optional<std::string> query_file;
};

FileFormat output_format(const std::string& flag, const std::string& path) {
  return flag.empty() ? format_for_path(path) : parse_format(flag);
}

int cmd_gen(const GenArgs& a, std::ostream& out) {
  if (a.n == 0 || a.k == 0) throw std::invalid_argument("--n and --k must be positive");
  const auto dist = parse_distribution(a.dist);
  const Matrix h = generate_synthetic(a.n, a.k, a.seed, dist);
  save_matrix(h, a.out, output_format(a.format, a.out));
  out << "wrote " << a.n << "x" << a.k << " " << to_string(dist) << " matrix to "
      << a.out << "\n";
  if (!a.queries.empty()) {
    if (a.num_queries == 0) throw std::invalid_argument("--num-queries must be positive");
    const Matrix q = generate_synthetic(a.num_queries, a.k,
                                        a.query_seed.value_or(derive_seed(a.seed, 1)), dist);
    save_matrix(q, a.queries, output_format(a.format, a.queries));
    out << "wrote " << a.num_queries << "x" << a.k << " queries to " << a.queries << "\n";
  }
  return kExitOk;
}

int cmd_build(const BuildArgs& a, std::ostream& out) {
  const Matrix h = load_matrix(a.matrix);
  const auto t0 = Clock::now();
  const GreedyIndex index = GreedyIndex::build(h);
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  index.save(a.out);
  out << "built index for " << h.rows() << "x" << h.cols() << " in " << std::fixed
      << std::setprecision(3) << seconds << " s, wrote " << a.out << "\n";
  return kExitOk;
}

int cmd_query(const QueryArgs& a, std::ostream& out, std::ostream& err) {
  const Matrix h = load_matrix(a.matrix);
  const Matrix queries = load_matrix(a.queries);
  if (queries.cols() != h.cols()) {
    throw DataError("query dimension " + std::to_string(queries.cols()) +
                    " does not match matrix dimension " + std::to_string(h.cols()));
  }
  if (a.budget == 0 || a.topk == 0) {
    throw std::invalid_argument("--budget and --topk must be positive");
  }

  std::size_t budget = a.budget;
  if (budget > h.rows() && a.method != "naive" && a.method != "lsh") {
    err << "warning: budget " << budget << " exceeds n=" << h.rows() << ", clamped\n";
    budget = h.rows();
  }
  std::size_t topk = a.topk;
  if ((a.method == "greedy" || a.method == "sample") && topk > budget) {
    err << "warning: topk " << topk << " exceeds budget " << budget << ", clamped\n";
    topk = budget;
  }

  std::vector<RankedResult> results(queries.rows());
  RankScratch scratch;
  if (a.method == "greedy") {
    if (a.index.empty()) throw std::invalid_argument("--method greedy requires --index");
    const GreedyIndex index = GreedyIndex::load(a.index, h);
    const GreedySearcher searcher(h, index);
    QueryContext ctx = searcher.make_context();
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      budgeted_search_into(searcher, ctx, queries.row(q), budget, topk, scratch, results[q]);
    }
  } else if (a.method == "naive") {
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      naive_topk_into(h, queries.row(q), topk, scratch, results[q]);
    }
  } else if (a.method == "lsh") {
    const auto reduced = parse_reduction(a.reduce) == ReductionVariant::kA
                             ? reduce_a(h)
                             : reduce_b(h, kDefaultReductionU, kDefaultReductionKbar);
    const LshIndex lsh = LshIndex::build(reduced, {a.lsh_a, a.lsh_b, a.seed});
    LshScratch lsh_scratch;
    std::size_t empty = 0;
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      const auto candidates = lsh.screen(reduce_query(reduced, queries.row(q)), lsh_scratch);
      empty += candidates.empty();
      rank_candidates_into(h, queries.row(q), candidates, topk, scratch, results[q]);
    }
    if (empty) err << "warning: " << empty << " queries hit only empty buckets\n";
  } else if (a.method == "sample") {
    const SamplerIndex sampler = SamplerIndex::build(h);
    SampleScratch sample_scratch;
    for (std::size_t q = 0; q < queries.rows(); ++q) {
      const auto candidates = sample_screen(sampler, queries.row(q), a.samples.value_or(budget),
                                            budget, derive_seed(a.seed, q), sample_scratch);
      rank_candidates_into(h, queries.row(q), candidates, topk, scratch, results[q]);
    }
  } else {
    throw std::invalid_argument("unknown method '" + a.method +
                                "' (valid: greedy, naive, lsh, sample)");
  }

  if (a.out.empty()) {
    write_results_csv(out, results);
  } else {
    std::ofstream file(a.out, std::ios::trunc);
    if (!file) throw DataError("cannot open '" + a.out + "' for writing");
    write_results_csv(file, results);
    out << "wrote " << queries.rows() << " result blocks to " << a.out << "\n";
  }
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  SweepConfig config;
  if (!a.config.empty()) {
    const auto bytes = io::read_file(a.config);
    config = parse_sweep_config(std::string(bytes.begin(), bytes.end()));
  }
  if (a.queries) config.num_queries = *a.queries;
  if (a.methods) apply_config_value(config, "methods", *a.methods);
  if (a.n) config.n = *a.n;
  if (a.k) config.k = *a.k;
  if (a.seed) config.seed = *a.seed;
  if (a.dist) apply_config_value(config, "dist", *a.dist);
  if (a.budgets) apply_config_value(config, "budgets", *a.budgets);
  if (a.repetitions) config.repetitions = *a.repetitions;
  if (a.matrix) config.matrix_path = *a.matrix;
  if (a.query_file) config.query_path = *a.query_file;
  if (const char* env = std::getenv("BMIPS_THREADS")) {
    apply_config_value(config, "threads", env);
  }
  validate(config);

  const EvalReport report = run_sweep(config);
  emit_csv(report, a.out + ".csv");
  emit_curve_data(report, a.out + ".curve.csv");
  emit_metadata(report, a.out + ".meta.json");

  out << std::left << std::setw(14) << "method" << std::setw(14) << "params"
      << std::right << std::setw(8) << "prec@5" << std::setw(8) << "prec@10"
      << std::setw(12) << "query_us" << std::setw(10) << "speedup" << "\n";
  out << std::fixed;
  for (const auto& r : report.rows) {
    out << std::left << std::setw(14) << r.method << std::setw(14) << r.params
        << std::right << std::setprecision(3) << std::setw(8) << r.prec5 << std::setw(8)
        << r.prec10 << std::setprecision(1) << std::setw(12) << r.query_us
        << std::setprecision(2) << std::setw(10) << r.speedup << "\n";
  }
  out << "wrote " << a.out << ".csv, " << a.out << ".curve.csv, " << a.out
      << ".meta.json\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budgeted maximum inner product search", "bmips"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic candidate matrix and queries");
  gen_cmd->add_option("--n", gen.n, "Number of candidates")->required();
  gen_cmd->add_option("--k", gen.k, "Embedding dimension")->required();
  gen_cmd->add_option("--dist", gen.dist, "normal or nonneg-uniform");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output matrix file")->required();
  gen_cmd->add_option("--queries", gen.queries, "Optional output query file");
  gen_cmd->add_option("--num-queries", gen.num_queries, "Number of queries to generate");
  gen_cmd->add_option("--query-seed", gen.query_seed, "Query seed (derived from --seed by default)");
  gen_cmd->add_option("--format", gen.format, "bin or txt (default: from extension)");

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Build the sorted greedy index for a matrix");
  build_cmd->add_option("--matrix", build.matrix, "Candidate matrix file")->required();
  build_cmd->add_option("--out", build.out, "Output index file")->required();

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "Answer top-K queries");
  query_cmd->add_option("--matrix", query.matrix, "Candidate matrix file")->required();
  query_cmd->add_option("--index", query.index, "Greedy index file (method greedy)");
  query_cmd->add_option("--queries", query.queries, "Query matrix file")->required();
  query_cmd->add_option("--budget", query.budget, "Candidate budget B");
  query_cmd->add_option("--topk", query.topk, "Number of results K");
  query_cmd->add_option("--method", query.method, "greedy, naive, lsh or sample");
  query_cmd->add_option("--out", query.out, "Result CSV (default: stdout)");
  query_cmd->add_option("--seed", query.seed, "Seed for lsh and sample");
  query_cmd->add_option("--lsh-a", query.lsh_a, "Projections per hash (lsh)");
  query_cmd->add_option("--lsh-b", query.lsh_b, "Number of tables (lsh)");
  query_cmd->add_option("--reduce", query.reduce, "Reduction variant A or B (lsh)");
  query_cmd->add_option("--samples", query.samples, "Sample count S (sample, default B)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a precision/speedup sweep");
  bench_cmd->add_option("--config", bench.config, "key=value config file");
  bench_cmd->add_option("--queries", bench.queries, "Number of queries");
  bench_cmd->add_option("--out", bench.out, "Output prefix");
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated methods");
  bench_cmd->add_option("--n", bench.n, "Synthetic candidate count");
  bench_cmd->add_option("--k", bench.k, "Synthetic dimension");
  bench_cmd->add_option("--seed", bench.seed, "Synthetic data seed");
  bench_cmd->add_option("--dist", bench.dist, "normal or nonneg-uniform");
  bench_cmd->add_option("--budgets", bench.budgets, "Comma-separated budget grid");
  bench_cmd->add_option("--repetitions", bench.repetitions, "Timed repetitions");
  bench_cmd->add_option("--matrix", bench.matrix, "Candidate matrix file");
  bench_cmd->add_option("--query-file", bench.query_file, "Query matrix file");

  // CLI11 consumes the argument vector from the back.
  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*build_cmd) return cmd_build(build, out);
    if (*query_cmd) return cmd_query(query, out, err);
    if (*bench_cmd) return cmd_bench(bench, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace bmips::cli
