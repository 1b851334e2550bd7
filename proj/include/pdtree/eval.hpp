#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pdtree/diagram.hpp"
#include "pdtree/exact.hpp"
#include "pdtree/flowtree.hpp"
#include "pdtree/report.hpp"

namespace pdtree {

/// Which point set each approximate distance builds its tree over.
enum class TreePolicy { PerPair, WholeDataset };

struct TreeOptions {
  std::vector<std::uint64_t> seeds{0};
  Reduce reduce = Reduce::Mean;
  int max_levels_cap = 40;
};

/// |d_true - d_approx| / d_true. Undefined (nullopt) when d_true is zero
/// and d_approx is not; 0 when both are zero.
std::optional<double> relative_error(double d_true, double d_approx);

struct PairError {
  std::size_t pair = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  GroundMetric metric = GroundMetric::L2;
  Method method = Method::Flowtree;
  double exact = 0.0;
  double approx = 0.0;
  std::optional<double> rel_error;
};

struct ErrorStats {
  Method method = Method::Flowtree;
  GroundMetric metric = GroundMetric::L2;
  double mean_rel_error = 0.0;
  double std_rel_error = 0.0;  // population standard deviation
  std::size_t n_pairs = 0;
  std::size_t n_undefined = 0;
};

struct ErrorSuiteConfig {
  std::vector<Method> methods{Method::Embedding, Method::Flowtree};
  std::vector<GroundMetric> metrics{GroundMetric::L2};
  std::uint64_t seed = 0;
  std::size_t n_pairs = 100;
  TreePolicy policy = TreePolicy::PerPair;
  int max_levels_cap = 40;
  std::size_t oracle_cap = kDefaultOracleCap;
  std::size_t workers = 1;
};

struct ErrorSuiteResult {
  std::vector<PairError> pair_errors;  // ordered by (pair, metric, method)
  std::vector<ErrorStats> stats;       // ordered by (method, metric)
  std::size_t sampled_pairs = 0;
  std::size_t skipped_pairs = 0;  // oracle cap exceeded
};

/// Samples n_pairs ordered pairs (i != j) and compares every method with
/// the exact distance under every metric. Per-pair trees use seed
/// mix_seed(seed, pair); the whole-dataset tree uses seed itself.
ErrorSuiteResult error_suite(std::span<const PersistenceDiagram> dataset,
                             const ErrorSuiteConfig& config);

/// table[q][c] = distance from query q to candidate c. Tree methods build
/// one tree per seed over every query and candidate.
std::vector<std::vector<double>> distance_table(
    std::span<const PersistenceDiagram> queries,
    std::span<const PersistenceDiagram> candidates, Method method,
    GroundMetric metric, const TreeOptions& trees = {},
    std::size_t workers = 1, std::size_t oracle_cap = kDefaultOracleCap);

/// Candidate indices by ascending distance, ties broken by index.
std::vector<std::size_t> rank_order(std::span<const double> distances);

struct RecallCurve {
  Method method = Method::Flowtree;
  GroundMetric metric = GroundMetric::L2;
  std::vector<std::size_t> m_values;
  std::vector<double> recall;
};

/// recall[m-1] is the fraction of queries whose true nearest neighbour is
/// among the top m candidates under the approximate table.
RecallCurve recall_from_tables(const std::vector<std::vector<double>>& exact,
                               const std::vector<std::vector<double>>& approx,
                               Method method, GroundMetric metric,
                               std::size_t m_max);

RecallCurve recall_at_m(std::span<const PersistenceDiagram> queries,
                        std::span<const PersistenceDiagram> candidates,
                        Method method, GroundMetric metric, std::size_t m_max,
                        const TreeOptions& trees = {}, std::size_t workers = 1,
                        std::size_t oracle_cap = kDefaultOracleCap);

struct RankPair {
  std::size_t candidate = 0;
  std::size_t true_rank = 0;    // 1-based
  std::size_t approx_rank = 0;  // 1-based
};

/// Ranks of every candidate, in candidate order.
std::vector<RankPair> ranking_from_rows(std::span<const double> exact_row,
                                        std::span<const double> approx_row);

std::vector<RankPair> ranking_table(const PersistenceDiagram& query,
                                    std::span<const PersistenceDiagram> candidates,
                                    Method method, GroundMetric metric,
                                    const TreeOptions& trees = {},
                                    std::size_t oracle_cap = kDefaultOracleCap);

double mean_rank_displacement(std::span<const RankPair> ranking);

struct QuerySplit {
  std::vector<std::size_t> queries;
  std::vector<std::size_t> candidates;
};

/// Seeded shuffle; round(n * query_fraction) queries, at least one of each
/// side when n >= 2.
QuerySplit split_queries(std::size_t n, double query_fraction, std::uint64_t seed);

struct RuntimeRow {
  std::size_t size = 0;
  Method method = Method::Flowtree;
  std::size_t reps = 0;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
  double build_seconds = 0.0;  // tree construction, timed separately
};

/// Times one distance between two synthetic-uniform diagrams of each size.
std::vector<RuntimeRow> runtime_bench(std::span<const std::size_t> sizes,
                                      std::span<const Method> methods,
                                      std::uint64_t seed, std::size_t reps,
                                      GroundMetric metric = GroundMetric::L2);

/// Least-squares slope of log(time) against log(size).
double loglog_slope(std::span<const double> sizes, std::span<const double> times);

// CSV writers. Headers are fixed; rows are written in the order given.
void write_pair_errors_csv(std::ostream& out, std::span<const PairError> rows);
void write_error_stats_csv(std::ostream& out, std::span<const ErrorStats> rows);
void write_recall_csv(std::ostream& out, std::span<const RecallCurve> curves);

struct RankingRow {
  std::size_t query = 0;
  Method method = Method::Flowtree;
  GroundMetric metric = GroundMetric::L2;
  RankPair ranks;
};
void write_ranking_csv(std::ostream& out, std::span<const RankingRow> rows);
void write_runtime_csv(std::ostream& out, std::span<const RuntimeRow> rows,
                       bool include_timing = true);

// JSON mirrors with the same field names as the CSV columns.
std::string pair_errors_json(std::span<const PairError> rows);
std::string error_stats_json(std::span<const ErrorStats> rows);
std::string recall_json(std::span<const RecallCurve> curves);
std::string ranking_json(std::span<const RankingRow> rows);
std::string runtime_json(std::span<const RuntimeRow> rows);

}  // namespace pdtree
