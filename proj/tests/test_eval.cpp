#include <set>
#include <sstream>

#include "doctest.h"
#include "pdtree/eval.hpp"
#include "test_support.hpp"

using namespace pdtree;

namespace {

std::vector<PersistenceDiagram> small_dataset(std::size_t n, std::uint64_t seed) {
  std::vector<PersistenceDiagram> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(gen_uniform(5 + k % 20, mix_seed(seed, k)));
  return out;
}

std::string csv(const ErrorSuiteResult& r) {
  std::ostringstream out;
  write_pair_errors_csv(out, r.pair_errors);
  write_error_stats_csv(out, r.stats);
  return out.str();
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("relative error") {
  CHECK(*relative_error(2, 3) == doctest::Approx(0.5));
  CHECK(*relative_error(4, 2) == doctest::Approx(0.5));
  CHECK(*relative_error(1.5, 1.5) == 0.0);
  CHECK(*relative_error(0, 0) == 0.0);
  CHECK_FALSE(relative_error(0, 1).has_value());
}

TEST_CASE("exact against itself has zero error") {
  const auto data = small_dataset(10, 1);
  ErrorSuiteConfig config;
  config.methods = {Method::Exact};
  config.metrics = {GroundMetric::L1, GroundMetric::L2, GroundMetric::LInf};
  config.n_pairs = 15;
  const auto r = error_suite(data, config);
  REQUIRE(r.stats.size() == 3);
  for (const auto& s : r.stats) {
    CHECK(s.mean_rel_error == 0.0);
    CHECK(s.std_rel_error == 0.0);
    CHECK(s.n_pairs == 15);
  }
  CHECK(r.pair_errors.size() == 15 * 3);
}

TEST_CASE("stats rows cover every method and metric") {
  const auto data = small_dataset(12, 2);
  ErrorSuiteConfig config;
  config.methods = {Method::Exact, Method::Embedding, Method::Flowtree};
  config.metrics = {GroundMetric::L1, GroundMetric::L2};
  config.n_pairs = 10;
  const auto r = error_suite(data, config);
  CHECK(r.stats.size() == 6);
  CHECK(r.sampled_pairs == 10);
  CHECK(r.skipped_pairs == 0);
  for (const auto& row : r.pair_errors) {
    CHECK(row.i != row.j);
    if (row.method == Method::Flowtree) CHECK(row.approx >= row.exact - 1e-9);
  }
}

TEST_CASE("error suite is deterministic and worker-count independent") {
  const auto data = small_dataset(15, 3);
  ErrorSuiteConfig config;
  config.methods = {Method::Embedding, Method::Flowtree};
  config.metrics = {GroundMetric::L2, GroundMetric::LInf};
  config.n_pairs = 20;
  const auto a = csv(error_suite(data, config));
  config.workers = 4;
  const auto b = csv(error_suite(data, config));
  CHECK(a == b);
  config.policy = TreePolicy::WholeDataset;
  const auto c = csv(error_suite(data, config));
  CHECK(c == csv(error_suite(data, config)));
  CHECK(c != a);
}

TEST_CASE("oversized pairs are skipped and counted") {
  const auto data = small_dataset(6, 4);
  ErrorSuiteConfig config;
  config.n_pairs = 8;
  config.oracle_cap = 1;
  const auto r = error_suite(data, config);
  CHECK(r.skipped_pairs == 8);
  CHECK(r.pair_errors.empty());
  CHECK_THROWS_AS(error_suite(std::span(data).first(1), config), std::invalid_argument);
}

TEST_CASE("rank order breaks ties by index") {
  const std::vector<double> d{3, 1, 3, 0, 1};
  CHECK(rank_order(d) == std::vector<std::size_t>{3, 1, 4, 0, 2});
}

TEST_CASE("recall curves") {
  const auto data = small_dataset(30, 5);
  const auto split = split_queries(data.size(), 0.1, 9);
  std::vector<PersistenceDiagram> queries, candidates;
  for (auto i : split.queries) queries.push_back(data[i]);
  for (auto i : split.candidates) candidates.push_back(data[i]);
  REQUIRE(queries.size() == 3);

  const auto exact = recall_at_m(queries, candidates, Method::Exact, GroundMetric::L2,
                                 candidates.size());
  CHECK(exact.recall.front() == 1.0);
  for (const auto method : {Method::Embedding, Method::Flowtree}) {
    const auto curve = recall_at_m(queries, candidates, method, GroundMetric::L2,
                                   candidates.size());
    REQUIRE(curve.m_values.size() == candidates.size());
    CHECK(curve.m_values.front() == 1);
    CHECK(curve.recall.back() == 1.0);
    for (std::size_t k = 1; k < curve.recall.size(); ++k)
      CHECK(curve.recall[k] >= curve.recall[k - 1]);
  }
}

TEST_CASE("ranking table") {
  const auto data = small_dataset(12, 6);
  const std::span<const PersistenceDiagram> candidates(data.begin() + 1, data.end());
  const auto exact = ranking_table(data[0], candidates, Method::Exact, GroundMetric::L2);
  REQUIRE(exact.size() == candidates.size());
  std::set<std::size_t> ranks;
  for (const auto& r : exact) {
    CHECK(r.true_rank == r.approx_rank);
    ranks.insert(r.true_rank);
  }
  CHECK(ranks.size() == candidates.size());
  CHECK(*ranks.begin() == 1);
  CHECK(mean_rank_displacement(exact) == 0.0);

  const auto ft = ranking_table(data[0], candidates, Method::Flowtree, GroundMetric::L2);
  CHECK(ft.size() == candidates.size());
  CHECK(mean_rank_displacement(ft) < static_cast<double>(candidates.size()));
}

TEST_CASE("distance table reductions") {
  const auto data = small_dataset(8, 7);
  const std::span<const PersistenceDiagram> q(data.begin(), 3);
  const std::span<const PersistenceDiagram> c(data.begin() + 3, data.end());
  TreeOptions opts;
  opts.seeds = {1, 2, 3, 4};
  opts.reduce = Reduce::Mean;
  const auto mean = distance_table(q, c, Method::Flowtree, GroundMetric::L2, opts, 2);
  opts.reduce = Reduce::Min;
  const auto lo = distance_table(q, c, Method::Flowtree, GroundMetric::L2, opts, 2);
  const auto exact = distance_table(q, c, Method::Exact, GroundMetric::L2);
  for (std::size_t a = 0; a < q.size(); ++a)
    for (std::size_t b = 0; b < c.size(); ++b) {
      CHECK(lo[a][b] <= mean[a][b] + 1e-12);
      CHECK(lo[a][b] >= exact[a][b] - 1e-9);
    }
}

TEST_CASE("query split") {
  const auto s = split_queries(100, 0.1, 42);
  CHECK(s.queries.size() == 10);
  CHECK(s.candidates.size() == 90);
  std::set<std::size_t> all(s.queries.begin(), s.queries.end());
  all.insert(s.candidates.begin(), s.candidates.end());
  CHECK(all.size() == 100);
  const auto again = split_queries(100, 0.1, 42);
  CHECK(again.queries == s.queries);
  CHECK(split_queries(2, 0.01, 1).queries.size() == 1);
}

TEST_CASE("runtime bench rows and slope fit") {
  const std::vector<std::size_t> sizes{50, 100};
  const std::vector<Method> methods{Method::Flowtree};
  const auto rows = runtime_bench(sizes, methods, 1, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size == 50);
  CHECK(rows[1].size == 100);
  CHECK(rows[0].mean_seconds > 0.0);
  const std::vector<std::size_t> unsorted{100, 50};
  CHECK_THROWS_AS(runtime_bench(unsorted, methods, 1, 2), std::invalid_argument);

  const std::vector<double> x{1, 2, 4, 8};
  const std::vector<double> y{3, 12, 48, 192};
  CHECK(loglog_slope(x, y) == doctest::Approx(2.0));
}

TEST_CASE("runtime grows with size") {
  const std::vector<std::size_t> sizes{500, 2000};
  const std::vector<Method> methods{Method::Embedding, Method::Flowtree};
  const auto rows = runtime_bench(sizes, methods, 3, 5);
  REQUIRE(rows.size() == 4);
  for (std::size_t m = 0; m < 2; ++m) {
    CHECK(rows[m].method == rows[m + 2].method);
    CHECK(rows[m + 2].mean_seconds >= 0.8 * rows[m].mean_seconds);
  }
}

TEST_CASE("csv headers") {
  std::ostringstream a, b, c, d, e;
  write_pair_errors_csv(a, {});
  write_error_stats_csv(b, {});
  write_recall_csv(c, {});
  write_ranking_csv(d, {});
  write_runtime_csv(e, {});
  CHECK(a.str() == "pair,i,j,metric,method,exact,approx,rel_error\n");
  CHECK(b.str() == "method,metric,mean_rel_error,std_rel_error,n_pairs,n_undefined\n");
  CHECK(c.str() == "method,metric,m,recall\n");
  CHECK(d.str() == "query,candidate,method,metric,true_rank,approx_rank\n");
  CHECK(e.str() == "size,method,reps,mean_seconds,median_seconds,build_seconds\n");
  CHECK(error_stats_json({}) == "[]");
}

}
