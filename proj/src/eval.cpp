#include "pdtree/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "pdtree/embedding.hpp"
#include "pdtree/parallel.hpp"
#include "pdtree/random.hpp"

namespace pdtree {

std::optional<double> relative_error(double d_true, double d_approx) {
  if (d_true == 0.0) {
    if (d_approx == 0.0) return 0.0;
    return std::nullopt;
  }
  return std::abs(d_true - d_approx) / d_true;
}

namespace {

double tree_distance(const ShiftedQuadtree& tree, const PersistenceDiagram& p,
                     const PersistenceDiagram& q, Method method, GroundMetric metric) {
  return method == Method::Flowtree ? flowtree_distance(tree, p, q, metric)
                                    : embedding_distance(tree, p, q);
}

bool all_empty(std::span<const PersistenceDiagram> ds) {
  return std::all_of(ds.begin(), ds.end(), [](const auto& d) { return d.empty(); });
}

}  // namespace

ErrorSuiteResult error_suite(std::span<const PersistenceDiagram> dataset,
                             const ErrorSuiteConfig& config) {
  if (dataset.size() < 2) throw std::invalid_argument("error_suite needs >= 2 diagrams");
  if (config.methods.empty() || config.metrics.empty())
    throw std::invalid_argument("error_suite needs at least one method and metric");

  Engine engine(config.seed);
  std::vector<std::pair<std::size_t, std::size_t>> pairs(config.n_pairs);
  for (auto& [i, j] : pairs) {
    i = uniform_index(engine, dataset.size());
    j = uniform_index(engine, dataset.size() - 1);
    if (j >= i) ++j;
  }

  std::vector<std::optional<ShiftedQuadtree>> shared(config.metrics.size());
  if (config.policy == TreePolicy::WholeDataset && !all_empty(dataset)) {
    for (std::size_t m = 0; m < config.metrics.size(); ++m)
      shared[m] = ShiftedQuadtree::build(
          dataset, {config.seed, config.max_levels_cap, config.metrics[m]});
  }

  std::vector<std::vector<PairError>> per_pair(pairs.size());
  std::vector<char> skipped(pairs.size(), 0);
  parallel_for(pairs.size(), config.workers, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const auto& p = dataset[i];
    const auto& q = dataset[j];
    std::vector<PairError> rows;
    for (std::size_t m = 0; m < config.metrics.size(); ++m) {
      const GroundMetric metric = config.metrics[m];
      double truth = 0.0;
      try {
        truth = exact_distance(p, q, metric, config.oracle_cap);
      } catch (const OracleCapExceeded&) {
        skipped[k] = 1;
        return;
      }
      std::optional<ShiftedQuadtree> local;
      const ShiftedQuadtree* tree = shared[m] ? &*shared[m] : nullptr;
      for (const Method method : config.methods) {
        double approx = truth;
        if (method != Method::Exact && !(p.empty() && q.empty())) {
          if (!tree) {
            const PersistenceDiagram both[] = {p, q};
            local = ShiftedQuadtree::build(
                both, {mix_seed(config.seed, k), config.max_levels_cap, metric});
            tree = &*local;
          }
          approx = tree_distance(*tree, p, q, method, metric);
        } else if (method != Method::Exact) {
          approx = 0.0;
        }
        rows.push_back({k, i, j, metric, method, truth, approx,
                        relative_error(truth, approx)});
      }
    }
    per_pair[k] = std::move(rows);
  });

  ErrorSuiteResult result;
  result.sampled_pairs = pairs.size();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (skipped[k]) {
      ++result.skipped_pairs;
      continue;
    }
    for (auto& row : per_pair[k]) result.pair_errors.push_back(row);
  }

  for (const Method method : config.methods) {
    for (const GroundMetric metric : config.metrics) {
      ErrorStats stats;
      stats.method = method;
      stats.metric = metric;
      std::vector<double> values;
      for (const auto& row : result.pair_errors) {
        if (row.method != method || row.metric != metric) continue;
        if (row.rel_error)
          values.push_back(*row.rel_error);
        else
          ++stats.n_undefined;
      }
      stats.n_pairs = values.size();
      if (!values.empty()) {
        const double n = static_cast<double>(values.size());
        stats.mean_rel_error = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double sq = 0.0;
        for (const double v : values) sq += (v - stats.mean_rel_error) * (v - stats.mean_rel_error);
        stats.std_rel_error = std::sqrt(sq / n);
      }
      result.stats.push_back(stats);
    }
  }
  return result;
}

std::vector<std::vector<double>> distance_table(
    std::span<const PersistenceDiagram> queries,
    std::span<const PersistenceDiagram> candidates, Method method,
    GroundMetric metric, const TreeOptions& trees, std::size_t workers,
    std::size_t oracle_cap) {
  const std::size_t nq = queries.size();
  const std::size_t nc = candidates.size();
  std::vector<std::vector<double>> table(nq, std::vector<double>(nc, 0.0));

  if (method == Method::Exact) {
    parallel_for(nq * nc, workers, [&](std::size_t k) {
      table[k / nc][k % nc] =
          exact_distance(queries[k / nc], candidates[k % nc], metric, oracle_cap);
    });
    return table;
  }

  if (trees.seeds.empty()) throw std::invalid_argument("at least one seed is required");
  std::vector<PersistenceDiagram> everything(queries.begin(), queries.end());
  everything.insert(everything.end(), candidates.begin(), candidates.end());
  if (all_empty(everything)) return table;

  if (trees.reduce == Reduce::Min)
    for (auto& row : table) std::fill(row.begin(), row.end(), std::numeric_limits<double>::infinity());

  for (const auto seed : trees.seeds) {
    const auto tree = ShiftedQuadtree::build(everything, {seed, trees.max_levels_cap, metric});
    std::vector<EmbeddingVector> q_vecs, c_vecs;
    if (method == Method::Embedding) {
      q_vecs.resize(nq);
      c_vecs.resize(nc);
      parallel_for(nq + nc, workers, [&](std::size_t k) {
        if (k < nq)
          q_vecs[k] = embed(tree, queries[k]);
        else
          c_vecs[k - nq] = embed(tree, candidates[k - nq]);
      });
    }
    parallel_for(nq * nc, workers, [&](std::size_t k) {
      const std::size_t a = k / nc;
      const std::size_t b = k % nc;
      const double value = method == Method::Embedding
                               ? l1_distance(q_vecs[a], c_vecs[b])
                               : flowtree_distance(tree, queries[a], candidates[b], metric);
      if (trees.reduce == Reduce::Mean)
        table[a][b] += value;
      else
        table[a][b] = std::min(table[a][b], value);
    });
  }
  if (trees.reduce == Reduce::Mean)
    for (auto& row : table)
      for (auto& v : row) v /= static_cast<double>(trees.seeds.size());
  return table;
}

std::vector<std::size_t> rank_order(std::span<const double> distances) {
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distances[a] < distances[b];
  });
  return order;
}

RecallCurve recall_from_tables(const std::vector<std::vector<double>>& exact,
                               const std::vector<std::vector<double>>& approx,
                               Method method, GroundMetric metric,
                               std::size_t m_max) {
  if (exact.size() != approx.size()) throw std::invalid_argument("table shapes differ");
  RecallCurve curve;
  curve.method = method;
  curve.metric = metric;
  if (exact.empty()) return curve;
  const std::size_t nc = exact.front().size();
  if (nc == 0) throw std::invalid_argument("no candidates");
  m_max = std::min(m_max, nc);

  std::vector<std::size_t> hits(m_max + 1, 0);
  for (std::size_t q = 0; q < exact.size(); ++q) {
    const std::size_t truth = rank_order(exact[q]).front();
    const auto order = rank_order(approx[q]);
    const auto pos = static_cast<std::size_t>(
        std::find(order.begin(), order.end(), truth) - order.begin());
    if (pos < m_max) ++hits[pos + 1];
  }
  std::size_t running = 0;
  for (std::size_t m = 1; m <= m_max; ++m) {
    running += hits[m];
    curve.m_values.push_back(m);
    curve.recall.push_back(static_cast<double>(running) / static_cast<double>(exact.size()));
  }
  return curve;
}

RecallCurve recall_at_m(std::span<const PersistenceDiagram> queries,
                        std::span<const PersistenceDiagram> candidates,
                        Method method, GroundMetric metric, std::size_t m_max,
                        const TreeOptions& trees, std::size_t workers,
                        std::size_t oracle_cap) {
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  const auto truth = distance_table(queries, candidates, Method::Exact, metric, trees,
                                    workers, oracle_cap);
  const auto approx = method == Method::Exact
                          ? truth
                          : distance_table(queries, candidates, method, metric, trees,
                                           workers, oracle_cap);
  return recall_from_tables(truth, approx, method, metric, m_max);
}

std::vector<RankPair> ranking_from_rows(std::span<const double> exact_row,
                                        std::span<const double> approx_row) {
  if (exact_row.size() != approx_row.size()) throw std::invalid_argument("row sizes differ");
  std::vector<RankPair> out(exact_row.size());
  const auto true_order = rank_order(exact_row);
  const auto approx_order = rank_order(approx_row);
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[true_order[r]].true_rank = r + 1;
    out[approx_order[r]].approx_rank = r + 1;
  }
  for (std::size_t c = 0; c < out.size(); ++c) out[c].candidate = c;
  return out;
}

std::vector<RankPair> ranking_table(const PersistenceDiagram& query,
                                    std::span<const PersistenceDiagram> candidates,
                                    Method method, GroundMetric metric,
                                    const TreeOptions& trees, std::size_t oracle_cap) {
  const std::span<const PersistenceDiagram> queries(&query, 1);
  const auto truth =
      distance_table(queries, candidates, Method::Exact, metric, trees, 1, oracle_cap);
  const auto approx = method == Method::Exact
                          ? truth
                          : distance_table(queries, candidates, method, metric, trees, 1,
                                           oracle_cap);
  return ranking_from_rows(truth.front(), approx.front());
}

double mean_rank_displacement(std::span<const RankPair> ranking) {
  if (ranking.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : ranking)
    sum += std::abs(static_cast<double>(r.true_rank) - static_cast<double>(r.approx_rank));
  return sum / static_cast<double>(ranking.size());
}

QuerySplit split_queries(std::size_t n, double query_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Engine engine(seed);
  for (std::size_t k = n; k > 1; --k) std::swap(idx[k - 1], idx[uniform_index(engine, k)]);

  auto nq = static_cast<std::size_t>(std::llround(static_cast<double>(n) * query_fraction));
  if (n >= 2) nq = std::clamp<std::size_t>(nq, 1, n - 1);
  nq = std::min(nq, n);

  QuerySplit split;
  split.queries.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nq));
  split.candidates.assign(idx.begin() + static_cast<std::ptrdiff_t>(nq), idx.end());
  std::sort(split.queries.begin(), split.queries.end());
  std::sort(split.candidates.begin(), split.candidates.end());
  return split;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<RuntimeRow> runtime_bench(std::span<const std::size_t> sizes,
                                      std::span<const Method> methods,
                                      std::uint64_t seed, std::size_t reps,
                                      GroundMetric metric) {
  if (!std::is_sorted(sizes.begin(), sizes.end()))
    throw std::invalid_argument("sizes must be ascending");
  if (reps == 0) throw std::invalid_argument("reps must be >= 1");

  struct Case {
    PersistenceDiagram p;
    PersistenceDiagram q;
    std::optional<ShiftedQuadtree> tree;
    Method method;
    std::size_t cap;
    std::vector<double> times;
  };
  std::vector<RuntimeRow> rows;
  std::vector<Case> cases;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    auto p = gen_uniform(sizes[k], mix_seed(seed, 2 * k));
    auto q = gen_uniform(sizes[k], mix_seed(seed, 2 * k + 1));
    for (const Method method : methods) {
      RuntimeRow row;
      row.size = sizes[k];
      row.method = method;
      row.reps = reps;
      Case c{p, q, std::nullopt, method, 2 * sizes[k], {}};
      if (method != Method::Exact) {
        const PersistenceDiagram both[] = {p, q};
        const auto start = Clock::now();
        c.tree = ShiftedQuadtree::build(both, {seed, 40, metric});
        row.build_seconds = seconds_since(start);
      }
      rows.push_back(row);
      cases.push_back(std::move(c));
    }
  }

  // Repetitions are interleaved across cases so slow stretches of the
  // machine spread over every size instead of landing on one.
  volatile double sink = 0.0;
  for (std::size_t r = 0; r < reps; ++r)
    for (auto& c : cases) {
      const auto start = Clock::now();
      sink = sink + (c.method == Method::Exact
                         ? exact_distance(c.p, c.q, metric, c.cap)
                         : tree_distance(*c.tree, c.p, c.q, c.method, metric));
      c.times.push_back(seconds_since(start));
    }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& times = cases[i].times;
    rows[i].mean_seconds = std::accumulate(times.begin(), times.end(), 0.0) /
                           static_cast<double>(times.size());
    rows[i].median_seconds = median(times);
  }
  return rows;
}

double loglog_slope(std::span<const double> sizes, std::span<const double> times) {
  if (sizes.size() != times.size() || sizes.size() < 2)
    throw std::invalid_argument("need at least two (size, time) samples");
  const double n = static_cast<double>(sizes.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const double x = std::log(sizes[k]);
    const double y = std::log(times[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void write_pair_errors_csv(std::ostream& out, std::span<const PairError> rows) {
  out << "pair,i,j,metric,method,exact,approx,rel_error\n";
  for (const auto& r : rows) {
    out << r.pair << ',' << r.i << ',' << r.j << ',' << to_string(r.metric) << ','
        << to_string(r.method) << ',' << format_double(r.exact) << ','
        << format_double(r.approx) << ',';
    if (r.rel_error) out << format_double(*r.rel_error);
    out << '\n';
  }
}

void write_error_stats_csv(std::ostream& out, std::span<const ErrorStats> rows) {
  out << "method,metric,mean_rel_error,std_rel_error,n_pairs,n_undefined\n";
  for (const auto& r : rows)
    out << to_string(r.method) << ',' << to_string(r.metric) << ','
        << format_double(r.mean_rel_error) << ',' << format_double(r.std_rel_error)
        << ',' << r.n_pairs << ',' << r.n_undefined << '\n';
}

void write_recall_csv(std::ostream& out, std::span<const RecallCurve> curves) {
  out << "method,metric,m,recall\n";
  for (const auto& c : curves)
    for (std::size_t k = 0; k < c.m_values.size(); ++k)
      out << to_string(c.method) << ',' << to_string(c.metric) << ',' << c.m_values[k]
          << ',' << format_double(c.recall[k]) << '\n';
}

void write_ranking_csv(std::ostream& out, std::span<const RankingRow> rows) {
  out << "query,candidate,method,metric,true_rank,approx_rank\n";
  for (const auto& r : rows)
    out << r.query << ',' << r.ranks.candidate << ',' << to_string(r.method) << ','
        << to_string(r.metric) << ',' << r.ranks.true_rank << ','
        << r.ranks.approx_rank << '\n';
}

void write_runtime_csv(std::ostream& out, std::span<const RuntimeRow> rows,
                       bool include_timing) {
  out << "size,method,reps,mean_seconds,median_seconds,build_seconds\n";
  for (const auto& r : rows) {
    out << r.size << ',' << to_string(r.method) << ',' << r.reps << ',';
    if (include_timing)
      out << format_double(r.mean_seconds) << ',' << format_double(r.median_seconds)
          << ',' << format_double(r.build_seconds);
    else
      out << ",,";
    out << '\n';
  }
}

namespace {
using nlohmann::ordered_json;
}

std::string pair_errors_json(std::span<const PairError> rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json j{{"pair", r.pair},
                   {"i", r.i},
                   {"j", r.j},
                   {"metric", to_string(r.metric)},
                   {"method", to_string(r.method)},
                   {"exact", r.exact},
                   {"approx", r.approx}};
    j["rel_error"] = r.rel_error ? ordered_json(*r.rel_error) : ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::string error_stats_json(std::span<const ErrorStats> rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"method", to_string(r.method)},
                   {"metric", to_string(r.metric)},
                   {"mean_rel_error", r.mean_rel_error},
                   {"std_rel_error", r.std_rel_error},
                   {"n_pairs", r.n_pairs},
                   {"n_undefined", r.n_undefined}});
  return arr.dump(2);
}

std::string recall_json(std::span<const RecallCurve> curves) {
  ordered_json arr = ordered_json::array();
  for (const auto& c : curves)
    for (std::size_t k = 0; k < c.m_values.size(); ++k)
      arr.push_back({{"method", to_string(c.method)},
                     {"metric", to_string(c.metric)},
                     {"m", c.m_values[k]},
                     {"recall", c.recall[k]}});
  return arr.dump(2);
}

std::string ranking_json(std::span<const RankingRow> rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"query", r.query},
                   {"candidate", r.ranks.candidate},
                   {"method", to_string(r.method)},
                   {"metric", to_string(r.metric)},
                   {"true_rank", r.ranks.true_rank},
                   {"approx_rank", r.ranks.approx_rank}});
  return arr.dump(2);
}

std::string runtime_json(std::span<const RuntimeRow> rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"size", r.size},
                   {"method", to_string(r.method)},
                   {"reps", r.reps},
                   {"mean_seconds", r.mean_seconds},
                   {"median_seconds", r.median_seconds},
                   {"build_seconds", r.build_seconds}});
  return arr.dump(2);
}

}  // namespace pdtree
