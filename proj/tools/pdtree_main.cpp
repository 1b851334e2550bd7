// pdtree: generate diagrams, compute distances, export embeddings, run
// nearest-neighbour queries and the evaluation harness.
//
// Exit codes: 0 ok, 2 usage, 3 parse, 4 oracle cap, 5 internal.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdtree/diagram.hpp"
#include "pdtree/embedding.hpp"
#include "pdtree/eval.hpp"
#include "pdtree/exact.hpp"
#include "pdtree/flowtree.hpp"
#include "pdtree/quadtree.hpp"
#include "pdtree/random.hpp"
#include "pdtree/report.hpp"

namespace fs = std::filesystem;
using namespace pdtree;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kParse = 3, kOracleCap = 4, kInternal = 5 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::string metric = "l2";
  std::size_t workers = 1;
  std::size_t oracle_cap = kDefaultOracleCap;
  int max_levels = 40;
};

GroundMetric metric_of(const std::string& name) {
  try {
    return parse_metric(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

template <class T, class Parse>
std::vector<T> parse_list(const std::vector<std::string>& names, Parse parse) {
  std::vector<T> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

std::vector<std::uint64_t> tree_seeds(std::uint64_t seed, std::size_t trees) {
  std::vector<std::uint64_t> seeds(trees);
  for (std::size_t k = 0; k < trees; ++k) seeds[k] = seed + k;
  return seeds;
}

PersistenceDiagram load_or_fail(const fs::path& path) {
  try {
    return load_diagram(path);
  } catch (const ParseError& e) {
    throw FileParseError(path.string() + ": " + e.what());
  } catch (const InvalidPointError& e) {
    throw FileParseError(path.string() + ": " + e.what());
  }
}

// Diagram files of a directory in name order.
std::vector<fs::path> diagram_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no .txt diagram files in " + dir.string());
  return files;
}

std::vector<PersistenceDiagram> load_all(const std::vector<fs::path>& files) {
  std::vector<PersistenceDiagram> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_or_fail(f));
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw UsageError("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

// Writes to `path`, or standard output when path is empty or "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  auto out = open_out(path);
  fn(out);
}

std::string quote(const std::string& arg) {
  if (!arg.empty() && arg.find_first_of(" \t'\"\\$") == std::string::npos) return arg;
  std::string q = "'";
  for (char c : arg) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

int cmd_gen(const std::string& kind_name, std::size_t count, std::size_t max_size,
            const Common& common, const fs::path& out_dir) {
  GeneratorKind kind;
  try {
    kind = parse_generator(kind_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (count == 0) throw UsageError("--count must be at least 1");
  if (max_size == 0) throw UsageError("--max-size must be at least 1");
  ensure_dir(out_dir);

  const auto family = gen_family(kind, count, max_size, common.seed);
  nlohmann::ordered_json manifest;
  manifest["kind"] = to_string(kind);
  manifest["count"] = count;
  manifest["max_size"] = max_size;
  manifest["seed"] = common.seed;
  manifest["files"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "dgm_%04zu.txt", i);
    save_diagram(family[i], out_dir / name);
    manifest["files"].push_back({{"file", name},
                                 {"size", family[i].total_count()},
                                 {"seed", mix_seed(common.seed, i)}});
  }
  open_out(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return kOk;
}

int cmd_dist(const fs::path& a_path, const fs::path& b_path, const std::string& method,
             std::size_t trees, const std::string& reduce, bool timing,
             const Common& common) {
  const auto a = load_or_fail(a_path);
  const auto b = load_or_fail(b_path);
  const auto m = parse_list<Method>({method}, parse_method).front();
  const auto r = parse_list<Reduce>({reduce}, parse_reduce).front();
  const auto seeds = tree_seeds(common.seed, trees);
  const auto report = compute_distance(a, b, m, metric_of(common.metric), seeds, r,
                                       common.oracle_cap, common.max_levels);
  std::cout << to_json(report, timing) << '\n';
  return kOk;
}

int cmd_embed(const fs::path& in_dir, const fs::path& out_dir, const Common& common) {
  const auto files = diagram_files(in_dir);
  const auto diagrams = load_all(files);
  ensure_dir(out_dir);

  std::vector<PersistenceDiagram> nonempty;
  for (const auto& d : diagrams)
    if (!d.empty()) nonempty.push_back(d);
  if (nonempty.empty()) throw UsageError("every input diagram is empty");
  TreeConfig config;
  config.seed = common.seed;
  config.metric = metric_of(common.metric);
  config.max_levels_cap = common.max_levels;
  const auto tree = ShiftedQuadtree::build(nonempty, config);

  for (std::size_t i = 0; i < files.size(); ++i) {
    auto out = open_out(out_dir / (files[i].stem().string() + ".vec"));
    write_embedding(out, embed(tree, diagrams[i]));
  }
  return kOk;
}

TreeOptions tree_options(std::size_t trees, const std::string& reduce, const Common& common) {
  TreeOptions opts;
  opts.seeds = tree_seeds(common.seed, trees);
  opts.reduce = parse_list<Reduce>({reduce}, parse_reduce).front();
  opts.max_levels_cap = common.max_levels;
  return opts;
}

int cmd_knn(const fs::path& query_dir, const fs::path& cand_dir, const std::string& method,
            std::size_t k, std::size_t trees, const std::string& reduce,
            const std::string& out_path, const Common& common) {
  const auto qfiles = diagram_files(query_dir);
  const auto cfiles = diagram_files(cand_dir);
  const auto queries = load_all(qfiles);
  const auto candidates = load_all(cfiles);
  const auto m = parse_list<Method>({method}, parse_method).front();
  const auto table = distance_table(queries, candidates, m, metric_of(common.metric),
                                    tree_options(trees, reduce, common), common.workers,
                                    common.oracle_cap);
  k = std::min(k, candidates.size());
  emit(out_path, [&](std::ostream& out) {
    out << "query,rank,candidate,distance\n";
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto order = rank_order(table[q]);
      for (std::size_t r = 0; r < k; ++r)
        out << qfiles[q].filename().string() << ',' << r + 1 << ','
            << cfiles[order[r]].filename().string() << ','
            << format_double(table[q][order[r]]) << '\n';
    }
  });
  return kOk;
}

struct EvalArgs {
  std::vector<std::string> methods{"embedding", "flowtree"};
  std::vector<std::string> metrics{"l2"};
  std::size_t pairs = 100;
  double query_fraction = 0.1;
  std::string policy = "per-pair";
  std::vector<std::size_t> bench_sizes{100, 200, 400};
  std::size_t bench_reps = 3;
  bool json = false;
  bool timing = true;
};

int cmd_eval(const fs::path& dataset_dir, const fs::path& out_dir, const EvalArgs& args,
             const Common& common) {
  const auto data = load_all(diagram_files(dataset_dir));
  if (data.size() < 2) throw UsageError("evaluation needs at least two diagrams");
  const auto methods = parse_list<Method>(args.methods, parse_method);
  const auto metrics = parse_list<GroundMetric>(args.metrics, parse_metric);
  if (args.policy != "per-pair" && args.policy != "whole")
    throw UsageError("--policy must be per-pair or whole");
  if (!std::is_sorted(args.bench_sizes.begin(), args.bench_sizes.end()))
    throw UsageError("--bench-sizes must be ascending");
  ensure_dir(out_dir);

  ErrorSuiteConfig config;
  config.methods = methods;
  config.metrics = metrics;
  config.seed = common.seed;
  config.n_pairs = args.pairs;
  config.policy = args.policy == "whole" ? TreePolicy::WholeDataset : TreePolicy::PerPair;
  config.max_levels_cap = common.max_levels;
  config.oracle_cap = common.oracle_cap;
  config.workers = common.workers;
  const auto errors = error_suite(data, config);
  if (errors.skipped_pairs > 0)
    std::cerr << "skipped " << errors.skipped_pairs << " of " << errors.sampled_pairs
              << " pairs over the oracle cap\n";

  // Recall and ranking share one whole-dataset tree per metric.
  const auto split = split_queries(data.size(), args.query_fraction, common.seed);
  std::vector<PersistenceDiagram> queries, candidates;
  for (auto i : split.queries) queries.push_back(data[i]);
  for (auto i : split.candidates) candidates.push_back(data[i]);
  TreeOptions trees;
  trees.seeds = {common.seed};
  trees.max_levels_cap = common.max_levels;

  std::vector<RecallCurve> curves;
  std::vector<RankingRow> ranking;
  for (const auto metric : metrics) {
    const auto truth = distance_table(queries, candidates, Method::Exact, metric, trees,
                                      common.workers, common.oracle_cap);
    for (const auto method : methods) {
      const auto table = method == Method::Exact
                             ? truth
                             : distance_table(queries, candidates, method, metric, trees,
                                              common.workers, common.oracle_cap);
      curves.push_back(recall_from_tables(truth, table, method, metric, candidates.size()));
      for (std::size_t q = 0; q < queries.size(); ++q)
        for (const auto& rp : ranking_from_rows(truth[q], table[q])) {
          RankingRow row;
          row.query = split.queries[q];
          row.method = method;
          row.metric = metric;
          row.ranks = rp;
          row.ranks.candidate = split.candidates[rp.candidate];
          ranking.push_back(row);
        }
    }
  }

  const auto runtime = runtime_bench(args.bench_sizes, methods, common.seed,
                                     args.bench_reps, metrics.front());

  {
    auto o1 = open_out(out_dir / "pair_errors.csv");
    write_pair_errors_csv(o1, errors.pair_errors);
    auto o2 = open_out(out_dir / "error_stats.csv");
    write_error_stats_csv(o2, errors.stats);
    auto o3 = open_out(out_dir / "recall.csv");
    write_recall_csv(o3, curves);
    auto o4 = open_out(out_dir / "ranking.csv");
    write_ranking_csv(o4, ranking);
    auto o5 = open_out(out_dir / "runtime.csv");
    write_runtime_csv(o5, runtime, args.timing);
  }
  if (args.json) {
    open_out(out_dir / "pair_errors.json") << pair_errors_json(errors.pair_errors) << '\n';
    open_out(out_dir / "error_stats.json") << error_stats_json(errors.stats) << '\n';
    open_out(out_dir / "recall.json") << recall_json(curves) << '\n';
    open_out(out_dir / "ranking.json") << ranking_json(ranking) << '\n';
    open_out(out_dir / "runtime.json") << runtime_json(runtime) << '\n';
  }
  return 2 * errors.skipped_pairs > errors.sampled_pairs ? kOracleCap : kOk;
}

int cmd_bench(const std::vector<std::size_t>& sizes, const std::vector<std::string>& method_names,
              std::size_t reps, bool timing, const std::string& out_path,
              const Common& common) {
  if (!std::is_sorted(sizes.begin(), sizes.end()))
    throw UsageError("--sizes must be ascending");
  const auto methods = parse_list<Method>(method_names, parse_method);
  const auto rows = runtime_bench(sizes, methods, common.seed, reps, metric_of(common.metric));
  emit(out_path, [&](std::ostream& out) { write_runtime_csv(out, rows, timing); });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistence diagram distances on randomly shifted quadtrees"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pdtree 0.1.0");

  Common common;
  const auto add_common = [&common](CLI::App* sub, bool with_workers, bool with_metric = true) {
    sub->add_option("--seed", common.seed, "Random seed")->envname("PDTREE_SEED");
    if (with_metric)
      sub->add_option("--metric", common.metric, "Ground metric: l1, l2 or linf");
    sub->add_option("--max-levels", common.max_levels, "Cap on quadtree depth")
        ->check(CLI::Range(2, 62));
    sub->add_option("--oracle-cap", common.oracle_cap,
                    "Largest expanded size the exact solver accepts");
    if (with_workers)
      sub->add_option("--workers", common.workers, "Worker threads over pairs or queries")
          ->check(CLI::PositiveNumber);
  };

  std::string kind = "uniform";
  std::size_t count = 100;
  std::size_t max_size = 1000;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen", "Write a synthetic diagram family");
  gen->add_option("--kind", kind, "uniform or gaussian");
  gen->add_option("--count", count, "Number of diagrams");
  gen->add_option("--max-size", max_size, "Size of the largest diagram");
  gen->add_option("--out", out_dir, "Output directory")->required();
  add_common(gen, false);

  std::string a_path, b_path, method = "flowtree", reduce = "mean";
  std::size_t trees = 1;
  bool no_timing = false;
  auto* dist = app.add_subcommand("dist", "Distance between two diagram files");
  dist->add_option("a", a_path)->required()->check(CLI::ExistingFile);
  dist->add_option("b", b_path)->required()->check(CLI::ExistingFile);
  dist->add_option("--method", method, "exact, embedding or flowtree");
  dist->add_option("--trees", trees, "Number of random trees")->check(CLI::PositiveNumber);
  dist->add_option("--reduce", reduce, "mean or min over trees");
  dist->add_flag("--no-timing", no_timing, "Omit the elapsed field");
  add_common(dist, false);

  std::string in_dir;
  auto* emb = app.add_subcommand("embed", "Export sparse vectors on one shared tree");
  emb->add_option("in_dir", in_dir)->required()->check(CLI::ExistingDirectory);
  emb->add_option("out_dir", out_dir)->required();
  add_common(emb, false);

  std::string query_dir, cand_dir, out_path;
  std::size_t k = 10;
  auto* knn = app.add_subcommand("knn", "Rank candidates for every query");
  knn->add_option("query_dir", query_dir)->required()->check(CLI::ExistingDirectory);
  knn->add_option("cand_dir", cand_dir)->required()->check(CLI::ExistingDirectory);
  knn->add_option("--method", method, "exact, embedding or flowtree");
  knn->add_option("-k", k, "Neighbours per query")->check(CLI::PositiveNumber);
  knn->add_option("--trees", trees, "Number of random trees")->check(CLI::PositiveNumber);
  knn->add_option("--reduce", reduce, "mean or min over trees");
  knn->add_option("--out", out_path, "CSV path (default standard output)");
  add_common(knn, true);

  EvalArgs eval_args;
  std::string dataset_dir;
  bool eval_no_timing = false;
  auto* ev = app.add_subcommand("eval", "Error, recall, ranking and runtime tables");
  ev->add_option("dataset_dir", dataset_dir)->required()->check(CLI::ExistingDirectory);
  ev->add_option("--out", out_dir, "Output directory")->required();
  ev->add_option("--methods", eval_args.methods, "Comma-separated methods")->delimiter(',');
  ev->add_option("--metrics", eval_args.metrics, "Comma-separated ground metrics")
      ->delimiter(',');
  ev->add_option("--pairs", eval_args.pairs, "Sampled pairs")->check(CLI::PositiveNumber);
  ev->add_option("--query-fraction", eval_args.query_fraction, "Share of diagrams used as queries")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--policy", eval_args.policy, "Error-suite trees: per-pair or whole");
  ev->add_option("--bench-sizes", eval_args.bench_sizes, "Ascending runtime.csv sizes")
      ->delimiter(',');
  ev->add_option("--bench-reps", eval_args.bench_reps, "Timed repetitions per size")
      ->check(CLI::PositiveNumber);
  ev->add_flag("--json", eval_args.json, "Also write JSON mirrors");
  ev->add_flag("--no-timing", eval_no_timing, "Blank the timing columns");
  add_common(ev, true, false);

  std::vector<std::size_t> sizes{1000, 2000, 4000, 8000};
  std::vector<std::string> methods{"embedding", "flowtree"};
  std::size_t reps = 5;
  auto* bench = app.add_subcommand("bench", "Time distance computation against size");
  bench->add_option("--sizes", sizes, "Ascending diagram sizes")->delimiter(',');
  bench->add_option("--methods", methods, "Comma-separated methods")->delimiter(',');
  bench->add_option("--reps", reps, "Timed repetitions per size")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_path, "CSV path (default standard output)");
  bench->add_flag("--no-timing", no_timing, "Blank the timing columns");
  add_common(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  // The echo names the resolved seed so the run is reproducible without the
  // environment.
  std::string echo = "pdtree";
  bool seed_given = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    seed_given = seed_given || arg == "--seed" || arg.rfind("--seed=", 0) == 0;
    echo += " " + quote(arg);
  }
  if (!seed_given) echo += " --seed " + std::to_string(common.seed);
  std::cerr << echo << '\n';

  try {
    if (gen->parsed()) return cmd_gen(kind, count, max_size, common, out_dir);
    if (dist->parsed()) return cmd_dist(a_path, b_path, method, trees, reduce, !no_timing, common);
    if (emb->parsed()) return cmd_embed(in_dir, out_dir, common);
    if (knn->parsed())
      return cmd_knn(query_dir, cand_dir, method, k, trees, reduce, out_path, common);
    if (ev->parsed()) {
      eval_args.timing = !eval_no_timing;
      return cmd_eval(dataset_dir, out_dir, eval_args, common);
    }
    if (bench->parsed()) return cmd_bench(sizes, methods, reps, !no_timing, out_path, common);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FileParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const OracleCapExceeded& e) {
    std::cerr << "oracle cap: " << e.what() << '\n';
    return kOracleCap;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
