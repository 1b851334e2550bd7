#include "pdtree/report.hpp"

#include <chrono>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "pdtree/embedding.hpp"

namespace pdtree {

Method parse_method(std::string_view name) {
  if (name == "exact") return Method::Exact;
  if (name == "embedding" || name == "l1") return Method::Embedding;
  if (name == "flowtree") return Method::Flowtree;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected exact, embedding or flowtree)");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Exact: return "exact";
    case Method::Embedding: return "embedding";
    case Method::Flowtree: return "flowtree";
  }
  return "?";
}

TreeMeta describe(const ShiftedQuadtree& tree) {
  TreeMeta meta;
  meta.seed = tree.seed();
  meta.signature = tree.signature_hex();
  meta.origin = tree.origin();
  meta.shift = tree.shift();
  meta.root_side = tree.root_side();
  meta.level_lo = tree.level_lo();
  meta.level_hi = tree.level_hi();
  meta.min_separation = tree.min_separation();
  meta.spread = tree.spread();
  meta.truncated = tree.truncated();
  return meta;
}

DistanceReport compute_distance(const PersistenceDiagram& p,
                                 const PersistenceDiagram& q, Method method,
                                 GroundMetric metric,
                                 std::span<const std::uint64_t> seeds,
                                 Reduce reduce, std::size_t oracle_cap,
                                 int max_levels_cap) {
  const auto start = std::chrono::steady_clock::now();
  DistanceReport report;
  report.method = method;
  report.metric = metric;
  report.reduce = reduce;
  report.seeds.assign(seeds.begin(), seeds.end());

  if (method == Method::Exact) {
    report.value = exact_distance(p, q, metric, oracle_cap);
  } else if (p.empty() && q.empty()) {
    report.value = 0.0;
  } else {
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
    const PersistenceDiagram both[] = {p, q};
    double sum = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto seed : seeds) {
      const auto tree = ShiftedQuadtree::build(both, {seed, max_levels_cap, metric});
      auto meta = describe(tree);
      double value = 0.0;
      if (method == Method::Flowtree) {
        const auto matching = greedy_match(tree, p, q, metric);
        value = matching.cost;
        meta.root_fallback = matching.root_fallback;
      } else {
        value = embedding_distance(tree, p, q);
      }
      report.trees.push_back(std::move(meta));
      sum += value;
      best = std::min(best, value);
    }
    report.value = reduce == Reduce::Mean ? sum / static_cast<double>(seeds.size()) : best;
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string to_json(const DistanceReport& report, bool include_timing) {
  using nlohmann::ordered_json;
  ordered_json trees = ordered_json::array();
  for (const auto& t : report.trees) {
    trees.push_back({{"seed", t.seed},
                     {"signature", t.signature},
                     {"origin", {t.origin.x, t.origin.y}},
                     {"shift", {t.shift.x, t.shift.y}},
                     {"root_side", t.root_side},
                     {"level_lo", t.level_lo},
                     {"level_hi", t.level_hi},
                     {"min_separation", t.min_separation},
                     {"spread", t.spread},
                     {"truncated", t.truncated},
                     {"root_fallback", t.root_fallback}});
  }
  ordered_json j;
  j["method"] = to_string(report.method);
  j["metric"] = to_string(report.metric);
  j["value"] = report.value;
  j["reduce"] = to_string(report.reduce);
  j["seeds"] = report.seeds;
  j["tree_meta"] = std::move(trees);
  if (include_timing) j["elapsed"] = report.elapsed_seconds;
  return j.dump(2);
}

}  // namespace pdtree
