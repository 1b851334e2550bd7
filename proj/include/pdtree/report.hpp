#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pdtree/diagram.hpp"
#include "pdtree/exact.hpp"
#include "pdtree/flowtree.hpp"
#include "pdtree/quadtree.hpp"

namespace pdtree {

enum class Method { Exact, Embedding, Flowtree };

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

/// Reproducibility record for one tree.
struct TreeMeta {
  std::uint64_t seed = 0;
  std::string signature;
  Point2 origin;
  Point2 shift;
  double root_side = 0.0;
  int level_lo = 0;
  int level_hi = 0;
  double min_separation = 0.0;
  double spread = 0.0;
  bool truncated = false;
  bool root_fallback = false;
};

TreeMeta describe(const ShiftedQuadtree& tree);

struct DistanceReport {
  Method method = Method::Flowtree;
  GroundMetric metric = GroundMetric::L2;
  double value = 0.0;
  Reduce reduce = Reduce::Mean;
  std::vector<std::uint64_t> seeds;
  std::vector<TreeMeta> trees;
  double elapsed_seconds = 0.0;
};

/// Single-pair distance with full metadata. Tree methods build one tree per
/// seed over P and Q and reduce; the exact method ignores the seeds.
DistanceReport compute_distance(const PersistenceDiagram& p,
                                 const PersistenceDiagram& q, Method method,
                                 GroundMetric metric,
                                 std::span<const std::uint64_t> seeds,
                                 Reduce reduce = Reduce::Mean,
                                 std::size_t oracle_cap = kDefaultOracleCap,
                                 int max_levels_cap = 40);

/// Keys: method, metric, value, reduce, seeds, tree_meta, elapsed.
/// Pretty-printed with a stable key order.
std::string to_json(const DistanceReport& report, bool include_timing = true);

}  // namespace pdtree
