#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "pdtree/diagram.hpp"
#include "pdtree/quadtree.hpp"

namespace pdtree {

enum class PairKind { Cross, PToDiagonal, QToDiagonal };

std::string_view to_string(PairKind kind);

/// One matched unit group. Cross pairs run from a P point to a Q point.
/// P-to-diagonal pairs run from p to pi(p); Q-to-diagonal pairs run from
/// pi(q) to q.
struct MatchedPair {
  Point2 source;
  Point2 target;
  std::uint64_t mass = 0;
  PairKind kind = PairKind::Cross;
  int level = 0;      // tree level of the cell where the pair was formed
  double cost = 0.0;  // mass * ||source - target||

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct AugmentedMatching {
  std::vector<MatchedPair> pairs;
  double cost = 0.0;
  GroundMetric metric = GroundMetric::L2;
  /// Units still unmatched after each level was processed, indexed by
  /// level. The root entry is taken before any root fallback.
  std::vector<std::uint64_t> residual_after_level;
  /// Set when the root was non-terminal and leftovers were sent to the
  /// diagonal there anyway.
  bool root_fallback = false;
};

/// Bottom-up greedy augmented matching on the tree.
///
/// Levels are processed finest to coarsest. In a non-terminal cell,
/// unmatched P and Q units are paired in lexicographic (birth, death)
/// order on each side and the surplus moves up to the parent; in a
/// terminal cell every unmatched unit goes to its own diagonal projection.
AugmentedMatching greedy_match(const ShiftedQuadtree& tree,
                               const PersistenceDiagram& p,
                               const PersistenceDiagram& q,
                               GroundMetric metric);

/// Ground-metric cost of greedy_match.
double flowtree_distance(const ShiftedQuadtree& tree,
                         const PersistenceDiagram& p,
                         const PersistenceDiagram& q, GroundMetric metric);

enum class Estimator { Embedding, Flowtree };
enum class Reduce { Mean, Min };

Reduce parse_reduce(std::string_view name);
std::string_view to_string(Reduce reduce);

/// Builds one tree per seed over P and Q, evaluates the estimator on each
/// and reduces. Two empty diagrams give 0.
double multi_tree_estimate(const PersistenceDiagram& p,
                           const PersistenceDiagram& q, GroundMetric metric,
                           std::span<const std::uint64_t> seeds, Reduce reduce,
                           Estimator estimator = Estimator::Flowtree,
                           int max_levels_cap = 40);

/// One line per pair: "kind bx by dx dy mass cost".
void write_matching(std::ostream& out, const AugmentedMatching& matching);

}  // namespace pdtree
