#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdtree/diagram.hpp"

namespace pdtree {

struct TreeConfig {
  std::uint64_t seed = 0;
  int max_levels_cap = 40;
  GroundMetric metric = GroundMetric::L2;
};

/// Address of a grid cell: level plus integer column/row relative to the
/// tree origin. Level 0 is the finest grid.
struct CellId {
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  CellId parent() const { return {level + 1, ix >> 1, iy >> 1}; }

  friend auto operator<=>(const CellId&, const CellId&) = default;
};

/// Closed square [corner, corner + side]^2 meets the line y = x.
inline bool square_touches_diagonal(Point2 corner, double side) {
  return corner.x <= corner.y + side && corner.y <= corner.x + side;
}

/// A point (or cell) fell outside the root square of the tree.
class OutsideRootError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Randomly shifted dyadic grid hierarchy over a square in the
/// birth-death plane.
///
/// The root square has side 2 * extent, where extent is the larger side of
/// the bounding box of the inputs together with their diagonal
/// projections, and its lower-left corner is the bounding-box corner moved
/// by a uniform random vector in [0, extent)^2. Including the projections
/// puts a diagonal point inside the root, so the root is always terminal.
///
/// Depth is adaptive: the finest side is pushed strictly below half the
/// minimum separation (point-point and point-diagonal, under the configured
/// metric) unless max_levels_cap binds, in which case truncated() is set.
///
/// Only the geometry is stored; cells are enumerated on demand.
class ShiftedQuadtree {
 public:
  /// Throws std::invalid_argument for empty or non-finite input, or a
  /// point lying on the diagonal.
  static ShiftedQuadtree build(std::span<const Point2> points,
                               const TreeConfig& config);
  static ShiftedQuadtree build(std::span<const PersistenceDiagram> diagrams,
                               const TreeConfig& config);

  Point2 origin() const { return origin_; }
  Point2 shift() const { return shift_; }
  double root_side() const { return root_side_; }
  int level_lo() const { return 0; }
  int level_hi() const { return num_levels_ - 1; }
  int num_levels() const { return num_levels_; }
  double min_separation() const { return min_separation_; }
  /// Bounding-square extent over minimum separation.
  double spread() const { return root_side_ / 2.0 / min_separation_; }
  bool truncated() const { return truncated_; }
  std::uint64_t seed() const { return seed_; }
  GroundMetric metric() const { return metric_; }

  /// side(level) = root_side * 2^(level - level_hi).
  double side(int level) const { return sides_[static_cast<std::size_t>(level)]; }
  CellId root() const { return {level_hi(), 0, 0}; }

  /// Finest-level integer coordinates of p; throws OutsideRootError.
  std::array<std::int64_t, 2> finest_index(Point2 p) const;
  /// Half-open cell containing p at the given level.
  CellId cell_of(Point2 p, int level) const;

  Point2 cell_corner(const CellId& cell) const;
  /// Closed square intersects y = x.
  bool is_terminal(const CellId& cell) const;

  /// Non-zero cell counts (multiplicities included) at one level.
  std::map<CellId, std::uint64_t> occupied_cells(const PersistenceDiagram& d,
                                                 int level) const;

  /// Hash of seed and geometry; two vectors are comparable only when
  /// built against trees with equal signatures.
  std::uint64_t signature() const;
  std::string signature_hex() const;

 private:
  ShiftedQuadtree() = default;

  Point2 origin_;
  Point2 shift_;
  double root_side_ = 0.0;
  double finest_side_ = 0.0;
  std::vector<double> sides_;
  double min_separation_ = 0.0;
  int num_levels_ = 0;
  bool truncated_ = false;
  std::uint64_t seed_ = 0;
  GroundMetric metric_ = GroundMetric::L2;
};

/// Minimum over distinct-point distances and point-to-diagonal distances.
double minimum_separation(std::span<const Point2> points, GroundMetric metric);

}  // namespace pdtree
