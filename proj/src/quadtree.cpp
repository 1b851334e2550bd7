#include "pdtree/quadtree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "pdtree/random.hpp"

namespace pdtree {

namespace {

// Indices must fit in int64 after the finest grid is subdivided.
constexpr int kHardLevelLimit = 62;

}  // namespace

double minimum_separation(std::span<const Point2> points, GroundMetric metric) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) best = std::min(best, diagonal_distance(p, metric));

  std::vector<Point2> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  // Sweep in x; every supported norm dominates |dx|, so the window can be
  // cut once the x-gap alone reaches the current best.
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (sorted[j].x - sorted[i].x >= best) break;
      if (std::abs(sorted[j].y - sorted[i].y) >= best) continue;
      best = std::min(best, distance(sorted[i], sorted[j], metric));
    }
  }
  return best;
}

ShiftedQuadtree ShiftedQuadtree::build(std::span<const Point2> points,
                                       const TreeConfig& config) {
  if (points.empty()) throw std::invalid_argument("cannot build a tree over no points");
  if (config.max_levels_cap < 2 || config.max_levels_cap > kHardLevelLimit)
    throw std::invalid_argument("max_levels_cap must lie in [2, 62]");

  double lo_x = std::numeric_limits<double>::infinity();
  double lo_y = lo_x;
  double hi_x = -lo_x;
  double hi_y = -lo_x;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("non-finite point");
    const Point2 d = project_to_diagonal(p);
    lo_x = std::min({lo_x, p.x, d.x});
    lo_y = std::min({lo_y, p.y, d.y});
    hi_x = std::max({hi_x, p.x, d.x});
    hi_y = std::max({hi_y, p.y, d.y});
  }

  const double separation = minimum_separation(points, config.metric);
  if (!(separation > 0.0))
    throw std::invalid_argument("point on the diagonal; separation is zero");

  const double extent = std::max(hi_x - lo_x, hi_y - lo_y);

  ShiftedQuadtree tree;
  tree.seed_ = config.seed;
  tree.metric_ = config.metric;
  tree.min_separation_ = separation;
  tree.root_side_ = 2.0 * extent;

  Engine engine(config.seed);
  tree.shift_ = {extent * uniform01(engine), extent * uniform01(engine)};
  tree.origin_ = {lo_x - tree.shift_.x, lo_y - tree.shift_.y};

  const double ratio = tree.root_side_ / separation;
  int levels = static_cast<int>(std::ceil(std::log2(ratio))) + 2;
  levels = std::clamp(levels, 2, config.max_levels_cap);
  // log2 rounding can leave the finest side at exactly separation / 2.
  while (levels < config.max_levels_cap &&
         std::ldexp(tree.root_side_, -(levels - 1)) >= separation / 2.0)
    ++levels;
  tree.num_levels_ = levels;
  tree.finest_side_ = std::ldexp(tree.root_side_, -(levels - 1));
  tree.truncated_ = tree.finest_side_ >= separation / 2.0;
  for (int l = 0; l < levels; ++l)
    tree.sides_.push_back(std::ldexp(tree.root_side_, l - (levels - 1)));
  return tree;
}

ShiftedQuadtree ShiftedQuadtree::build(
    std::span<const PersistenceDiagram> diagrams, const TreeConfig& config) {
  std::vector<Point2> points;
  for (const auto& d : diagrams)
    for (const auto& p : d) points.push_back(p.position());
  return build(points, config);
}

std::array<std::int64_t, 2> ShiftedQuadtree::finest_index(Point2 p) const {
  const double fx = std::floor((p.x - origin_.x) / finest_side_);
  const double fy = std::floor((p.y - origin_.y) / finest_side_);
  const double cells = std::ldexp(1.0, level_hi());
  if (!(fx >= 0.0 && fy >= 0.0 && fx < cells && fy < cells))
    throw OutsideRootError("point (" + format_double(p.x) + ", " +
                           format_double(p.y) + ") lies outside the root cell");
  return {static_cast<std::int64_t>(fx), static_cast<std::int64_t>(fy)};
}

CellId ShiftedQuadtree::cell_of(Point2 p, int level) const {
  if (level < level_lo() || level > level_hi())
    throw std::out_of_range("level out of range");
  const auto [fx, fy] = finest_index(p);
  return {level, fx >> level, fy >> level};
}

Point2 ShiftedQuadtree::cell_corner(const CellId& cell) const {
  const double s = side(cell.level);
  return {origin_.x + static_cast<double>(cell.ix) * s,
          origin_.y + static_cast<double>(cell.iy) * s};
}

bool ShiftedQuadtree::is_terminal(const CellId& cell) const {
  return square_touches_diagonal(cell_corner(cell), side(cell.level));
}

std::map<CellId, std::uint64_t> ShiftedQuadtree::occupied_cells(
    const PersistenceDiagram& d, int level) const {
  std::map<CellId, std::uint64_t> counts;
  for (const auto& p : d) counts[cell_of(p.position(), level)] += p.multiplicity;
  return counts;
}

std::uint64_t ShiftedQuadtree::signature() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  feed(seed_);
  feed(std::bit_cast<std::uint64_t>(origin_.x));
  feed(std::bit_cast<std::uint64_t>(origin_.y));
  feed(std::bit_cast<std::uint64_t>(root_side_));
  feed(static_cast<std::uint64_t>(num_levels_));
  feed(static_cast<std::uint64_t>(metric_));
  return h;
}

std::string ShiftedQuadtree::signature_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(signature()));
  return buf;
}

}  // namespace pdtree
