#include "pdtree/flowtree.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "pdtree/embedding.hpp"

namespace pdtree {

std::string_view to_string(PairKind kind) {
  switch (kind) {
    case PairKind::Cross: return "cross";
    case PairKind::PToDiagonal: return "p_to_diagonal";
    case PairKind::QToDiagonal: return "q_to_diagonal";
  }
  return "?";
}

Reduce parse_reduce(std::string_view name) {
  if (name == "mean") return Reduce::Mean;
  if (name == "min") return Reduce::Min;
  throw std::invalid_argument("unknown reduction '" + std::string(name) +
                              "' (expected mean or min)");
}

std::string_view to_string(Reduce reduce) {
  return reduce == Reduce::Mean ? "mean" : "min";
}

namespace {

struct Unit {
  std::int64_t fx;
  std::int64_t fy;
  std::uint8_t side;  // 0 = P, 1 = Q
  std::uint32_t index;
  std::uint64_t remaining;
};

class MatchBuilder {
 public:
  MatchBuilder(const PersistenceDiagram& p, const PersistenceDiagram& q,
               GroundMetric metric)
      : p_(p), q_(q) {
    out_.metric = metric;
  }

  Point2 position(const Unit& u) const {
    return (u.side == 0 ? p_ : q_)[u.index].position();
  }

  void cross(const Unit& a, const Unit& b, std::uint64_t mass, int level) {
    add(position(a), position(b), mass, PairKind::Cross, level);
  }

  void diagonal(const Unit& u, int level) {
    const Point2 x = position(u);
    if (u.side == 0)
      add(x, project_to_diagonal(x), u.remaining, PairKind::PToDiagonal, level);
    else
      add(project_to_diagonal(x), x, u.remaining, PairKind::QToDiagonal, level);
  }

  AugmentedMatching& result() { return out_; }

 private:
  void add(Point2 s, Point2 t, std::uint64_t mass, PairKind kind, int level) {
    const double c = static_cast<double>(mass) * distance(s, t, out_.metric);
    out_.pairs.push_back({s, t, mass, kind, level, c});
    out_.cost += c;
  }

  const PersistenceDiagram& p_;
  const PersistenceDiagram& q_;
  AugmentedMatching out_;
};

bool unit_order(const Unit& a, const Unit& b) {
  return std::tie(a.side, a.index) < std::tie(b.side, b.index);
}

// `units` is sorted by (cell at `level`, side, index); writes the same units
// to `out` sorted by (cell at level + 1, side, index). The two child columns
// of a parent column are merged by row, then each parent cell is put back
// into (side, index) order.
void regroup(const std::vector<Unit>& units, int level, std::vector<Unit>& out) {
  out.clear();
  const int up = level + 1;
  for (std::size_t i = 0; i < units.size();) {
    const std::int64_t px = units[i].fx >> up;
    const std::int64_t cx = units[i].fx >> level;
    std::size_t mid = i;
    while (mid < units.size() && (units[mid].fx >> level) == cx) ++mid;
    std::size_t end = mid;
    while (end < units.size() && (units[end].fx >> up) == px) ++end;
    std::size_t a = i;
    std::size_t b = mid;
    const std::size_t first = out.size();
    while (a < mid || b < end) {
      const bool take_a = b == end || (a < mid && (units[a].fy >> up) <= (units[b].fy >> up));
      out.push_back(units[take_a ? a++ : b++]);
    }
    for (std::size_t g = first; g < out.size();) {
      const std::int64_t py = out[g].fy >> up;
      std::size_t h = g + 1;
      while (h < out.size() && (out[h].fy >> up) == py) ++h;
      if (h - g > 1) std::sort(out.begin() + g, out.begin() + h, unit_order);
      g = h;
    }
    i = end;
  }
}

}  // namespace

AugmentedMatching greedy_match(const ShiftedQuadtree& tree,
                               const PersistenceDiagram& p,
                               const PersistenceDiagram& q,
                               GroundMetric metric) {
  if (p.size() + q.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::length_error("diagram too large");

  std::vector<Unit> alive;
  alive.reserve(p.size() + q.size());
  const auto load = [&](const PersistenceDiagram& d, std::uint8_t side) {
    for (std::uint32_t i = 0; i < d.size(); ++i) {
      const auto [fx, fy] = tree.finest_index(d[i].position());
      alive.push_back({fx, fy, side, i, d[i].multiplicity});
    }
  };
  load(p, 0);
  load(q, 1);

  MatchBuilder builder(p, q, metric);
  auto& out = builder.result();
  out.residual_after_level.assign(static_cast<std::size_t>(tree.num_levels()), 0);

  // Grouped by cell; within a cell P precedes Q and each side keeps the
  // diagram's lexicographic order.
  std::sort(alive.begin(), alive.end(), [](const Unit& a, const Unit& b) {
    return std::tie(a.fx, a.fy, a.side, a.index) < std::tie(b.fx, b.fy, b.side, b.index);
  });

  std::vector<Unit> next;
  next.reserve(alive.size());
  for (int level = tree.level_lo(); level <= tree.level_hi(); ++level) {
    next.clear();
    std::uint64_t residual = 0;
    for (std::size_t begin = 0; begin < alive.size();) {
      const std::int64_t cx = alive[begin].fx >> level;
      const std::int64_t cy = alive[begin].fy >> level;
      std::size_t end = begin;
      while (end < alive.size() && (alive[end].fx >> level) == cx &&
             (alive[end].fy >> level) == cy)
        ++end;
      std::size_t split = begin;
      while (split < end && alive[split].side == 0) ++split;

      if (tree.is_terminal({level, cx, cy})) {
        for (std::size_t i = begin; i < end; ++i) builder.diagonal(alive[i], level);
      } else {
        std::size_t i = begin;
        std::size_t j = split;
        while (i < split && j < end) {
          const std::uint64_t mass = std::min(alive[i].remaining, alive[j].remaining);
          builder.cross(alive[i], alive[j], mass, level);
          alive[i].remaining -= mass;
          alive[j].remaining -= mass;
          if (alive[i].remaining == 0) ++i;
          if (alive[j].remaining == 0) ++j;
        }
        for (; i < split; ++i) {
          residual += alive[i].remaining;
          next.push_back(alive[i]);
        }
        for (; j < end; ++j) {
          residual += alive[j].remaining;
          next.push_back(alive[j]);
        }
      }
      begin = end;
    }
    out.residual_after_level[static_cast<std::size_t>(level)] = residual;
    if (level < tree.level_hi())
      regroup(next, level, alive);
    else
      alive.swap(next);
  }

  if (!alive.empty()) {
    out.root_fallback = true;
    for (const auto& u : alive) builder.diagonal(u, tree.level_hi());
  }
  return std::move(out);
}

double flowtree_distance(const ShiftedQuadtree& tree,
                         const PersistenceDiagram& p,
                         const PersistenceDiagram& q, GroundMetric metric) {
  return greedy_match(tree, p, q, metric).cost;
}

double multi_tree_estimate(const PersistenceDiagram& p,
                           const PersistenceDiagram& q, GroundMetric metric,
                           std::span<const std::uint64_t> seeds, Reduce reduce,
                           Estimator estimator, int max_levels_cap) {
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (p.empty() && q.empty()) return 0.0;

  const PersistenceDiagram both[] = {p, q};
  double sum = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto seed : seeds) {
    const auto tree = ShiftedQuadtree::build(both, {seed, max_levels_cap, metric});
    const double value = estimator == Estimator::Flowtree
                             ? flowtree_distance(tree, p, q, metric)
                             : embedding_distance(tree, p, q);
    sum += value;
    best = std::min(best, value);
  }
  return reduce == Reduce::Mean ? sum / static_cast<double>(seeds.size()) : best;
}

void write_matching(std::ostream& out, const AugmentedMatching& matching) {
  for (const auto& m : matching.pairs)
    out << to_string(m.kind) << ' ' << format_double(m.source.x) << ' '
        << format_double(m.source.y) << ' ' << format_double(m.target.x) << ' '
        << format_double(m.target.y) << ' ' << m.mass << ' '
        << format_double(m.cost) << '\n';
}

}  // namespace pdtree
