#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pdtree/quadtree.hpp"
#include "test_support.hpp"

using namespace pdtree;

namespace {

std::vector<Point2> positions(const PersistenceDiagram& d) {
  std::vector<Point2> out;
  for (const auto& p : d) out.push_back(p.position());
  return out;
}

}  // namespace

TEST_SUITE("quadtree") {

TEST_CASE("single point tree") {
  const std::vector<Point2> pts{{0, 4}};
  const auto tree = ShiftedQuadtree::build(pts, {7, 40, GroundMetric::L2});
  CHECK(tree.min_separation() == doctest::Approx(2 * std::numbers::sqrt2));
  CHECK(tree.num_levels() >= 2);
  CHECK(tree.cell_of(pts[0], tree.level_hi()) == tree.root());
  CHECK_FALSE(tree.truncated());
}

TEST_CASE("separation and finest side for two stacked points") {
  const std::vector<Point2> pts{{0, 4}, {0, 6}};
  const auto tree = ShiftedQuadtree::build(pts, {1, 40, GroundMetric::L2});
  CHECK(tree.min_separation() == doctest::Approx(2.0));
  CHECK(tree.side(tree.level_lo()) < 1.0);
}

TEST_CASE("level count follows the separation rule") {
  Engine engine(21);
  for (int k = 0; k < 200; ++k) {
    const auto d = testing::random_diagram(engine, 20, 50.0, 0.0);
    if (d.empty()) continue;
    const auto pts = positions(d);
    const auto tree = ShiftedQuadtree::build(pts, {engine(), 40, GroundMetric::L2});
    const double ratio = tree.root_side() / tree.min_separation();
    const int expected = static_cast<int>(std::ceil(std::log2(ratio))) + 2;
    // One extra level is added only when the log rounds onto an exact
    // power of two.
    CHECK(tree.num_levels() >= expected);
    CHECK(tree.num_levels() <= expected + 1);
    CHECK(tree.side(tree.level_lo()) < tree.min_separation() / 2);
    CHECK(tree.side(tree.level_hi()) == tree.root_side());
    for (int l = tree.level_lo(); l < tree.level_hi(); ++l)
      CHECK(tree.side(l + 1) == 2 * tree.side(l));
  }
}

TEST_CASE("build is deterministic per seed") {
  const std::vector<Point2> pts{{0, 4}, {1, 9}, {3, 3.5}};
  const auto a = ShiftedQuadtree::build(pts, {99, 40, GroundMetric::L2});
  const auto b = ShiftedQuadtree::build(pts, {99, 40, GroundMetric::L2});
  const auto c = ShiftedQuadtree::build(pts, {100, 40, GroundMetric::L2});
  CHECK(a.origin() == b.origin());
  CHECK(a.shift() == b.shift());
  CHECK(a.num_levels() == b.num_levels());
  CHECK(a.signature() == b.signature());
  CHECK_FALSE(a.origin() == c.origin());
  CHECK(a.signature() != c.signature());
}

TEST_CASE("build rejects bad input") {
  const std::vector<Point2> none;
  CHECK_THROWS_AS(ShiftedQuadtree::build(none, {}), std::invalid_argument);
  const std::vector<Point2> on_diag{{1, 1}};
  CHECK_THROWS_AS(ShiftedQuadtree::build(on_diag, {}), std::invalid_argument);
  const std::vector<Point2> nan{{0, NAN}};
  CHECK_THROWS_AS(ShiftedQuadtree::build(nan, {}), std::invalid_argument);
  const std::vector<Point2> ok{{0, 1}};
  CHECK_THROWS_AS(ShiftedQuadtree::build(ok, {0, 1, GroundMetric::L2}), std::invalid_argument);
}

TEST_CASE("depth cap truncates") {
  const std::vector<Point2> pts{{0, 100}, {1e-9, 100}};
  const auto tree = ShiftedQuadtree::build(pts, {0, 5, GroundMetric::L2});
  CHECK(tree.num_levels() == 5);
  CHECK(tree.truncated());
}

TEST_CASE("square-diagonal intersection uses the closed square") {
  CHECK(square_touches_diagonal({0, 0}, 1));
  CHECK_FALSE(square_touches_diagonal({5, 0}, 1));
  CHECK(square_touches_diagonal({1, 0}, 1));
  CHECK(square_touches_diagonal({0, 1}, 1));
  CHECK_FALSE(square_touches_diagonal({0, 1.5}, 1));
}

TEST_CASE("cell membership is half-open with floor indexing") {
  const std::vector<Point2> pts{{0, 10}, {2, 7}, {4, 5}};
  const auto tree = ShiftedQuadtree::build(pts, {3, 40, GroundMetric::L2});
  for (int level = tree.level_lo(); level <= tree.level_hi(); ++level) {
    for (const auto& p : pts) {
      const auto cell = tree.cell_of(p, level);
      const auto corner = tree.cell_corner(cell);
      const double s = tree.side(level);
      CHECK(corner.x <= p.x);
      CHECK(p.x < corner.x + s);
      CHECK(corner.y <= p.y);
      CHECK(p.y < corner.y + s);
    }
  }
  CHECK_THROWS_AS(tree.cell_of({-1e6, 0}, 0), OutsideRootError);
  CHECK_THROWS_AS(tree.cell_of({0, 1e6}, 0), OutsideRootError);
}

TEST_CASE("parent of a cell is the dyadic parent") {
  CHECK(CellId{0, 5, 6}.parent() == CellId{1, 2, 3});
  CHECK(CellId{3, 0, 1}.parent() == CellId{4, 0, 0});
}

TEST_CASE("structural invariants on random trees") {
  Engine engine(1234);
  for (int k = 0; k < 300; ++k) {
    const auto metric = static_cast<GroundMetric>(k % 3);
    const auto d = testing::random_diagram(engine, 25, 40.0, k % 2 ? 0.5 : 0.0, 3);
    if (d.empty()) continue;
    const auto pts = positions(d);
    const auto tree = ShiftedQuadtree::build(pts, {engine(), 40, metric});
    CHECK(tree.is_terminal(tree.root()));
    CHECK_FALSE(tree.truncated());

    for (const auto& p : pts) {
      // Nesting across all levels.
      for (int l = tree.level_lo(); l < tree.level_hi(); ++l)
        CHECK(tree.cell_of(p, l + 1) == tree.cell_of(p, l).parent());
      CHECK_FALSE(tree.is_terminal(tree.cell_of(p, tree.level_lo())));
      // Terminal cells have terminal ancestors.
      bool seen_terminal = false;
      for (int l = tree.level_lo(); l <= tree.level_hi(); ++l) {
        const bool t = tree.is_terminal(tree.cell_of(p, l));
        if (seen_terminal) CHECK(t);
        seen_terminal = seen_terminal || t;
      }
    }

    const auto finest = tree.occupied_cells(d, tree.level_lo());
    CHECK(finest.size() == d.size());
    const auto coarsest = tree.occupied_cells(d, tree.level_hi());
    REQUIRE(coarsest.size() == 1);
    CHECK(coarsest.begin()->second == d.total_count());
    for (int l = tree.level_lo(); l <= tree.level_hi(); ++l) {
      std::uint64_t total = 0;
      for (const auto& [cell, count] : tree.occupied_cells(d, l)) {
        CHECK(count > 0);
        total += count;
      }
      CHECK(total == d.total_count());
    }
  }
}

TEST_CASE("occupied cells of a single point carry its multiplicity") {
  const PersistenceDiagram d({{1, 8, 4}});
  const std::vector<Point2> pts{{1, 8}};
  const auto tree = ShiftedQuadtree::build(pts, {5, 40, GroundMetric::L2});
  for (int l = tree.level_lo(); l <= tree.level_hi(); ++l) {
    const auto cells = tree.occupied_cells(d, l);
    REQUIRE(cells.size() == 1);
    CHECK(cells.begin()->second == 4);
  }
}

TEST_CASE("random shift separates nearby points with probability gap/side") {
  // Two points a horizontal distance `gap` apart; a vertical grid line of
  // spacing s falls between them with probability gap / s.
  const double gap = 0.3;
  const std::vector<Point2> pts{{10, 50}, {10 + gap, 50}};
  const int trials = 4000;
  const auto probe = ShiftedQuadtree::build(pts, {0, 40, GroundMetric::L2});
  const int level = probe.level_hi() - 5;
  const double s = probe.side(level);
  REQUIRE(s > gap);

  int separated = 0;
  for (int t = 0; t < trials; ++t) {
    const auto tree = ShiftedQuadtree::build(pts, {static_cast<std::uint64_t>(t), 40,
                                                   GroundMetric::L2});
    REQUIRE(tree.side(level) == s);
    if (tree.cell_of(pts[0], level).ix != tree.cell_of(pts[1], level).ix) ++separated;
  }
  const double expected = gap / s;
  const double sigma = std::sqrt(expected * (1 - expected) / trials);
  CHECK(std::abs(static_cast<double>(separated) / trials - expected) < 4 * sigma);
}

}
