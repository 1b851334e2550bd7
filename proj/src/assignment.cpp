#include <algorithm>
#include <limits>

#include "pdtree/exact.hpp"

namespace pdtree {

namespace {
constexpr double kReducedCostTolerance = 1e-12;
}

// Shortest augmenting path Hungarian method. Rows are inserted one at a
// time; a Dijkstra-like sweep over columns with reduced costs finds the
// cheapest augmenting path and the potentials are updated along it.
AssignmentSolution solve_assignment(const AssignmentProblem& problem) {
  const std::size_t n = problem.size;
  AssignmentSolution solution;
  if (n == 0) return solution;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // Index 0 is a virtual column used as the root of each search.
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, kNone), way(n + 1, 0);
  std::vector<double> min_slack(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t row = 0; row < n; ++row) {
    row_of_col[0] = row;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t r = row_of_col[col0];
      const double* cost_row = &problem.cost[r * n];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double reduced = cost_row[c - 1] - row_pot[r + 1] - col_pot[c];
        if (reduced < min_slack[c]) {
          min_slack[c] = reduced;
          way[c] = col0;
        }
        if (min_slack[c] < delta - kReducedCostTolerance ||
            (col1 == 0 && min_slack[c] < kInf)) {
          delta = min_slack[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          row_pot[row_of_col[c] + 1] += delta;
          col_pot[c] -= delta;
        } else {
          min_slack[c] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != kNone);
    do {
      const std::size_t prev = way[col0];
      row_of_col[col0] = row_of_col[prev];
      col0 = prev;
    } while (col0 != 0);
  }

  solution.column_of_row.assign(n, 0);
  for (std::size_t c = 1; c <= n; ++c) solution.column_of_row[row_of_col[c]] = c - 1;
  for (std::size_t r = 0; r < n; ++r)
    solution.cost += problem.at(r, solution.column_of_row[r]);
  return solution;
}

}  // namespace pdtree
