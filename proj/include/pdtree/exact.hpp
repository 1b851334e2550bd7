#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pdtree/diagram.hpp"

namespace pdtree {

inline constexpr std::size_t kDefaultOracleCap = 4000;
inline constexpr std::size_t kBruteForceLimit = 8;

/// The expanded instance exceeds the oracle's size cap.
class OracleCapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Dense square cost matrix, row-major.
struct AssignmentProblem {
  std::size_t size = 0;
  std::vector<double> cost;

  double at(std::size_t row, std::size_t col) const { return cost[row * size + col]; }
  double& at(std::size_t row, std::size_t col) { return cost[row * size + col]; }
};

struct AssignmentSolution {
  double cost = 0.0;
  std::vector<std::size_t> column_of_row;
};

/// Minimum-cost perfect assignment by shortest augmenting paths with
/// dual potentials, O(n^3).
AssignmentSolution solve_assignment(const AssignmentProblem& problem);

/// Rows are the P units then |Q| diagonal slots; columns are the Q units
/// then |P| diagonal slots. Points are expanded by multiplicity. The
/// diagonal-by-diagonal block is zero.
AssignmentProblem build_assignment(const PersistenceDiagram& p,
                                   const PersistenceDiagram& q,
                                   GroundMetric metric,
                                   std::size_t cap = kDefaultOracleCap);

/// 1-Wasserstein distance between persistence diagrams.
double exact_distance(const PersistenceDiagram& p, const PersistenceDiagram& q,
                      GroundMetric metric, std::size_t cap = kDefaultOracleCap);

/// Enumerates every augmented matching; total expanded size <= 8.
double brute_force_distance(const PersistenceDiagram& p,
                            const PersistenceDiagram& q, GroundMetric metric);

/// Optimal transport between P + pi(Q) and Q + pi(P) with the plain
/// ground metric, so diagonal-to-diagonal moves are charged.
double ot_augmented(const PersistenceDiagram& p, const PersistenceDiagram& q,
                    GroundMetric metric, std::size_t cap = kDefaultOracleCap);

}  // namespace pdtree
