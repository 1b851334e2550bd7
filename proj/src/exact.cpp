#include "pdtree/exact.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>

namespace pdtree {

namespace {

std::vector<Point2> expand(const PersistenceDiagram& d) {
  std::vector<Point2> out;
  out.reserve(d.total_count());
  for (const auto& p : d)
    for (std::uint64_t k = 0; k < p.multiplicity; ++k) out.push_back(p.position());
  return out;
}

void check_cap(const PersistenceDiagram& p, const PersistenceDiagram& q,
               std::size_t cap) {
  const std::uint64_t n = p.total_count() + q.total_count();
  if (n > cap)
    throw OracleCapExceeded("expanded size " + std::to_string(n) +
                            " exceeds oracle cap " + std::to_string(cap));
}

}  // namespace

AssignmentProblem build_assignment(const PersistenceDiagram& p,
                                   const PersistenceDiagram& q,
                                   GroundMetric metric, std::size_t cap) {
  check_cap(p, q, cap);
  const auto ps = expand(p);
  const auto qs = expand(q);
  const std::size_t np = ps.size();
  const std::size_t nq = qs.size();

  AssignmentProblem problem;
  problem.size = np + nq;
  problem.cost.assign(problem.size * problem.size, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    const double to_diag = diagonal_distance(ps[i], metric);
    for (std::size_t j = 0; j < nq; ++j) problem.at(i, j) = distance(ps[i], qs[j], metric);
    for (std::size_t j = nq; j < problem.size; ++j) problem.at(i, j) = to_diag;
  }
  for (std::size_t j = 0; j < nq; ++j) {
    const double to_diag = diagonal_distance(qs[j], metric);
    for (std::size_t i = np; i < problem.size; ++i) problem.at(i, j) = to_diag;
  }
  return problem;
}

double exact_distance(const PersistenceDiagram& p, const PersistenceDiagram& q,
                      GroundMetric metric, std::size_t cap) {
  return solve_assignment(build_assignment(p, q, metric, cap)).cost;
}

double brute_force_distance(const PersistenceDiagram& p,
                            const PersistenceDiagram& q, GroundMetric metric) {
  if (p.total_count() + q.total_count() > kBruteForceLimit)
    throw OracleCapExceeded("brute force is limited to " +
                            std::to_string(kBruteForceLimit) + " expanded points");
  const auto ps = expand(p);
  const auto qs = expand(q);
  std::vector<char> taken(qs.size(), 0);
  double best = std::numeric_limits<double>::infinity();

  // Each P unit picks an unused Q unit or its own projection; Q units left
  // over go to their projections.
  std::function<void(std::size_t, double)> recurse = [&](std::size_t i, double acc) {
    if (i == ps.size()) {
      double total = acc;
      for (std::size_t j = 0; j < qs.size(); ++j)
        if (!taken[j]) total += diagonal_distance(qs[j], metric);
      best = std::min(best, total);
      return;
    }
    recurse(i + 1, acc + diagonal_distance(ps[i], metric));
    for (std::size_t j = 0; j < qs.size(); ++j) {
      if (taken[j]) continue;
      taken[j] = 1;
      recurse(i + 1, acc + distance(ps[i], qs[j], metric));
      taken[j] = 0;
    }
  };
  recurse(0, 0.0);
  return best;
}

double ot_augmented(const PersistenceDiagram& p, const PersistenceDiagram& q,
                    GroundMetric metric, std::size_t cap) {
  check_cap(p, q, cap);
  // Sources P + pi(Q), sinks Q + pi(P); unit masses everywhere, so the
  // transport problem is an assignment problem.
  std::vector<Point2> sources = expand(p);
  std::vector<Point2> sinks = expand(q);
  const std::size_t np = sources.size();
  const std::size_t nq = sinks.size();
  for (std::size_t j = 0; j < nq; ++j) sources.push_back(project_to_diagonal(sinks[j]));
  for (std::size_t i = 0; i < np; ++i) sinks.push_back(project_to_diagonal(sources[i]));

  AssignmentProblem problem;
  problem.size = sources.size();
  problem.cost.resize(problem.size * problem.size);
  for (std::size_t i = 0; i < problem.size; ++i)
    for (std::size_t j = 0; j < problem.size; ++j)
      problem.at(i, j) = distance(sources[i], sinks[j], metric);
  return solve_assignment(problem).cost;
}

}  // namespace pdtree
