#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdtree {

/// Inner norm used for point-to-point and point-to-diagonal costs.
enum class GroundMetric { L1, L2, LInf };

GroundMetric parse_metric(std::string_view name);
std::string_view to_string(GroundMetric metric);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b, GroundMetric metric);

/// Nearest point on the diagonal y = x.
inline Point2 project_to_diagonal(Point2 p) {
  const double mid = 0.5 * (p.x + p.y);
  return {mid, mid};
}

/// A birth-death pair with multiplicity. Valid points satisfy
/// birth < death, both finite, multiplicity >= 1.
struct PDPoint {
  double birth = 0.0;
  double death = 0.0;
  std::uint64_t multiplicity = 1;

  Point2 position() const { return {birth, death}; }

  friend bool operator==(const PDPoint&, const PDPoint&) = default;
};

inline Point2 project_to_diagonal(const PDPoint& p) {
  return project_to_diagonal(p.position());
}

/// Cost of matching a point to its own diagonal projection.
double diagonal_distance(const PDPoint& p, GroundMetric metric);
double diagonal_distance(Point2 p, GroundMetric metric);

/// Raised for points that violate death > birth, finiteness or
/// multiplicity >= 1.
class InvalidPointError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the text reader; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Immutable multiset of persistence points.
///
/// Points are kept sorted lexicographically by (birth, death); entries
/// sharing a location are merged into one point whose multiplicity is the
/// sum of theirs.
class PersistenceDiagram {
 public:
  PersistenceDiagram() = default;
  explicit PersistenceDiagram(std::vector<PDPoint> points);

  std::span<const PDPoint> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::uint64_t total_count() const { return total_count_; }
  const PDPoint& operator[](std::size_t i) const { return points_[i]; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  friend bool operator==(const PersistenceDiagram&,
                         const PersistenceDiagram&) = default;

 private:
  std::vector<PDPoint> points_;
  std::uint64_t total_count_ = 0;
};

// Text format: one "birth death [multiplicity]" per line, '#' comments.
PersistenceDiagram parse_diagram(std::istream& in);
PersistenceDiagram parse_diagram_string(std::string_view text);
void write_diagram(std::ostream& out, const PersistenceDiagram& diagram);

PersistenceDiagram load_diagram(const std::filesystem::path& path);
void save_diagram(const PersistenceDiagram& diagram,
                  const std::filesystem::path& path);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// Synthetic families. Both draw exactly max_size points and are pure
// functions of (max_size, seed).

/// birth ~ U(0, 200), death ~ U(birth, 300).
PersistenceDiagram gen_uniform(std::size_t max_size, std::uint64_t seed);

/// birth ~ U(0, 200), death = birth + |g| with g ~ N(0, 1). Lifetimes
/// below 1e-9 are resampled.
PersistenceDiagram gen_gaussian(std::size_t max_size, std::uint64_t seed);

enum class GeneratorKind { Uniform, Gaussian };
GeneratorKind parse_generator(std::string_view name);
std::string to_string(GeneratorKind kind);

/// Size of diagram i in a family of `count`: max(1, round(max_size * (i + 1) / count)).
std::size_t family_size(std::size_t i, std::size_t count, std::size_t max_size);

/// Diagram i uses seed mix_seed(seed, i). Throws for count == 0.
std::vector<PersistenceDiagram> gen_family(GeneratorKind kind, std::size_t count,
                                           std::size_t max_size, std::uint64_t seed);

}  // namespace pdtree
