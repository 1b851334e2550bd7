#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "pdtree/diagram.hpp"
#include "pdtree/quadtree.hpp"

namespace pdtree {

struct EmbeddingEntry {
  CellId cell;
  double value = 0.0;  // side(level) * count

  friend bool operator==(const EmbeddingEntry&, const EmbeddingEntry&) = default;
};

/// Sparse level-weighted cell counts of a diagram, restricted to
/// non-terminal cells. Entries are sorted by (level, ix, iy).
struct EmbeddingVector {
  std::uint64_t tree_signature = 0;
  std::vector<EmbeddingEntry> entries;
  std::uint64_t total_mass = 0;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Vectors built against different trees were compared.
class SignatureMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

EmbeddingVector embed(const ShiftedQuadtree& tree, const PersistenceDiagram& d);

/// Sorted-merge L1 distance; a missing entry counts as zero.
double l1_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// d_T on a fixed tree: embed both diagrams and take the L1 distance.
double embedding_distance(const ShiftedQuadtree& tree,
                          const PersistenceDiagram& p,
                          const PersistenceDiagram& q);

// Export format:
//   # signature <16 hex digits> mass <total_mass>
//   level ix iy value
void write_embedding(std::ostream& out, const EmbeddingVector& v);
EmbeddingVector read_embedding(std::istream& in);

}  // namespace pdtree
