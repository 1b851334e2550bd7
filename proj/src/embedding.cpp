#include "pdtree/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace pdtree {

namespace {

// Cell counts for up to two diagrams on one level.
struct CellCount {
  std::int64_t ix;
  std::int64_t iy;
  std::uint64_t a;
  std::uint64_t b;
};

void push_count(std::vector<CellCount>& out, std::int64_t ix, std::int64_t iy,
                const CellCount& c) {
  if (!out.empty() && out.back().ix == ix && out.back().iy == iy) {
    out.back().a += c.a;
    out.back().b += c.b;
  } else {
    out.push_back({ix, iy, c.a, c.b});
  }
}

// Parent-level counts from a list sorted by (ix, iy). Children of one parent
// column form two runs (even ix, then odd ix), each sorted by iy, so a
// linear merge keeps the output sorted.
void coarsen(const std::vector<CellCount>& cells, std::vector<CellCount>& out) {
  out.clear();
  for (std::size_t i = 0; i < cells.size();) {
    const std::int64_t px = cells[i].ix >> 1;
    std::size_t mid = i;
    while (mid < cells.size() && cells[mid].ix == cells[i].ix) ++mid;
    std::size_t end = mid;
    while (end < cells.size() && (cells[end].ix >> 1) == px) ++end;
    std::size_t a = i;
    std::size_t b = mid;
    while (a < mid || b < end) {
      const bool take_a = b == end || (a < mid && cells[a].iy <= cells[b].iy);
      const auto& c = take_a ? cells[a++] : cells[b++];
      push_count(out, px, c.iy >> 1, c);
    }
    i = end;
  }
}

// Finest-level counts, sorted and merged. P goes to a, Q to b.
std::vector<CellCount> finest_counts(const ShiftedQuadtree& tree, const PersistenceDiagram& p,
                                     const PersistenceDiagram* q) {
  std::vector<CellCount> raw;
  raw.reserve(p.size() + (q ? q->size() : 0));
  for (const auto& pt : p) {
    const auto [fx, fy] = tree.finest_index(pt.position());
    raw.push_back({fx, fy, pt.multiplicity, 0});
  }
  if (q)
    for (const auto& pt : *q) {
      const auto [fx, fy] = tree.finest_index(pt.position());
      raw.push_back({fx, fy, 0, pt.multiplicity});
    }
  std::sort(raw.begin(), raw.end(), [](const CellCount& x, const CellCount& y) {
    return x.ix < y.ix || (x.ix == y.ix && x.iy < y.iy);
  });
  // Truncated trees can put several points in one finest cell.
  std::vector<CellCount> cells;
  cells.reserve(raw.size());
  for (const auto& c : raw) push_count(cells, c.ix, c.iy, c);
  return cells;
}

// Calls visit(level, cell, counts) for every non-terminal occupied cell in
// (level, ix, iy) order. A terminal cell has only terminal ancestors and a
// non-terminal cell only non-terminal descendants, so each level holds
// exactly the points whose upward walk has not stopped.
template <class Visit>
void walk_levels(const ShiftedQuadtree& tree, std::vector<CellCount> cells, Visit&& visit) {
  std::vector<CellCount> next;
  for (int level = tree.level_lo(); level <= tree.level_hi() && !cells.empty(); ++level) {
    bool any_open = false;
    for (const auto& c : cells) {
      const CellId cell{level, c.ix, c.iy};
      if (tree.is_terminal(cell)) continue;
      any_open = true;
      visit(cell, c);
    }
    if (!any_open) break;
    coarsen(cells, next);
    cells.swap(next);
  }
}

}  // namespace

EmbeddingVector embed(const ShiftedQuadtree& tree, const PersistenceDiagram& d) {
  auto cells = finest_counts(tree, d, nullptr);
  EmbeddingVector v;
  v.tree_signature = tree.signature();
  v.total_mass = d.total_count();
  v.entries.reserve(cells.size() * static_cast<std::size_t>(tree.num_levels()));
  walk_levels(tree, std::move(cells), [&](const CellId& cell, const CellCount& c) {
    v.entries.push_back({cell, tree.side(cell.level) * static_cast<double>(c.a)});
  });
  return v;
}

double l1_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.tree_signature != b.tree_signature)
    throw SignatureMismatchError(
        "embedding vectors were built on different trees");
  double sum = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->cell < ib->cell) {
      sum += ia->value;
      ++ia;
    } else if (ib->cell < ia->cell) {
      sum += ib->value;
      ++ib;
    } else {
      sum += std::abs(ia->value - ib->value);
      ++ia;
      ++ib;
    }
  }
  for (; ia != a.entries.end(); ++ia) sum += ia->value;
  for (; ib != b.entries.end(); ++ib) sum += ib->value;
  return sum;
}

double embedding_distance(const ShiftedQuadtree& tree,
                          const PersistenceDiagram& p,
                          const PersistenceDiagram& q) {
  // Same terms in the same order as l1_distance(embed(p), embed(q)).
  double sum = 0.0;
  walk_levels(tree, finest_counts(tree, p, &q), [&](const CellId& cell, const CellCount& c) {
    const double side = tree.side(cell.level);
    sum += std::abs(side * static_cast<double>(c.a) - side * static_cast<double>(c.b));
  });
  return sum;
}

void write_embedding(std::ostream& out, const EmbeddingVector& v) {
  char sig[17];
  std::snprintf(sig, sizeof(sig), "%016llx",
                static_cast<unsigned long long>(v.tree_signature));
  out << "# signature " << sig << " mass " << v.total_mass << '\n';
  for (const auto& e : v.entries)
    out << e.cell.level << ' ' << e.cell.ix << ' ' << e.cell.iy << ' '
        << format_double(e.value) << '\n';
}

EmbeddingVector read_embedding(std::istream& in) {
  EmbeddingVector v;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing embedding header", 1);
  {
    std::istringstream header(line);
    std::string hash, sig_key, sig, mass_key;
    if (!(header >> hash >> sig_key >> sig >> mass_key >> v.total_mass) ||
        hash != "#" || sig_key != "signature" || mass_key != "mass")
      throw ParseError("malformed embedding header", 1);
    v.tree_signature = std::stoull(sig, nullptr, 16);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    EmbeddingEntry e;
    std::string value;
    if (!(row >> e.cell.level >> e.cell.ix >> e.cell.iy >> value))
      throw ParseError("malformed entry at line " + std::to_string(line_no), line_no);
    e.value = std::stod(value);
    v.entries.push_back(e);
  }
  return v;
}

}  // namespace pdtree
