#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <tuple>
#include <vector>

#include "pdtree/diagram.hpp"
#include "pdtree/embedding.hpp"
#include "pdtree/eval.hpp"
#include "pdtree/exact.hpp"
#include "pdtree/flowtree.hpp"
#include "pdtree/quadtree.hpp"
#include "pdtree/report.hpp"

namespace py = pybind11;
using namespace pdtree;

namespace {

// Rows of (birth, death) or (birth, death, multiplicity); numpy arrays
// iterate the same way.
PersistenceDiagram diagram_from(const py::iterable& rows) {
  std::vector<PDPoint> points;
  for (const auto& row : rows) {
    const auto seq = py::reinterpret_borrow<py::sequence>(row);
    if (seq.size() != 2 && seq.size() != 3)
      throw py::value_error("each point needs 2 or 3 values");
    PDPoint p{seq[0].cast<double>(), seq[1].cast<double>(), 1};
    if (seq.size() == 3) p.multiplicity = seq[2].cast<std::uint64_t>();
    points.push_back(p);
  }
  return PersistenceDiagram(std::move(points));
}

std::vector<std::tuple<double, double, std::uint64_t>> rows_of(const PersistenceDiagram& d) {
  std::vector<std::tuple<double, double, std::uint64_t>> out;
  for (const auto& p : d) out.emplace_back(p.birth, p.death, p.multiplicity);
  return out;
}

ShiftedQuadtree make_tree(const std::vector<PersistenceDiagram>& diagrams, std::uint64_t seed,
                          const std::string& metric, int max_levels) {
  TreeConfig config;
  config.seed = seed;
  config.metric = parse_metric(metric);
  config.max_levels_cap = max_levels;
  return ShiftedQuadtree::build(diagrams, config);
}

py::list matching_rows(const AugmentedMatching& m) {
  py::list out;
  for (const auto& pair : m.pairs) {
    py::dict row;
    row["kind"] = std::string(to_string(pair.kind));
    row["source"] = py::make_tuple(pair.source.x, pair.source.y);
    row["target"] = py::make_tuple(pair.target.x, pair.target.y);
    row["mass"] = pair.mass;
    row["level"] = pair.level;
    row["cost"] = pair.cost;
    out.append(row);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_pdtree, m) {
  m.doc() = "Quadtree-based persistence diagram distances";

  py::register_exception<OracleCapExceeded>(m, "OracleCapExceeded", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SignatureMismatchError>(m, "SignatureMismatchError",
                                                 PyExc_ValueError);

  py::class_<PersistenceDiagram>(m, "Diagram")
      .def(py::init<>())
      .def(py::init(&diagram_from), py::arg("points"))
      .def("points", &rows_of)
      .def("__len__", &PersistenceDiagram::size)
      .def_property_readonly("total_count", &PersistenceDiagram::total_count)
      .def("__eq__", [](const PersistenceDiagram& a, const PersistenceDiagram& b) { return a == b; })
      .def("__repr__",
           [](const PersistenceDiagram& d) {
             return "<Diagram with " + std::to_string(d.size()) + " points>";
           })
      .def("to_text",
           [](const PersistenceDiagram& d) {
             std::ostringstream out;
             write_diagram(out, d);
             return out.str();
           })
      .def_static("from_text", [](const std::string& text) { return parse_diagram_string(text); })
      .def_static("load", [](const std::string& path) { return load_diagram(path); })
      .def("save", [](const PersistenceDiagram& d, const std::string& path) { save_diagram(d, path); });

  py::class_<ShiftedQuadtree>(m, "Quadtree")
      .def(py::init(&make_tree), py::arg("diagrams"), py::arg("seed") = 0,
           py::arg("metric") = "l2", py::arg("max_levels") = 40)
      .def_property_readonly("origin", [](const ShiftedQuadtree& t) {
        return py::make_tuple(t.origin().x, t.origin().y);
      })
      .def_property_readonly("root_side", &ShiftedQuadtree::root_side)
      .def_property_readonly("num_levels", &ShiftedQuadtree::num_levels)
      .def_property_readonly("min_separation", &ShiftedQuadtree::min_separation)
      .def_property_readonly("spread", &ShiftedQuadtree::spread)
      .def_property_readonly("truncated", &ShiftedQuadtree::truncated)
      .def_property_readonly("signature", &ShiftedQuadtree::signature_hex)
      .def("side", &ShiftedQuadtree::side, py::arg("level"))
      .def("embed",
           [](const ShiftedQuadtree& t, const PersistenceDiagram& d) {
             std::vector<std::tuple<int, std::int64_t, std::int64_t, double>> out;
             for (const auto& e : embed(t, d).entries)
               out.emplace_back(e.cell.level, e.cell.ix, e.cell.iy, e.value);
             return out;
           })
      .def("embedding_distance",
           [](const ShiftedQuadtree& t, const PersistenceDiagram& p, const PersistenceDiagram& q) {
             return embedding_distance(t, p, q);
           })
      .def("flowtree_distance",
           [](const ShiftedQuadtree& t, const PersistenceDiagram& p, const PersistenceDiagram& q) {
             return flowtree_distance(t, p, q, t.metric());
           })
      .def("match", [](const ShiftedQuadtree& t, const PersistenceDiagram& p,
                       const PersistenceDiagram& q) {
        return matching_rows(greedy_match(t, p, q, t.metric()));
      });

  m.def(
      "wasserstein",
      [](const PersistenceDiagram& p, const PersistenceDiagram& q, const std::string& metric,
         std::size_t oracle_cap) {
        py::gil_scoped_release release;
        return exact_distance(p, q, parse_metric(metric), oracle_cap);
      },
      py::arg("p"), py::arg("q"), py::arg("metric") = "l2",
      py::arg("oracle_cap") = kDefaultOracleCap);

  m.def(
      "distance_report",
      [](const PersistenceDiagram& p, const PersistenceDiagram& q, const std::string& method,
         const std::string& metric, const std::vector<std::uint64_t>& seeds,
         const std::string& reduce) {
        const auto report = compute_distance(p, q, parse_method(method), parse_metric(metric),
                                             seeds, parse_reduce(reduce));
        return to_json(report);
      },
      py::arg("p"), py::arg("q"), py::arg("method") = "flowtree", py::arg("metric") = "l2",
      py::arg("seeds") = std::vector<std::uint64_t>{0}, py::arg("reduce") = "mean");

  m.def(
      "distance_table",
      [](const std::vector<PersistenceDiagram>& queries,
         const std::vector<PersistenceDiagram>& candidates, const std::string& method,
         const std::string& metric, const std::vector<std::uint64_t>& seeds,
         const std::string& reduce, std::size_t workers) {
        TreeOptions opts;
        opts.seeds = seeds;
        opts.reduce = parse_reduce(reduce);
        const auto mth = parse_method(method);
        const auto g = parse_metric(metric);
        py::gil_scoped_release release;
        return distance_table(queries, candidates, mth, g, opts, workers);
      },
      py::arg("queries"), py::arg("candidates"), py::arg("method") = "flowtree",
      py::arg("metric") = "l2", py::arg("seeds") = std::vector<std::uint64_t>{0},
      py::arg("reduce") = "mean", py::arg("workers") = 1);

  m.def("gen_uniform", &gen_uniform, py::arg("size"), py::arg("seed") = 0);
  m.def("gen_gaussian", &gen_gaussian, py::arg("size"), py::arg("seed") = 0);
}
