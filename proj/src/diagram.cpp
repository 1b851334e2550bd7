#include "pdtree/diagram.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pdtree {

GroundMetric parse_metric(std::string_view name) {
  if (name == "l1" || name == "L1" || name == "1") return GroundMetric::L1;
  if (name == "l2" || name == "L2" || name == "2") return GroundMetric::L2;
  if (name == "linf" || name == "Linf" || name == "inf")
    return GroundMetric::LInf;
  throw std::invalid_argument("unknown ground metric '" + std::string(name) +
                              "' (expected l1, l2 or linf)");
}

std::string_view to_string(GroundMetric metric) {
  switch (metric) {
    case GroundMetric::L1: return "l1";
    case GroundMetric::L2: return "l2";
    case GroundMetric::LInf: return "linf";
  }
  return "?";
}

double distance(Point2 a, Point2 b, GroundMetric metric) {
  const double dx = std::abs(a.x - b.x);
  const double dy = std::abs(a.y - b.y);
  switch (metric) {
    case GroundMetric::L1: return dx + dy;
    case GroundMetric::L2: return std::hypot(dx, dy);
    case GroundMetric::LInf: return std::max(dx, dy);
  }
  return 0.0;
}

double diagonal_distance(Point2 p, GroundMetric metric) {
  return distance(p, project_to_diagonal(p), metric);
}

double diagonal_distance(const PDPoint& p, GroundMetric metric) {
  return diagonal_distance(p.position(), metric);
}

namespace {

void validate(const PDPoint& p) {
  if (!std::isfinite(p.birth) || !std::isfinite(p.death))
    throw InvalidPointError("non-finite coordinate");
  if (!(p.death > p.birth)) throw InvalidPointError("death <= birth");
  if (p.multiplicity == 0) throw InvalidPointError("multiplicity must be >= 1");
}

}  // namespace

PersistenceDiagram::PersistenceDiagram(std::vector<PDPoint> points) {
  for (const auto& p : points) validate(p);
  std::sort(points.begin(), points.end(), [](const PDPoint& a, const PDPoint& b) {
    return a.birth < b.birth || (a.birth == b.birth && a.death < b.death);
  });
  for (const auto& p : points) {
    if (!points_.empty() && points_.back().birth == p.birth &&
        points_.back().death == p.death) {
      points_.back().multiplicity += p.multiplicity;
    } else {
      points_.push_back(p);
    }
    total_count_ += p.multiplicity;
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_real(std::string_view tok, double& out) {
  // from_chars rejects a leading '+', strtod-style inputs accept it.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

bool parse_count(std::string_view tok, std::uint64_t& out) {
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

PersistenceDiagram parse_diagram(std::istream& in) {
  std::vector<PDPoint> points;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto tokens = split_ws(line);
    const auto where = " at line " + std::to_string(line_no);
    if (tokens.size() < 2 || tokens.size() > 3)
      throw ParseError("expected 'birth death [multiplicity]'" + where, line_no);

    PDPoint p;
    if (!parse_real(tokens[0], p.birth) || !parse_real(tokens[1], p.death))
      throw ParseError("malformed number" + where, line_no);
    if (tokens.size() == 3 && !parse_count(tokens[2], p.multiplicity))
      throw ParseError("malformed multiplicity" + where, line_no);

    if (!std::isfinite(p.birth) || !std::isfinite(p.death))
      throw InvalidPointError("non-finite value" + where);
    if (!(p.death > p.birth)) throw InvalidPointError("death <= birth" + where);
    if (p.multiplicity == 0)
      throw InvalidPointError("multiplicity must be >= 1" + where);
    points.push_back(p);
  }
  return PersistenceDiagram(std::move(points));
}

PersistenceDiagram parse_diagram_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_diagram(in);
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_diagram(std::ostream& out, const PersistenceDiagram& diagram) {
  for (const auto& p : diagram) {
    out << format_double(p.birth) << ' ' << format_double(p.death);
    if (p.multiplicity != 1) out << ' ' << p.multiplicity;
    out << '\n';
  }
}

PersistenceDiagram load_diagram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_diagram(in);
}

void save_diagram(const PersistenceDiagram& diagram,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_diagram(out, diagram);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace pdtree
