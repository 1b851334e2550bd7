#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pdtree/diagram.hpp"
#include "pdtree/random.hpp"

namespace pdtree {

namespace {
constexpr double kBirthMax = 200.0;
constexpr double kDeathMax = 300.0;
constexpr double kMinLifetime = 1e-9;
}  // namespace

PersistenceDiagram gen_uniform(std::size_t max_size, std::uint64_t seed) {
  Engine engine(seed);
  std::vector<PDPoint> points;
  points.reserve(max_size);
  while (points.size() < max_size) {
    const double birth = uniform(engine, 0.0, kBirthMax);
    const double death = uniform(engine, birth, kDeathMax);
    if (death > birth) points.push_back({birth, death, 1});
  }
  return PersistenceDiagram(std::move(points));
}

PersistenceDiagram gen_gaussian(std::size_t max_size, std::uint64_t seed) {
  Engine engine(seed);
  std::vector<PDPoint> points;
  points.reserve(max_size);
  while (points.size() < max_size) {
    const double birth = uniform(engine, 0.0, kBirthMax);
    const double lifetime = std::abs(standard_normal(engine));
    if (lifetime < kMinLifetime) continue;
    const double death = birth + lifetime;
    if (death > birth) points.push_back({birth, death, 1});
  }
  return PersistenceDiagram(std::move(points));
}

GeneratorKind parse_generator(std::string_view name) {
  if (name == "uniform") return GeneratorKind::Uniform;
  if (name == "gaussian") return GeneratorKind::Gaussian;
  throw std::invalid_argument("unknown generator '" + std::string(name) + "'");
}

std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::Uniform ? "uniform" : "gaussian";
}

std::size_t family_size(std::size_t i, std::size_t count, std::size_t max_size) {
  const double s = std::round(static_cast<double>(max_size) * static_cast<double>(i + 1) /
                              static_cast<double>(count));
  return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

std::vector<PersistenceDiagram> gen_family(GeneratorKind kind, std::size_t count,
                                           std::size_t max_size, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("count must be positive");
  if (max_size == 0) throw std::invalid_argument("max_size must be positive");
  std::vector<PersistenceDiagram> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto size = family_size(i, count, max_size);
    const auto s = mix_seed(seed, i);
    out.push_back(kind == GeneratorKind::Uniform ? gen_uniform(size, s) : gen_gaussian(size, s));
  }
  return out;
}

}  // namespace pdtree
