#include "xes/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "xes/errors.hpp"

namespace xes::bench {

namespace {

void require_finite(std::span<const double> x, const char* fn) {
  if (x.empty()) {
    throw std::invalid_argument(std::string(fn) + ": input vector is empty");
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(fn) + ": non-finite input component");
    }
  }
}

}  // namespace

double rastrigin(std::span<const double> x) {
  require_finite(x, "rastrigin");
  double sum = 10.0 * static_cast<double>(x.size());
  for (double v : x) {
    sum += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
  }
  return sum;
}

double sphere(std::span<const double> x) {
  require_finite(x, "sphere");
  double sum = 0.0;
  for (double v : x) {
    sum += v * v;
  }
  return sum;
}

ObjectiveFunction lookup(const std::string& name, int dimension) {
  if (dimension < 1) {
    throw std::invalid_argument("lookup: dimension must be positive");
  }
  if (name == "rastrigin") {
    return {name, dimension, -5.12, 5.12, [](std::span<const double> x) { return rastrigin(x); }};
  }
  if (name == "sphere") {
    return {name, dimension, -5.12, 5.12, [](std::span<const double> x) { return sphere(x); }};
  }
  throw NotFoundError("unknown benchmark: " + name);
}

}  // namespace xes::bench
