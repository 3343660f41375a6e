#pragma once

#include <functional>
#include <span>
#include <string>

namespace xes::bench {

/// A box-constrained objective. The bounds are used for initialization and
/// for the uniform restart mode; candidate points are never clipped to them.
struct ObjectiveFunction {
  std::string name;
  int dimension = 0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  std::function<double(std::span<const double>)> evaluate;
};

/// f(x) = 10 n + sum_i (x_i^2 - 10 cos(2 pi x_i)). Nonnegative, highly
/// multimodal, global minimum 0 at the origin.
double rastrigin(std::span<const double> x);

/// f(x) = sum_i x_i^2. Unimodal control function for fast-convergence tests.
double sphere(std::span<const double> x);

/// Registered benchmarks: "rastrigin" and "sphere", both on [-5.12, 5.12]^n.
/// Throws NotFoundError for unknown names.
ObjectiveFunction lookup(const std::string& name, int dimension);

}  // namespace xes::bench
