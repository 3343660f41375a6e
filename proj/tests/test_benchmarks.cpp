#include "xes/benchmarks.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "xes/errors.hpp"
#include "xes/rng.hpp"
#include "xes/run_log.hpp"

using namespace xes;

namespace {

// Independent 1-d oracle: golden-section minimization of the per-coordinate
// Rastrigin term g(x) = x^2 - 10 cos(2 pi x) + 10 on a bracketing interval.
double golden_section_min(double lo, double hi) {
  const auto g = [](double x) { return x * x - 10.0 * std::cos(2.0 * std::numbers::pi * x) + 10.0; };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  while (b - a > 1e-12) {
    if (g(c) < g(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - phi * (b - a);
    d = a + phi * (b - a);
  }
  return (a + b) / 2.0;
}

}  // namespace

TEST_CASE("rastrigin at the global optimum and at (1,...,1)") {
  const std::vector<double> zeros(10, 0.0);
  CHECK(bench::rastrigin(zeros) == 0.0);

  const std::vector<double> ones(10, 1.0);
  CHECK(bench::rastrigin(ones) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("rastrigin local-optimum structure matches the logged stagnation value") {
  // First nonzero local minimizer of the 1-d term, found by an independent
  // golden-section search.
  const double minimizer = golden_section_min(0.5, 1.5);
  CHECK(minimizer == doctest::Approx(0.99496).epsilon(1e-4));

  std::vector<double> x(10, 0.0);
  x[0] = minimizer;
  x[1] = minimizer;
  const double f = bench::rastrigin(x);
  CHECK(f == doctest::Approx(1.98992).epsilon(1e-4));
  CHECK(runlog::format_fitness(f) == "1.9899");
}

TEST_CASE("rastrigin rejects bad input") {
  CHECK_THROWS_AS(bench::rastrigin(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(bench::rastrigin(std::vector<double>{1.0, std::nan("")}),
                  std::invalid_argument);
  CHECK_THROWS_AS(bench::rastrigin(std::vector<double>{std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
}

TEST_CASE("sphere values") {
  CHECK(bench::sphere(std::vector<double>{0.0, 0.0}) == 0.0);
  CHECK(bench::sphere(std::vector<double>{3.0, 4.0}) == 25.0);
  CHECK(bench::sphere(std::vector<double>(10, 1.0)) == 10.0);
  CHECK_THROWS_AS(bench::sphere(std::vector<double>{std::nan("")}), std::invalid_argument);
}

TEST_CASE("lookup returns registered benchmarks with bounds") {
  const bench::ObjectiveFunction rastrigin10 = bench::lookup("rastrigin", 10);
  CHECK(rastrigin10.dimension == 10);
  CHECK(rastrigin10.lower_bound == -5.12);
  CHECK(rastrigin10.upper_bound == 5.12);
  CHECK(rastrigin10.evaluate(std::vector<double>(10, 0.0)) == 0.0);

  const bench::ObjectiveFunction sphere2 = bench::lookup("sphere", 2);
  CHECK(sphere2.dimension == 2);

  CHECK_THROWS_AS(bench::lookup("nosuch", 3), NotFoundError);
  CHECK_THROWS_AS(bench::lookup("rastrigin", 0), std::invalid_argument);
}

TEST_CASE("rastrigin is nonnegative, symmetric, and permutation invariant") {
  Rng rng(1234);
  const bench::ObjectiveFunction f = bench::lookup("rastrigin", 10);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> x(10);
    for (double& v : x) v = rng.uniform(f.lower_bound, f.upper_bound);

    const double fx = bench::rastrigin(x);
    CHECK(fx >= 0.0);

    std::vector<double> negated(10);
    for (int i = 0; i < 10; ++i) negated[i] = -x[i];
    CHECK(bench::rastrigin(negated) == doctest::Approx(fx).epsilon(1e-12));

    // rotate coordinates as an easy-to-index permutation
    std::vector<double> rotated(x.begin() + 1, x.end());
    rotated.push_back(x.front());
    CHECK(bench::rastrigin(rotated) == doctest::Approx(fx).epsilon(1e-12));
  }

  // zero only at the origin: any sampled point away from 0 has f > 0
  std::vector<double> near(10, 0.0);
  near[3] = 1e-4;
  CHECK(bench::rastrigin(near) > 0.0);
}
