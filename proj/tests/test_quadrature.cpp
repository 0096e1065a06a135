#include <cmath>
#include <vector>

#include "abbias/error.hpp"
#include "abbias/quadrature.hpp"
#include "abbias/rng.hpp"
#include "doctest.h"

using namespace abbias;

namespace {

// Independent oracle: integral over [0,1] of a polynomial with ascending
// coefficients is sum c_i / (i + 1).
double poly_integral01(const std::vector<double>& coeffs) {
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    acc += coeffs[i] / static_cast<double>(i + 1);
  return acc;
}

double poly_eval(const std::vector<double>& coeffs, double p) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * p + *it;
  return acc;
}

}  // namespace

TEST_CASE("polynomials integrate to their antiderivative values") {
  CHECK(integrate([](double p) { return 3 * p * p + 2 * p + 1; }, 0, 1).value ==
        doctest::Approx(3.0).epsilon(1e-12));

  SplitMix64 rng(31337);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t degree = rng.below(9);
    std::vector<double> coeffs(degree + 1);
    for (auto& c : coeffs) c = 20.0 * rng.uniform01() - 10.0;
    double got =
        integrate([&](double p) { return poly_eval(coeffs, p); }, 0, 1).value;
    CHECK(got == doctest::Approx(poly_integral01(coeffs)).epsilon(1e-11));
  }
}

TEST_CASE("transcendental reference values") {
  // 1 - cos(1)
  CHECK(integrate([](double p) { return std::sin(p); }, 0, 1).value ==
        doctest::Approx(0.45969769413186023).epsilon(1e-13));
  CHECK(integrate([](double p) { return std::exp(-10 * p); }, 0, 1).value ==
        doctest::Approx(0.099995460007023751).epsilon(1e-13));
}

TEST_CASE("boundary layer integrand needs seeded breakpoints") {
  const int k = 1000;
  auto f = [&](double p) {
    return 1.0 - std::exp(k * std::log1p(-p));  // 1 - (1-p)^k
  };
  std::vector<double> pts{0.0, 1.0 / k, 10.0 / k, 1.0};
  double got = integrate(f, pts).value;
  // integral of (1-p)^k over [0,1] is 1/(k+1)
  CHECK(got == doctest::Approx(1.0 - 1.0 / (k + 1)).epsilon(1e-12));
}

TEST_CASE("integrable endpoint singularity converges") {
  // integral of p^(-1/2) over [0,1] = 2
  double got = integrate([](double p) { return 1.0 / std::sqrt(p); }, 0.0,
                         1.0, {1e-8, 20000})
                   .value;
  CHECK(got == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("breakpoint validation") {
  auto f = [](double p) { return p; };
  std::vector<double> bad{0.0, 0.5, 0.5, 1.0};
  CHECK_THROWS_AS(integrate(f, bad), ParameterError);
  std::vector<double> one{0.0};
  CHECK_THROWS_AS(integrate(f, one), ParameterError);
}

TEST_CASE("subdivision cap raises instead of returning garbage") {
  // Unresolvable at this tolerance within 8 subdivisions.
  QuadratureOptions opts{1e-14, 8};
  CHECK_THROWS_AS(
      integrate([](double p) { return std::sin(200.0 * p) / (p + 1e-6); }, 0.0,
                1.0, opts),
      Error);
}
