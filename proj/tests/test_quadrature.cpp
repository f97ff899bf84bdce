#include "kgl/quadrature.hpp"

#include <cmath>

#include "doctest.h"

using kgl::integrate;

TEST_CASE("smooth integrands hit tight tolerances") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0) ==
        doctest::Approx(M_PI / 4.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 30.0) ==
        doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-11));
}

TEST_CASE("cubics are exact up to roundoff") {
  double got = integrate([](double x) { return x * x * x; }, -1.0, 2.0);
  CHECK(std::fabs(got - 15.0 / 4.0) < 1e-13);
}

TEST_CASE("empty interval") {
  CHECK(integrate([](double) { return 7.0; }, 3.0, 3.0) == 0.0);
}

TEST_CASE("near-singular integrand converges under adaptivity") {
  // int_0^1 dx / sqrt(x + 1e-4) = 2 (sqrt(1 + 1e-4) - 1e-2)
  double exact = 2.0 * (std::sqrt(1.0 + 1e-4) - 1e-2);
  double got = integrate([](double x) { return 1.0 / std::sqrt(x + 1e-4); },
                         0.0, 1.0, 1e-10);
  CHECK(got == doctest::Approx(exact).epsilon(1e-9));
}

TEST_CASE("orientation flips the sign") {
  double fwd = integrate([](double x) { return std::cos(x); }, 0.0, 1.0);
  double bwd = integrate([](double x) { return std::cos(x); }, 1.0, 0.0);
  CHECK(fwd == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
  CHECK(bwd == doctest::Approx(-std::sin(1.0)).epsilon(1e-12));
}
