#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "efdiv/special.hpp"

using efdiv::special::digamma;
using efdiv::special::log_gamma;

TEST_CASE("log_gamma agrees with libm across the positive axis") {
  // libm's lgamma is the independent route here.
  for (double x = 0.05; x < 60.0; x += 0.173) {
    CAPTURE(x);
    REQUIRE(std::abs(log_gamma(x) - std::lgamma(x)) < 1e-10);
  }
  for (double x : {1e2, 1e3, 1e5, 1e6}) {
    CAPTURE(x);
    const double ref = std::lgamma(x);
    REQUIRE(std::abs(log_gamma(x) - ref) < 1e-12 * std::abs(ref));
  }
}

TEST_CASE("log_gamma exact integer anchors") {
  REQUIRE(log_gamma(1.0) == Catch::Approx(0.0).margin(1e-13));
  REQUIRE(log_gamma(2.0) == Catch::Approx(0.0).margin(1e-13));
  REQUIRE(log_gamma(5.0) == Catch::Approx(std::log(24.0)).margin(1e-12));
  REQUIRE(log_gamma(0.5) == Catch::Approx(0.5 * std::log(M_PI)).margin(1e-12));
}

TEST_CASE("log_gamma rejects the nonpositive axis") {
  REQUIRE_THROWS_AS(log_gamma(0.0), std::domain_error);
  REQUIRE_THROWS_AS(log_gamma(-2.5), std::domain_error);
}

TEST_CASE("digamma anchors and recurrence") {
  constexpr double kEulerGamma = 0.57721566490153286;
  REQUIRE(digamma(1.0) == Catch::Approx(-kEulerGamma).margin(1e-12));
  REQUIRE(digamma(0.5) ==
          Catch::Approx(-kEulerGamma - 2.0 * std::log(2.0)).margin(1e-12));
  REQUIRE(digamma(2.0) == Catch::Approx(1.0 - kEulerGamma).margin(1e-12));
  for (double x = 0.1; x < 40.0; x += 0.377) {
    CAPTURE(x);
    REQUIRE(digamma(x + 1.0) - digamma(x) ==
            Catch::Approx(1.0 / x).margin(1e-11));
  }
}

TEST_CASE("digamma matches finite differences of log_gamma") {
  const double h = 1e-4;
  for (double x = 1.0; x < 30.0; x += 0.731) {
    CAPTURE(x);
    const double fd = (log_gamma(x + h) - log_gamma(x - h)) / (2.0 * h);
    REQUIRE(std::abs(digamma(x) - fd) < 1e-7);
  }
  REQUIRE_THROWS_AS(digamma(0.0), std::domain_error);
}
