#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "monoborel/quadrature.hpp"

using namespace monoborel;

TEST_SUITE("quadrature") {
  TEST_CASE("generalized Gauss-Laguerre integrates x^j against x^alpha e^-x") {
    for (double alpha : {0.0, 0.3, 0.5, 0.9}) {
      const auto& r = quad::gauss_laguerre(32, alpha);
      for (int j = 0; j <= 20; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) sum += r.weights[i] * std::pow(r.nodes[i], j);
        CHECK(std::abs(sum / boost::math::tgamma(alpha + j + 1.0) - 1.0) < 1e-11);
      }
    }
  }

  TEST_CASE("Gauss-Legendre on the unit interval") {
    const auto& r = quad::gauss_legendre_unit(15);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) sum += r.weights[i] * std::pow(r.nodes[i], 28);
    CHECK(std::abs(sum - 1.0 / 29.0) < 1e-15);
  }

  TEST_CASE("tanh-sinh handles endpoint singularities") {
    const auto& r = quad::tanh_sinh_unit(7);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      sum += r.weights[i] / std::sqrt(r.nodes[i]) / std::pow(r.complements[i], 0.25);
    // B(1/2, 3/4)
    const double exact = boost::math::tgamma(0.5) * boost::math::tgamma(0.75) / boost::math::tgamma(1.25);
    CHECK(std::abs(sum - exact) < 1e-10);
  }

  TEST_CASE("exp-sinh on the half line") {
    const auto& r = quad::exp_sinh_half_line(6);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      sum += r.weights[i] * std::pow(r.nodes[i], -0.5) * std::exp(-r.nodes[i]);
    CHECK(std::abs(sum - std::sqrt(M_PI)) < 1e-10);
  }

  TEST_CASE("Chebyshev-Lobatto points") {
    const auto x = quad::chebyshev_lobatto(9, 0.0, 2.0);
    REQUIRE(x.size() == 9);
    CHECK(x.front() == 0.0);
    CHECK(x.back() == 2.0);
    for (std::size_t i = 1; i < x.size(); ++i) CHECK(x[i] > x[i - 1]);
  }
}
