#include <cmath>
#include <random>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "monoborel/errors.hpp"
#include "monoborel/special.hpp"
#include "monoborel/transforms.hpp"

using namespace monoborel;

namespace {

MonomialWeight half() { return MonomialWeight(1, 1, Rational(1), Rational(1, 2)); }

std::vector<MonomialWeight> weight_grid() {
  std::vector<MonomialWeight> out;
  for (int p : {1, 2})
    for (int q : {1, 2})
      for (int k : {1, 2})
        for (Rational s : {Rational(1, 4), Rational(1, 2), Rational(3, 4)}) out.emplace_back(p, q, Rational(k), s);
  return out;
}

}  // namespace

TEST_SUITE("special") {
  TEST_CASE("gamma helpers against boost") {
    for (double x : {0.1, 0.5, 1.0, 2.5, 10.3, 50.0, 170.0}) {
      CHECK(std::abs(gamma_fn(x) / boost::math::tgamma(x) - 1.0) < 1e-13);
      CHECK(std::abs(inv_gamma(x) * boost::math::tgamma(x) - 1.0) < 1e-13);
    }
    CHECK(std::abs(inv_gamma(300.0) - std::exp(-boost::math::lgamma(300.0))) < 1e-300);
    CHECK(inv_gamma(300.0) >= 0.0);  // 1/Gamma(300) ~ 1e-612 underflows to zero
    CHECK_THROWS_AS((void)gamma_fn(200.0), NumericError);
  }

  TEST_CASE("beta helpers against boost") {
    for (double a : {0.25, 1.0, 3.5, 80.0, 400.0})
      for (double b : {0.5, 2.0, 51.0, 300.0}) {
        CHECK(std::abs(log_beta(a, b) - std::log(boost::math::beta(a, b))) < 1e-10 * std::max(1.0, std::abs(log_beta(a, b))));
        if (a + b < 150) CHECK(std::abs(beta_fn(a, b) / boost::math::beta(a, b) - 1.0) < 1e-12);
      }
    CHECK(std::abs(beta_fn(0.5, 51.0) - boost::math::beta(0.5, 51.0)) < 1e-15);
  }

  TEST_CASE("gamma product gap is nonnegative") {
    for (double a = 0.0; a < 20; a += 0.7)
      for (double b = 0.0; b < 20; b += 1.3) CHECK(gamma_product_gap(a, b) >= -1e-12);
  }
}

TEST_SUITE("monomial_transforms") {
  TEST_CASE("Borel image of x1^2 x2^3") {
    const auto g = formal_borel(BivariateSeries::monomial({2, 3}, 1.0, {2, 3}), half());
    CHECK(g.plane == Plane::borel);
    REQUIRE(g.base.size() == 1);
    CHECK(std::abs(g.base.coeff({1, 2}, 0).real() - 1.0 / boost::math::tgamma(2.5)) < 1e-15);
    CHECK(std::abs(g.base.coeff({1, 2}, 0).real() - 0.752252779) < 1e-9);
  }

  TEST_CASE("normalization term maps to one") {
    for (const auto& w : weight_grid()) {
      const auto g = formal_borel(BivariateSeries::monomial({w.pk_int(), w.qk_int()}, 1.0, {4, 4}), w);
      CHECK(std::abs(g.base.coeff({0, 0}, 0) - Complex(1.0)) < 1e-15);
    }
  }

  TEST_CASE("Euler series maps to the logarithm series") {
    BivariateSeries f(1, {30, 30});
    for (int n = 1; n <= 29; ++n) f.set({n + 1, n + 1}, (n % 2 ? 1.0 : -1.0) * boost::math::tgamma(n));
    const auto g = formal_borel(f, half());
    for (int n = 1; n <= 29; ++n)
      CHECK(std::abs(g.base.coeff({n, n}, 0).real() - (n % 2 ? 1.0 : -1.0) / n) < 1e-14);
  }

  TEST_CASE("Borel precondition names the offending exponent") {
    BivariateSeries f(1, {3, 3});
    f.set({0, 2}, 1.0);
    try {
      (void)formal_borel(f, half());
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("(0, 2)") != std::string::npos);
    }
    const auto g = formal_borel(BivariateSeries::monomial({1, 1}, 1.0, {1, 1}), half());
    CHECK_THROWS((void)formal_borel(g.base, MonomialWeight(1, 1, Rational(1, 2), Rational(1, 2))));
  }

  TEST_CASE("Laplace examples") {
    TransformedSeries g{BivariateSeries::monomial({1, 2}, 1.0, {1, 2}), half(), Plane::borel};
    const auto f = formal_laplace(g);
    CHECK(std::abs(f.coeff({2, 3}, 0).real() - boost::math::tgamma(2.5)) < 1e-14);
    for (const auto& w : weight_grid()) {
      const auto one = formal_laplace({BivariateSeries::constant(1.0, {2, 2}), w, Plane::borel});
      CHECK(one.size() == 1);
      CHECK(std::abs(one.coeff({w.pk_int(), w.qk_int()}, 0) - Complex(1.0)) < 1e-15);
    }
    TransformedSeries wrong{BivariateSeries::constant(1.0, {0, 0}), half(), Plane::laplace};
    CHECK_THROWS((void)formal_laplace(wrong));
  }

  TEST_CASE("apply X_alpha examples") {
    const auto f = apply_X_alpha(BivariateSeries::monomial({2, 1}, 1.0, {3, 3}), half());
    CHECK(f.size() == 1);
    CHECK(std::abs(f.coeff({3, 2}, 0) - Complex(1.5)) < 1e-15);
    CHECK(apply_X_alpha(BivariateSeries::constant(4.0, {3, 3}), half()).is_zero());
  }

  TEST_CASE("monomial convolution examples") {
    const TransformedSeries one{BivariateSeries::constant(1.0, {4, 4}), half(), Plane::borel};
    const auto c = formal_convolution(one, one);
    CHECK(std::abs(c.base.coeff({1, 1}, 0) - Complex(1.0)) < 1e-15);
    const TransformedSeries t{BivariateSeries::monomial({1, 1}, 1.0, {4, 4}), half(), Plane::borel};
    const auto c2 = formal_convolution(one, t);
    CHECK(std::abs(c2.base.coeff({2, 2}, 0) - Complex(0.5)) < 1e-15);
    const TransformedSeries other{BivariateSeries::constant(1.0, {4, 4}),
                                  MonomialWeight(1, 1, Rational(1), Rational(1, 4)), Plane::borel};
    CHECK_THROWS_AS((void)formal_convolution(one, other), DomainError);
  }

  TEST_CASE("convolution uses the Beta function of the weighted degrees") {
    std::mt19937_64 rng(11);
    for (const auto& w : weight_grid()) {
      const int a = static_cast<int>(rng() % 5), b = static_cast<int>(rng() % 5);
      const int c = static_cast<int>(rng() % 5), d = static_cast<int>(rng() % 5);
      const TransformedSeries f{BivariateSeries::monomial({a, b}, 1.0, {12, 12}), w, Plane::borel};
      const TransformedSeries g{BivariateSeries::monomial({c, d}, 1.0, {12, 12}), w, Plane::borel};
      const auto h = formal_convolution(f, g);
      const double b1 = w.weighted_degree_d(a, b), b2 = w.weighted_degree_d(c, d);
      const double expected = boost::math::beta(b1 + 1.0, b2 + 1.0);
      CHECK(std::abs(h.base.coeff({a + c + w.pk_int(), b + d + w.qk_int()}, 0).real() / expected - 1.0) < 1e-12);
    }
  }

  TEST_CASE("numerical convolution examples") {
    const Evaluator one = [](Complex, Complex) { return CVector{1.0}; };
    const Evaluator mono = [](Complex a, Complex b) { return CVector{a * b}; };
    const auto r1 = numerical_convolution(one, one, half(), {Complex(0.7), Complex(0.3)});
    CHECK(std::abs(r1.value[0] - Complex(0.21)) < 1e-10);
    const auto r2 = numerical_convolution(one, mono, half(), {Complex(1.0), Complex(1.0)});
    CHECK(std::abs(r2.value[0] - Complex(0.5)) < 1e-10);
  }

  TEST_CASE("numerical convolution of logarithms matches the formal product") {
    const MonomialWeight w = half();
    const Evaluator lg = [](Complex a, Complex b) { return CVector{std::log(1.0 + a * b)}; };
    BivariateSeries s(1, {40, 40});
    for (int n = 1; n <= 40; ++n) s.set({n, n}, (n % 2 ? 1.0 : -1.0) / n);
    const TransformedSeries ts{s, w, Plane::borel};
    const auto conv = formal_convolution(ts, ts);
    const auto formal = evaluate_truncated(conv.base, 0.2, 0.2);
    const auto numeric = numerical_convolution(lg, lg, w, {Complex(0.2), Complex(0.2)});
    CHECK(std::abs(formal[0] - numeric.value[0]) < 1e-8);
  }

  TEST_CASE("flow identity for monomial-dependent series") {
    // g = x1^pk x2^qk F(t): B(sum_j z^j X^j g / j!) = exp(z tau) B(g), tau = (xi1^p xi2^q)^k.
    const MonomialWeight w(1, 2, Rational(1), Rational(1, 3));
    const int N = 12;
    const Box box{N + 1, 2 * N + 2};
    for (double z : {0.05, -0.1, 0.1}) {
      BivariateSeries g(1, box);
      for (int n = 1; n <= 5; ++n) g.set({n + 1, 2 * n + 2}, 1.0 / (n + 1.0));
      BivariateSeries lhs = g;
      BivariateSeries term = g;
      for (int j = 1; j <= N; ++j) {
        term = apply_X_alpha(term, w).restricted(box);
        term *= Complex(z / j);
        lhs += term;
      }
      const auto bg = formal_borel(g, w);
      BivariateSeries rhs = bg.base;
      BivariateSeries e = bg.base;
      for (int j = 1; j <= N; ++j) {
        e = e.shifted(1, 2).restricted(bg.base.trunc());
        e *= Complex(z / j);
        rhs += e;
      }
      CHECK(testutil::abs_diff(formal_borel(lhs, w).base, rhs) < 1e-10);
    }
  }
}
