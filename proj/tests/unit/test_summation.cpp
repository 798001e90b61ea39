#include <cmath>
#include <numbers>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "monoborel/errors.hpp"
#include "monoborel/summation.hpp"
#include "monoborel/transforms.hpp"

using namespace monoborel;
constexpr double pi = std::numbers::pi;

namespace {

double euler_oracle(double t) { return std::exp(1.0 / t) * boost::math::expint(1, 1.0 / t); }

BivariateSeries euler_series(int N) {
  BivariateSeries f(1, {N, N});
  for (int n = 1; n <= N; ++n) f.set({n, n}, (n % 2 ? 1.0 : -1.0) * boost::math::tgamma(n));
  return f;
}

TransformedSeries log_borel(int N) {
  BivariateSeries s(1, {N, N});
  for (int n = 1; n <= N; ++n) s.set({n, n}, (n % 2 ? 1.0 : -1.0) / n);
  return {s, MonomialWeight(1, 1, Rational(1), Rational(1, 2)), Plane::borel};
}

RaySeries scalar_ray(std::vector<Complex> c) {
  RaySeries r;
  for (auto x : c) r.coeffs.push_back({x});
  return r;
}

}  // namespace

TEST_SUITE("summation_pipeline") {
  TEST_CASE("ray reduction of the logarithm series") {
    for (Rational s : {Rational(1, 2), Rational(3, 10), Rational(2, 7)}) {
      TransformedSeries phi = log_borel(20);
      phi.weight = MonomialWeight(1, 1, Rational(1), s);
      const RaySeries r = reduce_to_ray(phi, {Complex(0.2), Complex(0.5)});
      CHECK(r.lattice == 1);
      CHECK(r.offset == Rational(0));
      // level j needs every (n, m) with n s + m (1 - s) = j inside the 20 x 20 box
      const Rational cut = Rational(21) * std::min(s, Rational(1) - s);
      int levels = 0;
      while (Rational(levels) < cut) ++levels;
      REQUIRE(r.coeffs.size() == static_cast<std::size_t>(levels));
      for (int n = 1; n < levels; ++n)
        CHECK(std::abs(r.coeffs[n][0] - (n % 2 ? 1.0 : -1.0) * std::pow(0.1, n) / n) < 1e-17);
    }
  }

  TEST_CASE("ray reduction of a single monomial and of an offset lattice") {
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    TransformedSeries phi{BivariateSeries::monomial({1, 0}, 1.0, {4, 4}), w, Plane::borel};
    const RaySeries r = reduce_to_ray(phi, {Complex(0.7), Complex(1.0)});
    CHECK(r.offset == Rational(1, 2));
    CHECK(std::abs(r.evaluate(4.0)[0] - Complex(0.7 * 2.0)) < 1e-15);

    BivariateSeries s(1, {12, 12});
    for (int n = 0; n < 12; ++n) s.set({n + 1, n}, 1.0);
    const RaySeries r2 = reduce_to_ray({s, MonomialWeight(1, 1, Rational(1), Rational(3, 10)), Plane::borel},
                                       {Complex(1.0), Complex(1.0)});
    CHECK(r2.offset == Rational(3, 10));
    CHECK(r2.lattice == 1);
  }

  TEST_CASE("lattice cap is enforced") {
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 97));
    // the box must be long in x1 so that the x2 term lies below the completeness cut
    BivariateSeries s(1, {200, 3});
    s.set({1, 0}, 1.0);
    s.set({0, 1}, 1.0);
    CHECK_THROWS_AS((void)reduce_to_ray({s, w, Plane::borel}, {Complex(1.0), Complex(1.0)}, 64), ConfigurationError);
  }

  TEST_CASE("Pade continuation of log(1 + u/10) beyond its disc") {
    std::vector<Complex> c{0.0};
    for (int n = 1; n <= 20; ++n) c.emplace_back((n % 2 ? 1.0 : -1.0) * std::pow(0.1, n) / n);
    const auto cont = pade_continue(scalar_ray(c), {10, 10});
    CHECK(std::abs(cont.evaluate(30.0)[0] - std::log(4.0)) < 1e-6);
    bool negative = false;
    for (const auto& p : cont.poles)
      if (std::abs(std::arg(p.u) - pi) < 1e-2 || std::abs(std::arg(p.u) + pi) < 1e-2) negative = true;
    CHECK(negative);
  }

  TEST_CASE("rational input is reproduced with its pole") {
    std::vector<Complex> c(8, Complex(1.0));
    const auto cont = pade_continue(scalar_ray(c), {1, 1});
    REQUIRE(cont.poles.size() == 1);
    CHECK(std::abs(cont.poles[0].u - Complex(1.0)) < 1e-12);
    CHECK(std::abs(cont.evaluate(3.0)[0] - Complex(-0.5)) < 1e-12);
  }

  TEST_CASE("Pade needs enough coefficients") {
    CHECK_THROWS((void)pade_continue(scalar_ray({1.0, 2.0}), {3, 3}));
  }

  TEST_CASE("singular directions") {
    const auto phi = log_borel(40);
    const RaySeries r = reduce_to_ray(phi, {Complex(0.5), Complex(0.2)});
    const auto cont = pade_continue(r, default_pade_degrees(r.coeffs.size()));
    const auto dirs = detect_singular_directions(cont, phi.weight);
    REQUIRE(dirs.size() == 1);
    CHECK(std::abs(std::abs(dirs[0]) - pi) < 1e-2);
    const auto poly = pade_continue(scalar_ray({1.0, 2.0, 3.0}), {2, 0});
    CHECK(detect_singular_directions(poly, phi.weight).empty());
  }

  TEST_CASE("growth estimates") {
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    const auto g = growth_estimate([](Complex u) { return CVector{std::log(1.0 + u)}; }, 0.0, w, 50.0);
    CHECK(g.M <= 0.1);
    const auto b = growth_estimate([](Complex u) { return CVector{1.0 / (1.0 - u)}; }, pi, w, 50.0);
    CHECK(b.M < 1e-6);
    CHECK_THROWS_AS((void)growth_estimate([](Complex u) { return CVector{std::exp(2.0 * u)}; }, 0.0, w, 50.0),
                    NotSummableError);
    CHECK(g.order1 == doctest::Approx(2.0));
    CHECK(g.order2 == doctest::Approx(2.0));
  }

  TEST_CASE("Laplace integrals against oracles") {
    const auto r = laplace_integral([](Complex v) { return CVector{std::log(1.0 + 0.1 * v)}; }, Rational(0), 1, 0.0);
    CHECK(std::abs(r.value[0] - euler_oracle(0.1)) < 1e-8);
    const auto one = laplace_integral([](Complex) { return CVector{1.0}; }, Rational(0), 1, 0.4);
    CHECK(std::abs(one.value[0] - Complex(1.0)) < 1e-12);
    const auto half = laplace_integral([](Complex) { return CVector{1.0}; }, Rational(1, 2), 1, -0.3);
    CHECK(std::abs(half.value[0] - boost::math::tgamma(1.5)) < 1e-10);
    const auto lat = laplace_integral([](Complex v) { return CVector{1.0 + v}; }, Rational(0), 2, 0.2);
    CHECK(std::abs(lat.value[0] - (1.0 + boost::math::tgamma(1.5))) < 1e-9);
    CHECK_THROWS_AS((void)laplace_integral([](Complex) { return CVector{1.0}; }, Rational(0), 1, 1.6),
                    PreconditionError);
  }

  TEST_CASE("Laplace quadrature applies the prefactor") {
    std::vector<Complex> c{1.0, 0.0};
    const auto cont = pade_continue(scalar_ray(c), {1, 0});
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    const auto q = laplace_quadrature(cont, 0.0, w, {Complex(0.5), Complex(0.4)});
    CHECK(std::abs(q.value[0] - Complex(0.2)) < 1e-12);
  }

  TEST_CASE("Euler series summed against the exponential integral") {
    const auto f = euler_series(80);
    for (Rational s : {Rational(1, 2), Rational(3, 10)}) {
      const MonomialWeight w(1, 1, Rational(1), s);
      const auto res = borel_sum(f, w, 0.0, {{Complex(0.5), Complex(0.1)}, {Complex(0.25), Complex(0.4)}});
      CHECK(std::abs(res[0].value[0].real() - euler_oracle(0.05)) < 1e-8);
      CHECK(std::abs(res[1].value[0].real() - euler_oracle(0.1)) < 1e-8);
      CHECK(res[1].err_estimate < 1e-8);
      CHECK(angular_distance(res[1].nearest_singularity_direction, pi) < 1e-2);
    }
  }

  TEST_CASE("convergent series sums to its value in any direction") {
    BivariateSeries f(1, {30, 30});
    for (int n = 0; n <= 30; ++n) f.set({n, n}, 1.0 / boost::math::tgamma(n + 1.0));
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    for (double d : {0.0, 1.0, -2.0, 3.0}) {
      const auto r = borel_sum(f, w, d, {{Complex(0.3), Complex(0.3)}});
      CHECK(std::abs(r[0].value[0] - std::exp(0.09)) < 1e-9);
    }
  }

  TEST_CASE("monomial collapse") {
    const auto f = euler_series(60);
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    const std::vector<Point> pts{{0.1, 1.0}, {1.0, 0.1}, {0.5, 0.2}, {0.2, 0.5}, {Complex(0, 0.5), Complex(0, -0.2)}};
    const auto r = borel_sum(f, w, 0.0, pts);
    for (const auto& e : r) CHECK(std::abs(e.value[0] - r[0].value[0]) < 1e-10);
  }

  TEST_CASE("direction deformation and truncation stability") {
    const auto f = euler_series(60);
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    const Point x{Complex(0.5), Complex(0.2)};
    const auto a = borel_sum(f, w, 0.0, {x});
    const auto b = borel_sum(f, w, 0.6, {x});
    const auto c = borel_sum(f, w, -0.9, {x});
    CHECK(std::abs(a[0].value[0] - b[0].value[0]) < 1e-8);
    CHECK(std::abs(a[0].value[0] - c[0].value[0]) < 1e-8);
    const Point y{Complex(0.3), Complex(0.2)};
    const auto t20 = borel_sum(euler_series(20), w, 0.0, {y});
    const auto t30 = borel_sum(euler_series(30), w, 0.0, {y});
    CHECK(std::abs(t20[0].value[0] - t30[0].value[0]) < 1e-7);
  }

  TEST_CASE("singular direction is rejected") {
    const auto f = euler_series(60);
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    CHECK_THROWS_AS((void)borel_sum(f, w, pi, {{Complex(-0.5), Complex(0.2)}}), SingularDirectionError);
    CHECK_THROWS_AS((void)borel_sum(f, w, pi - 0.03, {{Complex(-0.5), Complex(0.2)}}), SingularDirectionError);
  }

  TEST_CASE("lateral sums differ by the Stokes jump") {
    const auto f = euler_series(80);
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    const Point x{Complex(-0.5), Complex(0.2)};
    const auto above = borel_sum(f, w, pi - 0.2, {x});
    const auto below = borel_sum(f, w, pi + 0.2, {x});
    // the two sides differ by the residue of log(1 + tu) e^-u at u = 10: 2 pi i e^-10
    CHECK(std::abs(above[0].value[0] - below[0].value[0] - Complex(0, 2 * pi * std::exp(-10.0))) < 1e-8);
    CHECK(std::abs(above[0].value[0].real() - below[0].value[0].real()) < 1e-10);
  }

  TEST_CASE("sector check and scaling invariance") {
    const auto f = euler_series(80);
    const MonomialWeight w(1, 1, Rational(1), Rational(1, 2));
    SectorSpec sec;
    sec.d = 0.0;
    sec.opening = 1.0;
    CHECK_THROWS_AS((void)borel_sum(f, w, 0.0, {{Complex(-0.5), Complex(0.2)}}, sec), PreconditionError);
    const MonomialWeight w2(2, 2, Rational(1, 2), Rational(1, 2));
    const Point x{Complex(0.5), Complex(0.2)};
    const auto a = borel_sum(f, w, 0.0, {x});
    const auto b = borel_sum(f, w2, 0.0, {x});
    CHECK(std::abs(a[0].value[0] - b[0].value[0]) < 1e-8);
  }

  TEST_CASE("parallel evaluation is deterministic") {
    const auto f = euler_series(60);
    const MonomialWeight w(1, 1, Rational(1), Rational(3, 10));
    std::vector<Point> pts;
    for (int i = 1; i <= 8; ++i) pts.emplace_back(Complex(0.05 * i), Complex(0.6));
    SummationConfig serial;
    SummationConfig par;
    par.jobs = 4;
    const auto a = borel_sum(f, w, 0.0, pts, std::nullopt, serial);
    const auto b = borel_sum(f, w, 0.0, pts, std::nullopt, par);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(a[i].value == b[i].value);
  }
}
