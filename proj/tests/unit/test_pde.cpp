#include <cmath>
#include <numbers>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "monoborel/errors.hpp"
#include "monoborel/pde.hpp"

using namespace monoborel;
constexpr double pi = std::numbers::pi;

namespace {

BivariateSeries c0(Complex c) { return BivariateSeries::constant(c, {0, 0}); }

LinearMonomialPDE scalar_problem(Exponent forcing, Rational s = Rational(1, 2)) {
  LinearMonomialPDE P;
  P.s = s;
  P.C = {{c0(-1.0)}};
  P.gamma = {BivariateSeries::monomial(forcing, 1.0, {forcing.n, forcing.m})};
  return P;
}

PfaffianSystem pfaffian(int p, int q, BivariateSeries A, BivariateSeries B) {
  PfaffianSystem sys;
  sys.p = p;
  sys.q = q;
  sys.A = {{std::move(A)}};
  sys.B = {{std::move(B)}};
  sys.gamma1 = {BivariateSeries(1, {0, 0})};
  sys.gamma2 = {BivariateSeries(1, {0, 0})};
  return sys;
}

double euler_oracle(double t) { return std::exp(1.0 / t) * boost::math::expint(1, 1.0 / t); }

}  // namespace

TEST_SUITE("pde_solver") {
  TEST_CASE("Euler formal solution coefficients") {
    const auto y = formal_solution(scalar_problem({1, 1}), {12, 12});
    REQUIRE(y.size() == 1);
    for (int n = 1; n <= 12; ++n)
      CHECK(std::abs(y[0].coeff({n, n}, 0).real() - (n % 2 ? 1.0 : -1.0) * boost::math::tgamma(n)) <
            1e-12 * boost::math::tgamma(n));
    for (const auto& [e, v] : y[0].coeffs()) CHECK(e.n == e.m);
  }

  TEST_CASE("recursion leaves a zero residual away from the top border") {
    for (Rational s : {Rational(1, 2), Rational(1, 5), Rational(0), Rational(1)}) {
      LinearMonomialPDE P;
      P.p = 2;
      P.q = 1;
      P.s = s;
      BivariateSeries c00(2, {1, 1});
      P.C = {{c0(-1.0), BivariateSeries::monomial({1, 0}, 0.5, {1, 0})},
             {BivariateSeries::monomial({0, 1}, 0.25, {0, 1}), c0(Complex(0, 2))}};
      P.gamma = {BivariateSeries::monomial({1, 0}, 1.0, {1, 0}), BivariateSeries::monomial({0, 2}, -1.0, {0, 2})};
      const Box box{14, 10};
      const auto y = formal_solution(P, box);
      const auto lhs = apply_equation_operator(P, y);
      const auto rhs = apply_equation_rhs(P, y);
      for (std::size_t i = 0; i < 2; ++i) {
        const Box inner{box.n1, box.n2};
        for (int n = 0; n <= inner.n1; ++n)
          for (int m = 0; m <= inner.n2; ++m) {
            const Complex r = lhs[i].coeff({n, m}, 0) - rhs[i].coeff({n, m}, 0);
            CHECK(std::abs(r) < 1e-9 * std::max(1.0, y[i].max_coeff_norm()));
          }
      }
    }
  }

  TEST_CASE("traversal orders give bit-identical solutions") {
    LinearMonomialPDE P = scalar_problem({1, 0});
    P.C[0][0] = BivariateSeries(1, {2, 2});
    P.C[0][0].set({0, 0}, -1.0);
    P.C[0][0].set({1, 2}, 0.3);
    P.C[0][0].set({2, 1}, Complex(0.0, -0.7));
    const auto a = formal_solution(P, {25, 25}, Traversal::row_major);
    const auto b = formal_solution(P, {25, 25}, Traversal::column_major);
    const auto c = formal_solution(P, {25, 25}, Traversal::antidiagonal);
    CHECK(a == b);
    CHECK(a == c);
  }

  TEST_CASE("singular C00 is rejected") {
    LinearMonomialPDE P = scalar_problem({1, 1});
    P.C = {{c0(0.0)}};
    CHECK_THROWS_AS((void)formal_solution(P, {4, 4}), PreconditionError);
  }

  TEST_CASE("shape validation") {
    LinearMonomialPDE P = scalar_problem({1, 1});
    P.C = {{c0(-1.0), c0(0.0)}};
    CHECK_THROWS_AS(P.validate(), DimensionError);
    P = scalar_problem({1, 1});
    P.s = Rational(3, 2);
    CHECK_THROWS_AS(P.validate(), DomainError);
  }

  TEST_CASE("singular directions follow the eigenvalues") {
    LinearMonomialPDE P;
    P.C = {{c0(-1.0), c0(0.0)}, {c0(0.0), c0(Complex(0, 2))}};
    P.gamma = {BivariateSeries::monomial({1, 1}, 1.0, {1, 1}), BivariateSeries::monomial({1, 1}, 1.0, {1, 1})};
    const auto d = singular_directions(P);
    REQUIRE(d.size() == 2);
    CHECK(std::abs(d[0] - pi / 2) < 1e-12);
    CHECK(std::abs(d[1] - pi) < 1e-12);
  }

  TEST_CASE("Euler sum and residual") {
    const auto P = scalar_problem({1, 1});
    const auto r = sum_and_verify(P, 0.0, {{Complex(0.5), Complex(0.2)}, {Complex(0.25), Complex(0.2)}});
    CHECK(std::abs(r[0].eval.value[0].real() - 0.0915633) < 1e-7);
    CHECK(std::abs(r[0].eval.value[0].real() - euler_oracle(0.1)) < 1e-10);
    CHECK(std::abs(r[1].eval.value[0].real() - euler_oracle(0.05)) < 1e-10);
    CHECK(r[0].residual < 1e-6);
    CHECK(r[1].residual < 1e-6);
    CHECK_THROWS_AS((void)sum_and_verify(P, pi, {{Complex(-0.5), Complex(0.2)}}), SingularDirectionError);
  }

  TEST_CASE("two-eigenvalue problem detects both directions") {
    LinearMonomialPDE P;
    P.C = {{c0(-1.0), c0(0.0)}, {c0(0.0), c0(Complex(0, 2))}};
    P.gamma = {BivariateSeries::monomial({1, 1}, 1.0, {1, 1}), BivariateSeries::monomial({1, 1}, 1.0, {1, 1})};
    const auto r = sum_and_verify(P, 0.0, {{Complex(0.3), Complex(0.3)}});
    bool near_pi = false, near_half = false;
    for (double d : r[0].eval.singular_directions) {
      near_pi = near_pi || std::abs(std::abs(d) - pi) < 2e-2;
      near_half = near_half || std::abs(d - pi / 2) < 2e-2;
    }
    CHECK(near_pi);
    CHECK(near_half);
    CHECK(r[0].residual < 1e-6);
  }

  TEST_CASE("endpoint weights are summed with an interior weight") {
    const auto P = scalar_problem({1, 1}, Rational(1));
    const auto r = sum_and_verify(P, 0.0, {{Complex(0.5), Complex(0.2)}});
    CHECK(r[0].eval.weight.s() == Rational(1, 2));
    CHECK(r[0].residual < 1e-6);
  }

  TEST_CASE("Pfaffian integrability examples") {
    for (auto [p, q] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{3, 2}}) {
      const auto sys = pfaffian(p, q, c0(double(p)), c0(double(q)));
      const auto rep = pfaffian_integrability_check(sys, {8, 8});
      CHECK(rep.matrix_defect == 0.0);
      CHECK(rep.forcing_defect == 0.0);
    }
    BivariateSeries B(1, {1, 0});
    B.set({0, 0}, 1.0);
    B.set({1, 0}, 1.0);
    const auto bad = pfaffian_integrability_check(pfaffian(2, 1, c0(2.0), B), {8, 8});
    CHECK(std::abs(bad.matrix_defect - 1.0) < 1e-14);
    CHECK(bad.matrix_worst == Exponent{3, 1});
    const auto zero = pfaffian_integrability_check(pfaffian(1, 1, c0(0.0), c0(0.0)), {5, 5});
    CHECK(zero.matrix_defect == 0.0);
  }

  TEST_CASE("forcing identity detects non-integrable forcing") {
    auto sys = pfaffian(1, 1, c0(1.0), c0(1.0));
    sys.gamma1 = {BivariateSeries::monomial({1, 0}, 1.0, {1, 0})};
    sys.gamma2 = {BivariateSeries(1, {0, 0})};
    const auto rep = pfaffian_integrability_check(sys, {6, 6});
    CHECK(rep.matrix_defect == 0.0);
    CHECK(rep.forcing_defect > 0.5);
  }

  TEST_CASE("eigenvalue pairing") {
    CHECK(eigenvalue_pairing_check(pfaffian(2, 3, c0(2.0), c0(3.0))).pass);
    CHECK_FALSE(eigenvalue_pairing_check(pfaffian(1, 1, c0(1.0), c0(5.0))).pass);
    PfaffianSystem sys;
    sys.p = 1;
    sys.q = 2;
    sys.A = {{c0(1.0), c0(0.0)}, {c0(0.0), c0(2.0)}};
    sys.B = {{c0(2.0), c0(0.0)}, {c0(0.0), c0(4.0)}};
    sys.gamma1 = {BivariateSeries(1, {0, 0}), BivariateSeries(1, {0, 0})};
    sys.gamma2 = sys.gamma1;
    const auto rep = eigenvalue_pairing_check(sys);
    CHECK(rep.pass);
    CHECK(rep.entries.size() == 2);
  }

  TEST_CASE("combining a Pfaffian pair") {
    auto sys = pfaffian(1, 1, c0(2.0), c0(Complex(0, 2)));
    sys.gamma1 = {BivariateSeries::monomial({1, 0}, 4.0, {1, 0})};
    const auto half = pfaffian_combine(sys, Rational(1, 2));
    CHECK(std::abs(half.C00()(0, 0) - Complex(1, 1)) < 1e-15);
    const auto one = pfaffian_combine(sys, Rational(1));
    CHECK(std::abs(one.C00()(0, 0) - Complex(2.0)) < 1e-15);
    CHECK(std::abs(one.gamma[0].coeff({1, 0}, 0) - Complex(4.0)) < 1e-15);
    const auto zero = pfaffian_combine(sys, Rational(0));
    CHECK(std::abs(zero.C00()(0, 0) - Complex(0, 2)) < 1e-15);
  }

  TEST_CASE("endpoint combination reproduces the first equation") {
    // x1^p x2^q x1 d1 y = A y + gamma1 treated as the s = 1 member of the family
    auto sys = pfaffian(1, 1, c0(-1.0), c0(-1.0));
    sys.gamma1 = {BivariateSeries::monomial({1, 1}, 1.0, {1, 1})};
    sys.gamma2 = {BivariateSeries::monomial({1, 1}, 1.0, {1, 1})};
    const auto combined = pfaffian_combine(sys, Rational(1));
    LinearMonomialPDE direct;
    direct.s = Rational(1);
    direct.C = sys.A;
    direct.gamma = sys.gamma1;
    CHECK(formal_solution(combined, {12, 12}) == formal_solution(direct, {12, 12}));
  }

  TEST_CASE("convergence scan verdicts") {
    const auto s_grid = default_s_grid();
    const auto d_grid = default_direction_grid();
    const auto ok = convergence_scan(pfaffian(1, 1, c0(1.0), c0(Complex(0, 1))), s_grid, d_grid);
    CHECK(ok.convergent);
    CHECK(ok.witnesses.size() == d_grid.size());
    for (const auto& [d, s] : ok.witnesses) CHECK(s.has_value());
    const auto constant = convergence_scan(pfaffian(1, 1, c0(-1.0), c0(-1.0)), s_grid, d_grid);
    CHECK_FALSE(constant.convergent);
    const auto degenerate = convergence_scan(pfaffian(1, 1, c0(0.0), c0(1.0)), s_grid, d_grid);
    CHECK_FALSE(degenerate.convergent);
  }

  TEST_CASE("Gevrey order of both formal solutions") {
    for (Exponent e : {Exponent{1, 1}, Exponent{1, 0}}) {
      const auto y = formal_solution(scalar_problem(e), {40, 40});
      const auto g = gevrey_order_estimate(y[0], 1, 1);
      CHECK(g.s_hat >= 0.85);
      CHECK(g.s_hat <= 1.15);
    }
  }
}
