#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "monoborel/rational.hpp"
#include "monoborel/series.hpp"
#include "monoborel/summation.hpp"

namespace monoborel {

/// Square matrix of scalar series, row-major.
using SeriesMatrix = std::vector<std::vector<BivariateSeries>>;
using SeriesVector = std::vector<BivariateSeries>;

/// x1^p x2^q ((s/p) x1 d1 + ((1-s)/q) x2 d2) y = C y + gamma, with s in [0, 1].
///
/// C and gamma are polynomial data: coefficients outside their boxes are zero.
struct LinearMonomialPDE {
  int p = 1;
  int q = 1;
  Rational s{1, 2};
  SeriesMatrix C;
  SeriesVector gamma;

  [[nodiscard]] std::size_t dim() const { return gamma.size(); }
  /// Throws DimensionError / DomainError on inconsistent shapes or parameters.
  void validate() const;
  [[nodiscard]] Eigen::MatrixXcd C00() const;
  [[nodiscard]] Eigen::VectorXcd eigenvalues() const;
};

/// Pair x1^p x2^q x1 d1 y = A y + gamma1, x1^p x2^q x2 d2 y = B y + gamma2.
struct PfaffianSystem {
  int p = 1;
  int q = 1;
  SeriesMatrix A;
  SeriesMatrix B;
  SeriesVector gamma1;
  SeriesVector gamma2;

  [[nodiscard]] std::size_t dim() const { return A.size(); }
  void validate() const;
};

/// Linear extensions of the exponent partial order; all give bit-identical results.
enum class Traversal { row_major, column_major, antidiagonal };

/// Unique formal solution on `box`, one scalar series per component.
[[nodiscard]] SeriesVector formal_solution(const LinearMonomialPDE& prob, Box box,
                                           Traversal order = Traversal::row_major);

/// t * (termwise Euler operator) applied to y, i.e. the left-hand side of the equation.
[[nodiscard]] SeriesVector apply_equation_operator(const LinearMonomialPDE& prob, const SeriesVector& y);
/// C y + gamma on the box of y.
[[nodiscard]] SeriesVector apply_equation_rhs(const LinearMonomialPDE& prob, const SeriesVector& y);

/// Sorted, deduplicated arguments of the eigenvalues of C(0,0).
[[nodiscard]] std::vector<double> singular_directions(const LinearMonomialPDE& prob);

struct PdeSumOptions {
  std::optional<Rational> summation_weight;  // default: prob.s when interior, else 1/2
  std::optional<Box> box;                    // default: sized for target_coefficients ray terms
  int target_coefficients = 30;
  int max_box = 240;
  SummationConfig summation;
};

struct VerifiedSum {
  SumEvaluation eval;
  double residual = 0.0;
};

/// Weight used for summing solutions of `prob` under `opts`.
[[nodiscard]] MonomialWeight summation_weight(const LinearMonomialPDE& prob, const PdeSumOptions& opts);
/// Default truncation box for `target` complete ray levels of the weight.
[[nodiscard]] Box default_solution_box(const MonomialWeight& w, int target, int max_box);

/// Borel image of the packed series (y, termwise Euler operator of y), reusable across points.
struct PreparedPdeSum {
  MonomialWeight weight;
  Box box;
  SeriesVector solution;
  TransformedSeries phi;
};

[[nodiscard]] PreparedPdeSum prepare_pde_sum(const LinearMonomialPDE& prob, const PdeSumOptions& opts = {});
[[nodiscard]] VerifiedSum verify_point(const LinearMonomialPDE& prob, const PreparedPdeSum& prepared, double d,
                                       Point point, const SummationConfig& cfg = {});

/// Sums the formal solution in direction d and checks the equation at each point.
[[nodiscard]] std::vector<VerifiedSum> sum_and_verify(const LinearMonomialPDE& prob, double d,
                                                      const std::vector<Point>& points,
                                                      const PdeSumOptions& opts = {});

struct IntegrabilityReport {
  double matrix_defect = 0.0;
  double forcing_defect = 0.0;
  Exponent matrix_worst{};
  Exponent forcing_worst{};
};

/// Coefficient max-norms of
///   t (x2 d2 A - qA) - t (x1 d1 B - pB) + [A, B]
///   t (x2 d2 g1 - q g1) - t (x1 d1 g2 - p g2) + A g2 - B g1
/// on `box`, t = x1^p x2^q.
[[nodiscard]] IntegrabilityReport pfaffian_integrability_check(const PfaffianSystem& sys, Box box);

struct PairingReport {
  struct Entry {
    Complex mu;
    std::optional<Complex> lambda;
  };
  std::vector<Entry> entries;
  bool pass = false;
};

/// For every eigenvalue mu of B(0,0), looks for lambda of A(0,0) with |q lambda - p mu| < 1e-8.
[[nodiscard]] PairingReport eigenvalue_pairing_check(const PfaffianSystem& sys, double tol = 1e-8);

/// C = (s/p) A + ((1-s)/q) B, gamma = (s/p) gamma1 + ((1-s)/q) gamma2.
[[nodiscard]] LinearMonomialPDE pfaffian_combine(const PfaffianSystem& sys, Rational s);

struct ScanVerdict {
  bool convergent = false;
  std::string reason;
  /// direction -> first s in the grid whose spectrum avoids it (if any)
  std::vector<std::pair<double, std::optional<Rational>>> witnesses;
};

[[nodiscard]] std::vector<Rational> default_s_grid(int points = 101);
[[nodiscard]] std::vector<double> default_direction_grid(int points = 101);

/// Grid certificate of the hypothesis "every direction is avoided by the spectrum of C_s(0,0)
/// for some s".
[[nodiscard]] ScanVerdict convergence_scan(const PfaffianSystem& sys, const std::vector<Rational>& s_grid,
                                           const std::vector<double>& direction_grid,
                                           double angular_tolerance = 0.02);

/// Copy of f with box `b`, keeping the coefficients inside it (polynomial semantics).
[[nodiscard]] BivariateSeries as_polynomial(const BivariateSeries& f, Box b);

}  // namespace monoborel
