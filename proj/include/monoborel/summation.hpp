#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "monoborel/rational.hpp"
#include "monoborel/series.hpp"
#include "monoborel/transforms.hpp"
#include "monoborel/weight.hpp"

namespace monoborel {

using Point = std::pair<Complex, Complex>;

/// Tunables of the summation pipeline. Defaults are the documented ones.
struct SummationConfig {
  int lattice_cap = 64;
  double singular_tolerance = 0.05;  // rad, direction vs detected singular direction
  double cluster_tolerance = 1e-2;   // rad, pole-argument clustering
  double svd_tolerance = 1e-12;      // robust Pade rank cut
  double residue_floor = 1e-10;      // spurious-pole filter
  double pole_radius_cap = 60.0;     // poles with |u| beyond this are invisible to e^-u and ignored
  std::vector<int> laguerre_nodes = {32, 64, 128};
  double quad_rel_tol = 1e-10;
  double max_rotation = 1.0;  // |theta| cap for the Laplace ray
  double growth_u_max = 50.0;
  std::optional<std::pair<int, int>> pade_degrees;  // default [floor/ceil] split
  bool pade_error_estimate = true;                  // add [M-1/N-1] sensitivity to err_estimate
  int jobs = 1;
};

/// psi(u) = u^sigma * sum_j c_j u^(j/L): the Borel-plane function restricted to the
/// monomial ray (x1 u^a1, x2 u^a2).
struct RaySeries {
  Point base_point;
  MonomialWeight weight;
  int lattice = 1;          // L
  Rational offset;          // sigma in [0, 1)
  std::vector<CVector> coeffs;
  std::size_t components = 1;

  /// Partial sum at u (principal branches).
  [[nodiscard]] CVector evaluate(Complex u) const;
};

/// Rational approximant P(w)/Q(w), w = v / scale, Q(0) = 1.
struct RationalApprox {
  std::vector<Complex> num;
  std::vector<Complex> den;
  double scale = 1.0;

  [[nodiscard]] Complex operator()(Complex v) const;
  /// Coefficients of P and Q in the unscaled variable v.
  [[nodiscard]] std::vector<Complex> numerator_in_v() const;
  [[nodiscard]] std::vector<Complex> denominator_in_v() const;
};

struct Pole {
  Complex v;              // lattice-variable location
  Complex u;              // v^L
  double residue = 0.0;   // |residue| in the v-plane
  bool principal = true;  // on the sheet reached by rays with |arg u| < pi
  std::size_t component = 0;
};

struct PadeContinuation {
  std::pair<int, int> degrees{0, 0};
  Point base_point;
  MonomialWeight weight;
  int lattice = 1;
  Rational offset;
  std::vector<RationalApprox> components;
  std::vector<Pole> poles;  // spurious poles already removed

  /// Continued psi(u) = u^sigma R(u^(1/L)), principal branches.
  [[nodiscard]] CVector evaluate(Complex u) const;
};

struct GrowthEstimate {
  double C = 0.0;
  double M = 0.0;
  double order1 = 0.0;  // pk/s
  double order2 = 0.0;  // qk/(1-s)
  double curvature = 0.0;
};

struct SectorSpec {
  double d = 0.0;
  double opening = 3.141592653589793;
  double radius = std::numeric_limits<double>::infinity();
};

struct SumEvaluation {
  Point point;
  double direction = 0.0;
  MonomialWeight weight;
  CVector value;
  double err_estimate = 0.0;
  double nearest_singularity_direction = std::numeric_limits<double>::quiet_NaN();
  double theta = 0.0;  // rotation actually used in the u-plane
  std::vector<double> singular_directions;
};

/// Wraps an angle to (-pi, pi].
[[nodiscard]] double wrap_angle(double a);
/// Distance between two directions on the circle.
[[nodiscard]] double angular_distance(double a, double b);

/// Collects phi along the monomial ray through `point`. Only lattice exponents whose
/// complete monomial set lies inside phi's box are kept.
[[nodiscard]] RaySeries reduce_to_ray(const TransformedSeries& phi, Point point, int lattice_cap = 64);

/// Robust [M/N] Pade approximant of the power-series part in v = u^(1/L), one per component.
[[nodiscard]] PadeContinuation pade_continue(const RaySeries& psi, std::pair<int, int> degrees,
                                             const SummationConfig& cfg = {});
/// Default degrees for n available coefficients: N = (n-1)/2, M = n-1-N.
[[nodiscard]] std::pair<int, int> default_pade_degrees(std::size_t n);

/// Monomial-plane directions arg(x1^p x2^q) + arg(u_pole)/k of the clustered poles, sorted.
[[nodiscard]] std::vector<double> detect_singular_directions(const PadeContinuation& cont, const MonomialWeight& w,
                                                             double cluster_tolerance = 1e-2,
                                                             double radius_cap = 60.0);

/// Fit log||psi(r e^{i theta})|| ~ log C + M r on r in [1, U_max]; u-plane angle theta.
[[nodiscard]] GrowthEstimate growth_estimate(const std::function<CVector(Complex)>& psi, double theta,
                                             const MonomialWeight& w, double U_max);
/// Same along the monomial direction `ray_direction` of the continuation's base point.
[[nodiscard]] GrowthEstimate growth_estimate(const PadeContinuation& cont, double ray_direction,
                                             const MonomialWeight& w, double U_max,
                                             const SummationConfig& cfg = {});

/// int_0^{e^{i theta} inf} psi(u) e^{-u} du without the x1^pk x2^qk prefactor.
[[nodiscard]] QuadratureResult laplace_integral(const std::function<CVector(Complex)>& psi_power_part,
                                                Rational offset, int lattice, double theta,
                                                const SummationConfig& cfg = {});
/// x1^pk x2^qk int_0^{e^{i theta} inf} psi(u) e^{-u} du for the continuation.
[[nodiscard]] QuadratureResult laplace_quadrature(const PadeContinuation& cont, double theta,
                                                  const MonomialWeight& w, Point point,
                                                  const SummationConfig& cfg = {});

/// k-(s,1-s) Borel sum of f in direction d at each point.
[[nodiscard]] std::vector<SumEvaluation> borel_sum(const BivariateSeries& f, const MonomialWeight& w, double d,
                                                   const std::vector<Point>& points,
                                                   const std::optional<SectorSpec>& sector = std::nullopt,
                                                   const SummationConfig& cfg = {});

/// Single-point variant sharing a precomputed Borel image phi = B(x1^pk x2^qk f).
[[nodiscard]] SumEvaluation borel_sum_at(const TransformedSeries& phi, double d, Point point,
                                         const SummationConfig& cfg = {});

}  // namespace monoborel
