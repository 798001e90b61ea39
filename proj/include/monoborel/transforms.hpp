#pragma once

#include <functional>
#include <utility>

#include "monoborel/series.hpp"
#include "monoborel/weight.hpp"

namespace monoborel {

enum class Plane { borel, laplace };

/// A series living in the Borel (xi) or Laplace (x) plane of a fixed weight.
struct TransformedSeries {
  BivariateSeries base;
  MonomialWeight weight;
  Plane plane;
};

/// Formal k-Borel transform w.r.t. x1^p x2^q with weight (s, 1-s):
///   x1^a x2^b  ->  xi1^(a-pk) xi2^(b-qk) / Gamma(a s/(pk) + b (1-s)/(qk)).
/// Requires integral pk, qk and every stored exponent with a >= pk, b >= qk.
[[nodiscard]] TransformedSeries formal_borel(const BivariateSeries& f, const MonomialWeight& w);

/// Formal inverse of formal_borel. The input must be tagged as Borel plane.
[[nodiscard]] BivariateSeries formal_laplace(const TransformedSeries& g);

/// X_alpha = x1^pk x2^qk (s/(pk) x1 d/dx1 + (1-s)/(qk) x2 d/dx2), applied termwise.
/// The output box is the input box shifted by (pk, qk).
[[nodiscard]] BivariateSeries apply_X_alpha(const BivariateSeries& f, const MonomialWeight& w);

/// Convolution *_alpha extended bilinearly from
///   x1^l1 x2^m1 * x1^l2 x2^m2 = B(b1+1, b2+1) x1^(l1+l2+pk) x2^(m1+m2+qk),
/// b_i the alpha-weighted degree of factor i.
[[nodiscard]] TransformedSeries formal_convolution(const TransformedSeries& f, const TransformedSeries& g);

/// Pointwise evaluator of a (possibly vector-valued) function of (xi1, xi2).
using Evaluator = std::function<CVector(Complex, Complex)>;

struct QuadratureSpec {
  double rel_tol = 1e-12;
  int min_level = 3;
  int max_level = 9;
};

struct QuadratureResult {
  CVector value;
  double err_estimate = 0.0;
  int evaluations = 0;
};

/// x1^pk x2^qk int_0^1 F(x1 t^a1, x2 t^a2) G(x1 (1-t)^a1, x2 (1-t)^a2) dt by tanh-sinh
/// with level doubling. Throws AccuracyError when the level cap is reached first.
[[nodiscard]] QuadratureResult numerical_convolution(const Evaluator& F, const Evaluator& G,
                                                     const MonomialWeight& w, std::pair<Complex, Complex> point,
                                                     const QuadratureSpec& spec = {});

}  // namespace monoborel
