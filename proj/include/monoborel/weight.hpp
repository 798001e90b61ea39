#pragma once

#include <ostream>

#include "monoborel/rational.hpp"

namespace monoborel {

/// Monomial x1^p x2^q with Borel/Laplace level k and weight (s, 1-s).
///
/// alpha = (s/(pk), (1-s)/(qk)) is recomputed from (p, q, k, s) on demand and
/// never stored separately.
class MonomialWeight {
 public:
  /// Throws DomainError unless p, q >= 1, k > 0 and 0 < s < 1.
  MonomialWeight(int p, int q, Rational k, Rational s);
  /// p = q = k = 1, s = 1/2.
  MonomialWeight() : MonomialWeight(1, 1, Rational(1), Rational(1, 2)) {}

  [[nodiscard]] int p() const { return p_; }
  [[nodiscard]] int q() const { return q_; }
  [[nodiscard]] Rational k() const { return k_; }
  [[nodiscard]] Rational s() const { return s_; }

  [[nodiscard]] Rational pk() const { return Rational(p_) * k_; }
  [[nodiscard]] Rational qk() const { return Rational(q_) * k_; }
  [[nodiscard]] bool integral_shift() const { return pk().is_integer() && qk().is_integer(); }
  /// pk and qk as integers; throws DomainError when either is fractional.
  [[nodiscard]] int pk_int() const;
  [[nodiscard]] int qk_int() const;

  [[nodiscard]] Rational alpha1() const { return s_ / pk(); }
  [[nodiscard]] Rational alpha2() const { return (Rational(1) - s_) / qk(); }

  /// n*alpha1 + m*alpha2, the exponent of the ray parameter for x1^n x2^m.
  [[nodiscard]] Rational weighted_degree(int n, int m) const { return Rational(n) * alpha1() + Rational(m) * alpha2(); }
  [[nodiscard]] double weighted_degree_d(int n, int m) const { return weighted_degree(n, m).to_double(); }

  friend bool operator==(const MonomialWeight&, const MonomialWeight&) = default;
  friend std::ostream& operator<<(std::ostream& os, const MonomialWeight& w) {
    return os << "(p=" << w.p_ << ", q=" << w.q_ << ", k=" << w.k_ << ", s=" << w.s_ << ")";
  }

 private:
  int p_;
  int q_;
  Rational k_;
  Rational s_;
};

}  // namespace monoborel
