#include "monoborel/weight.hpp"

#include "monoborel/errors.hpp"

namespace monoborel {

MonomialWeight::MonomialWeight(int p, int q, Rational k, Rational s) : p_(p), q_(q), k_(k), s_(s) {
  if (p < 1 || q < 1) throw DomainError("monomial exponents p, q must be >= 1");
  if (!(k > Rational(0))) throw DomainError("level k must be positive");
  if (!(s > Rational(0)) || !(s < Rational(1))) throw DomainError("weight s must satisfy 0 < s < 1");
}

int MonomialWeight::pk_int() const {
  if (!pk().is_integer()) throw DomainError("p*k is not an integer");
  return static_cast<int>(pk().num());
}

int MonomialWeight::qk_int() const {
  if (!qk().is_integer()) throw DomainError("q*k is not an integer");
  return static_cast<int>(qk().num());
}

}  // namespace monoborel
