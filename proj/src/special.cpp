#include "monoborel/special.hpp"

#include <cmath>
#include <string>

#include "monoborel/errors.hpp"

namespace monoborel {

namespace {
constexpr double kGammaOverflow = 170.0;
}

double inv_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("inv_gamma needs a positive argument, got " + std::to_string(x));
  if (x < kGammaOverflow) return 1.0 / std::tgamma(x);
  return std::exp(-std::lgamma(x));
}

double gamma_fn(double x) {
  if (!(x > 0.0)) throw DomainError("gamma_fn needs a positive argument, got " + std::to_string(x));
  if (x < kGammaOverflow) return std::tgamma(x);
  const double lg = std::lgamma(x);
  if (lg > 709.0) throw NumericError("Gamma(" + std::to_string(x) + ") overflows");
  return std::exp(lg);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta needs positive arguments");
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double beta_fn(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta needs positive arguments");
  if (a + b < kGammaOverflow) return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
  return std::exp(log_beta(a, b));
}

double gamma_product_gap(double a, double b) {
  return std::lgamma(1.0 + a + b) - std::lgamma(1.0 + a) - std::lgamma(1.0 + b);
}

}  // namespace monoborel
