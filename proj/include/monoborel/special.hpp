#pragma once

namespace monoborel {

/// 1/Gamma(x) for x > 0; direct evaluation below the overflow threshold, log space above.
[[nodiscard]] double inv_gamma(double x);

/// Gamma(x) for x > 0, throwing NumericError when the result overflows.
[[nodiscard]] double gamma_fn(double x);

/// Beta(a, b) = Gamma(a)Gamma(b)/Gamma(a+b) for a, b > 0, assembled in log space
/// when the Gammas would overflow.
[[nodiscard]] double beta_fn(double a, double b);
[[nodiscard]] double log_beta(double a, double b);

/// lgamma(1+a+b) - lgamma(1+a) - lgamma(1+b); nonnegative for a, b >= 0.
[[nodiscard]] double gamma_product_gap(double a, double b);

}  // namespace monoborel
