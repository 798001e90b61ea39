#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace monoborel {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Exponent pair (n, m) of the monomial x1^n x2^m.
struct Exponent {
  int n = 0;
  int m = 0;
  friend auto operator<=>(const Exponent&, const Exponent&) = default;
};

/// Rectangular truncation box: exponents with n <= n1 and m <= n2 are known.
struct Box {
  int n1 = 0;
  int n2 = 0;
  [[nodiscard]] bool contains(Exponent e) const { return e.n >= 0 && e.m >= 0 && e.n <= n1 && e.m <= n2; }
  friend bool operator==(const Box&, const Box&) = default;
};

[[nodiscard]] Box intersect(Box a, Box b);

/// z^k for k >= 0 by repeated squaring (exact zero handling, no log/exp).
[[nodiscard]] inline Complex int_pow(Complex z, int k) {
  Complex r{1.0, 0.0};
  while (k > 0) {
    if (k & 1) r *= z;
    z *= z;
    k >>= 1;
  }
  return r;
}

/// Max norm of a coefficient vector.
[[nodiscard]] double max_norm(std::span<const Complex> v);

/// Truncated bivariate formal power series with C^l coefficients, stored sparsely.
///
/// Zero coefficient vectors are never stored. Every stored exponent lies in the
/// truncation box and every stored vector has exactly `components()` entries.
class BivariateSeries {
 public:
  using Map = std::map<Exponent, CVector>;

  BivariateSeries() = default;
  BivariateSeries(std::size_t l, Box trunc);

  /// c * x1^n x2^m as a scalar series.
  static BivariateSeries monomial(Exponent e, Complex c, Box trunc);
  static BivariateSeries constant(Complex c, Box trunc) { return monomial({0, 0}, c, trunc); }

  [[nodiscard]] std::size_t components() const { return l_; }
  [[nodiscard]] Box trunc() const { return trunc_; }
  [[nodiscard]] const Map& coeffs() const { return coeffs_; }
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] std::size_t size() const { return coeffs_.size(); }

  /// Coefficient at e (zero vector when not stored).
  [[nodiscard]] CVector coeff(Exponent e) const;
  /// Scalar coefficient of component j at e.
  [[nodiscard]] Complex coeff(Exponent e, std::size_t j) const;

  /// Stores v at e. Throws DimensionError on a length mismatch, DomainError when e is
  /// outside the box or an entry is not finite.
  void set(Exponent e, CVector v);
  void set(Exponent e, Complex c) { set(e, CVector{c}); }
  void add(Exponent e, std::span<const Complex> v);

  /// Single component j as a scalar series.
  [[nodiscard]] BivariateSeries component(std::size_t j) const;
  /// Copy restricted to a smaller box.
  [[nodiscard]] BivariateSeries restricted(Box b) const;
  /// Multiplication by x1^dn x2^dm; box shifted accordingly.
  [[nodiscard]] BivariateSeries shifted(int dn, int dm) const;

  [[nodiscard]] double max_coeff_norm() const;

  BivariateSeries& operator+=(const BivariateSeries& o);
  BivariateSeries& operator-=(const BivariateSeries& o);
  BivariateSeries& operator*=(Complex c);

  friend BivariateSeries operator+(BivariateSeries a, const BivariateSeries& b) { return a += b; }
  friend BivariateSeries operator-(BivariateSeries a, const BivariateSeries& b) { return a -= b; }
  friend BivariateSeries operator*(Complex c, BivariateSeries a) { return a *= c; }

  friend bool operator==(const BivariateSeries&, const BivariateSeries&) = default;

 private:
  std::size_t l_ = 1;
  Box trunc_{};
  Map coeffs_;
};

/// Packs l scalar series into one series with l components (box = intersection).
[[nodiscard]] BivariateSeries pack(std::span<const BivariateSeries> scalars);
/// Splits an l-component series into l scalar series.
[[nodiscard]] std::vector<BivariateSeries> unpack(const BivariateSeries& f);

/// Cauchy product on the intersection of the input boxes. Either factor may be
/// scalar; otherwise component counts must agree (componentwise product).
[[nodiscard]] BivariateSeries series_product(const BivariateSeries& f, const BivariateSeries& g);

/// Evaluates the truncated polynomial by nested Horner (x1 outer, x2 inner).
[[nodiscard]] CVector evaluate_truncated(const BivariateSeries& f, Complex x1, Complex x2);

/// f = sum_N f_N (x1^p x2^q)^N with each f_N supported on {m' < p or j' < q}.
struct TpqDecomposition {
  int p = 1;
  int q = 1;
  Box trunc{};  // box of the source series
  std::vector<BivariateSeries> parts;
};

[[nodiscard]] TpqDecomposition tpq_decompose(const BivariateSeries& f, int p, int q);
[[nodiscard]] BivariateSeries tpq_recompose(const TpqDecomposition& d);

/// Fit of ||a_{n,m}|| <= C A^{n+m} min{n!^{s/p}, m!^{s/q}}.
struct GevreyEstimate {
  double s_hat = 0.0;
  double C_hat = 1.0;
  double A_hat = 1.0;
  double residual = 0.0;  // rms of the log-space fit
  std::size_t samples = 0;
};

/// Least-squares Gevrey order in the monomial x1^p x2^q, fitted on the nonzero
/// coefficients of the diagonal band |n q - m p| <= max(p, q).
[[nodiscard]] GevreyEstimate gevrey_order_estimate(const BivariateSeries& f, int p, int q);

/// a^lambda b^(1-lambda), which lies between min{a,b} and max{a,b} for lambda in [0,1].
[[nodiscard]] double gevrey_interpolant(double a, double b, double lambda);

}  // namespace monoborel
