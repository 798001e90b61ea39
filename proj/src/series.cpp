#include "monoborel/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "monoborel/errors.hpp"

namespace monoborel {

namespace {

bool all_zero(std::span<const Complex> v) {
  return std::all_of(v.begin(), v.end(), [](const Complex& c) { return c == Complex{}; });
}

std::string exponent_str(Exponent e) { return "(" + std::to_string(e.n) + "," + std::to_string(e.m) + ")"; }

}  // namespace

Box intersect(Box a, Box b) { return {std::min(a.n1, b.n1), std::min(a.n2, b.n2)}; }

double max_norm(std::span<const Complex> v) {
  double r = 0.0;
  for (const auto& c : v) r = std::max(r, std::abs(c));
  return r;
}

BivariateSeries::BivariateSeries(std::size_t l, Box trunc) : l_(l), trunc_(trunc) {
  if (l == 0) throw DimensionError("series must have at least one component");
  if (trunc.n1 < 0 || trunc.n2 < 0) throw DomainError("negative truncation box");
}

BivariateSeries BivariateSeries::monomial(Exponent e, Complex c, Box trunc) {
  BivariateSeries f(1, trunc);
  if (trunc.contains(e)) f.set(e, c);
  return f;
}

CVector BivariateSeries::coeff(Exponent e) const {
  auto it = coeffs_.find(e);
  return it == coeffs_.end() ? CVector(l_) : it->second;
}

Complex BivariateSeries::coeff(Exponent e, std::size_t j) const {
  auto it = coeffs_.find(e);
  return it == coeffs_.end() ? Complex{} : it->second.at(j);
}

void BivariateSeries::set(Exponent e, CVector v) {
  if (v.size() != l_)
    throw DimensionError("coefficient of length " + std::to_string(v.size()) + " in a series with " +
                         std::to_string(l_) + " components");
  if (!trunc_.contains(e)) throw DomainError("exponent " + exponent_str(e) + " outside truncation box");
  for (const auto& c : v)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw DomainError("non-finite coefficient at " + exponent_str(e));
  if (all_zero(v))
    coeffs_.erase(e);
  else
    coeffs_[e] = std::move(v);
}

void BivariateSeries::add(Exponent e, std::span<const Complex> v) {
  if (v.size() != l_) throw DimensionError("coefficient length mismatch in add");
  CVector cur = coeff(e);
  for (std::size_t j = 0; j < l_; ++j) cur[j] += v[j];
  set(e, std::move(cur));
}

BivariateSeries BivariateSeries::component(std::size_t j) const {
  if (j >= l_) throw DimensionError("component index out of range");
  BivariateSeries out(1, trunc_);
  for (const auto& [e, v] : coeffs_) out.set(e, v[j]);
  return out;
}

BivariateSeries BivariateSeries::restricted(Box b) const {
  BivariateSeries out(l_, intersect(trunc_, b));
  for (const auto& [e, v] : coeffs_)
    if (out.trunc_.contains(e)) out.coeffs_.emplace(e, v);
  return out;
}

BivariateSeries BivariateSeries::shifted(int dn, int dm) const {
  const Box b{trunc_.n1 + dn, trunc_.n2 + dm};
  if (b.n1 < 0 || b.n2 < 0) throw DomainError("shift leaves an empty box");
  BivariateSeries out(l_, b);
  for (const auto& [e, v] : coeffs_) {
    const Exponent t{e.n + dn, e.m + dm};
    if (t.n < 0 || t.m < 0) throw DomainError("shift produces negative exponent from " + exponent_str(e));
    out.coeffs_.emplace(t, v);
  }
  return out;
}

double BivariateSeries::max_coeff_norm() const {
  double r = 0.0;
  for (const auto& [e, v] : coeffs_) r = std::max(r, max_norm(v));
  return r;
}

BivariateSeries& BivariateSeries::operator+=(const BivariateSeries& o) {
  if (o.l_ != l_) throw DimensionError("component count mismatch in addition");
  trunc_ = intersect(trunc_, o.trunc_);
  std::erase_if(coeffs_, [&](const auto& kv) { return !trunc_.contains(kv.first); });
  for (const auto& [e, v] : o.coeffs_)
    if (trunc_.contains(e)) add(e, v);
  return *this;
}

BivariateSeries& BivariateSeries::operator-=(const BivariateSeries& o) {
  BivariateSeries neg = o;
  neg *= -1.0;
  return *this += neg;
}

BivariateSeries& BivariateSeries::operator*=(Complex c) {
  if (c == Complex{}) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [e, v] : coeffs_)
    for (auto& x : v) x *= c;
  return *this;
}

BivariateSeries pack(std::span<const BivariateSeries> scalars) {
  if (scalars.empty()) throw DimensionError("pack of zero series");
  Box b = scalars.front().trunc();
  for (const auto& s : scalars) {
    if (s.components() != 1) throw DimensionError("pack expects scalar series");
    b = intersect(b, s.trunc());
  }
  const std::size_t l = scalars.size();
  BivariateSeries out(l, b);
  for (std::size_t j = 0; j < l; ++j) {
    for (const auto& [e, v] : scalars[j].coeffs()) {
      if (!b.contains(e)) continue;
      CVector c(l);
      c[j] = v[0];
      out.add(e, c);
    }
  }
  return out;
}

std::vector<BivariateSeries> unpack(const BivariateSeries& f) {
  std::vector<BivariateSeries> out;
  out.reserve(f.components());
  for (std::size_t j = 0; j < f.components(); ++j) out.push_back(f.component(j));
  return out;
}

BivariateSeries series_product(const BivariateSeries& f, const BivariateSeries& g) {
  const std::size_t lf = f.components();
  const std::size_t lg = g.components();
  if (lf != lg && lf != 1 && lg != 1)
    throw DimensionError("incompatible component counts " + std::to_string(lf) + " and " + std::to_string(lg));
  const std::size_t l = std::max(lf, lg);
  const Box b = intersect(f.trunc(), g.trunc());
  BivariateSeries out(l, b);
  // Accumulate per target exponent in lexicographic order of (i,j) so the result
  // does not depend on map iteration details.
  std::map<Exponent, CVector> acc;
  for (const auto& [ef, vf] : f.coeffs()) {
    if (!b.contains(ef)) continue;
    for (const auto& [eg, vg] : g.coeffs()) {
      const Exponent e{ef.n + eg.n, ef.m + eg.m};
      if (!b.contains(e)) continue;
      auto& dst = acc[e];
      if (dst.empty()) dst.assign(l, Complex{});
      for (std::size_t j = 0; j < l; ++j) dst[j] += vf[lf == 1 ? 0 : j] * vg[lg == 1 ? 0 : j];
    }
  }
  for (auto& [e, v] : acc) out.set(e, std::move(v));
  return out;
}

CVector evaluate_truncated(const BivariateSeries& f, Complex x1, Complex x2) {
  const std::size_t l = f.components();
  CVector acc(l);
  if (f.is_zero()) return acc;
  const int top = f.coeffs().rbegin()->first.n;
  auto it = f.coeffs().rbegin();
  for (int n = top; n >= 0; --n) {
    for (auto& a : acc) a *= x1;
    // Row n: Horner in x2 over the stored exponents of that row (descending m).
    CVector row(l);
    int m_prev = -1;
    while (it != f.coeffs().rend() && it->first.n == n) {
      const int m = it->first.m;
      if (m_prev >= 0) {
        const Complex step = int_pow(x2, m_prev - m);
        for (auto& r : row) r *= step;
      }
      for (std::size_t j = 0; j < l; ++j) row[j] += it->second[j];
      m_prev = m;
      ++it;
    }
    if (m_prev > 0) {
      const Complex step = int_pow(x2, m_prev);
      for (auto& r : row) r *= step;
    }
    for (std::size_t j = 0; j < l; ++j) acc[j] += row[j];
  }
  return acc;
}

TpqDecomposition tpq_decompose(const BivariateSeries& f, int p, int q) {
  if (p < 1 || q < 1) throw DomainError("tpq_decompose needs p, q >= 1");
  TpqDecomposition d;
  d.p = p;
  d.q = q;
  d.trunc = f.trunc();
  const int parts = std::min(f.trunc().n1 / p, f.trunc().n2 / q) + 1;
  d.parts.reserve(static_cast<std::size_t>(parts));
  for (int k = 0; k < parts; ++k)
    d.parts.emplace_back(f.components(), Box{f.trunc().n1 - k * p, f.trunc().n2 - k * q});
  for (const auto& [e, v] : f.coeffs()) {
    const int k = std::min(e.n / p, e.m / q);
    d.parts[static_cast<std::size_t>(k)].set({e.n - k * p, e.m - k * q}, v);
  }
  return d;
}

BivariateSeries tpq_recompose(const TpqDecomposition& d) {
  std::size_t l = d.parts.empty() ? 1 : d.parts.front().components();
  BivariateSeries out(l, d.trunc);
  for (std::size_t k = 0; k < d.parts.size(); ++k) {
    const int dn = static_cast<int>(k) * d.p;
    const int dm = static_cast<int>(k) * d.q;
    for (const auto& [e, v] : d.parts[k].coeffs()) {
      const Exponent t{e.n + dn, e.m + dm};
      if (d.trunc.contains(t)) out.add(t, v);
    }
  }
  return out;
}

GevreyEstimate gevrey_order_estimate(const BivariateSeries& f, int p, int q) {
  if (p < 1 || q < 1) throw DomainError("gevrey_order_estimate needs p, q >= 1");
  const int band = std::max(p, q);
  std::vector<std::array<double, 3>> rows;  // (n+m, min log-factorial term, log norm)
  for (const auto& [e, v] : f.coeffs()) {
    if (std::abs(e.n * q - e.m * p) > band) continue;
    const double a = max_norm(v);
    if (!(a > 0.0)) continue;
    const double x = std::min(std::lgamma(e.n + 1.0) / p, std::lgamma(e.m + 1.0) / q);
    rows.push_back({static_cast<double>(e.n + e.m), x, std::log(a)});
  }
  if (rows.size() < 10)
    throw InsufficientDataError("gevrey_order_estimate needs >= 10 nonzero coefficients on the diagonal band, got " +
                                std::to_string(rows.size()));

  auto fit = [&](bool with_s) {
    const Eigen::Index cols = with_s ? 3 : 2;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      X(r, 0) = 1.0;
      X(r, 1) = rows[i][0];
      if (with_s) X(r, 2) = rows[i][1];
      y(r) = rows[i][2];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) throw InsufficientDataError("gevrey fit is rank deficient on the available coefficients");
    Eigen::VectorXd beta = qr.solve(y);
    const double rms = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(rows.size()));
    return std::pair{beta, rms};
  };

  auto [beta, rms] = fit(true);
  GevreyEstimate g;
  g.samples = rows.size();
  if (beta(2) >= 0.0) {
    g.s_hat = beta(2);
  } else {
    auto refit = fit(false);
    beta = refit.first;
    rms = refit.second;
    g.s_hat = 0.0;
  }
  g.C_hat = std::exp(beta(0));
  g.A_hat = std::exp(beta(1));
  g.residual = rms;
  return g;
}

double gevrey_interpolant(double a, double b, double lambda) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("gevrey_interpolant needs a, b > 0");
  if (lambda < 0.0 || lambda > 1.0) throw DomainError("gevrey_interpolant needs lambda in [0,1]");
  return std::pow(a, lambda) * std::pow(b, 1.0 - lambda);
}

}  // namespace monoborel
