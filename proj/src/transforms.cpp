#include "monoborel/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "monoborel/errors.hpp"
#include "monoborel/quadrature.hpp"
#include "monoborel/special.hpp"

namespace monoborel {

TransformedSeries formal_borel(const BivariateSeries& f, const MonomialWeight& w) {
  const int pk = w.pk_int();
  const int qk = w.qk_int();
  const Box b{f.trunc().n1 - pk, f.trunc().n2 - qk};
  if (b.n1 < 0 || b.n2 < 0) throw DomainError("truncation box too small for formal_borel");
  BivariateSeries out(f.components(), b);
  for (const auto& [e, v] : f.coeffs()) {
    if (e.n < pk || e.m < qk)
      throw DomainError("formal_borel: exponent (" + std::to_string(e.n) + ", " + std::to_string(e.m) +
                        ") is not divisible by x1^" + std::to_string(pk) + " x2^" + std::to_string(qk));
    const double g = inv_gamma(w.weighted_degree_d(e.n, e.m));
    CVector c(v);
    for (auto& x : c) x *= g;
    out.set({e.n - pk, e.m - qk}, std::move(c));
  }
  return {std::move(out), w, Plane::borel};
}

BivariateSeries formal_laplace(const TransformedSeries& g) {
  if (g.plane != Plane::borel) throw DomainError("formal_laplace expects a Borel-plane series");
  const MonomialWeight& w = g.weight;
  const int pk = w.pk_int();
  const int qk = w.qk_int();
  BivariateSeries out(g.base.components(), {g.base.trunc().n1 + pk, g.base.trunc().n2 + qk});
  for (const auto& [e, v] : g.base.coeffs()) {
    const double gm = gamma_fn(w.weighted_degree_d(e.n + pk, e.m + qk));
    CVector c(v);
    for (auto& x : c) x *= gm;
    out.set({e.n + pk, e.m + qk}, std::move(c));
  }
  return out;
}

BivariateSeries apply_X_alpha(const BivariateSeries& f, const MonomialWeight& w) {
  const int pk = w.pk_int();
  const int qk = w.qk_int();
  BivariateSeries out(f.components(), {f.trunc().n1 + pk, f.trunc().n2 + qk});
  for (const auto& [e, v] : f.coeffs()) {
    const double factor = w.weighted_degree_d(e.n, e.m);
    if (factor == 0.0) continue;
    CVector c(v);
    for (auto& x : c) x *= factor;
    out.set({e.n + pk, e.m + qk}, std::move(c));
  }
  return out;
}

TransformedSeries formal_convolution(const TransformedSeries& f, const TransformedSeries& g) {
  if (!(f.weight == g.weight)) throw DomainError("formal_convolution: weight mismatch");
  if (f.plane != g.plane) throw DomainError("formal_convolution: plane mismatch");
  const MonomialWeight& w = f.weight;
  const int pk = w.pk_int();
  const int qk = w.qk_int();
  const std::size_t lf = f.base.components();
  const std::size_t lg = g.base.components();
  if (lf != lg && lf != 1 && lg != 1) throw DimensionError("formal_convolution: incompatible component counts");
  const std::size_t l = std::max(lf, lg);
  const Box common = intersect(f.base.trunc(), g.base.trunc());
  const Box b{common.n1 + pk, common.n2 + qk};
  std::map<Exponent, CVector> acc;
  for (const auto& [ef, vf] : f.base.coeffs()) {
    if (!common.contains(ef)) continue;
    const double bf = w.weighted_degree_d(ef.n, ef.m);
    for (const auto& [eg, vg] : g.base.coeffs()) {
      const Exponent e{ef.n + eg.n + pk, ef.m + eg.m + qk};
      if (!b.contains(e)) continue;
      const double factor = beta_fn(bf + 1.0, w.weighted_degree_d(eg.n, eg.m) + 1.0);
      auto& dst = acc[e];
      if (dst.empty()) dst.assign(l, Complex{});
      for (std::size_t j = 0; j < l; ++j) dst[j] += factor * vf[lf == 1 ? 0 : j] * vg[lg == 1 ? 0 : j];
    }
  }
  BivariateSeries out(l, b);
  for (auto& [e, v] : acc) out.set(e, std::move(v));
  return {std::move(out), w, f.plane};
}

QuadratureResult numerical_convolution(const Evaluator& F, const Evaluator& G, const MonomialWeight& w,
                                       std::pair<Complex, Complex> point, const QuadratureSpec& spec) {
  const auto [x1, x2] = point;
  const double a1 = w.alpha1().to_double();
  const double a2 = w.alpha2().to_double();
  const Complex prefactor = int_pow(x1, w.pk_int()) * int_pow(x2, w.qk_int());

  QuadratureResult res;
  CVector prev;
  for (int level = spec.min_level; level <= spec.max_level; ++level) {
    const auto& rule = quad::tanh_sinh_unit(level);
    CVector sum;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = rule.nodes[i];
      const double tc = rule.complements[i];
      const CVector fv = F(x1 * std::pow(t, a1), x2 * std::pow(t, a2));
      const CVector gv = G(x1 * std::pow(tc, a1), x2 * std::pow(tc, a2));
      res.evaluations += 2;
      if (fv.size() != gv.size() && fv.size() != 1 && gv.size() != 1)
        throw DimensionError("numerical_convolution: evaluator component counts differ");
      const std::size_t l = std::max(fv.size(), gv.size());
      if (sum.empty()) sum.assign(l, Complex{});
      for (std::size_t j = 0; j < l; ++j)
        sum[j] += rule.weights[i] * fv[fv.size() == 1 ? 0 : j] * gv[gv.size() == 1 ? 0 : j];
    }
    for (auto& s : sum) s *= prefactor;
    if (!prev.empty()) {
      double diff = 0.0;
      double scale = 0.0;
      for (std::size_t j = 0; j < sum.size(); ++j) {
        diff = std::max(diff, std::abs(sum[j] - prev[j]));
        scale = std::max(scale, std::abs(sum[j]));
      }
      res.value = sum;
      res.err_estimate = diff;
      if (diff <= spec.rel_tol * std::max(scale, 1e-300) || diff == 0.0) return res;
    }
    prev = std::move(sum);
  }
  throw AccuracyError("numerical_convolution did not reach the requested tolerance", res.err_estimate);
}

}  // namespace monoborel
