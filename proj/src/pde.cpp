#include "monoborel/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "monoborel/errors.hpp"
#include "monoborel/log.hpp"

namespace monoborel {

namespace {

void check_scalar_matrix(const SeriesMatrix& m, std::size_t l, const char* name) {
  if (m.size() != l) throw DimensionError(std::string(name) + " must be " + std::to_string(l) + "x" + std::to_string(l));
  for (const auto& row : m) {
    if (row.size() != l) throw DimensionError(std::string(name) + " is not square");
    for (const auto& e : row)
      if (e.components() != 1) throw DimensionError(std::string(name) + " entries must be scalar series");
  }
}

void check_scalar_vector(const SeriesVector& v, std::size_t l, const char* name) {
  if (v.size() != l) throw DimensionError(std::string(name) + " must have " + std::to_string(l) + " entries");
  for (const auto& e : v)
    if (e.components() != 1) throw DimensionError(std::string(name) + " entries must be scalar series");
}

Eigen::MatrixXcd constant_term(const SeriesMatrix& m) {
  const auto l = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXcd out(l, l);
  for (Eigen::Index i = 0; i < l; ++i)
    for (Eigen::Index j = 0; j < l; ++j) out(i, j) = m[i][j].coeff({0, 0}, 0);
  return out;
}

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return {};
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue solver failed");
  return es.eigenvalues();
}

// Coefficient matrices of a series matrix keyed by exponent.
std::map<Exponent, Eigen::MatrixXcd> matrix_coefficients(const SeriesMatrix& m) {
  const auto l = static_cast<Eigen::Index>(m.size());
  std::map<Exponent, Eigen::MatrixXcd> out;
  for (Eigen::Index i = 0; i < l; ++i)
    for (Eigen::Index j = 0; j < l; ++j)
      for (const auto& [e, v] : m[i][j].coeffs()) {
        auto [it, inserted] = out.try_emplace(e, Eigen::MatrixXcd::Zero(l, l));
        it->second(i, j) = v[0];
      }
  return out;
}

std::map<Exponent, Eigen::VectorXcd> vector_coefficients(const SeriesVector& g) {
  const auto l = static_cast<Eigen::Index>(g.size());
  std::map<Exponent, Eigen::VectorXcd> out;
  for (Eigen::Index i = 0; i < l; ++i)
    for (const auto& [e, v] : g[i].coeffs()) {
      auto [it, inserted] = out.try_emplace(e, Eigen::VectorXcd::Zero(l));
      it->second(i) = v[0];
    }
  return out;
}

SeriesMatrix scaled_sum(const SeriesMatrix& a, Complex ca, const SeriesMatrix& b, Complex cb) {
  SeriesMatrix out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      const Box box{std::max(a[i][j].trunc().n1, b[i][j].trunc().n1), std::max(a[i][j].trunc().n2, b[i][j].trunc().n2)};
      out[i][j] = ca * as_polynomial(a[i][j], box) + cb * as_polynomial(b[i][j], box);
    }
  return out;
}

SeriesVector scaled_sum(const SeriesVector& a, Complex ca, const SeriesVector& b, Complex cb) {
  SeriesVector out = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Box box{std::max(a[i].trunc().n1, b[i].trunc().n1), std::max(a[i].trunc().n2, b[i].trunc().n2)};
    out[i] = ca * as_polynomial(a[i], box) + cb * as_polynomial(b[i], box);
  }
  return out;
}

// t (x_j d_j f - c f), truncated to box
BivariateSeries shifted_euler(const BivariateSeries& f, int p, int q, bool second, int c, Box box) {
  BivariateSeries out(1, box);
  for (const auto& [e, v] : f.coeffs()) {
    const Exponent to{e.n + p, e.m + q};
    if (!box.contains(to)) continue;
    const int factor = (second ? e.m : e.n) - c;
    if (factor == 0) continue;
    out.set(to, static_cast<double>(factor) * v[0]);
  }
  return out;
}

BivariateSeries product_on(const BivariateSeries& a, const BivariateSeries& b, Box box) {
  return series_product(as_polynomial(a, box), as_polynomial(b, box));
}

double max_with_location(const BivariateSeries& f, Exponent& where, double current) {
  for (const auto& [e, v] : f.coeffs()) {
    const double n = max_norm(v);
    if (n > current) {
      current = n;
      where = e;
    }
  }
  return current;
}

}  // namespace

BivariateSeries as_polynomial(const BivariateSeries& f, Box b) {
  BivariateSeries out(f.components(), b);
  for (const auto& [e, v] : f.coeffs())
    if (b.contains(e)) out.set(e, v);
  return out;
}

void LinearMonomialPDE::validate() const {
  if (p < 1 || q < 1) throw DomainError("p and q must be positive");
  if (s < Rational(0) || s > Rational(1)) throw DomainError("equation weight s must lie in [0, 1]");
  if (gamma.empty()) throw DimensionError("empty system");
  check_scalar_matrix(C, gamma.size(), "C");
  check_scalar_vector(gamma, gamma.size(), "gamma");
}

Eigen::MatrixXcd LinearMonomialPDE::C00() const { return constant_term(C); }

Eigen::VectorXcd LinearMonomialPDE::eigenvalues() const { return eigenvalues_of(C00()); }

void PfaffianSystem::validate() const {
  if (p < 1 || q < 1) throw DomainError("p and q must be positive");
  const std::size_t l = A.size();
  if (l == 0) throw DimensionError("empty system");
  check_scalar_matrix(A, l, "A");
  check_scalar_matrix(B, l, "B");
  check_scalar_vector(gamma1, l, "gamma1");
  check_scalar_vector(gamma2, l, "gamma2");
}

SeriesVector formal_solution(const LinearMonomialPDE& prob, Box box, Traversal order) {
  prob.validate();
  if (box.n1 < 0 || box.n2 < 0) throw DomainError("negative truncation box");
  const auto l = static_cast<Eigen::Index>(prob.dim());
  const Eigen::MatrixXcd c00 = prob.C00();
  const Eigen::FullPivLU<Eigen::MatrixXcd> lu(c00);
  const Eigen::VectorXcd ev = eigenvalues_of(c00);
  if (!lu.isInvertible() || ev.cwiseAbs().minCoeff() <= 1e-13 * std::max(1.0, c00.cwiseAbs().maxCoeff()))
    throw PreconditionError("C(0,0) is singular; the formal solution is not determined");

  auto cmap = matrix_coefficients(prob.C);
  cmap.erase(Exponent{0, 0});
  const auto gmap = vector_coefficients(prob.gamma);

  const auto stride = static_cast<std::size_t>(box.n2 + 1);
  std::vector<Eigen::VectorXcd> y(static_cast<std::size_t>(box.n1 + 1) * stride, Eigen::VectorXcd::Zero(l));
  auto at = [&](int n, int m) -> Eigen::VectorXcd& { return y[static_cast<std::size_t>(n) * stride + static_cast<std::size_t>(m)]; };

  const Rational a1 = prob.s / Rational(prob.p);
  const Rational a2 = (Rational(1) - prob.s) / Rational(prob.q);
  auto solve_at = [&](int n, int m) {
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(l);
    if (n >= prob.p && m >= prob.q) {
      const double factor = (a1 * Rational(n - prob.p) + a2 * Rational(m - prob.q)).to_double();
      if (factor != 0.0) rhs += factor * at(n - prob.p, m - prob.q);
    }
    for (const auto& [e, cm] : cmap)
      if (e.n <= n && e.m <= m) rhs -= cm * at(n - e.n, m - e.m);
    if (auto it = gmap.find({n, m}); it != gmap.end()) rhs -= it->second;
    at(n, m) = lu.solve(rhs);
  };

  switch (order) {
    case Traversal::row_major:
      for (int n = 0; n <= box.n1; ++n)
        for (int m = 0; m <= box.n2; ++m) solve_at(n, m);
      break;
    case Traversal::column_major:
      for (int m = 0; m <= box.n2; ++m)
        for (int n = 0; n <= box.n1; ++n) solve_at(n, m);
      break;
    case Traversal::antidiagonal:
      for (int d = 0; d <= box.n1 + box.n2; ++d)
        for (int n = std::min(d, box.n1); n >= 0 && d - n <= box.n2; --n) solve_at(n, d - n);
      break;
  }

  SeriesVector out(static_cast<std::size_t>(l), BivariateSeries(1, box));
  for (int n = 0; n <= box.n1; ++n)
    for (int m = 0; m <= box.n2; ++m) {
      const Eigen::VectorXcd& v = at(n, m);
      for (Eigen::Index i = 0; i < l; ++i)
        if (v(i) != Complex{}) out[static_cast<std::size_t>(i)].set({n, m}, v(i));
    }
  return out;
}

SeriesVector apply_equation_operator(const LinearMonomialPDE& prob, const SeriesVector& y) {
  const Rational a1 = prob.s / Rational(prob.p);
  const Rational a2 = (Rational(1) - prob.s) / Rational(prob.q);
  SeriesVector out;
  for (const auto& yi : y) {
    BivariateSeries o(1, yi.trunc());
    for (const auto& [e, v] : yi.coeffs()) {
      const Exponent to{e.n + prob.p, e.m + prob.q};
      if (!o.trunc().contains(to)) continue;
      const double f = (a1 * Rational(e.n) + a2 * Rational(e.m)).to_double();
      if (f != 0.0) o.set(to, f * v[0]);
    }
    out.push_back(std::move(o));
  }
  return out;
}

SeriesVector apply_equation_rhs(const LinearMonomialPDE& prob, const SeriesVector& y) {
  const std::size_t l = prob.dim();
  if (y.size() != l) throw DimensionError("solution length does not match the system");
  SeriesVector out;
  for (std::size_t i = 0; i < l; ++i) {
    const Box box = y[i].trunc();
    BivariateSeries acc = as_polynomial(prob.gamma[i], box);
    for (std::size_t j = 0; j < l; ++j) acc += product_on(prob.C[i][j], y[j], box);
    out.push_back(std::move(acc));
  }
  return out;
}

std::vector<double> singular_directions(const LinearMonomialPDE& prob) {
  prob.validate();
  const Eigen::VectorXcd ev = prob.eigenvalues();
  if (ev.size() > 0 && ev.cwiseAbs().minCoeff() == 0.0) throw PreconditionError("C(0,0) is singular");
  std::vector<double> dirs;
  for (Eigen::Index i = 0; i < ev.size(); ++i) dirs.push_back(wrap_angle(std::arg(ev(i))));
  std::sort(dirs.begin(), dirs.end());
  dirs.erase(std::unique(dirs.begin(), dirs.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             dirs.end());
  return dirs;
}

MonomialWeight summation_weight(const LinearMonomialPDE& prob, const PdeSumOptions& opts) {
  Rational s = prob.s;
  if (opts.summation_weight) s = *opts.summation_weight;
  else if (s == Rational(0) || s == Rational(1)) s = Rational(1, 2);
  return MonomialWeight(prob.p, prob.q, Rational(1), s);
}

Box default_solution_box(const MonomialWeight& w, int target, int max_box) {
  const double a1 = w.alpha1().to_double();
  const double a2 = w.alpha2().to_double();
  // shifting by (pk, qk) costs one level; keep one spare
  const int n1 = static_cast<int>(std::ceil((target + 1) / a1)) + w.pk_int();
  const int n2 = static_cast<int>(std::ceil((target + 1) / a2)) + w.qk_int();
  return {std::min(n1, max_box), std::min(n2, max_box)};
}

PreparedPdeSum prepare_pde_sum(const LinearMonomialPDE& prob, const PdeSumOptions& opts) {
  prob.validate();
  const MonomialWeight w = summation_weight(prob, opts);
  const Box box = opts.box.value_or(default_solution_box(w, opts.target_coefficients, opts.max_box));
  SeriesVector y = formal_solution(prob, box);

  const Rational a1 = prob.s / Rational(prob.p);
  const Rational a2 = (Rational(1) - prob.s) / Rational(prob.q);
  std::vector<BivariateSeries> parts = y;
  for (const auto& yi : y) {
    BivariateSeries dy(1, box);
    for (const auto& [e, v] : yi.coeffs()) {
      const double f = (a1 * Rational(e.n) + a2 * Rational(e.m)).to_double();
      if (f != 0.0) dy.set(e, f * v[0]);
    }
    parts.push_back(std::move(dy));
  }
  logger().info("prepare_pde_sum: box ({}, {}), weight s = {}/{}", box.n1, box.n2, w.s().num(), w.s().den());
  TransformedSeries phi = formal_borel(pack(parts).shifted(w.pk_int(), w.qk_int()), w);
  return {w, box, std::move(y), std::move(phi)};
}

VerifiedSum verify_point(const LinearMonomialPDE& prob, const PreparedPdeSum& prepared, double d, Point point,
                         const SummationConfig& cfg) {
  const std::size_t l = prob.dim();
  VerifiedSum vs{borel_sum_at(prepared.phi, d, point, cfg), 0.0};
  const auto [x1, x2] = point;
  const Complex t = int_pow(x1, prob.p) * int_pow(x2, prob.q);
  const CVector& v = vs.eval.value;
  for (std::size_t i = 0; i < l; ++i) {
    Complex r = t * v[l + i] - evaluate_truncated(prob.gamma[i], x1, x2)[0];
    for (std::size_t j = 0; j < l; ++j) r -= evaluate_truncated(prob.C[i][j], x1, x2)[0] * v[j];
    vs.residual = std::max(vs.residual, std::abs(r));
  }
  vs.eval.value.resize(l);
  return vs;
}

std::vector<VerifiedSum> sum_and_verify(const LinearMonomialPDE& prob, double d, const std::vector<Point>& points,
                                        const PdeSumOptions& opts) {
  const PreparedPdeSum prepared = prepare_pde_sum(prob, opts);
  std::vector<VerifiedSum> out;
  for (const auto& x : points) out.push_back(verify_point(prob, prepared, d, x, opts.summation));
  return out;
}

IntegrabilityReport pfaffian_integrability_check(const PfaffianSystem& sys, Box box) {
  sys.validate();
  const std::size_t l = sys.dim();
  IntegrabilityReport rep;
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j) {
      BivariateSeries e = shifted_euler(sys.A[i][j], sys.p, sys.q, true, sys.q, box);
      e -= shifted_euler(sys.B[i][j], sys.p, sys.q, false, sys.p, box);
      for (std::size_t k = 0; k < l; ++k) {
        e += product_on(sys.A[i][k], sys.B[k][j], box);
        e -= product_on(sys.B[i][k], sys.A[k][j], box);
      }
      rep.matrix_defect = max_with_location(e, rep.matrix_worst, rep.matrix_defect);
    }
  for (std::size_t i = 0; i < l; ++i) {
    BivariateSeries e = shifted_euler(sys.gamma1[i], sys.p, sys.q, true, sys.q, box);
    e -= shifted_euler(sys.gamma2[i], sys.p, sys.q, false, sys.p, box);
    for (std::size_t k = 0; k < l; ++k) {
      e += product_on(sys.A[i][k], sys.gamma2[k], box);
      e -= product_on(sys.B[i][k], sys.gamma1[k], box);
    }
    rep.forcing_defect = max_with_location(e, rep.forcing_worst, rep.forcing_defect);
  }
  return rep;
}

PairingReport eigenvalue_pairing_check(const PfaffianSystem& sys, double tol) {
  sys.validate();
  const Eigen::VectorXcd la = eigenvalues_of(constant_term(sys.A));
  const Eigen::VectorXcd mb = eigenvalues_of(constant_term(sys.B));
  PairingReport rep;
  rep.pass = true;
  for (Eigen::Index i = 0; i < mb.size(); ++i) {
    PairingReport::Entry e{mb(i), std::nullopt};
    double best = tol;
    for (Eigen::Index j = 0; j < la.size(); ++j) {
      const double gap = std::abs(static_cast<double>(sys.q) * la(j) - static_cast<double>(sys.p) * mb(i));
      if (gap < best) {
        best = gap;
        e.lambda = la(j);
      }
    }
    if (!e.lambda) rep.pass = false;
    rep.entries.push_back(e);
  }
  return rep;
}

LinearMonomialPDE pfaffian_combine(const PfaffianSystem& sys, Rational s) {
  sys.validate();
  if (s < Rational(0) || s > Rational(1)) throw DomainError("combination weight must lie in [0, 1]");
  const double ca = (s / Rational(sys.p)).to_double();
  const double cb = ((Rational(1) - s) / Rational(sys.q)).to_double();
  LinearMonomialPDE out;
  out.p = sys.p;
  out.q = sys.q;
  out.s = s;
  out.C = scaled_sum(sys.A, ca, sys.B, cb);
  out.gamma = scaled_sum(sys.gamma1, ca, sys.gamma2, cb);
  return out;
}

std::vector<Rational> default_s_grid(int points) {
  std::vector<Rational> g;
  for (int i = 0; i < points; ++i) g.emplace_back(i, points - 1);
  return g;
}

std::vector<double> default_direction_grid(int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(wrap_angle(-std::numbers::pi + 2 * std::numbers::pi * (i + 1) / points));
  std::sort(g.begin(), g.end());
  return g;
}

ScanVerdict convergence_scan(const PfaffianSystem& sys, const std::vector<Rational>& s_grid,
                             const std::vector<double>& direction_grid, double angular_tolerance) {
  ScanVerdict v;
  try {
    sys.validate();
    const Eigen::MatrixXcd a = constant_term(sys.A);
    const Eigen::MatrixXcd b = constant_term(sys.B);
    std::vector<std::vector<double>> args;
    for (const Rational& s : s_grid) {
      const Eigen::MatrixXcd cs =
          (s / Rational(sys.p)).to_double() * a + ((Rational(1) - s) / Rational(sys.q)).to_double() * b;
      const Eigen::VectorXcd ev = eigenvalues_of(cs);
      std::vector<double> row;
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) <= 1e-12) {
          std::ostringstream os;
          os << "zero eigenvalue of C_s(0,0) at s = " << s;
          v.reason = os.str();
          return v;
        }
        row.push_back(std::arg(ev(i)));
      }
      args.push_back(std::move(row));
    }
    v.convergent = true;
    for (double d : direction_grid) {
      std::optional<Rational> witness;
      for (std::size_t k = 0; k < s_grid.size() && !witness; ++k) {
        double closest = std::numeric_limits<double>::infinity();
        for (double a_ : args[k]) closest = std::min(closest, angular_distance(a_, d));
        if (closest > angular_tolerance) witness = s_grid[k];
      }
      if (!witness) v.convergent = false;
      v.witnesses.emplace_back(d, witness);
    }
    v.reason = v.convergent ? "every direction has a witness weight" : "some direction is never avoided";
  } catch (const Error& e) {
    v.convergent = false;
    v.reason = e.what();
  }
  return v;
}

}  // namespace monoborel
