#include "monoborel/summation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <functional>
#include <string>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "monoborel/errors.hpp"
#include "monoborel/log.hpp"
#include "monoborel/quadrature.hpp"

namespace monoborel {

namespace {

constexpr double pi = std::numbers::pi;

double l2(const std::vector<Complex>& c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::min(n, c.size()); ++i) s += std::norm(c[i]);
  return std::sqrt(s);
}

Complex horner(const std::vector<Complex>& c, Complex w) {
  Complex r{};
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * w + *it;
  return r;
}

// sum c_i w^(i-deg) for |w| > 1, i.e. the reversed polynomial at 1/w
Complex horner_reversed(const std::vector<Complex>& c, Complex winv) {
  Complex r{};
  for (const auto& x : c) r = r * winv + x;
  return r;
}

std::int64_t lcm64(std::int64_t a, std::int64_t b) { return a / std::gcd(a, b) * b; }

// Robust Pade in the spirit of Gonnet, Guettel and Trefethen: the rank of the
// Toeplitz block decides the effective denominator degree.
void robust_pade(std::vector<Complex> c, int M, int N, double tol, std::vector<Complex>& a, std::vector<Complex>& b) {
  c.resize(static_cast<std::size_t>(M + N + 1), Complex{});
  const double ts = tol * l2(c, c.size());
  if (ts == 0.0 || l2(c, static_cast<std::size_t>(M + 1)) <= ts) {
    a = {Complex{}};
    b = {Complex{1.0, 0.0}};
    return;
  }
  Eigen::VectorXcd bv;
  for (;;) {
    if (N == 0) {
      bv = Eigen::VectorXcd::Ones(1);
      break;
    }
    Eigen::MatrixXcd C(N, N + 1);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j <= N; ++j) {
        const int idx = M + 1 + i - j;
        C(i, j) = idx >= 0 ? c[static_cast<std::size_t>(idx)] : Complex{};
      }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int rho = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > ts) ++rho;
    if (rho == N) {
      bv = svd.matrixV().col(N);
      break;
    }
    M = std::max(M - (N - rho), 0);
    N = rho;
  }
  a.assign(static_cast<std::size_t>(M + 1), Complex{});
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= std::min(i, N); ++j) a[static_cast<std::size_t>(i)] += c[static_cast<std::size_t>(i - j)] * bv(j);
  b.assign(bv.data(), bv.data() + bv.size());

  // common factors v^lam
  std::size_t lam = 0;
  while (lam + 1 < b.size() && std::abs(b[lam]) <= tol) ++lam;
  b.erase(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(lam));
  a.erase(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(std::min(lam, a.size() - 1)));
  while (a.size() > 1 && std::abs(a.back()) <= ts) a.pop_back();
  while (b.size() > 1 && std::abs(b.back()) <= tol) b.pop_back();
  const Complex b0 = b.front();
  if (b0 == Complex{}) throw DegeneracyError("Pade denominator vanishes at the origin; try lower degrees");
  for (auto& x : a) x /= b0;
  for (auto& x : b) x /= b0;
}

double radius_estimate(const std::vector<Complex>& c) {
  // least-squares slope of log|c_j| over the nonzero coefficients
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double m = std::abs(c[j]);
    if (m == 0.0) continue;
    const double x = static_cast<double>(j);
    const double y = std::log(m);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 1.0;
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) return 1.0;
  const double slope = (n * sxy - sx * sy) / den;
  return std::clamp(std::exp(-slope), 1e-6, 1e6);
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& c) {
  const auto d = static_cast<Eigen::Index>(c.size()) - 1;
  if (d < 1) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) comp(i, d - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(d)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  if (es.info() != Eigen::Success) throw NumericError("companion eigenvalue solver failed");
  std::vector<Complex> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
  return r;
}

Complex derivative_at(const std::vector<Complex>& c, Complex w) {
  Complex r{};
  for (std::size_t i = c.size(); i-- > 1;) r = r * w + static_cast<double>(i) * c[i];
  return r;
}

Complex principal_pow(Complex u, double e) {
  if (u == Complex{}) return e == 0.0 ? Complex{1.0, 0.0} : Complex{};
  return std::polar(std::pow(std::abs(u), e), std::arg(u) * e);
}

Complex monomial_value(const MonomialWeight& w, Point x) {
  return int_pow(x.first, w.p()) * int_pow(x.second, w.q());
}

double vec_diff(const CVector& a, const CVector& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

std::vector<double> cluster_directions(std::vector<double> dirs, double tol) {
  if (dirs.empty()) return {};
  std::sort(dirs.begin(), dirs.end());
  // rotate so that the largest gap sits at the wrap point
  std::size_t start = 0;
  double best_gap = dirs.front() + 2 * pi - dirs.back();
  for (std::size_t i = 1; i < dirs.size(); ++i) {
    const double g = dirs[i] - dirs[i - 1];
    if (g > best_gap) {
      best_gap = g;
      start = i;
    }
  }
  std::vector<double> out;
  std::vector<double> members;
  auto flush = [&] {
    double sx = 0, sy = 0;
    for (double a : members) {
      sx += std::cos(a);
      sy += std::sin(a);
    }
    out.push_back(wrap_angle(std::atan2(sy, sx)));
    members.clear();
  };
  double prev = 0.0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const std::size_t i = (start + k) % dirs.size();
    const double a = dirs[i] + (i < start ? 2 * pi : 0.0);
    if (!members.empty() && a - prev > tol) flush();
    members.push_back(a);
    prev = a;
  }
  flush();
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [&](double x, double y) { return angular_distance(x, y) <= tol; }),
            out.end());
  if (out.size() > 1 && angular_distance(out.front(), out.back()) <= tol) out.erase(out.begin());
  return out;
}

/// int_0^T g(tau) dtau with tau = x^N, by globally adaptive 15-point Gauss-Legendre panels
/// (each panel compared against its two halves).
std::optional<QuadratureResult> adaptive_ray_integral(const std::function<CVector(double)>& g, int N, double T,
                                                      double rel_tol) {
  const auto& rule = quad::gauss_legendre_unit(15);
  int evaluations = 0;
  auto gauss = [&](double a, double b) {
    CVector sum;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = a + (b - a) * rule.nodes[i];
      const double jac = N * std::pow(x, N - 1) * (b - a) * rule.weights[i];
      const CVector v = g(std::pow(x, N));
      ++evaluations;
      if (sum.empty()) sum.assign(v.size(), Complex{});
      for (std::size_t j = 0; j < v.size(); ++j) sum[j] += jac * v[j];
    }
    return sum;
  };
  struct Panel {
    double a, b, err;
    CVector value;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  auto make = [&](double a, double b) {
    const double m = 0.5 * (a + b);
    CVector fine = gauss(a, m);
    const CVector right = gauss(m, b);
    for (std::size_t j = 0; j < fine.size(); ++j) fine[j] += right[j];
    const double err = vec_diff(fine, gauss(a, b));
    return Panel{a, b, err, std::move(fine)};
  };
  auto totals = [](const std::vector<Panel>& ps) {
    CVector sum(ps.front().value.size());
    double err = 0.0;
    for (const auto& p : ps) {
      for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += p.value[j];
      err += p.err;
    }
    return std::make_pair(sum, err);
  };

  const double X = std::pow(T, 1.0 / N);
  std::vector<Panel> heap;
  for (int i = 0; i < 32; ++i) heap.push_back(make(X * i / 32, X * (i + 1) / 32));
  std::make_heap(heap.begin(), heap.end());
  for (int it = 0; it < 4000; ++it) {
    auto [sum, err] = totals(heap);
    if (err <= rel_tol * std::max(max_norm(sum), 1e-300)) return QuadratureResult{sum, err, evaluations};
    std::pop_heap(heap.begin(), heap.end());
    const Panel worst = heap.back();
    heap.pop_back();
    const double m = 0.5 * (worst.a + worst.b);
    heap.push_back(make(worst.a, m));
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(make(m, worst.b));
    std::push_heap(heap.begin(), heap.end());
  }
  return std::nullopt;
}

/// u-plane arguments L arg(v) of the principal poles.
std::vector<double> pole_angles(const PadeContinuation& cont, double radius_cap) {
  std::vector<double> out;
  for (const auto& p : cont.poles)
    if (p.principal && std::abs(p.u) <= radius_cap) out.push_back(cont.lattice * std::arg(p.v));
  return out;
}

}  // namespace

double wrap_angle(double a) {
  double r = std::remainder(a, 2 * pi);
  if (r <= -pi) r += 2 * pi;
  return r;
}

double angular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

CVector RaySeries::evaluate(Complex u) const {
  const Complex v = principal_pow(u, 1.0 / lattice);
  CVector out(components, Complex{});
  for (std::size_t j = coeffs.size(); j-- > 0;)
    for (std::size_t i = 0; i < components; ++i) out[i] = out[i] * v + coeffs[j][i];
  const Complex us = principal_pow(u, offset.to_double());
  for (auto& x : out) x *= us;
  return out;
}

Complex RationalApprox::operator()(Complex v) const {
  const Complex w = v / scale;
  if (std::abs(w) <= 1.0) return horner(num, w) / horner(den, w);
  const Complex winv = 1.0 / w;
  const auto dn = static_cast<int>(num.size()) - 1;
  const auto dd = static_cast<int>(den.size()) - 1;
  Complex r = horner_reversed(num, winv) / horner_reversed(den, winv);
  if (dn > dd) r *= int_pow(w, dn - dd);
  if (dd > dn) r *= int_pow(winv, dd - dn);
  return r;
}

std::vector<Complex> RationalApprox::numerator_in_v() const {
  std::vector<Complex> r(num);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] /= std::pow(scale, static_cast<double>(i));
  return r;
}

std::vector<Complex> RationalApprox::denominator_in_v() const {
  std::vector<Complex> r(den);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] /= std::pow(scale, static_cast<double>(i));
  return r;
}

CVector PadeContinuation::evaluate(Complex u) const {
  const Complex v = principal_pow(u, 1.0 / lattice);
  const Complex us = principal_pow(u, offset.to_double());
  CVector out;
  out.reserve(components.size());
  for (const auto& r : components) out.push_back(us * r(v));
  return out;
}

RaySeries reduce_to_ray(const TransformedSeries& phi, Point point, int lattice_cap) {
  if (phi.plane != Plane::borel) throw DomainError("reduce_to_ray expects a Borel-plane series");
  const MonomialWeight& w = phi.weight;
  const Box box = phi.base.trunc();
  // level e is complete when every (n, m) with weighted degree e lies in the box
  const Rational e_cut = std::min(Rational(box.n1 + 1) * w.alpha1(), Rational(box.n2 + 1) * w.alpha2());

  RaySeries r{point, w, 1, Rational(0), {}, phi.base.components()};
  std::vector<std::pair<Rational, const CVector*>> terms;
  std::vector<Exponent> exps;
  for (const auto& [e, v] : phi.base.coeffs()) {
    const Rational deg = w.weighted_degree(e.n, e.m);
    if (deg < e_cut) {
      terms.emplace_back(deg, &v);
      exps.push_back(e);
    }
  }
  if (terms.empty()) {
    const Rational levels = e_cut;
    const auto n = std::max<std::int64_t>(1, levels.floor() + (levels.is_integer() ? 0 : 1));
    r.coeffs.assign(static_cast<std::size_t>(n), CVector(r.components, Complex{}));
    return r;
  }
  Rational emin = terms.front().first;
  for (const auto& t : terms) emin = std::min(emin, t.first);
  r.offset = emin.frac();
  std::int64_t L = 1;
  for (const auto& t : terms) {
    L = lcm64(L, (t.first - r.offset).den());
    if (L > lattice_cap)
      throw ConfigurationError("reduce_to_ray: lattice denominator exceeds the cap of " + std::to_string(lattice_cap));
  }
  r.lattice = static_cast<int>(L);
  // j ranges over sigma + j/L < e_cut
  const Rational span = (e_cut - r.offset) * Rational(L);
  const std::int64_t count = span.is_integer() ? span.num() : span.floor() + 1;
  r.coeffs.assign(static_cast<std::size_t>(count), CVector(r.components, Complex{}));
  const auto [x1, x2] = point;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Rational jr = (terms[i].first - r.offset) * Rational(L);
    const auto j = static_cast<std::size_t>(jr.num());
    const Complex mono = int_pow(x1, exps[i].n) * int_pow(x2, exps[i].m);
    for (std::size_t c = 0; c < r.components; ++c) r.coeffs[j][c] += (*terms[i].second)[c] * mono;
  }
  return r;
}

std::pair<int, int> default_pade_degrees(std::size_t n) {
  if (n == 0) throw InsufficientDataError("no ray coefficients available for Pade continuation");
  const int N = static_cast<int>((n - 1) / 2);
  return {static_cast<int>(n) - 1 - N, N};
}

PadeContinuation pade_continue(const RaySeries& psi, std::pair<int, int> degrees, const SummationConfig& cfg) {
  const auto [M, N] = degrees;
  if (M < 0 || N < 0) throw DomainError("pade_continue: negative degrees");
  if (psi.coeffs.size() < static_cast<std::size_t>(M + N + 1))
    throw InsufficientDataError("pade_continue: [" + std::to_string(M) + "/" + std::to_string(N) + "] needs " +
                                std::to_string(M + N + 1) + " ray coefficients, have " +
                                std::to_string(psi.coeffs.size()));
  PadeContinuation out;
  out.degrees = degrees;
  out.base_point = psi.base_point;
  out.weight = psi.weight;
  out.lattice = psi.lattice;
  out.offset = psi.offset;
  const double sheet = pi / psi.lattice;
  for (std::size_t comp = 0; comp < psi.components; ++comp) {
    std::vector<Complex> c(static_cast<std::size_t>(M + N + 1));
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = psi.coeffs[j][comp];
    RationalApprox ra;
    ra.scale = radius_estimate(c);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] *= std::pow(ra.scale, static_cast<double>(j));
    robust_pade(c, M, N, cfg.svd_tolerance, ra.num, ra.den);
    for (const Complex w0 : polynomial_roots(ra.den)) {
      const Complex dq = derivative_at(ra.den, w0);
      const double res = std::abs(ra.scale * horner(ra.num, w0) / dq);
      if (!std::isfinite(res) || res < cfg.residue_floor) continue;
      Pole p;
      p.v = ra.scale * w0;
      p.u = int_pow(p.v, psi.lattice);
      p.residue = res;
      p.principal = std::abs(std::arg(p.v)) <= sheet + 1e-12;
      p.component = comp;
      out.poles.push_back(p);
    }
    out.components.push_back(std::move(ra));
  }
  logger().debug("pade_continue: [{}/{}] L={} sigma={}/{} poles={}", M, N, psi.lattice, psi.offset.num(),
                 psi.offset.den(), out.poles.size());
  return out;
}

std::vector<double> detect_singular_directions(const PadeContinuation& cont, const MonomialWeight& w,
                                               double cluster_tolerance, double radius_cap) {
  const double arg_t = std::arg(monomial_value(w, cont.base_point));
  const double k = w.k().to_double();
  std::vector<double> dirs;
  for (const auto& p : cont.poles) {
    if (!p.principal || std::abs(p.u) > radius_cap) continue;
    dirs.push_back(wrap_angle(arg_t + cont.lattice * std::arg(p.v) / k));
  }
  return cluster_directions(std::move(dirs), cluster_tolerance);
}

GrowthEstimate growth_estimate(const std::function<CVector(Complex)>& psi, double theta, const MonomialWeight& w,
                               double U_max) {
  if (!(U_max > 1.0)) throw DomainError("growth_estimate needs U_max > 1");
  constexpr int samples = 64;
  std::vector<double> r(samples);
  std::vector<double> y(samples);
  std::vector<double> norms(samples);
  for (int i = 0; i < samples; ++i) {
    r[i] = 1.0 + (U_max - 1.0) * i / (samples - 1);
    const CVector v = psi(std::polar(r[i], theta));
    norms[i] = max_norm(v);
    if (!std::isfinite(norms[i])) throw NotSummableError("growth_estimate: non-finite value on the ray");
    y[i] = std::log(std::max(norms[i], 1e-300));
  }
  GrowthEstimate g;
  g.order1 = (w.pk() / w.s()).to_double();
  g.order2 = (w.qk() / (Rational(1) - w.s())).to_double();
  Eigen::MatrixXd A(samples, 3);
  Eigen::VectorXd b(samples);
  for (int i = 0; i < samples; ++i) {
    const double x = (r[i] - 1.0) / (U_max - 1.0);
    A(i, 0) = 1.0;
    A(i, 1) = x;
    A(i, 2) = x * x;
    b(i) = y[i];
  }
  const Eigen::Vector2d lin = A.leftCols(2).colPivHouseholderQr().solve(b);
  const Eigen::Vector3d quad = A.colPivHouseholderQr().solve(b);
  g.M = std::max(0.0, lin(1) / (U_max - 1.0));
  // total extra log-growth across the window carried by the quadratic term
  g.curvature = quad(2);
  double C = 0.0;
  for (int i = 0; i < samples; ++i) C = std::max(C, norms[i] * std::exp(-g.M * r[i]));
  g.C = C * (1.0 + 1e-12) + 1e-300;
  // convex but decaying log-norms (polynomial decay) are harmless
  const bool rising_at_end = y.back() > y[samples / 2];
  if (g.curvature > 2.0 && rising_at_end)
    throw NotSummableError("growth along the ray is faster than exponential of first order (curvature " +
                           std::to_string(g.curvature) + ")");
  if (g.M >= 1.0)
    throw NotSummableError("exponential growth rate " + std::to_string(g.M) + " defeats the Laplace kernel");
  return g;
}

GrowthEstimate growth_estimate(const PadeContinuation& cont, double ray_direction, const MonomialWeight& w,
                               double U_max, const SummationConfig& cfg) {
  const double arg_t = std::arg(monomial_value(w, cont.base_point));
  const double k = w.k().to_double();
  const double theta = k * wrap_angle(ray_direction - arg_t);
  for (double phi : pole_angles(cont, cfg.pole_radius_cap))
    if (angular_distance(theta, phi) / k < cfg.singular_tolerance)
      throw SingularDirectionError("growth_estimate: ray direction is within tolerance of a singular direction",
                                   {wrap_angle(arg_t + phi / k)});
  return growth_estimate([&](Complex u) { return cont.evaluate(u); }, theta, w, U_max);
}

QuadratureResult laplace_integral(const std::function<CVector(Complex)>& power_part, Rational offset, int lattice,
                                  double theta, const SummationConfig& cfg) {
  if (!(std::abs(theta) < pi / 2)) throw PreconditionError("laplace quadrature needs |theta| < pi/2");
  const double c = std::cos(theta);
  const double tn = std::tan(theta);
  const double sigma = offset.to_double();
  const Complex rot = std::polar(1.0 / c, theta);
  const Complex vrot = principal_pow(rot, 1.0 / lattice);
  const Complex pref = principal_pow(rot, sigma + 1.0);

  auto integrand = [&](double tau) {
    const Complex v = vrot * std::pow(tau, 1.0 / lattice);
    CVector val = power_part(v);
    const Complex osc = std::polar(1.0, -tau * tn);
    for (auto& x : val) x *= osc;
    return val;
  };

  QuadratureResult res;
  CVector prev;
  auto accept = [&](CVector sum) {
    for (auto& x : sum) x *= pref;
    bool done = false;
    if (!prev.empty()) {
      const double diff = vec_diff(sum, prev);
      res.err_estimate = diff;
      done = diff <= cfg.quad_rel_tol * std::max(max_norm(sum), 1e-300) || diff == 0.0;
    }
    res.value = sum;
    prev = std::move(sum);
    return done;
  };

  if (lattice == 1) {
    for (int n : cfg.laguerre_nodes) {
      const auto& rule = quad::gauss_laguerre(n, sigma);
      CVector sum;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const CVector v = integrand(rule.nodes[i]);
        ++res.evaluations;
        if (sum.empty()) sum.assign(v.size(), Complex{});
        for (std::size_t j = 0; j < v.size(); ++j) sum[j] += rule.weights[i] * v[j];
      }
      if (accept(std::move(sum))) return res;
    }
  } else {
    for (int level = 2; level <= 8; ++level) {
      const auto& rule = quad::exp_sinh_half_line(level);
      CVector sum;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double tau = rule.nodes[i];
        const double wt = rule.weights[i] * std::pow(tau, sigma) * std::exp(-tau);
        if (wt == 0.0) continue;
        const CVector v = integrand(tau);
        ++res.evaluations;
        if (sum.empty()) sum.assign(v.size(), Complex{});
        for (std::size_t j = 0; j < v.size(); ++j) sum[j] += wt * v[j];
      }
      if (accept(std::move(sum))) return res;
    }
  }
  // Poles of the continuation close to the ray stall the fixed rules; fall back to adaptive panels.
  const int N = std::lcm(lattice, static_cast<int>(offset.den()));
  auto full = [&](double tau) {
    CVector v = integrand(tau);
    const double wt = tau > 0.0 ? std::pow(tau, sigma) * std::exp(-tau) : (sigma == 0.0 ? 1.0 : 0.0);
    for (auto& x : v) x *= wt * pref;
    return v;
  };
  if (auto r = adaptive_ray_integral(full, N, 100.0, cfg.quad_rel_tol)) {
    r->evaluations += res.evaluations;
    return *r;
  }
  throw AccuracyError("Laplace quadrature did not reach the requested relative change", res.err_estimate);
}

QuadratureResult laplace_quadrature(const PadeContinuation& cont, double theta, const MonomialWeight& w, Point point,
                                    const SummationConfig& cfg) {
  const double arg_t = std::arg(monomial_value(w, cont.base_point));
  const double k = w.k().to_double();
  for (double phi : pole_angles(cont, cfg.pole_radius_cap))
    if (angular_distance(theta, phi) / k < cfg.singular_tolerance)
      throw SingularDirectionError("laplace_quadrature: pole within tolerance of the integration ray",
                                   {wrap_angle(arg_t + phi / k)});
  QuadratureResult q = laplace_integral(
      [&](Complex v) {
        CVector out;
        out.reserve(cont.components.size());
        for (const auto& r : cont.components) out.push_back(r(v));
        return out;
      },
      cont.offset, cont.lattice, theta, cfg);
  const Complex pref = int_pow(point.first, w.pk_int()) * int_pow(point.second, w.qk_int());
  for (auto& x : q.value) x *= pref;
  q.err_estimate *= std::abs(pref);
  return q;
}

SumEvaluation borel_sum_at(const TransformedSeries& phi, double d, Point point, const SummationConfig& cfg) {
  const MonomialWeight& w = phi.weight;
  if (point.first == Complex{} || point.second == Complex{})
    throw DomainError("borel_sum: evaluation points must have x1 != 0 and x2 != 0");
  SumEvaluation ev;
  ev.point = point;
  ev.direction = d;
  ev.weight = w;
  const RaySeries ray = reduce_to_ray(phi, point, cfg.lattice_cap);
  const auto degrees = cfg.pade_degrees.value_or(default_pade_degrees(ray.coeffs.size()));
  logger().debug("borel_sum: {} ray coefficients, Pade [{}/{}]", ray.coeffs.size(), degrees.first, degrees.second);
  const PadeContinuation cont = pade_continue(ray, degrees, cfg);
  ev.singular_directions = detect_singular_directions(cont, w, cfg.cluster_tolerance, cfg.pole_radius_cap);

  // Compare in the u-plane, where psi is single valued; monomial-plane distances are u-plane ones over k.
  const double k = w.k().to_double();
  const double arg_t = std::arg(monomial_value(w, point));
  const double delta = wrap_angle(d - arg_t);
  const std::vector<double> phis = pole_angles(cont, cfg.pole_radius_cap);
  std::vector<double> offenders;
  double nearest = std::numeric_limits<double>::infinity();
  for (double phi : phis) {
    const double dist = angular_distance(k * delta, phi) / k;
    if (dist < nearest) {
      nearest = dist;
      ev.nearest_singularity_direction = wrap_angle(arg_t + phi / k);
    }
    if (dist < cfg.singular_tolerance) offenders.push_back(wrap_angle(arg_t + phi / k));
  }
  if (!offenders.empty())
    throw SingularDirectionError("direction " + std::to_string(d) + " is within tolerance of a singular direction",
                                 offenders);

  const double cap = std::min(cfg.max_rotation, pi / 2 - 1e-3);
  ev.theta = std::clamp(k * delta, -cap, cap);
  const double used = arg_t + ev.theta / k;
  // rotating the ray from d to the admissible one must not sweep over a singular direction
  if (k * delta != ev.theta) {
    const double lo = std::min(k * delta, ev.theta) - k * cfg.singular_tolerance;
    const double hi = std::max(k * delta, ev.theta) + k * cfg.singular_tolerance;
    const int wraps = static_cast<int>(std::ceil(k)) + 1;
    for (double phi : phis)
      for (int m = -wraps; m <= wraps; ++m) {
        const double a = phi + 2 * pi * m;
        if (a >= lo && a <= hi) offenders.push_back(wrap_angle(arg_t + phi / k));
      }
    if (!offenders.empty())
      throw SingularDirectionError("point lies outside the sector reachable from direction " + std::to_string(d) +
                                       " without crossing a singular direction",
                                   offenders);
  }
  const GrowthEstimate g = growth_estimate(cont, used, w, cfg.growth_u_max, cfg);
  if (g.M >= std::cos(ev.theta))
    throw NotSummableError("growth rate " + std::to_string(g.M) + " exceeds the decay of the Laplace kernel");

  QuadratureResult q = laplace_quadrature(cont, ev.theta, w, {Complex{1.0}, Complex{1.0}}, cfg);
  ev.value = q.value;
  ev.err_estimate = q.err_estimate;
  if (cfg.pade_error_estimate && degrees.first >= 1 && degrees.second >= 1) {
    try {
      const PadeContinuation lower = pade_continue(ray, {degrees.first - 1, degrees.second - 1}, cfg);
      const QuadratureResult q2 = laplace_quadrature(lower, ev.theta, w, {Complex{1.0}, Complex{1.0}}, cfg);
      ev.err_estimate += vec_diff(q.value, q2.value);
    } catch (const Error& e) {
      logger().debug("borel_sum: lower-degree Pade check skipped: {}", e.what());
    }
  }
  return ev;
}

std::vector<SumEvaluation> borel_sum(const BivariateSeries& f, const MonomialWeight& w, double d,
                                     const std::vector<Point>& points, const std::optional<SectorSpec>& sector,
                                     const SummationConfig& cfg) {
  if (sector) {
    if (!(sector->opening > 0.0)) throw DomainError("sector opening must be positive");
    for (const auto& x : points) {
      const Complex t = monomial_value(w, x);
      const bool inside = angular_distance(std::arg(t), sector->d) < sector->opening / 2 &&
                          std::pow(std::abs(x.first), w.p()) < sector->radius &&
                          std::pow(std::abs(x.second), w.q()) < sector->radius;
      if (!inside) throw PreconditionError("evaluation point outside the monomial sector");
    }
  }
  const TransformedSeries phi = formal_borel(f.shifted(w.pk_int(), w.qk_int()), w);
  std::vector<SumEvaluation> out(points.size());
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(points.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = borel_sum_at(phi, d, points[i], cfg);
    return out;
  }
  std::vector<std::exception_ptr> errors(points.size());
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < points.size(); i += static_cast<std::size_t>(jobs)) {
          try {
            out[i] = borel_sum_at(phi, d, points[i], cfg);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace monoborel
