#include "monoborel/fixpoint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "monoborel/errors.hpp"
#include "monoborel/log.hpp"
#include "monoborel/quadrature.hpp"
#include "monoborel/special.hpp"

namespace monoborel {

namespace {

struct RayTerm {
  Eigen::MatrixXcd coeff;  // coefficient times x1^n x2^m
  double exponent;
};

std::vector<RayTerm> kernel_terms(const ConvolutionProblem& cp, Point x) {
  const auto l = static_cast<Eigen::Index>(cp.dim());
  std::vector<RayTerm> out;
  for (const auto& [e, v] : cp.kernel.base.coeffs()) {
    RayTerm t{Eigen::MatrixXcd(l, l), cp.weight.weighted_degree_d(e.n, e.m)};
    const Complex mono = int_pow(x.first, e.n) * int_pow(x.second, e.m);
    for (Eigen::Index i = 0; i < l; ++i)
      for (Eigen::Index j = 0; j < l; ++j) t.coeff(i, j) = v[static_cast<std::size_t>(i * l + j)] * mono;
    out.push_back(std::move(t));
  }
  return out;
}

struct ForcingTerm {
  Eigen::VectorXcd coeff;
  double exponent;
};

std::vector<ForcingTerm> forcing_terms(const ConvolutionProblem& cp, Point x) {
  std::vector<ForcingTerm> out;
  for (const auto& [e, v] : cp.g.base.coeffs()) {
    const Complex mono = int_pow(x.first, e.n) * int_pow(x.second, e.m);
    Eigen::VectorXcd c(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) c(static_cast<Eigen::Index>(i)) = v[i] * mono;
    out.push_back({std::move(c), cp.weight.weighted_degree_d(e.n, e.m)});
  }
  return out;
}

// g(u) u^-sigma
Eigen::VectorXcd forcing_reduced(const std::vector<ForcingTerm>& g, std::size_t l, double u, double sigma) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(l));
  for (const auto& t : g) {
    const double e = t.exponent - sigma;
    out += (e == 0.0 ? 1.0 : (u == 0.0 ? 0.0 : std::pow(u, e))) * t.coeff;
  }
  return out;
}

// Barycentric interpolation on arbitrary nodes, weights computed after mapping to [-1, 1].
class Barycentric {
 public:
  explicit Barycentric(std::vector<double> x) : x_(std::move(x)), w_(x_.size(), 1.0) {
    const double a = x_.front();
    const double b = x_.back();
    std::vector<double> z(x_.size());
    for (std::size_t j = 0; j < x_.size(); ++j) z[j] = (2.0 * x_[j] - a - b) / (b - a);
    for (std::size_t j = 0; j < x_.size(); ++j) {
      double prod = 1.0;
      for (std::size_t k = 0; k < x_.size(); ++k)
        if (k != j) prod *= z[j] - z[k];
      w_[j] = 1.0 / prod;
    }
    double scale = 0.0;
    for (double w : w_) scale = std::max(scale, std::abs(w));
    for (double& w : w_) w /= scale;
  }

  // row of Lagrange basis values at x
  void row(double x, std::vector<double>& out) const {
    out.assign(x_.size(), 0.0);
    for (std::size_t j = 0; j < x_.size(); ++j)
      if (x == x_[j]) {
        out[j] = 1.0;
        return;
      }
    double den = 0.0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
      out[j] = w_[j] / (x - x_[j]);
      den += out[j];
    }
    for (double& o : out) o /= den;
  }

 private:
  std::vector<double> x_;
  std::vector<double> w_;
};

void check_grid(const RayGrid& grid) {
  if (grid.nodes.size() < 2 || grid.nodes.front() != 0.0) throw DomainError("ray grid must start at u = 0");
  for (std::size_t i = 1; i < grid.nodes.size(); ++i)
    if (!(grid.nodes[i] > grid.nodes[i - 1])) throw DomainError("ray grid nodes must be strictly increasing");
}

double psi_scale(double u, double sigma) { return sigma == 0.0 ? 1.0 : (u == 0.0 ? 0.0 : std::pow(u, sigma)); }

}  // namespace

ConvolutionProblem build_convolution_problem(const LinearMonomialPDE& prob) {
  prob.validate();
  if (!(prob.s > Rational(0) && prob.s < Rational(1)))
    throw PreconditionError("the convolution equation needs an interior equation weight 0 < s < 1");
  const MonomialWeight w(prob.p, prob.q, Rational(1), prob.s);
  const std::size_t l = prob.dim();
  const Eigen::MatrixXcd c00 = prob.C00();
  if (!Eigen::FullPivLU<Eigen::MatrixXcd>(c00).isInvertible()) throw PreconditionError("C(0,0) is singular");

  Box kbox{prob.p, prob.q};
  for (const auto& row : prob.C)
    for (const auto& e : row) kbox = {std::max(kbox.n1, e.trunc().n1), std::max(kbox.n2, e.trunc().n2)};
  BivariateSeries kernel(l * l, kbox);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < l; ++j)
      for (const auto& [e, v] : prob.C[i][j].coeffs()) {
        if (e.n == 0 && e.m == 0) continue;
        CVector c(l * l, Complex{});
        c[i * l + j] = v[0] * inv_gamma(w.weighted_degree_d(e.n, e.m));
        kernel.add(e, c);
      }
  for (std::size_t i = 0; i < l; ++i) {
    CVector c(l * l, Complex{});
    c[i * l + i] = 1.0;
    kernel.add({prob.p, prob.q}, c);
  }

  Box gbox{0, 0};
  for (const auto& g : prob.gamma) gbox = {std::max(gbox.n1, g.trunc().n1), std::max(gbox.n2, g.trunc().n2)};
  std::vector<BivariateSeries> gs;
  for (const auto& g : prob.gamma) gs.push_back(as_polynomial(g, gbox));
  const TransformedSeries g = formal_borel(pack(gs).shifted(prob.p, prob.q), w);
  return {w, c00, {std::move(kernel), w, Plane::borel}, g};
}

std::pair<int, Rational> ray_structure(const ConvolutionProblem& cp, int lattice_cap) {
  const MonomialWeight& w = cp.weight;
  if (cp.g.base.is_zero()) return {1, Rational(0)};
  Rational emin = w.weighted_degree(cp.g.base.coeffs().begin()->first.n, cp.g.base.coeffs().begin()->first.m);
  for (const auto& [e, v] : cp.g.base.coeffs()) emin = std::min(emin, w.weighted_degree(e.n, e.m));
  const Rational sigma = emin.frac();
  std::int64_t L = 1;
  auto absorb = [&](Rational r) {
    L = L / std::gcd(L, r.den()) * r.den();
    if (L > lattice_cap) throw ConfigurationError("ray lattice exceeds the cap of " + std::to_string(lattice_cap));
  };
  for (const auto& [e, v] : cp.g.base.coeffs()) absorb(w.weighted_degree(e.n, e.m) - sigma);
  for (const auto& [e, v] : cp.kernel.base.coeffs()) absorb(w.weighted_degree(e.n, e.m));
  return {static_cast<int>(L), sigma};
}

RayGrid make_ray_grid(const ConvolutionProblem& cp, Point point, double U, int n) {
  if (!(U > 0.0)) throw DomainError("ray length must be positive");
  const int L = ray_structure(cp).first;
  RayGrid g;
  g.point = point;
  for (double v : quad::chebyshev_lobatto(n, 0.0, std::pow(U, 1.0 / L))) g.nodes.push_back(std::pow(v, L));
  g.nodes.back() = U;
  return g;
}

PicardResult picard_solve_on_ray(const ConvolutionProblem& cp, const RayGrid& grid, double tol, int max_iter,
                                 const PicardOptions& opts) {
  check_grid(grid);
  const std::size_t l = cp.dim();
  const auto li = static_cast<Eigen::Index>(l);
  const auto [x1, x2] = grid.point;
  const Complex t = int_pow(x1, cp.weight.p()) * int_pow(x2, cp.weight.q());
  if (t == Complex{}) throw DomainError("ray base point must have x1^p x2^q != 0");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(cp.C00, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (angular_distance(std::arg(es.eigenvalues()(i)), std::arg(t)) <= 0.05)
      throw SingularDirectionError("ray direction is within 0.05 rad of an eigenvalue argument",
                                   {std::arg(es.eigenvalues()(i))});

  const auto [L, offset] = ray_structure(cp);
  const double sigma = offset.to_double();
  const std::size_t n = grid.nodes.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(grid.nodes[i], 1.0 / L);
  const Barycentric bary(v);

  const auto kt = kernel_terms(cp, grid.point);
  const auto gt = forcing_terms(cp, grid.point);
  const auto& rule = quad::tanh_sinh_unit(opts.tanh_sinh_level);

  // resolvents
  std::vector<Eigen::MatrixXcd> rinv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::MatrixXcd r = t * grid.nodes[i] * Eigen::MatrixXcd::Identity(li, li) - cp.C00;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(r);
    if (!(lu.rcond() > 1e-13)) throw ConditioningError("near-singular resolvent at ray node " + std::to_string(i));
    rinv[i] = lu.inverse();
  }

  // linear map H -> u^-sigma (K * psi) at each node
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n) * li, static_cast<Eigen::Index>(n) * li);
  std::vector<double> ell;
  std::vector<std::vector<double>> acc(kt.size(), std::vector<double>(n));
  for (std::size_t i = 1; i < n; ++i) {
    const double u = grid.nodes[i];
    for (auto& a : acc) std::fill(a.begin(), a.end(), 0.0);
    for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
      const double tau = rule.nodes[r];
      const double z = u * rule.complements[r];
      bary.row(std::pow(z, 1.0 / L), ell);
      const double base = rule.weights[r] * psi_scale(z, sigma) / psi_scale(u, sigma);
      for (std::size_t k = 0; k < kt.size(); ++k) {
        const double e = kt[k].exponent;
        const double f = base * std::pow(u, e) * std::pow(tau, e - 1.0);
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) acc[k][j] += f * ell[j];
      }
    }
    for (std::size_t k = 0; k < kt.size(); ++k)
      for (std::size_t j = 0; j < n; ++j)
        big.block(static_cast<Eigen::Index>(i) * li, static_cast<Eigen::Index>(j) * li, li, li) += acc[k][j] * kt[k].coeff;
  }

  Eigen::VectorXcd gred(static_cast<Eigen::Index>(n) * li);
  for (std::size_t i = 0; i < n; ++i)
    gred.segment(static_cast<Eigen::Index>(i) * li, li) = forcing_reduced(gt, l, grid.nodes[i], sigma);

  PicardResult res;
  res.lattice = L;
  res.offset = offset;
  Eigen::VectorXcd H = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n) * li);
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXcd rhs = big * H + gred;
    Eigen::VectorXcd Hn(H.size());
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto seg = static_cast<Eigen::Index>(i) * li;
      Hn.segment(seg, li) = rinv[i] * rhs.segment(seg, li);
      change = std::max(change, (Hn.segment(seg, li) - H.segment(seg, li)).cwiseAbs().maxCoeff() *
                                    psi_scale(grid.nodes[i], sigma));
    }
    H = std::move(Hn);
    res.defects.push_back(change);
    res.iterations = it;
    if (change < tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged)
    logger().warn("picard_solve_on_ray: no convergence after {} iterations (last change {:.3e})", max_iter,
                  res.defects.empty() ? 0.0 : res.defects.back());

  res.grid = grid;
  res.grid.values.assign(n, CVector(l));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < l; ++c)
      res.grid.values[i][c] = psi_scale(grid.nodes[i], sigma) * H(static_cast<Eigen::Index>(i * l + c));
  res.reduced_values.assign(n, CVector(l));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < l; ++c) res.reduced_values[i][c] = H(static_cast<Eigen::Index>(i * l + c));
  return res;
}

CVector interpolate_solution(const PicardResult& sol, double u) {
  const std::size_t n = sol.grid.nodes.size();
  if (u < 0.0 || u > sol.grid.nodes.back()) throw DomainError("interpolation point outside the ray grid");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(sol.grid.nodes[i], 1.0 / sol.lattice);
  const Barycentric bary(v);
  std::vector<double> ell;
  bary.row(std::pow(u, 1.0 / sol.lattice), ell);
  const std::size_t l = sol.reduced_values.front().size();
  CVector out(l, Complex{});
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < l; ++c) out[c] += ell[j] * sol.reduced_values[j][c];
  const double sc = psi_scale(u, sol.offset.to_double());
  for (auto& x : out) x *= sc;
  return out;
}

double fixed_point_defect(const ConvolutionProblem& cp, const PicardResult& sol, int level) {
  const std::size_t l = cp.dim();
  const auto li = static_cast<Eigen::Index>(l);
  const auto [x1, x2] = sol.grid.point;
  const Complex t = int_pow(x1, cp.weight.p()) * int_pow(x2, cp.weight.q());
  const auto kt = kernel_terms(cp, sol.grid.point);
  const auto gt = forcing_terms(cp, sol.grid.point);
  const auto& rule = quad::tanh_sinh_unit(level);
  const std::size_t n = sol.grid.nodes.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::pow(sol.grid.nodes[i], 1.0 / sol.lattice);
  const Barycentric bary(v);
  const double sigma = sol.offset.to_double();
  std::vector<double> ell;

  double defect = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = sol.grid.nodes[i];
    Eigen::VectorXcd conv = Eigen::VectorXcd::Zero(li);
    if (u > 0.0) {
      for (std::size_t r = 0; r < rule.nodes.size(); ++r) {
        const double tau = rule.nodes[r];
        const double z = u * rule.complements[r];
        bary.row(std::pow(z, 1.0 / sol.lattice), ell);
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(li);
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t c = 0; c < l; ++c) psi(static_cast<Eigen::Index>(c)) += ell[j] * sol.reduced_values[j][c];
        psi *= psi_scale(z, sigma);
        Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(li, li);
        for (const auto& k : kt) K += std::pow(u, k.exponent) * std::pow(tau, k.exponent - 1.0) * k.coeff;
        conv += rule.weights[r] * (K * psi);
      }
    }
    Eigen::VectorXcd F(li);
    for (std::size_t c = 0; c < l; ++c) F(static_cast<Eigen::Index>(c)) = sol.grid.values[i][c];
    const Eigen::VectorXcd g = forcing_reduced(gt, l, u, sigma) * psi_scale(u, sigma);
    const Eigen::VectorXcd r = (t * u * Eigen::MatrixXcd::Identity(li, li) - cp.C00) * F - conv - g;
    defect = std::max(defect, r.cwiseAbs().maxCoeff());
  }
  return defect;
}

double lemma_quantity(int p, int q, Rational s, int n, int m, int N) {
  if (n == 0 && m == 0) throw DomainError("lemma quantity needs (n, m) != (0, 0)");
  const double sp = (s / Rational(p)).to_double();
  const double sq = ((Rational(1) - s) / Rational(q)).to_double();
  const double a = std::min(sp, sq);
  return std::exp(a * std::log(static_cast<double>(N)) + log_beta(n * sp + m * sq, 1.0 + N * sp));
}

LemmaAudit lemma_bound_audit(int p, int q, Rational s, int n_max, int m_max, int N_max) {
  if (p < 1 || q < 1 || !(s > Rational(0) && s < Rational(1)) || N_max < 4 || n_max < 0 || m_max < 0 ||
      n_max + m_max == 0)
    throw DomainError("lemma_bound_audit: invalid parameters");
  LemmaAudit rep;
  rep.a = std::min((s / Rational(p)).to_double(), ((Rational(1) - s) / Rational(q)).to_double());
  rep.profile.assign(static_cast<std::size_t>(N_max), 0.0);
  for (int N = 1; N <= N_max; ++N) {
    double best = 0.0;
    for (int n = 0; n <= n_max; ++n)
      for (int m = 0; m <= m_max; ++m) {
        if (n == 0 && m == 0) continue;
        const double val = lemma_quantity(p, q, s, n, m, N);
        if (val > best) best = val;
        if (val > rep.sup) {
          rep.sup = val;
          rep.arg_n = n;
          rep.arg_m = m;
          rep.arg_N = N;
        }
      }
    rep.profile[static_cast<std::size_t>(N - 1)] = best;
    if (N >= N_max / 4 && N <= N_max / 2) rep.sup_lower = std::max(rep.sup_lower, best);
    if (N >= N_max / 2) rep.sup_upper = std::max(rep.sup_upper, best);
  }
  rep.pass = std::isfinite(rep.sup) && rep.sup_upper <= 1.05 * rep.sup_lower;
  return rep;
}

double cross_validate(const ConvolutionProblem& cp, const PadeContinuation& cont, const RayGrid& grid) {
  if (!(cp.weight == cont.weight)) throw DomainError("cross_validate: weight mismatch");
  if (grid.values.size() != grid.nodes.size()) throw DomainError("cross_validate: grid has no solution values");
  // the continuation may carry extra packed components after the solution
  if (cont.components.size() < cp.dim()) throw DimensionError("cross_validate: continuation has too few components");
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const CVector pade = cont.evaluate(grid.nodes[i]);
    for (std::size_t c = 0; c < cp.dim(); ++c) worst = std::max(worst, std::abs(pade[c] - grid.values[i][c]));
  }
  return worst;
}

}  // namespace monoborel
