#include "monoborel/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include <Eigen/Eigenvalues>

#include "monoborel/errors.hpp"

namespace monoborel::quad {

namespace {

// Golub-Welsch for a symmetric tridiagonal Jacobi matrix.
Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericError("Golub-Welsch eigensolver failed");
  const auto n = diag.size();
  Rule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    r.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
  }
  return r;
}

std::mutex cache_mutex;

}  // namespace

const Rule& gauss_laguerre(int n, double alpha) {
  if (n < 1 || alpha <= -1.0) throw DomainError("gauss_laguerre needs n >= 1 and alpha > -1");
  static std::map<std::pair<int, double>, Rule> cache;
  std::lock_guard lock(cache_mutex);
  auto key = std::pair{n, alpha};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  Eigen::VectorXd d(n);
  Eigen::VectorXd e(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) d(i) = 2.0 * i + alpha + 1.0;
  for (int i = 1; i < n; ++i) e(i - 1) = std::sqrt(i * (i + alpha));
  Rule r = golub_welsch(d, e, std::tgamma(alpha + 1.0));
  // Newton-polish nodes on L_n^alpha and recompute weights from L_n' (eigenvector weights lose
  // digits on the large nodes).
  const auto laguerre = [&](double x) {
    double prev = 1.0, cur = 1.0 + alpha - x;
    if (n == 1) return std::pair{cur, prev};
    for (int k = 1; k < n; ++k) {
      const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
      prev = cur;
      cur = next;
    }
    return std::pair{cur, prev};  // L_n, L_{n-1}
  };
  const double log_norm = std::lgamma(n + alpha + 1.0) - std::lgamma(n + 1.0);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double x = r.nodes[i];
    for (int it = 0; it < 4; ++it) {
      const auto [ln, lm] = laguerre(x);
      const double dl = (n * ln - (n + alpha) * lm) / x;
      if (dl == 0.0 || !std::isfinite(dl)) break;
      const double step = ln / dl;
      x -= step;
      if (std::abs(step) <= 1e-16 * x) break;
    }
    const auto [ln, lm] = laguerre(x);
    const double dl = (n * ln - (n + alpha) * lm) / x;
    const double w = std::exp(log_norm - std::log(x) - 2.0 * std::log(std::abs(dl)));
    if (x > 0.0 && std::isfinite(w)) {
      r.nodes[i] = x;
      r.weights[i] = w;
    }
  }
  return cache.emplace(key, std::move(r)).first->second;
}

const Rule& gauss_legendre_unit(int n) {
  if (n < 1) throw DomainError("gauss_legendre_unit needs n >= 1");
  static std::map<int, Rule> cache;
  std::lock_guard lock(cache_mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd e(std::max(n - 1, 0));
  for (int i = 1; i < n; ++i) e(i - 1) = i / std::sqrt(4.0 * i * i - 1.0);
  Rule r = golub_welsch(d, e, 2.0);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = 0.5 * (r.nodes[i] + 1.0);
    r.weights[i] *= 0.5;
  }
  return cache.emplace(n, std::move(r)).first->second;
}

const EndpointRule& tanh_sinh_unit(int level) {
  if (level < 0 || level > 12) throw DomainError("tanh_sinh_unit level out of range");
  static std::map<int, EndpointRule> cache;
  std::lock_guard lock(cache_mutex);
  if (auto it = cache.find(level); it != cache.end()) return it->second;
  constexpr double t_max = 6.0;
  const double h = std::ldexp(1.0, -level);
  const int kmax = static_cast<int>(std::ceil(t_max / h));
  EndpointRule r;
  for (int k = -kmax; k <= kmax; ++k) {
    const double t = k * h;
    const double u = std::numbers::pi / 2.0 * std::sinh(t);
    // x = 1/(1+e^{-2u}), 1-x = 1/(1+e^{2u})
    const double x = 1.0 / (1.0 + std::exp(-2.0 * u));
    const double xc = 1.0 / (1.0 + std::exp(2.0 * u));
    const double ch = std::cosh(u);
    const double w = h * std::numbers::pi / 4.0 * std::cosh(t) / (ch * ch);
    if (x == 0.0 || xc == 0.0 || w == 0.0 || !std::isfinite(w)) continue;
    r.nodes.push_back(x);
    r.complements.push_back(xc);
    r.weights.push_back(w);
  }
  return cache.emplace(level, std::move(r)).first->second;
}

const Rule& exp_sinh_half_line(int level) {
  if (level < 0 || level > 12) throw DomainError("exp_sinh_half_line level out of range");
  static std::map<int, Rule> cache;
  std::lock_guard lock(cache_mutex);
  if (auto it = cache.find(level); it != cache.end()) return it->second;
  constexpr double t_min = -6.0;
  constexpr double t_max = 3.5;
  const double h = std::ldexp(1.0, -level);
  Rule r;
  for (int k = static_cast<int>(std::floor(t_min / h)); k * h <= t_max; ++k) {
    const double t = k * h;
    const double x = std::exp(std::numbers::pi / 2.0 * std::sinh(t));
    const double w = h * std::numbers::pi / 2.0 * std::cosh(t) * x;
    if (x == 0.0 || !std::isfinite(w)) continue;
    r.nodes.push_back(x);
    r.weights.push_back(w);
  }
  return cache.emplace(level, std::move(r)).first->second;
}

std::vector<double> chebyshev_lobatto(int n, double a, double b) {
  if (n < 2) throw DomainError("chebyshev_lobatto needs n >= 2");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double sn = std::sin(std::numbers::pi * j / (2.0 * (n - 1)));
    x[static_cast<std::size_t>(j)] = a + (b - a) * sn * sn;
  }
  x.front() = a;
  x.back() = b;
  return x;
}

}  // namespace monoborel::quad
