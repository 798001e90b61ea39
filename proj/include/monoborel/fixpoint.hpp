#pragma once

#include <vector>

#include <Eigen/Dense>

#include "monoborel/pde.hpp"
#include "monoborel/summation.hpp"
#include "monoborel/transforms.hpp"

namespace monoborel {

/// Convolution equation satisfied by phi = B(x1^p x2^q y) for a LinearMonomialPDE with k = 1:
///   (xi1^p xi2^q I - C00) phi = K * phi + g.
///
/// `kernel` holds xi1^p xi2^q B(C~) with C~ = x1^p x2^q I + C - C00, i.e. the coefficient
/// Cbar_{n,m} / Gamma(n s/p + m (1-s)/q) sits at exponent (n, m) with Cbar_{p,q} = C_{p,q} + I.
/// Its l*l components are stored row-major.
struct ConvolutionProblem {
  MonomialWeight weight;
  Eigen::MatrixXcd C00;
  TransformedSeries kernel;
  TransformedSeries g;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(C00.rows()); }
};

/// Discretized monomial ray through `point`; nodes are ray parameters u, values psi(u).
struct RayGrid {
  Point point;
  std::vector<double> nodes;
  std::vector<CVector> values;
};

[[nodiscard]] ConvolutionProblem build_convolution_problem(const LinearMonomialPDE& prob);

/// Lattice L and offset sigma of the ray expansion of the solution: psi = u^sigma H(u^(1/L)).
[[nodiscard]] std::pair<int, Rational> ray_structure(const ConvolutionProblem& cp, int lattice_cap = 64);

/// n Chebyshev-Lobatto nodes in v = u^(1/L) on [0, U^(1/L)], mapped back to u.
[[nodiscard]] RayGrid make_ray_grid(const ConvolutionProblem& cp, Point point, double U, int n = 129);

struct PicardOptions {
  int tanh_sinh_level = 7;
};

struct PicardResult {
  RayGrid grid;
  int iterations = 0;
  bool converged = false;
  std::vector<double> defects;  // sup-node change per iteration
  std::vector<CVector> reduced_values;  // u^-sigma psi at the nodes
  int lattice = 1;
  Rational offset;
};

/// Picard iteration of F <- (mon(u) I - C00)^{-1} (K * F + g) on the grid nodes. The
/// convolution integral over tau in [0, 1] uses tanh-sinh nodes and barycentric
/// interpolation of u^-sigma F in v = u^(1/L).
[[nodiscard]] PicardResult picard_solve_on_ray(const ConvolutionProblem& cp, const RayGrid& grid, double tol,
                                               int max_iter, const PicardOptions& opts = {});

/// Node-wise max of |(mon(u) I - C00) F - K * F - g| with the convolution recomputed on a
/// finer tanh-sinh rule than the solve used.
[[nodiscard]] double fixed_point_defect(const ConvolutionProblem& cp, const PicardResult& sol, int level = 8);

/// Barycentric interpolant of the solution at ray parameter u in [0, U].
[[nodiscard]] CVector interpolate_solution(const PicardResult& sol, double u);

struct LemmaAudit {
  double a = 0.0;
  double sup = 0.0;
  double sup_lower = 0.0;  // N in [N_max/4, N_max/2]
  double sup_upper = 0.0;  // N in [N_max/2, N_max]
  bool pass = false;
  int arg_n = 0;
  int arg_m = 0;
  int arg_N = 0;
  /// sup over (n, m) as a function of N = 1..N_max
  std::vector<double> profile;
};

/// N^a B(n s/p + m (1-s)/q, 1 + N s/p), a = min(s/p, (1-s)/q), over (n, m) != (0, 0).
[[nodiscard]] double lemma_quantity(int p, int q, Rational s, int n, int m, int N);
[[nodiscard]] LemmaAudit lemma_bound_audit(int p, int q, Rational s, int n_max, int m_max, int N_max);

/// Max over grid nodes of ||F_picard(u) - psi_pade(u)||.
[[nodiscard]] double cross_validate(const ConvolutionProblem& cp, const PadeContinuation& cont, const RayGrid& grid);

}  // namespace monoborel
