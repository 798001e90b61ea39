#pragma once

#include <vector>

namespace monoborel::quad {

/// Gauss rule with nodes and weights.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Generalized Gauss-Laguerre rule for the weight x^alpha e^{-x} on [0, inf)
/// (Golub-Welsch). Rules are cached per (n, alpha).
const Rule& gauss_laguerre(int n, double alpha);

/// Gauss-Legendre rule on [0, 1].
const Rule& gauss_legendre_unit(int n);

/// Tanh-sinh rule on [0, 1] with step 2^-level. Nodes are stored together with
/// their complements 1-x so that endpoint singularities can be evaluated without
/// cancellation. Nodes that round to an endpoint are omitted.
struct EndpointRule {
  std::vector<double> nodes;
  std::vector<double> complements;
  std::vector<double> weights;
};
const EndpointRule& tanh_sinh_unit(int level);

/// Exp-sinh rule on [0, inf) with step 2^-level.
const Rule& exp_sinh_half_line(int level);

/// Second-kind Chebyshev points on [a, b], increasing, endpoints included.
std::vector<double> chebyshev_lobatto(int n, double a, double b);

}  // namespace monoborel::quad
