#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "monoborel/series.hpp"

namespace testutil {

using monoborel::BivariateSeries;
using monoborel::Box;
using monoborel::Complex;
using monoborel::CVector;

inline BivariateSeries random_series(std::mt19937_64& rng, Box box, std::size_t l = 1, int min_n = 0, int min_m = 0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BivariateSeries f(l, box);
  for (int n = min_n; n <= box.n1; ++n)
    for (int m = min_m; m <= box.n2; ++m) {
      CVector v;
      for (std::size_t j = 0; j < l; ++j) v.emplace_back(u(rng), u(rng));
      f.set({n, m}, v);
    }
  return f;
}

/// Max coefficientwise difference relative to the max coefficient norm of `ref`.
inline double rel_diff(const BivariateSeries& a, const BivariateSeries& ref) {
  double diff = 0.0;
  for (const auto& [e, v] : ref.coeffs()) {
    const CVector w = a.coeff(e);
    for (std::size_t j = 0; j < v.size(); ++j) diff = std::max(diff, std::abs(w[j] - v[j]) / std::max(std::abs(v[j]), 1e-300));
  }
  for (const auto& [e, v] : a.coeffs())
    if (!ref.coeffs().count(e)) diff = std::max(diff, monoborel::max_norm(v));
  return diff;
}

inline double abs_diff(const BivariateSeries& a, const BivariateSeries& b) {
  double diff = 0.0;
  auto scan = [&](const BivariateSeries& x, const BivariateSeries& y) {
    for (const auto& [e, v] : x.coeffs()) {
      const CVector w = y.coeff(e);
      for (std::size_t j = 0; j < v.size(); ++j) diff = std::max(diff, std::abs(v[j] - w[j]));
    }
  };
  scan(a, b);
  scan(b, a);
  return diff;
}

}  // namespace testutil
