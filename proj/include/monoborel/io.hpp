#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoborel/fixpoint.hpp"
#include "monoborel/pde.hpp"
#include "monoborel/series.hpp"
#include "monoborel/summation.hpp"
#include "monoborel/transforms.hpp"

namespace monoborel::io {

using nlohmann::json;

/// Fixed "%.17g" rendering used by every CSV writer.
[[nodiscard]] std::string format_double(double x);

[[nodiscard]] json to_json(Rational r);
[[nodiscard]] Rational rational_from_json(const json& j);
[[nodiscard]] json to_json(Complex z);
[[nodiscard]] Complex complex_from_json(const json& j);

/// {"l": int, "trunc": [N1, N2], "coeffs": [[n, m, [re, im] x l], ...]}
[[nodiscard]] json to_json(const BivariateSeries& f);
[[nodiscard]] BivariateSeries series_from_json(const json& j);

/// {"p", "q", "k": [num, den], "s": [num, den]}
[[nodiscard]] json to_json(const MonomialWeight& w);
[[nodiscard]] MonomialWeight weight_from_json(const json& j);

/// Series JSON plus "plane" and "weight".
[[nodiscard]] json to_json(const TransformedSeries& t);
[[nodiscard]] TransformedSeries transformed_from_json(const json& j);

/// {"p", "q", "s": [num, den], "C": [[series]], "gamma": [series]}
[[nodiscard]] json to_json(const LinearMonomialPDE& prob);
[[nodiscard]] LinearMonomialPDE pde_from_json(const json& j);
/// {"p", "q", "A", "B", "gamma1", "gamma2"}
[[nodiscard]] json to_json(const PfaffianSystem& sys);
[[nodiscard]] PfaffianSystem pfaffian_from_json(const json& j);

/// [[x1re, x1im], [x2re, x2im]]
[[nodiscard]] Point point_from_json(const json& j);

[[nodiscard]] std::vector<std::string> sum_csv_header(std::size_t l);
void write_sum_csv(std::ostream& os, const std::vector<SumEvaluation>& rows);
/// u, F_re[l], F_im[l]
void write_ray_csv(std::ostream& os, const RayGrid& grid);

[[nodiscard]] json read_json_file(const std::string& path);

}  // namespace monoborel::io
