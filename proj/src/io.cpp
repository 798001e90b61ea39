#include "monoborel/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "monoborel/errors.hpp"

namespace monoborel::io {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigurationError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

int int_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) throw ConfigurationError(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

SeriesMatrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigurationError(std::string(name) + " must be an array of rows");
  SeriesMatrix m;
  for (const auto& row : j) {
    if (!row.is_array()) throw ConfigurationError(std::string(name) + " rows must be arrays");
    std::vector<BivariateSeries> r;
    for (const auto& e : row) r.push_back(series_from_json(e));
    m.push_back(std::move(r));
  }
  return m;
}

SeriesVector vector_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw ConfigurationError(std::string(name) + " must be an array of series");
  SeriesVector v;
  for (const auto& e : j) v.push_back(series_from_json(e));
  return v;
}

json matrix_to_json(const SeriesMatrix& m) {
  json out = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& e : row) r.push_back(to_json(e));
    out.push_back(std::move(r));
  }
  return out;
}

json vector_to_json(const SeriesVector& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back(to_json(e));
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(Rational r) { return json::array({r.num(), r.den()}); }

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConfigurationError("rationals are encoded as [numerator, denominator]");
  if (j[1].get<std::int64_t>() == 0) throw ConfigurationError("zero denominator");
  return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigurationError("complex numbers are encoded as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json to_json(const BivariateSeries& f) {
  json coeffs = json::array();
  for (const auto& [e, v] : f.coeffs()) {
    json row = json::array({e.n, e.m});
    for (const auto& c : v) row.push_back(to_json(c));
    coeffs.push_back(std::move(row));
  }
  return {{"l", f.components()}, {"trunc", {f.trunc().n1, f.trunc().n2}}, {"coeffs", std::move(coeffs)}};
}

BivariateSeries series_from_json(const json& j) {
  const int l = int_field(j, "l");
  if (l < 1) throw ConfigurationError("series component count must be positive");
  const json& tr = field(j, "trunc");
  if (!tr.is_array() || tr.size() != 2) throw ConfigurationError("trunc must be [N1, N2]");
  BivariateSeries f(static_cast<std::size_t>(l), {tr[0].get<int>(), tr[1].get<int>()});
  for (const auto& row : field(j, "coeffs")) {
    if (!row.is_array() || row.size() != static_cast<std::size_t>(l) + 2)
      throw ConfigurationError("each coefficient entry is [n, m, [re, im] x l]");
    CVector v;
    for (std::size_t i = 2; i < row.size(); ++i) v.push_back(complex_from_json(row[i]));
    f.add({row[0].get<int>(), row[1].get<int>()}, v);
  }
  return f;
}

json to_json(const MonomialWeight& w) {
  return {{"p", w.p()}, {"q", w.q()}, {"k", to_json(w.k())}, {"s", to_json(w.s())}};
}

MonomialWeight weight_from_json(const json& j) {
  const Rational k = j.contains("k") ? rational_from_json(j.at("k")) : Rational(1);
  return {int_field(j, "p"), int_field(j, "q"), k, rational_from_json(field(j, "s"))};
}

json to_json(const TransformedSeries& t) {
  json j = to_json(t.base);
  j["plane"] = t.plane == Plane::borel ? "borel" : "laplace";
  j["weight"] = to_json(t.weight);
  return j;
}

TransformedSeries transformed_from_json(const json& j) {
  const std::string plane = field(j, "plane").get<std::string>();
  if (plane != "borel" && plane != "laplace") throw ConfigurationError("plane must be \"borel\" or \"laplace\"");
  return {series_from_json(j), weight_from_json(field(j, "weight")), plane == "borel" ? Plane::borel : Plane::laplace};
}

json to_json(const LinearMonomialPDE& prob) {
  return {{"p", prob.p}, {"q", prob.q}, {"s", to_json(prob.s)}, {"C", matrix_to_json(prob.C)},
          {"gamma", vector_to_json(prob.gamma)}};
}

LinearMonomialPDE pde_from_json(const json& j) {
  LinearMonomialPDE prob;
  prob.p = int_field(j, "p");
  prob.q = int_field(j, "q");
  prob.s = rational_from_json(field(j, "s"));
  prob.C = matrix_from_json(field(j, "C"), "C");
  prob.gamma = vector_from_json(field(j, "gamma"), "gamma");
  prob.validate();
  return prob;
}

json to_json(const PfaffianSystem& sys) {
  return {{"p", sys.p}, {"q", sys.q}, {"A", matrix_to_json(sys.A)}, {"B", matrix_to_json(sys.B)},
          {"gamma1", vector_to_json(sys.gamma1)}, {"gamma2", vector_to_json(sys.gamma2)}};
}

PfaffianSystem pfaffian_from_json(const json& j) {
  PfaffianSystem sys;
  sys.p = int_field(j, "p");
  sys.q = int_field(j, "q");
  sys.A = matrix_from_json(field(j, "A"), "A");
  sys.B = matrix_from_json(field(j, "B"), "B");
  sys.gamma1 = vector_from_json(field(j, "gamma1"), "gamma1");
  sys.gamma2 = vector_from_json(field(j, "gamma2"), "gamma2");
  sys.validate();
  return sys;
}

Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigurationError("points are encoded as [x1, x2]");
  return {complex_from_json(j[0]), complex_from_json(j[1])};
}

std::vector<std::string> sum_csv_header(std::size_t l) {
  std::vector<std::string> h{"point_x1_re", "point_x1_im", "point_x2_re", "point_x2_im", "direction", "s_num", "s_den"};
  for (std::size_t i = 0; i < l; ++i) h.push_back("value_re_" + std::to_string(i));
  for (std::size_t i = 0; i < l; ++i) h.push_back("value_im_" + std::to_string(i));
  h.emplace_back("err_estimate");
  h.emplace_back("nearest_singular_direction");
  return h;
}

void write_sum_csv(std::ostream& os, const std::vector<SumEvaluation>& rows) {
  const std::size_t l = rows.empty() ? 1 : rows.front().value.size();
  const auto header = sum_csv_header(l);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    os << format_double(r.point.first.real()) << ',' << format_double(r.point.first.imag()) << ','
       << format_double(r.point.second.real()) << ',' << format_double(r.point.second.imag()) << ','
       << format_double(r.direction) << ',' << r.weight.s().num() << ',' << r.weight.s().den();
    for (const auto& v : r.value) os << ',' << format_double(v.real());
    for (const auto& v : r.value) os << ',' << format_double(v.imag());
    os << ',' << format_double(r.err_estimate) << ',' << format_double(r.nearest_singularity_direction) << '\n';
  }
}

void write_ray_csv(std::ostream& os, const RayGrid& grid) {
  const std::size_t l = grid.values.empty() ? 1 : grid.values.front().size();
  os << 'u';
  for (std::size_t i = 0; i < l; ++i) os << ",F_re_" << i;
  for (std::size_t i = 0; i < l; ++i) os << ",F_im_" << i;
  os << '\n';
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    os << format_double(grid.nodes[k]);
    for (const auto& v : grid.values[k]) os << ',' << format_double(v.real());
    for (const auto& v : grid.values[k]) os << ',' << format_double(v.imag());
    os << '\n';
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigurationError(path + ": " + e.what());
  }
}

}  // namespace monoborel::io
