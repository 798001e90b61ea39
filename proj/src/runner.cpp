#include "monoborel/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/Core>
#include <spdlog/version.h>

#include "monoborel/fixpoint.hpp"
#include "monoborel/io.hpp"
#include "monoborel/log.hpp"
#include "monoborel/pde.hpp"
#include "monoborel/series.hpp"
#include "monoborel/summation.hpp"
#include "monoborel/transforms.hpp"

namespace monoborel {

namespace fs = std::filesystem;
using nlohmann::json;
using io::format_double;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct ModeSpec {
  std::string name;
  std::vector<std::string> required;
  std::vector<std::string> optional;
  std::vector<std::string> options;
};

const std::vector<ModeSpec>& mode_specs() {
  static const std::vector<ModeSpec> specs = {
      {"borel", {"series", "weights"}, {"trunc"}, {}},
      {"laplace", {"series"}, {"trunc"}, {}},
      {"sum", {"series", "weights", "directions", "points"}, {"trunc", "pade", "quad"}, {}},
      {"pde-solve", {"problem", "trunc"}, {}, {}},
      {"pde-sum",
       {"problem", "directions", "points"},
       {"weights", "trunc", "pade", "quad"},
       {"target_coefficients", "max_box"}},
      {"pfaffian-check", {"problem", "trunc"}, {}, {"pairing_tolerance"}},
      {"convergence-scan", {"problem"}, {}, {"s_points", "direction_points", "angular_tolerance"}},
      {"fixpoint-oracle",
       {"problem", "points"},
       {"trunc", "pade", "quad"},
       {"ray_length", "nodes", "tol", "max_iter", "tanh_sinh_level", "target_coefficients", "max_box"}},
      {"lemma-audit", {"options"}, {}, {"cases"}},
  };
  return specs;
}

const std::set<std::string> kCommonKeys = {"schema", "mode", "out", "jobs", "seed", "plots", "description", "options"};

const ModeSpec& spec_for(const std::string& mode) {
  for (const auto& s : mode_specs())
    if (s.name == mode) return s;
  throw UsageError("unknown mode \"" + mode + "\"");
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

template <class F>
auto guarded(const char* context, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ExperimentError&) {
    throw;
  } catch (const Error& e) {
    throw ExperimentError(e.kind(), context, e.what());
  } catch (const json::exception& e) {
    throw ExperimentError(ErrorKind::usage, context, e.what());
  }
}

/// Runs f(i) for i < n on up to `jobs` threads; f must not throw.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
}

std::pair<int, int> int_pair(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw UsageError(std::string(name) + " must be a pair of integers");
  return {j[0].get<int>(), j[1].get<int>()};
}

Box box_from(const json& j) {
  const auto [a, b] = int_pair(j, "trunc");
  if (a < 0 || b < 0) throw UsageError("trunc entries must be non-negative");
  return {a, b};
}

const json& options_of(const json& doc) {
  static const json empty = json::object();
  return doc.contains("options") ? doc.at("options") : empty;
}

template <class T>
T option(const json& doc, const char* key, T fallback) {
  const json& o = options_of(doc);
  if (!o.contains(key)) return fallback;
  try {
    return o.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("option \"") + key + "\" has the wrong type");
  }
}

SummationConfig summation_config(const json& doc) {
  SummationConfig c;
  if (doc.contains("pade")) {
    const auto [m, n] = int_pair(doc.at("pade"), "pade");
    if (m < 0 || n < 0) throw UsageError("pade degrees must be non-negative");
    c.pade_degrees = std::make_pair(m, n);
  }
  if (!doc.contains("quad")) return c;
  const json& q = doc.at("quad");
  if (!q.is_object()) throw UsageError("quad must be an object");
  try {
    for (const auto& [key, v] : q.items()) {
      if (key == "laguerre_nodes") {
        c.laguerre_nodes = v.get<std::vector<int>>();
        if (c.laguerre_nodes.empty()) throw UsageError("quad.laguerre_nodes must not be empty");
      } else if (key == "rel_tol") {
        c.quad_rel_tol = v.get<double>();
      } else if (key == "max_rotation") {
        c.max_rotation = v.get<double>();
      } else if (key == "singular_tolerance") {
        c.singular_tolerance = v.get<double>();
      } else if (key == "cluster_tolerance") {
        c.cluster_tolerance = v.get<double>();
      } else if (key == "lattice_cap") {
        c.lattice_cap = v.get<int>();
      } else if (key == "growth_u_max") {
        c.growth_u_max = v.get<double>();
      } else if (key == "svd_tolerance") {
        c.svd_tolerance = v.get<double>();
      } else if (key == "pole_radius_cap") {
        c.pole_radius_cap = v.get<double>();
      } else if (key == "residue_floor") {
        c.residue_floor = v.get<double>();
      } else if (key == "pade_error_estimate") {
        c.pade_error_estimate = v.get<bool>();
      } else {
        throw UsageError("unknown quad setting \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("quad: ") + e.what());
  }
  return c;
}

BivariateSeries random_series(const json& spec, std::uint64_t seed) {
  const int l = spec.value("l", 1);
  if (l < 1) throw UsageError("random.l must be positive");
  if (!spec.contains("trunc")) throw UsageError("random series needs trunc");
  const Box b = box_from(spec.at("trunc"));
  const double growth = spec.value("gevrey", 0.0);
  const double radius = spec.value("radius", 1.0);
  if (!(radius > 0.0)) throw UsageError("random.radius must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  BivariateSeries f(static_cast<std::size_t>(l), b);
  for (int n = 0; n <= b.n1; ++n)
    for (int m = 0; m <= b.n2; ++m) {
      const double scale = std::exp(growth * std::lgamma(n + m + 1.0) - (n + m) * std::log(radius));
      CVector v;
      for (int j = 0; j < l; ++j) {
        const double re = unit(rng);
        const double im = unit(rng);
        v.emplace_back(scale * re, scale * im);
      }
      f.set({n, m}, v);
    }
  return f;
}

BivariateSeries input_series(const json& doc, std::uint64_t seed) {
  const json& s = doc.at("series");
  BivariateSeries f = s.contains("random") ? random_series(s.at("random"), seed) : io::series_from_json(s);
  if (doc.contains("trunc")) f = f.restricted(box_from(doc.at("trunc")));
  return f;
}

std::vector<MonomialWeight> weights_of(const json& doc) {
  std::vector<MonomialWeight> out;
  if (!doc.contains("weights")) return out;
  if (!doc.at("weights").is_array() || doc.at("weights").empty())
    throw UsageError("weights must be a non-empty array");
  for (const auto& w : doc.at("weights")) out.push_back(io::weight_from_json(w));
  return out;
}

std::vector<double> directions_of(const json& doc) {
  const json& d = doc.at("directions");
  if (!d.is_array() || d.empty()) throw UsageError("directions must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : d) {
    if (!x.is_number()) throw UsageError("directions must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<Point> points_of(const json& doc) {
  const json& p = doc.at("points");
  if (!p.is_array() || p.empty()) throw UsageError("points must be a non-empty array");
  std::vector<Point> out;
  for (const auto& x : p) out.push_back(io::point_from_json(x));
  return out;
}

json resolve_file(const json& value, const fs::path& base_dir) {
  if (value.is_object() && value.size() == 1 && value.contains("file")) {
    const fs::path p = base_dir / value.at("file").get<std::string>();
    if (!fs::exists(p)) throw UsageError("referenced file not found: " + p.string());
    return io::read_json_file(p.string());
  }
  return value;
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw UsageError("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw UsageError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string csv(const PlotTable& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << '\n';
  }
  return os.str();
}

PlotTable coeff_growth_table(const std::vector<BivariateSeries>& parts) {
  std::map<int, double> best;
  for (const auto& f : parts)
    for (const auto& [e, v] : f.coeffs()) {
      const double a = max_norm(v);
      if (a > 0.0) best[e.n + e.m] = std::max(best[e.n + e.m], a);
    }
  PlotTable t{{"degree", "log_max_norm"}, {}};
  for (const auto& [deg, a] : best) t.rows.push_back({static_cast<double>(deg), std::log(a)});
  return t;
}

/// Continuation at `point` plus the pole and ray-profile plots derived from it.
void continuation_plots(ReportRecord& rep, const TransformedSeries& phi, Point point, double theta,
                        const SummationConfig& cfg) {
  try {
    const RaySeries ray = reduce_to_ray(phi, point, cfg.lattice_cap);
    const PadeContinuation cont =
        pade_continue(ray, cfg.pade_degrees.value_or(default_pade_degrees(ray.coeffs.size())), cfg);
    const MonomialWeight& w = phi.weight;
    const Complex t = int_pow(point.first, w.p()) * int_pow(point.second, w.q());
    const double inv_k = 1.0 / w.k().to_double();
    PlotTable poles{{"zeta_re", "zeta_im", "residue", "component", "principal"}, {}};
    for (const auto& pl : cont.poles) {
      const Complex zeta = t * std::pow(pl.u, inv_k);
      poles.rows.push_back({zeta.real(), zeta.imag(), pl.residue, static_cast<double>(pl.component),
                            pl.principal ? 1.0 : 0.0});
    }
    rep.plots["pole-map"] = std::move(poles);

    PlotTable profile{{"u", "norm"}, {}};
    const double U = 20.0;
    const Complex dir = std::polar(1.0, theta);
    for (int i = 1; i <= 200; ++i) {
      const double u = U * i / 200.0;
      const CVector v = cont.evaluate(u * dir);
      profile.rows.push_back({u, max_norm(v)});
    }
    rep.plots["ray-profile"] = std::move(profile);
  } catch (const Error& e) {
    rep.warnings.push_back(std::string("continuation plots unavailable: ") + e.what());
  }
}

struct SumRow {
  std::size_t weight = 0;
  std::size_t direction = 0;
  std::size_t point = 0;
  std::optional<SumEvaluation> eval;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::string warning;
  std::exception_ptr error;
};

std::string row_label(const SumRow& r, const std::vector<double>& dirs, const std::vector<Rational>& s) {
  std::ostringstream os;
  os << "s=" << s[r.weight] << " d=" << format_double(dirs[r.direction]) << " point#" << r.point;
  return os.str();
}

/// Evaluates every (weight, direction, point) row; singular-direction and non-summable rows
/// become warnings, anything else aborts the run.
std::vector<SumRow> run_rows(std::size_t weights, std::size_t dirs, std::size_t points, int jobs,
                             const std::function<void(SumRow&)>& eval) {
  std::vector<SumRow> rows;
  for (std::size_t w = 0; w < weights; ++w)
    for (std::size_t d = 0; d < dirs; ++d)
      for (std::size_t p = 0; p < points; ++p) rows.push_back({w, d, p, std::nullopt, 0.0, {}, nullptr});
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    try {
      eval(rows[i]);
    } catch (const SingularDirectionError& e) {
      rows[i].warning = e.what();
    } catch (const NotSummableError& e) {
      rows[i].warning = e.what();
    } catch (...) {
      rows[i].error = std::current_exception();
    }
  });
  for (const auto& r : rows)
    if (r.error) std::rethrow_exception(r.error);
  return rows;
}

void sum_outputs(ReportRecord& rep, const std::vector<SumRow>& rows, const std::vector<double>& dirs,
                 const std::vector<Rational>& s_values, bool residuals) {
  std::vector<SumEvaluation> evals;
  std::ostringstream res;
  if (residuals)
    res << "point_x1_re,point_x1_im,point_x2_re,point_x2_im,direction,s_num,s_den,residual\n";
  double max_err = 0.0;
  double max_res = 0.0;
  std::size_t omitted = 0;
  PlotTable sweep;
  for (const auto& r : rows) {
    if (!r.eval) {
      ++omitted;
      rep.warnings.push_back("row omitted (" + row_label(r, dirs, s_values) + "): " + r.warning);
      continue;
    }
    const SumEvaluation& e = *r.eval;
    evals.push_back(e);
    max_err = std::max(max_err, e.err_estimate);
    if (residuals) {
      max_res = std::max(max_res, r.residual);
      res << format_double(e.point.first.real()) << ',' << format_double(e.point.first.imag()) << ','
          << format_double(e.point.second.real()) << ',' << format_double(e.point.second.imag()) << ','
          << format_double(e.direction) << ',' << e.weight.s().num() << ',' << e.weight.s().den() << ','
          << format_double(r.residual) << '\n';
    }
    if (r.weight == 0 && r.point == 0) {
      if (sweep.header.empty()) {
        sweep.header.emplace_back("d");
        for (std::size_t i = 0; i < e.value.size(); ++i) sweep.header.push_back("value_re_" + std::to_string(i));
        for (std::size_t i = 0; i < e.value.size(); ++i) sweep.header.push_back("value_im_" + std::to_string(i));
      }
      std::vector<double> row{e.direction};
      for (const auto& v : e.value) row.push_back(v.real());
      for (const auto& v : e.value) row.push_back(v.imag());
      sweep.rows.push_back(std::move(row));
    }
  }
  std::ostringstream os;
  io::write_sum_csv(os, evals);
  rep.outputs["sums.csv"] = os.str();
  if (residuals) rep.outputs["residuals.csv"] = res.str();
  if (!sweep.rows.empty()) rep.plots["direction-sweep"] = std::move(sweep);

  rep.summary["rows"] = evals.size();
  rep.summary["omitted_rows"] = omitted;
  rep.summary["max_err_estimate"] = max_err;
  if (residuals) rep.summary["max_residual"] = max_res;
  if (!evals.empty()) rep.summary["singular_directions"] = evals.front().singular_directions;
}

double first_theta(const std::vector<SumRow>& rows) {
  for (const auto& r : rows)
    if (r.eval && r.weight == 0 && r.point == 0) return r.eval->theta;
  return 0.0;
}

json complex_list(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(io::to_json(v[i]));
  return out;
}

// ---- modes ---------------------------------------------------------------

void run_borel(const ExperimentConfig& cfg, ReportRecord& rep) {
  const BivariateSeries f = guarded("cli_runner/input", [&] { return input_series(cfg.document, cfg.seed); });
  json results = json::array();
  for (const auto& w : weights_of(cfg.document)) {
    const TransformedSeries g = guarded("monomial_transforms/formal_borel", [&] { return formal_borel(f, w); });
    results.push_back(io::to_json(g));
  }
  rep.outputs["borel.json"] = dump_json(results.size() == 1 ? results.front() : results);
  rep.summary["coefficients"] = f.size();
  rep.summary["weights"] = results.size();
  rep.plots["coeff-growth"] = coeff_growth_table({f});
}

void run_laplace(const ExperimentConfig& cfg, ReportRecord& rep) {
  TransformedSeries g =
      guarded("cli_runner/input", [&] { return io::transformed_from_json(cfg.document.at("series")); });
  if (cfg.document.contains("trunc")) g.base = g.base.restricted(box_from(cfg.document.at("trunc")));
  const BivariateSeries f = guarded("monomial_transforms/formal_laplace", [&] { return formal_laplace(g); });
  rep.outputs["laplace.json"] = dump_json(io::to_json(f));
  rep.summary["coefficients"] = f.size();
  rep.plots["coeff-growth"] = coeff_growth_table({f});
}

void run_sum(const ExperimentConfig& cfg, ReportRecord& rep) {
  const json& doc = cfg.document;
  const BivariateSeries f = guarded("cli_runner/input", [&] { return input_series(doc, cfg.seed); });
  const auto weights = weights_of(doc);
  const auto dirs = directions_of(doc);
  const auto points = points_of(doc);
  SummationConfig sc = summation_config(doc);
  sc.jobs = 1;

  std::vector<TransformedSeries> phis;
  std::vector<Rational> s_values;
  for (const auto& w : weights) {
    phis.push_back(guarded("monomial_transforms/formal_borel",
                           [&] { return formal_borel(f.shifted(w.pk_int(), w.qk_int()), w); }));
    s_values.push_back(w.s());
  }
  const auto rows = guarded("summation_pipeline/borel_sum", [&] {
    return run_rows(weights.size(), dirs.size(), points.size(), cfg.jobs, [&](SumRow& r) {
      r.eval = borel_sum_at(phis[r.weight], dirs[r.direction], points[r.point], sc);
    });
  });
  sum_outputs(rep, rows, dirs, s_values, false);
  continuation_plots(rep, phis.front(), points.front(), first_theta(rows), sc);
  rep.plots["coeff-growth"] = coeff_growth_table({f});
}

LinearMonomialPDE pde_problem(const json& doc) {
  return guarded("pde_solver/input", [&] { return io::pde_from_json(doc.at("problem")); });
}

PfaffianSystem pfaffian_problem(const json& doc) {
  return guarded("pde_solver/input", [&] { return io::pfaffian_from_json(doc.at("problem")); });
}

void run_pde_solve(const ExperimentConfig& cfg, ReportRecord& rep) {
  const LinearMonomialPDE prob = pde_problem(cfg.document);
  const Box box = box_from(cfg.document.at("trunc"));
  const SeriesVector y = guarded("pde_solver/formal_solution", [&] { return formal_solution(prob, box); });
  json comps = json::array();
  for (const auto& c : y) comps.push_back(io::to_json(c));
  rep.outputs["solution.json"] = dump_json({{"box", {box.n1, box.n2}}, {"components", comps}});

  json gevrey = json::array();
  for (std::size_t i = 0; i < y.size(); ++i) {
    try {
      const GevreyEstimate g = gevrey_order_estimate(y[i], prob.p, prob.q);
      gevrey.push_back({{"component", i}, {"s_hat", g.s_hat}, {"C_hat", g.C_hat}, {"A_hat", g.A_hat},
                        {"residual", g.residual}, {"samples", g.samples}});
    } catch (const InsufficientDataError& e) {
      rep.warnings.push_back("gevrey estimate for component " + std::to_string(i) + ": " + e.what());
      gevrey.push_back({{"component", i}, {"s_hat", nullptr}});
    }
  }
  rep.summary["eigenvalues"] = complex_list(prob.eigenvalues());
  rep.summary["singular_directions"] = singular_directions(prob);
  rep.summary["gevrey"] = gevrey;
  rep.summary["box"] = {box.n1, box.n2};
  rep.plots["coeff-growth"] = coeff_growth_table(y);
}

PdeSumOptions pde_sum_options(const json& doc) {
  PdeSumOptions o;
  o.summation = summation_config(doc);
  o.summation.jobs = 1;
  if (doc.contains("trunc")) o.box = box_from(doc.at("trunc"));
  o.target_coefficients = option(doc, "target_coefficients", o.target_coefficients);
  o.max_box = option(doc, "max_box", o.max_box);
  return o;
}

void run_pde_sum(const ExperimentConfig& cfg, ReportRecord& rep) {
  const json& doc = cfg.document;
  const LinearMonomialPDE prob = pde_problem(doc);
  const auto dirs = directions_of(doc);
  const auto points = points_of(doc);
  const PdeSumOptions base = pde_sum_options(doc);

  std::vector<std::optional<Rational>> s_choice;
  for (const auto& w : weights_of(doc)) {
    if (w.p() != prob.p || w.q() != prob.q || w.k() != Rational(1))
      throw UsageError("pde-sum weights must use the problem's p, q and k = 1");
    s_choice.emplace_back(w.s());
  }
  if (s_choice.empty()) s_choice.emplace_back(std::nullopt);

  std::vector<PreparedPdeSum> prepared;
  std::vector<Rational> s_values;
  for (const auto& s : s_choice) {
    PdeSumOptions o = base;
    o.summation_weight = s;
    prepared.push_back(guarded("pde_solver/sum_and_verify", [&] { return prepare_pde_sum(prob, o); }));
    s_values.push_back(prepared.back().weight.s());
  }
  const auto rows = guarded("pde_solver/sum_and_verify", [&] {
    return run_rows(prepared.size(), dirs.size(), points.size(), cfg.jobs, [&](SumRow& r) {
      VerifiedSum vs = verify_point(prob, prepared[r.weight], dirs[r.direction], points[r.point], base.summation);
      r.residual = vs.residual;
      r.eval = std::move(vs.eval);
    });
  });
  sum_outputs(rep, rows, dirs, s_values, true);
  rep.summary["eigenvalues"] = complex_list(prob.eigenvalues());
  rep.summary["box"] = {prepared.front().box.n1, prepared.front().box.n2};
  continuation_plots(rep, prepared.front().phi, points.front(), first_theta(rows), base.summation);
  rep.plots["coeff-growth"] = coeff_growth_table(prepared.front().solution);
}

void run_pfaffian_check(const ExperimentConfig& cfg, ReportRecord& rep) {
  const PfaffianSystem sys = pfaffian_problem(cfg.document);
  const Box box = box_from(cfg.document.at("trunc"));
  const double tol = option(cfg.document, "pairing_tolerance", 1e-8);
  const IntegrabilityReport ir =
      guarded("pde_solver/pfaffian_integrability_check", [&] { return pfaffian_integrability_check(sys, box); });
  const PairingReport pr =
      guarded("pde_solver/eigenvalue_pairing_check", [&] { return eigenvalue_pairing_check(sys, tol); });
  json pairs = json::array();
  for (const auto& e : pr.entries)
    pairs.push_back({{"mu", io::to_json(e.mu)}, {"lambda", e.lambda ? io::to_json(*e.lambda) : json(nullptr)}});
  json out = {{"matrix_defect", ir.matrix_defect},
              {"forcing_defect", ir.forcing_defect},
              {"matrix_worst", {ir.matrix_worst.n, ir.matrix_worst.m}},
              {"forcing_worst", {ir.forcing_worst.n, ir.forcing_worst.m}},
              {"pairing", pairs},
              {"pairing_pass", pr.pass}};
  rep.outputs["pfaffian.json"] = dump_json(out);
  rep.summary = out;
}

void run_convergence_scan(const ExperimentConfig& cfg, ReportRecord& rep) {
  const PfaffianSystem sys = pfaffian_problem(cfg.document);
  const int s_points = option(cfg.document, "s_points", 101);
  const int d_points = option(cfg.document, "direction_points", 101);
  const double tol = option(cfg.document, "angular_tolerance", 0.02);
  if (s_points < 2 || d_points < 1) throw UsageError("scan grids need s_points >= 2 and direction_points >= 1");
  const ScanVerdict v = guarded("pde_solver/convergence_scan", [&] {
    return convergence_scan(sys, default_s_grid(s_points), default_direction_grid(d_points), tol);
  });
  json wit = json::array();
  std::ostringstream os;
  os << "direction,has_witness,s_num,s_den\n";
  for (const auto& [d, s] : v.witnesses) {
    wit.push_back({{"direction", d}, {"s", s ? io::to_json(*s) : json(nullptr)}});
    os << format_double(d) << ',' << (s ? 1 : 0) << ',' << (s ? s->num() : 0) << ',' << (s ? s->den() : 0) << '\n';
  }
  const std::string verdict = v.convergent ? "convergent" : "inconclusive";
  rep.outputs["scan.json"] = dump_json({{"verdict", verdict}, {"reason", v.reason}, {"witnesses", wit}});
  rep.outputs["witnesses.csv"] = os.str();
  rep.summary["verdict"] = verdict;
  rep.summary["reason"] = v.reason;
}

void run_fixpoint_oracle(const ExperimentConfig& cfg, ReportRecord& rep) {
  const json& doc = cfg.document;
  const LinearMonomialPDE prob = pde_problem(doc);
  const auto points = points_of(doc);
  const double U = option(doc, "ray_length", 2.0);
  const int nodes = option(doc, "nodes", 129);
  const double tol = option(doc, "tol", 1e-13);
  const int max_iter = option(doc, "max_iter", 200);
  PicardOptions popts;
  popts.tanh_sinh_level = option(doc, "tanh_sinh_level", popts.tanh_sinh_level);
  if (!(U > 0.0) || nodes < 3 || max_iter < 1) throw UsageError("fixpoint options out of range");
  const PdeSumOptions sopts = pde_sum_options(doc);
  const SummationConfig& sc = sopts.summation;

  const ConvolutionProblem cp =
      guarded("convolution_fixpoint/build_convolution_problem", [&] { return build_convolution_problem(prob); });
  const Box box = sopts.box.value_or(default_solution_box(cp.weight, sopts.target_coefficients, sopts.max_box));
  const SeriesVector y = guarded("pde_solver/formal_solution", [&] { return formal_solution(prob, box); });
  std::vector<BivariateSeries> shifted;
  for (const auto& c : y) shifted.push_back(c.shifted(prob.p, prob.q));
  BivariateSeries packed(y.size(), shifted.front().trunc());
  for (std::size_t i = 0; i < shifted.size(); ++i)
    for (const auto& [e, v] : shifted[i].coeffs()) {
      CVector c = packed.coeff(e);
      c[i] = v[0];
      packed.set(e, c);
    }
  const TransformedSeries phi =
      guarded("monomial_transforms/formal_borel", [&] { return formal_borel(packed, cp.weight); });

  struct Outcome {
    PicardResult sol;
    double defect = 0.0;
    double discrepancy = 0.0;
    std::exception_ptr error;
  };
  std::vector<Outcome> res(points.size());
  parallel_for(points.size(), cfg.jobs, [&](std::size_t i) {
    try {
      const RayGrid grid = make_ray_grid(cp, points[i], U, nodes);
      res[i].sol = picard_solve_on_ray(cp, grid, tol, max_iter, popts);
      res[i].defect = fixed_point_defect(cp, res[i].sol);
      const RaySeries ray = reduce_to_ray(phi, points[i], sc.lattice_cap);
      const PadeContinuation cont =
          pade_continue(ray, sc.pade_degrees.value_or(default_pade_degrees(ray.coeffs.size())), sc);
      res[i].discrepancy = cross_validate(cp, cont, res[i].sol.grid);
    } catch (...) {
      res[i].error = std::current_exception();
    }
  });
  guarded("convolution_fixpoint/picard_solve_on_ray", [&] {
    for (const auto& r : res)
      if (r.error) std::rethrow_exception(r.error);
    return 0;
  });

  std::ostringstream os;
  os << "point_x1_re,point_x1_im,point_x2_re,point_x2_im,iterations,converged,defect,discrepancy\n";
  double max_defect = 0.0;
  double max_disc = 0.0;
  bool all_converged = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& r = res[i];
    os << format_double(points[i].first.real()) << ',' << format_double(points[i].first.imag()) << ','
       << format_double(points[i].second.real()) << ',' << format_double(points[i].second.imag()) << ','
       << r.sol.iterations << ',' << (r.sol.converged ? 1 : 0) << ',' << format_double(r.defect) << ','
       << format_double(r.discrepancy) << '\n';
    std::ostringstream ray;
    io::write_ray_csv(ray, r.sol.grid);
    rep.outputs["ray_" + std::to_string(i) + ".csv"] = ray.str();
    max_defect = std::max(max_defect, r.defect);
    max_disc = std::max(max_disc, r.discrepancy);
    if (!r.sol.converged) {
      all_converged = false;
      rep.warnings.push_back("Picard iteration did not converge at point#" + std::to_string(i));
    }
  }
  rep.outputs["fixpoint.csv"] = os.str();
  rep.summary["max_defect"] = max_defect;
  rep.summary["max_discrepancy"] = max_disc;
  rep.summary["converged"] = all_converged;
  const auto [L, sigma] = ray_structure(cp, sc.lattice_cap);
  rep.summary["lattice"] = L;
  rep.summary["offset"] = io::to_json(sigma);

  PlotTable profile{{"u", "norm"}, {}};
  const auto& g = res.front().sol.grid;
  for (std::size_t k = 0; k < g.nodes.size(); ++k) profile.rows.push_back({g.nodes[k], max_norm(g.values[k])});
  std::sort(profile.rows.begin(), profile.rows.end());
  rep.plots["ray-profile"] = std::move(profile);
  rep.plots["coeff-growth"] = coeff_growth_table(y);
}

void run_lemma_audit(const ExperimentConfig& cfg, ReportRecord& rep) {
  const json& cases = options_of(cfg.document).at("cases");
  if (!cases.is_array() || cases.empty()) throw UsageError("options.cases must be a non-empty array");
  struct Case {
    int p, q;
    Rational s;
    int n_max, m_max, N_max;
    LemmaAudit audit;
    std::exception_ptr error;
  };
  std::vector<Case> work;
  for (const auto& c : cases) {
    try {
      work.push_back({c.at("p").get<int>(), c.at("q").get<int>(), io::rational_from_json(c.at("s")),
                      c.at("n_max").get<int>(), c.at("m_max").get<int>(), c.at("N_max").get<int>(), {}, nullptr});
    } catch (const json::exception& e) {
      throw UsageError(std::string("lemma case: ") + e.what());
    } catch (const ConfigurationError& e) {
      throw UsageError(std::string("lemma case: ") + e.what());
    }
  }
  parallel_for(work.size(), cfg.jobs, [&](std::size_t i) {
    auto& c = work[i];
    try {
      c.audit = lemma_bound_audit(c.p, c.q, c.s, c.n_max, c.m_max, c.N_max);
    } catch (...) {
      c.error = std::current_exception();
    }
  });
  guarded("convolution_fixpoint/lemma_bound_audit", [&] {
    for (const auto& c : work)
      if (c.error) std::rethrow_exception(c.error);
    return 0;
  });
  json out = json::array();
  std::ostringstream os;
  os << "case,N,sup\n";
  bool all = true;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const auto& c = work[i];
    const auto& a = c.audit;
    all = all && a.pass;
    out.push_back({{"p", c.p}, {"q", c.q}, {"s", io::to_json(c.s)}, {"n_max", c.n_max}, {"m_max", c.m_max},
                   {"N_max", c.N_max}, {"a", a.a}, {"sup", a.sup}, {"sup_lower", a.sup_lower},
                   {"sup_upper", a.sup_upper}, {"pass", a.pass}, {"argmax", {a.arg_n, a.arg_m, a.arg_N}}});
    for (std::size_t N = 0; N < a.profile.size(); ++N) os << i << ',' << N + 1 << ',' << format_double(a.profile[N]) << '\n';
  }
  rep.outputs["lemma.json"] = dump_json(out);
  rep.outputs["lemma_profile.csv"] = os.str();
  rep.summary["cases"] = work.size();
  rep.summary["all_pass"] = all;
}

json canonical(const json& document) {
  json c = document;
  c.erase("out");
  c.erase("jobs");
  return c;
}

}  // namespace

// ---- public ----------------------------------------------------------------

const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> modes = [] {
    std::vector<std::string> m;
    for (const auto& s : mode_specs()) m.push_back(s.name);
    return m;
  }();
  return modes;
}

const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds = {"ray-profile", "pole-map", "direction-sweep", "coeff-growth"};
  return kinds;
}

std::string config_hash(const json& canonical_doc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : canonical_doc.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  if (!j.contains("schema") || !j.at("schema").is_string() || j.at("schema").get<std::string>() != kConfigSchema)
    throw UsageError(std::string("config \"schema\" must be \"") + kConfigSchema + "\"");
  if (!j.contains("mode") || !j.at("mode").is_string()) throw UsageError("config needs a string \"mode\"");

  ExperimentConfig cfg;
  cfg.mode = j.at("mode").get<std::string>();
  const ModeSpec& spec = spec_for(cfg.mode);
  for (const auto& [key, v] : j.items()) {
    if (!kCommonKeys.count(key) && !contains(spec.required, key) && !contains(spec.optional, key))
      throw UsageError("field \"" + key + "\" is not valid for mode " + cfg.mode);
  }
  for (const auto& key : spec.required)
    if (!j.contains(key)) throw UsageError("mode " + cfg.mode + " requires field \"" + key + "\"");
  if (j.contains("options")) {
    if (!j.at("options").is_object()) throw UsageError("options must be an object");
    for (const auto& [key, v] : j.at("options").items())
      if (!contains(spec.options, key)) throw UsageError("option \"" + key + "\" is not valid for mode " + cfg.mode);
  }

  cfg.document = j;
  try {
    for (const char* key : {"series", "problem"})
      if (j.contains(key)) cfg.document[key] = resolve_file(j.at(key), base_dir);
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }

  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw UsageError("out must be a path string");
    cfg.out = j.at("out").get<std::string>();
  }
  if (j.contains("jobs")) {
    if (!j.at("jobs").is_number_integer() || j.at("jobs").get<int>() < 1) throw UsageError("jobs must be >= 1");
    cfg.jobs = j.at("jobs").get<int>();
  }
  if (j.contains("seed")) {
    const json& sd = j.at("seed");
    if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<std::int64_t>() >= 0)) throw UsageError("seed must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("plots")) {
    if (!j.at("plots").is_array()) throw UsageError("plots must be an array of kinds");
    for (const auto& k : j.at("plots"))
      if (!k.is_string() || !contains(plot_kinds(), k.get<std::string>()))
        throw UsageError("unknown plot kind " + k.dump());
  }

  // Decode everything once so content errors surface as usage errors before any work starts.
  try {
    const json& d = cfg.document;
    if (d.contains("series")) {
      if (cfg.mode == "laplace")
        (void)io::transformed_from_json(d.at("series"));
      else if (!d.at("series").contains("random"))
        (void)io::series_from_json(d.at("series"));
      else
        (void)random_series(d.at("series").at("random"), 0);
    }
    if (d.contains("problem")) {
      if (cfg.mode == "pfaffian-check" || cfg.mode == "convergence-scan")
        (void)io::pfaffian_from_json(d.at("problem"));
      else
        (void)io::pde_from_json(d.at("problem"));
    }
    (void)weights_of(d);
    if (d.contains("directions")) (void)directions_of(d);
    if (d.contains("points")) (void)points_of(d);
    if (d.contains("trunc")) (void)box_from(d.at("trunc"));
    (void)summation_config(d);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  } catch (const json::exception& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
  json j;
  try {
    j = io::read_json_file(path.string());
  } catch (const ConfigurationError& e) {
    throw UsageError(e.what());
  }
  return from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json ReportRecord::to_json() const {
  json names = json::array();
  for (const auto& [name, body] : outputs) names.push_back(name);
  json kinds = json::array();
  for (const auto& [kind, t] : plots) kinds.push_back(kind);
  const std::string eigen = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
  const std::string sp = std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                         std::to_string(SPDLOG_VER_PATCH);
  return {{"status", "ok"},
          {"mode", mode},
          {"config_hash", config_hash},
          {"versions", {{"monoborel", version}, {"eigen", eigen}, {"spdlog", sp}}},
          {"warnings", warnings},
          {"summary", summary},
          {"outputs", names},
          {"plot_kinds", kinds}};
}

ReportRecord run_experiment(const ExperimentConfig& cfg) {
  ReportRecord rep;
  rep.mode = cfg.mode;
  rep.config_hash = config_hash(canonical(cfg.document));
  logger().info("run_experiment: mode {} config {}", cfg.mode, rep.config_hash);

  static const std::map<std::string, void (*)(const ExperimentConfig&, ReportRecord&)> dispatch = {
      {"borel", run_borel},
      {"laplace", run_laplace},
      {"sum", run_sum},
      {"pde-solve", run_pde_solve},
      {"pde-sum", run_pde_sum},
      {"pfaffian-check", run_pfaffian_check},
      {"convergence-scan", run_convergence_scan},
      {"fixpoint-oracle", run_fixpoint_oracle},
      {"lemma-audit", run_lemma_audit},
  };
  const auto it = dispatch.find(cfg.mode);
  if (it == dispatch.end()) throw UsageError("unknown mode \"" + cfg.mode + "\"");
  it->second(cfg, rep);
  for (const auto& w : rep.warnings) logger().warn("{}", w);

  if (!cfg.out.empty()) {
    write_outputs(rep, cfg.out);
    if (cfg.document.contains("plots"))
      for (const auto& k : cfg.document.at("plots")) (void)emit_plot_data(rep, k.get<std::string>(), cfg.out);
  }
  return rep;
}

void write_outputs(const ReportRecord& report, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, body] : report.outputs) write_atomic(dir / name, body);
  write_atomic(dir / "report.json", dump_json(report.to_json()));
  logger().info("wrote {} files to {}", report.outputs.size() + 1, dir.string());
}

fs::path emit_plot_data(const ReportRecord& report, const std::string& kind, const fs::path& dir) {
  if (!contains(plot_kinds(), kind)) throw UsageError("unknown plot kind \"" + kind + "\"");
  const auto it = report.plots.find(kind);
  if (it == report.plots.end() || it->second.rows.empty())
    throw UsageError("report of mode " + report.mode + " has no rows for plot kind " + kind);
  fs::create_directories(dir);
  const fs::path path = dir / ("plot_" + kind + ".csv");
  write_atomic(path, csv(it->second));
  return path;
}

json error_json(const std::exception& e) {
  json out = {{"status", "error"}, {"message", e.what()}};
  if (const auto* xe = dynamic_cast<const ExperimentError*>(&e)) {
    out["kind"] = std::string(to_string(xe->kind()));
    out["context"] = xe->context();
  } else if (const auto* le = dynamic_cast<const Error*>(&e)) {
    out["kind"] = std::string(to_string(le->kind()));
  } else {
    out["kind"] = "internal";
  }
  return out;
}

}  // namespace monoborel
