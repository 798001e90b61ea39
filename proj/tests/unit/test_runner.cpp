#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "monoborel/errors.hpp"
#include "monoborel/runner.hpp"

using namespace monoborel;
using nlohmann::json;
namespace fs = std::filesystem;

#ifndef MONOBOREL_CONFIG_DIR
#define MONOBOREL_CONFIG_DIR "configs"
#endif

namespace {

json euler_problem() {
  return json::parse(R"({"p":1,"q":1,"s":[1,2],
    "C":[[{"l":1,"trunc":[0,0],"coeffs":[[0,0,[-1.0,0.0]]]}]],
    "gamma":[{"l":1,"trunc":[1,1],"coeffs":[[1,1,[1.0,0.0]]]}]})");
}

json base(const std::string& mode) { return {{"schema", kConfigSchema}, {"mode", mode}}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("monoborel_test_" + name);
  fs::remove_all(d);
  return d;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

TEST_SUITE("cli_runner") {
  TEST_CASE("schema violations are usage errors") {
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(json::object()), UsageError);
    json j = base("borel");
    j["schema"] = "something-else/9";
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(j), UsageError);
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(base("not-a-mode")), UsageError);
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(base("borel")), UsageError);  // missing series
    json extra = base("lemma-audit");
    extra["options"] = {{"cases", json::array()}};
    extra["bogus"] = 1;
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(extra), UsageError);
    json jobs = base("convergence-scan");
    jobs["problem"] = json::object();
    jobs["jobs"] = 0;
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(jobs), UsageError);
  }

  TEST_CASE("every mode is listed") {
    const auto& m = experiment_modes();
    CHECK(m.size() == 9);
    for (const char* name : {"borel", "laplace", "sum", "pde-solve", "pde-sum", "pfaffian-check", "convergence-scan",
                             "fixpoint-oracle", "lemma-audit"})
      CHECK(std::find(m.begin(), m.end(), name) != m.end());
  }

  TEST_CASE("borel mode on a single monomial") {
    json j = base("borel");
    j["series"] = json::parse(R"({"l":1,"trunc":[2,3],"coeffs":[[2,3,[1.0,0.0]]]})");
    j["weights"] = json::parse(R"([{"p":1,"q":1,"k":[1,1],"s":[1,2]}])");
    const auto rep = run_experiment(ExperimentConfig::from_json(j));
    REQUIRE(rep.outputs.count("borel.json") == 1);
    const json out = json::parse(rep.outputs.at("borel.json"));
    REQUIRE(out.at("coeffs").size() == 1);
    const auto& row = out.at("coeffs")[0];
    CHECK(row[0] == 1);  // Borel-plane exponent (n - pk, m - qk)
    CHECK(row[1] == 2);
    CHECK(std::abs(row[2][0].get<double>() - 0.752252779) < 1e-9);
    CHECK(out.at("plane") == "borel");
  }

  TEST_CASE("pde-sum reproduces the Euler value") {
    json j = base("pde-sum");
    j["problem"] = euler_problem();
    j["directions"] = {0.0};
    j["points"] = json::parse("[[0.5, 0.2]]");
    const auto rep = run_experiment(ExperimentConfig::from_json(j));
    std::stringstream csv(rep.outputs.at("sums.csv"));
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    const auto h = split(header);
    const auto r = split(row);
    REQUIRE(h.size() == r.size());
    const auto col = std::find(h.begin(), h.end(), "value_re_0") - h.begin();
    CHECK(std::abs(std::stod(r[col]) - 0.0915633) < 1e-7);
    CHECK(rep.summary.at("max_residual").get<double>() < 1e-6);
    CHECK(h.front() == "point_x1_re");
    CHECK(h.back() == "nearest_singular_direction");
  }

  TEST_CASE("convergence-scan verdict") {
    json j = base("convergence-scan");
    j["problem"] = json::parse(R"({"p":1,"q":1,
      "A":[[{"l":1,"trunc":[0,0],"coeffs":[[0,0,[1.0,0.0]]]}]],
      "B":[[{"l":1,"trunc":[0,0],"coeffs":[[0,0,[0.0,1.0]]]}]],
      "gamma1":[{"l":1,"trunc":[0,0],"coeffs":[]}],
      "gamma2":[{"l":1,"trunc":[0,0],"coeffs":[]}]})");
    const auto rep = run_experiment(ExperimentConfig::from_json(j));
    CHECK(rep.summary.at("verdict") == "convergent");
  }

  TEST_CASE("runs are reproducible and the hash ignores out and jobs") {
    json j = base("pde-sum");
    j["problem"] = euler_problem();
    j["directions"] = {0.0, 0.3};
    j["points"] = json::parse("[[0.5, 0.2], [0.25, 0.2], [0.3, 0.3]]");
    j["plots"] = {"ray-profile"};
    auto c1 = ExperimentConfig::from_json(j);
    c1.out = scratch_dir("det1");
    c1.jobs = 1;
    auto c2 = c1;
    c2.out = scratch_dir("det2");
    c2.jobs = 4;
    const auto r1 = run_experiment(c1);
    const auto r2 = run_experiment(c2);
    CHECK(r1.config_hash == r2.config_hash);
    CHECK(r1.config_hash.size() == 16);
    for (const char* f : {"sums.csv", "residuals.csv", "report.json", "plot_ray-profile.csv"}) {
      CHECK(fs::exists(c1.out / f));
      CHECK(slurp(c1.out / f) == slurp(c2.out / f));
    }
    for (const auto& e : fs::directory_iterator(c1.out)) CHECK(e.path().extension() != ".tmp");

    json changed = j;
    changed["directions"] = {0.0, 0.31};
    CHECK(run_experiment(ExperimentConfig::from_json(changed)).config_hash != r1.config_hash);
    CHECK(config_hash(j) == config_hash(json::parse(j.dump())));
  }

  TEST_CASE("seeded random series are deterministic") {
    json j = base("sum");
    j["series"] = {{"random", {{"l", 1}, {"trunc", {8, 8}}, {"gevrey", 0.0}, {"radius", 4.0}}}};
    j["weights"] = json::parse(R"([{"p":1,"q":1,"s":[1,2]}])");
    j["directions"] = {0.0};
    j["points"] = json::parse("[[0.3, 0.2]]");
    j["seed"] = 11;
    const auto a = run_experiment(ExperimentConfig::from_json(j));
    const auto b = run_experiment(ExperimentConfig::from_json(j));
    CHECK(a.outputs.at("sums.csv") == b.outputs.at("sums.csv"));
    j["seed"] = 12;
    CHECK(run_experiment(ExperimentConfig::from_json(j)).outputs.at("sums.csv") != a.outputs.at("sums.csv"));
  }

  TEST_CASE("plot requests without rows are usage errors") {
    ReportRecord rep;
    rep.mode = "borel";
    const auto dir = scratch_dir("plots");
    CHECK_THROWS_AS((void)emit_plot_data(rep, "direction-sweep", dir), UsageError);
    CHECK_THROWS_AS((void)emit_plot_data(rep, "no-such-kind", dir), UsageError);
    rep.plots["pole-map"] = PlotTable{{"zeta_re"}, {}};
    CHECK_THROWS_AS((void)emit_plot_data(rep, "pole-map", dir), UsageError);
    rep.plots["pole-map"].rows.push_back({1.0});
    CHECK(fs::exists(emit_plot_data(rep, "pole-map", dir)));
  }

  TEST_CASE("direction sweep omits the Stokes direction") {
    const auto cfg = ExperimentConfig::from_file(fs::path(MONOBOREL_CONFIG_DIR) / "direction_sweep_euler.json");
    const auto rep = run_experiment(cfg);
    const auto& rows = rep.plots.at("direction-sweep").rows;
    CHECK(!rows.empty());
    CHECK(rows.size() < cfg.document.at("directions").size());
    CHECK(!rep.warnings.empty());
    for (const auto& r : rows) CHECK(std::abs(r.front() - 3.14159265358979) > 0.02);
  }

  TEST_CASE("library failures carry their context") {
    json j = base("pde-solve");
    j["problem"] = euler_problem();
    j["problem"]["C"][0][0]["coeffs"][0][2] = json::array({0.0, 0.0});
    j["trunc"] = {4, 4};
    try {
      (void)run_experiment(ExperimentConfig::from_json(j));
      FAIL("expected an error");
    } catch (const ExperimentError& e) {
      CHECK(e.kind() == ErrorKind::precondition);
      const json ej = error_json(e);
      CHECK(ej.at("status") == "error");
      CHECK(ej.at("context").get<std::string>().rfind("pde_solver/", 0) == 0);
    }
  }
}
