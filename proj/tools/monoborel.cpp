#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "monoborel/log.hpp"
#include "monoborel/runner.hpp"

namespace {

int fail(const std::exception& e, int code) {
  std::cout << monoborel::error_json(e).dump(2) << std::endl;
  monoborel::logger().error("{}", e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monomial Borel summation experiments"};
  std::string mode;
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  std::uint64_t seed = 0;

  std::string mode_list;
  for (const auto& m : monoborel::experiment_modes()) mode_list += (mode_list.empty() ? "" : ", ") + m;
  app.add_option("mode", mode, "One of: " + mode_list)->required();
  app.add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads for independent rows")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for randomly generated inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto cfg = monoborel::ExperimentConfig::from_file(config_path);
    if (cfg.mode != mode)
      throw monoborel::UsageError("config is for mode " + cfg.mode + " but mode " + mode + " was requested");
    if (*out_opt) cfg.out = out_dir;
    if (*jobs_opt) cfg.jobs = jobs;
    if (*seed_opt) {
      cfg.seed = seed;
      cfg.document["seed"] = seed;
    }
    const auto report = monoborel::run_experiment(cfg);
    std::cout << report.to_json().dump(2) << std::endl;
    return 0;
  } catch (const monoborel::Error& e) {
    return fail(e, e.kind() == monoborel::ErrorKind::usage ? 2 : 1);
  } catch (const std::exception& e) {
    return fail(e, 1);
  }
}
