#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoborel/errors.hpp"

namespace monoborel {

inline constexpr const char* kConfigSchema = "monoborel-experiment/1";
inline constexpr const char* kVersion = "0.1.0";

/// Validated experiment description. `document` is the config with file references
/// resolved and CLI overrides applied; it is what the hash is computed from.
struct ExperimentConfig {
  std::string mode;
  nlohmann::json document;
  std::filesystem::path out;
  int jobs = 1;
  std::uint64_t seed = 0;

  /// Throws UsageError on schema violations. Relative file references resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

[[nodiscard]] const std::vector<std::string>& experiment_modes();

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
[[nodiscard]] std::string config_hash(const nlohmann::json& canonical);

struct PlotTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct ReportRecord {
  std::string mode;
  std::string config_hash;
  std::string version = kVersion;
  std::vector<std::string> warnings;
  nlohmann::json summary = nlohmann::json::object();
  /// file name -> contents, written in name order
  std::map<std::string, std::string> outputs;
  std::map<std::string, PlotTable> plots;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Library failure annotated with the operation that raised it.
class ExperimentError : public Error {
 public:
  ExperimentError(ErrorKind kind, std::string context, const std::string& what)
      : Error(kind, what), context_(std::move(context)) {}
  [[nodiscard]] const std::string& context() const { return context_; }

 private:
  std::string context_;
};

/// Runs the mode; when config.out is non-empty also writes report.json and every output there.
[[nodiscard]] ReportRecord run_experiment(const ExperimentConfig& config);

/// Writes each output through a temporary file and rename.
void write_outputs(const ReportRecord& report, const std::filesystem::path& dir);

[[nodiscard]] const std::vector<std::string>& plot_kinds();

/// Writes plot_<kind>.csv into dir; UsageError when the report carries no rows for the kind.
std::filesystem::path emit_plot_data(const ReportRecord& report, const std::string& kind,
                                     const std::filesystem::path& dir);

/// {"status": "error", "kind", "message", "context"?}
[[nodiscard]] nlohmann::json error_json(const std::exception& e);

}  // namespace monoborel
