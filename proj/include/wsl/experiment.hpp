#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wsl/dirac.hpp"
#include "wsl/metric_family.hpp"

/// Config ingestion, experiment orchestration and result files for the `wsl`
/// command line tool. The config schema is documented in README.md.
namespace wsl::experiment {

inline constexpr int kSchemaVersion = 1;

enum class Subcommand { mass, weight_solve, dirac, witten, flow, report };

/// Throws SchemaError for unknown names.
Subcommand parse_subcommand(std::string_view name);
std::string_view subcommand_name(Subcommand s);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// x rounded to `digits` significant decimal digits (non-finite passes through).
double round_sig(double x, int digits = 12);

struct ExperimentConfig {
  Subcommand subcommand = Subcommand::mass;
  nlohmann::json body;  ///< validated config with the effective seed written in
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;  ///< defaults merged with overrides
  std::string hash;                          ///< fnv1a_hex of body.dump()
};

/// Validates `raw` against the schema of `subcommand` before anything is
/// computed. `seed` overrides the config's own seed. Throws SchemaError.
ExperimentConfig load_config(Subcommand subcommand, const nlohmann::json& raw,
                             std::optional<std::uint64_t> seed = std::nullopt);

family::MetricSpec parse_metric(const nlohmann::json& j);
dirac::ModelSpace parse_space(const nlohmann::json& j);

/// Tolerances a subcommand understands, with their defaults.
std::map<std::string, double> default_tolerances(Subcommand s);

/// Runs one experiment and writes its JSON report and CSV series into `out`
/// (created if missing). Returns the JSON report. Library errors propagate.
nlohmann::json run(const ExperimentConfig& config, const std::filesystem::path& out);

struct SummaryRow {
  std::string file;
  std::string subcommand;
  std::string config_hash;
  std::string check;
  std::optional<double> residual;   ///< empty when the run stored a non-finite value
  std::optional<double> tolerance;
  bool pass = false;
};

struct Summary {
  std::vector<SummaryRow> rows;
  bool all_pass() const;
};

/// Aggregates the checks of every run report (*.json other than summary
/// files) under `dir`. Throws SchemaError for unreadable or corrupt files and
/// for reports of another schema version.
Summary report(const std::filesystem::path& dir);

/// summary.csv (long format) and summary.txt in `out`.
void write_summary(const Summary& summary, const std::filesystem::path& out);
std::string format_summary(const Summary& summary);

}  // namespace wsl::experiment
