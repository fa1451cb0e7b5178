// wsl <subcommand> --config <path> --out <dir> [--seed N]
// Exit codes: 0 success, 2 schema or usage error, 3 numerical failure.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "wsl/error.hpp"
#include "wsl/experiment.hpp"

namespace {

namespace ex = wsl::experiment;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("wsl");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("WSL_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

nlohmann::json read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw wsl::SchemaError("cannot read config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw wsl::SchemaError(path + ": invalid JSON (" + e.what() + ")");
  }
}

int run_experiment(ex::Subcommand sub, const std::string& config, const std::string& out,
                   std::optional<std::uint64_t> seed) {
  const ex::ExperimentConfig cfg = ex::load_config(sub, read_config(config), seed);
  spdlog::info("{} config hash {} seed {}", ex::subcommand_name(sub), cfg.hash, cfg.seed);
  const nlohmann::json result = ex::run(cfg, out);
  bool pass = true;
  for (const auto& c : result["checks"]) pass = pass && c["pass"].get<bool>();
  std::cout << ex::subcommand_name(sub) << ": " << result["checks"].size() << " checks, "
            << (pass ? "all passed" : "some failed") << " (" << out << ")\n";
  return 0;
}

int run_report(const std::string& in, const std::string& out) {
  const ex::Summary s = ex::report(in);
  ex::write_summary(s, out);
  std::cout << ex::format_summary(s);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"weighted spin geometry experiments"};
  app.require_subcommand(1);

  std::string config, out, in;
  std::uint64_t seed = 0;
  std::vector<std::pair<ex::Subcommand, CLI::App*>> experiments;
  for (ex::Subcommand s : {ex::Subcommand::mass, ex::Subcommand::weight_solve, ex::Subcommand::dirac,
                           ex::Subcommand::witten, ex::Subcommand::flow}) {
    CLI::App* cmd = app.add_subcommand(std::string(ex::subcommand_name(s)));
    cmd->add_option("--config", config, "JSON experiment config")->required();
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--seed", seed, "overrides the config seed");
    experiments.emplace_back(s, cmd);
  }
  CLI::App* rep = app.add_subcommand("report", "aggregate run reports");
  rep->add_option("--out", out, "directory for summary.csv and summary.txt")->required();
  rep->add_option("--in", in, "results directory (defaults to --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rep->parsed()) return run_report(in.empty() ? out : in, out);
    for (const auto& [sub, cmd] : experiments) {
      if (!cmd->parsed()) continue;
      const auto seed_opt = cmd->count("--seed") ? std::optional<std::uint64_t>(seed) : std::nullopt;
      return run_experiment(sub, config, out, seed_opt);
    }
  } catch (const wsl::SchemaError& e) {
    spdlog::error("{}", e.what());
    std::cerr << "schema error: " << e.what() << '\n';
    return 2;
  } catch (const wsl::Error& e) {
    std::cerr << "numerical failure in " << e.module() << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
