// Command-line driver for the trade network pipeline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tradenet/pipeline.hpp"

namespace pl = tradenet::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Trade network analysis pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("--config", config_path, "Pipeline config (JSON)")->required();
  app.add_option("--seed", seed, "Master seed (unsigned 64-bit), overrides the config");
  app.add_option("--out", out, "Output directory, overrides the config");

  const std::map<std::string, std::pair<const char*, std::function<void(const pl::PipelineConfig&)>>> commands{
      {"ingest", {"Read flows and attributes, impute, write the canonical network", pl::cmd_ingest}},
      {"stats", {"Structural statistics", pl::cmd_stats}},
      {"connectivity", {"Threshold sweep of weak components", pl::cmd_connectivity}},
      {"ergm", {"Fit the ERGM by pseudo-likelihood and check goodness of fit", pl::cmd_ergm}},
      {"sbm", {"Fit stochastic block models and select the class count by ICL", pl::cmd_sbm}},
      {"report", {"Assemble the consolidated report", pl::cmd_report}},
  };
  for (const auto& [name, cmd] : commands) app.add_subcommand(name, cmd.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto cfg = pl::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.output_dir = *out;
    for (const auto* sub : app.get_subcommands()) commands.at(sub->get_name()).second(cfg);
  } catch (const tradenet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
