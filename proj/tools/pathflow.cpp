#include <pathflow/cli.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  namespace cli = pathflow::cli;
  CLI::App app{"Path-space flows and quasi-invariance checks on embedded manifolds"};
  app.set_version_flag("--version", std::string(cli::version()));

  std::string command, config, mode, out;
  int threads = 0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::vector<std::string> sets;

  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(cli::commands()));
  app.add_option("--config", config, "Experiment config file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Override the master seed");
  auto* samples_opt = app.add_option("--samples", samples, "Override the sample count");
  app.add_option("--threads", threads, "Worker threads (default: PATHFLOW_THREADS, then hardware)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "Results file (default: <command>_results.csv)");
  app.add_option("--mode", mode, "Flow integrator: euler or heun")
      ->check(CLI::IsMember({"euler", "heun"}));
  app.add_option("--set", sets, "Override any config key, KEY=VALUE (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::map<std::string, std::string> overrides;
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "pathflow: --set expects KEY=VALUE, got '" << kv << "'\n";
      return 2;
    }
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (*seed_opt) overrides["seed"] = std::to_string(seed);
  if (*samples_opt) overrides["samples"] = std::to_string(samples);
  if (!mode.empty()) overrides["mode"] = mode;

  return cli::run(command, config, overrides, {threads, out});
}
