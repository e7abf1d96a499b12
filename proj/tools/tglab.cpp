// tglab <command> --config <path> [--seed N] [--out DIR]
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tglab/commands.hpp"
#include "tglab/config.hpp"
#include "tglab/error.hpp"

int main(int argc, char** argv) {
  using namespace tglab;
  CLI::App app{"tglab: tilted graph states grown by double heralding"};
  std::string command, config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string names;
  for (const auto& n : command_names()) names += (names.empty() ? "" : " | ") + n;
  app.add_option("command", command, names)->required();
  app.add_option("--config,-c", config_path, "experiment config file")->required();
  app.add_option("--seed,-s", seed, "override the config seed");
  app.add_option("--out,-o", out_dir, "output directory for CSV files");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code_for(ErrorKind::Config);
  }

  try {
    const Command cmd = parse_command(command);
    ExperimentConfig cfg = parse_config(config_path);
    if (seed) cfg.set_seed(*seed);
    const CommandOutput out = run_command(cmd, cfg, out_dir);
    std::cout << out.report;
    for (const auto& f : out.files) std::cout << "wrote " << f << "\n";
    return out.exit_code;
  } catch (const Error& e) {
    std::cerr << "tglab: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "tglab: " << e.what() << "\n";
    return exit_code_for(ErrorKind::Numeric);
  }
}
