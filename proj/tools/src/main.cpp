#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo solver for forward-backward SDEs driven by sub-diffusions"};
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;
  for (const auto& name : subfbsde::cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config, "scenario JSON file")->required();
    sub->add_option("-o,--output-dir", output_dir, "directory for artifacts (overrides output_dir)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // Help output is a success; any other usage error counts as a validation error.
    return code == 0 ? 0 : subfbsde::cli::kExitValidation;
  }

  subfbsde::cli::RunOptions options;
  options.log = &std::cerr;
  if (!output_dir.empty()) options.output_dir = output_dir;
  const auto outcome = subfbsde::cli::run(app.get_subcommands().front()->get_name(), std::filesystem::path(config), options);
  for (const auto& p : outcome.artifacts) std::cout << p.string() << '\n';
  return outcome.exit_code;
}
