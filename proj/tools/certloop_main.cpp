#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "certloop/commands.hpp"

namespace {

std::string default_data(const std::string& file) { return "data/" + file; }

void parse_weights(const std::string& text, certloop::RunManifest& manifest) {
  auto comma = text.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("--weights expects w1,w2");
  manifest.w1 = std::stod(text.substr(0, comma));
  manifest.w2 = std::stod(text.substr(comma + 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Self-adaptation runtime with quantitative verification and assurance arguments"};
  cli.require_subcommand(1);

  certloop::RunManifest manifest;
  std::string weights;
  std::string mode = "logical-clock";
  std::string archive_dir;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--app", manifest.application, "Application: uuv or fx")->required();
    cmd->add_option("--registry", manifest.registry_path, "Registry file");
    cmd->add_option("--scenario", manifest.scenario_path, "Scenario file");
    cmd->add_option("--automata", manifest.automata_path,
                    "Controller automata network (defaults to data/automata/<app>_mape.kv)");
    cmd->add_option("--weights", weights, "Cost weights w1,w2 (overrides files)");
    cmd->add_option("--deadline", [&manifest](const CLI::results_t& v) {
      manifest.deadline_seconds = std::stod(v[0]);
      return true;
    }, "Analysis deadline in seconds");
    cmd->add_option("--out", manifest.out_dir, "Output directory");
    cmd->add_option("--mode", mode, "Clock mode: logical-clock or wall-clock")
        ->check(CLI::IsMember({"logical-clock", "wall-clock"}));
    cmd->add_option("--seed", manifest.seed, "Seed recorded in the manifest");
  };

  CLI::App* verify = cli.add_subcommand(
      "verify-controller", "Model-check the MAPE controller network (design time)");
  add_common(verify);

  CLI::App* run = cli.add_subcommand("run", "Run a change scenario end to end and archive it");
  add_common(run);

  CLI::App* report =
      cli.add_subcommand("report", "Audit an archive and print the decision table");
  report->add_option("--archive", archive_dir, "Archive directory")->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!weights.empty()) parse_weights(weights, manifest);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  manifest.wall_clock = mode == "wall-clock";
  if (manifest.automata_path.empty() && !manifest.application.empty())
    manifest.automata_path = default_data("automata/" + manifest.application + "_mape.kv");

  if (*verify) return certloop::cmd_verify_controller(manifest, std::cout);
  if (*run) return certloop::cmd_run_scenario(manifest, std::cout);
  if (*report) return certloop::cmd_report(archive_dir, std::cout);
  return 2;
}
