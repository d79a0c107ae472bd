#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lbvs_app/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Learning-based visual servoing simulator for mobile printing robots"};
  app.require_subcommand(1);

  lbvs::app::Options opts;
  std::string constraints, corner;
  std::string model;
  std::uint64_t seed = 0;

  const std::pair<const char*, const char*> commands[] = {
      {"calibrate", "Collect the self-calibration drive and train the interaction model"},
      {"follow", "Chase the scenario's pattern trajectory and report ATE and velocity lag"},
      {"print", "Print the scenario's wall and report thickness and corner over-deposit"},
      {"duo", "Two robots print the two halves of the sword outline in lockstep"},
      {"eval", "Compare the model with the analytic interaction matrix"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", opts.scenario, "Scenario file")->required();
    sub->add_option("--model", model, "Model file (default: <out>/model.bin)");
    sub->add_option("--seed", seed, "Run seed, overrides the scenario");
    sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
    sub->add_option("--constraints", constraints, "Gain schedule, saturation and fallback modes")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--corner", corner, "Corner strategy")->check(CLI::IsMember({"fixed", "compensate"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--model")) opts.model = model;
  if (chosen->count("--seed")) opts.seed = seed;
  if (!constraints.empty()) opts.constraints = constraints == "on";
  if (!corner.empty()) {
    opts.corner = corner == "fixed" ? lbvs::CornerStrategy::kFixed : lbvs::CornerStrategy::kCompensate;
  }
  return lbvs::app::run_command(chosen->get_name(), opts, std::cout, std::cerr);
}
