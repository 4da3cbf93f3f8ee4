#include <CLI11.hpp>

#include <iostream>

#include "fluxread/commands.hpp"
#include "fluxread/config.hpp"
#include "fluxread/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fluxonium dispersive readout simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t shots = 0;
  bool svg = false;

  using Command = int (*)(const fluxread::ExperimentConfig&, const fluxread::CommandOptions&);
  const std::pair<const char*, Command> commands[] = {
      {"spectrum", fluxread::cmd_spectrum},   {"chi", fluxread::cmd_chi},
      {"readout", fluxread::cmd_readout},     {"calibrate", fluxread::cmd_calibrate},
      {"sweep", fluxread::cmd_sweep},
  };
  const char* help[] = {
      "Transition frequencies over a flux grid",
      "Dispersive shift, divergences and multi-photon flags over a flux grid",
      "SNR-limited and assignment error versus integration time",
      "Efficiency and photon-number calibration from measured CSVs",
      "Readout error over a (delta_flux, n_bar) grid",
  };
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts, shot_opts;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("--config", config_path, "Config file")->required();
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    seed_opts.push_back(sub->add_option("--seed", seed, "Override the shot seed"));
    shot_opts.push_back(sub->add_option("--shots", shots, "Override shots per prepared state"));
    sub->add_flag("--svg", svg, "Also write SVG plots");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto config = fluxread::load_config(config_path);
    fluxread::CommandOptions options;
    options.out_dir = out_dir;
    options.svg = svg;
    options.log = &std::cerr;
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      if (seed_opts[i]->count()) options.seed = seed;
      if (shot_opts[i]->count()) options.shots = shots;
      return commands[i].second(config, options);
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fluxread: " << e.what() << '\n';
    return fluxread::exit_code_for(e);
  }
}
