// wqed: scenario driver for the waveguide-QED router toolkit.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wqed/commands.hpp"
#include "wqed/errors.hpp"
#include "wqed/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Waveguide-QED single-atom router simulations"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::string out;
    std::string format;
    unsigned threads = 0;
    std::uint64_t seed = 0;
  };
  Flags flags;
  std::string chosen;

  const auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config_path", flags.config, "scenario config file");
    sub->add_option("--config,-c", flags.config, "scenario config file");
    sub->add_option("--out,-o", flags.out, "output file (default: [output] path, else stdout)");
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads,-j", flags.threads, "worker threads (default: WQED_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "random seed (default: [scenario] seed or 1)");
    sub->callback([&, name] { chosen = name; });
  };
  add("run", "dispatch on [scenario] kind");
  add("extinction-sweep", "transmission and reflection versus probe power");
  add("two-tone", "probe transmission with a pump on the other transition");
  add("eit-sweep", "probe transmission versus control amplitude");
  add("onoff-sweep", "normalised on/off ratios versus control amplitude");
  add("route-pulse", "time-resolved routing under a control pulse");
  add("network", "routing table of a cascaded router");
  add("fit", "fit a model to measured sweep data");
  add("spectrum", "resonance-fluorescence spectrum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : wqed::kExitConfig;
  }

  wqed::CommandOptions options;
  if (flags.config.empty()) {
    std::cerr << "config error: no config file given\n";
    return wqed::kExitConfig;
  }
  options.config = flags.config;
  if (!flags.out.empty()) options.out = flags.out;
  if (!flags.format.empty()) options.format = wqed::parse_format(flags.format);
  if (flags.threads > 0) options.threads = flags.threads;
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) options.seed = flags.seed;
  }
  return wqed::run_command(chosen, options, std::cout, std::cerr);
}
