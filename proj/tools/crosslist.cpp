#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "crosslist/app/commands.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string windows;
  std::string max_lags;
  unsigned long long seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* opt = cmd->add_option("--config", o.config, "Run configuration file");
  if (config_required) opt->required();
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option_function<unsigned long long>(
      "--seed", [&o](const unsigned long long& v) { o.seed = v; o.seed_set = true; }, "Random seed");
  cmd->add_option("--windows", o.windows, "Estimation and event windows as a,b,c,d");
  cmd->add_option("--max-lags", o.max_lags, "GARCH lag-search ceiling as p,q");
}

}  // namespace

int main(int argc, char** argv) {
  namespace app = crosslist::app;
  CLI::App cli{"Cross-listing event study, CAPM and GARCH market-model toolkit"};
  cli.require_subcommand(1);

  Overrides o;
  auto* validate = cli.add_subcommand("validate", "Check input files and report coverage");
  auto* capm = cli.add_subcommand("capm", "Market-model regression and CAPM expected return per share class");
  auto* event = cli.add_subcommand("event-study", "Abnormal returns, Z statistics and variance ratios");
  auto* simulate = cli.add_subcommand("simulate", "Write a synthetic data bundle");
  add_common(validate, o, true);
  add_common(capm, o, true);
  add_common(event, o, true);
  add_common(simulate, o, false);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kExitInput;
  }

  app::RunConfig config;
  try {
    if (!o.config.empty()) config = app::load_config(o.config);
    if (!o.out.empty()) config.output_dir = o.out;
    if (o.seed_set) config.seed = o.seed;
    if (!o.windows.empty()) app::apply_windows_override(config, o.windows);
    if (!o.max_lags.empty()) app::apply_max_lags_override(config, o.max_lags);
  } catch (const crosslist::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return app::kExitInput;
  }

  if (*validate) return app::cmd_validate(config, std::cout);
  if (*capm) return app::cmd_capm(config, std::cout);
  if (*event) return app::cmd_event_study(config, std::cout);
  return app::cmd_simulate(config, std::cout);
}
