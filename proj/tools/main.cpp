#include <iostream>

#include "CLI11.hpp"
#include "dppcond/cli.hpp"

int main(int argc, char** argv) {
  namespace dc = dppcond::cli;
  CLI::App app{"Kernels, Palm measures and conditional measures of one-dimensional determinantal processes"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  for (const auto& info : dc::commands()) {
    CLI::App* sub = app.add_subcommand(info.name, info.summary);
    sub->add_option("-c,--config", config_path, "JSON config file (defaults are used for missing keys)");
    sub->add_option("-s,--set", overrides, "override a config value, e.g. --set sampler.seed=7");
    sub->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
    sub->footer("CSV columns: " + info.csv_columns);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dc::kConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (!out_dir.empty()) overrides.push_back("output.dir=" + dc::json(out_dir).dump());
  try {
    const dc::ExperimentConfig cfg = dc::load_config(command, config_path, overrides);
    return dc::run(cfg, std::cout);
  } catch (const dc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dc::kConfigError;
  }
}
