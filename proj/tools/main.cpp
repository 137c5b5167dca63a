#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cfmimo/sweep.hpp"

namespace {

int run_pipeline(cfm::ExperimentConfig config, const std::string& out_dir) {
  const cfm::SweepResult result = cfm::run_sweep(config);
  cfm::emit_report(result, config, out_dir);
  std::cout << "wrote " << result.records.size() << " records to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink cell-free massive MIMO energy-efficiency simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  if (const char* env = std::getenv("CFMIMO_OUT")) out_dir = env;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int realizations = 0;
  int threads = -1;
  if (const char* env = std::getenv("CFMIMO_THREADS")) threads = std::atoi(env);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Config file path")->required();
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--realizations", realizations, "Realization count override");
    cmd->add_option("--threads", threads, "Worker thread count (0 = all cores)");
  };

  CLI::App* run = app.add_subcommand("run", "Single configuration");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep");
  add_common(sweep);
  std::string param;
  std::vector<double> values;
  sweep->add_option("--param", param, "Swept parameter name");
  sweep->add_option("--values", values, "Swept values")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  cfm::ExperimentConfig config;
  try {
    config = cfm::parse_config_file(config_path);
    if (seed_set) config.seed = seed;
    if (realizations > 0) config.realizations = realizations;
    if (threads >= 0) config.threads = threads;

    if (app.got_subcommand(run)) {
      config.sweep_param.clear();
      config.sweep_values.clear();
    } else {
      if (!param.empty()) config.sweep_param = param;
      if (!values.empty()) config.sweep_values = values;
      if (config.sweep_param.empty() || config.sweep_values.empty())
        throw cfm::ConfigError("sweep requires --param/--values or a [sweep] section");
      // validate the parameter name before burning compute
      cfm::ExperimentConfig probe = config;
      cfm::apply_sweep_value(probe, config.sweep_param, config.sweep_values.front());
    }
  } catch (const cfm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    return run_pipeline(std::move(config), out_dir);
  } catch (const cfm::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
