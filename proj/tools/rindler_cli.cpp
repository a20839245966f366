// Command-line front end: run / validate configuration files and run the
// shipped presets.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include "rindler/errors.hpp"
#include "rindler/scenario.hpp"

namespace sc = rindler::scenario;

namespace {

constexpr int kConfigFailure = 2;
constexpr int kIntegrationFailure = 3;

int run_config(const sc::Config& config, std::filesystem::path out, int threads) {
  if (out.empty()) out = config.get_or("output_path", "out");
  const auto outcome = sc::run(config, out, threads);
  for (const auto& f : outcome.files) std::cout << f.string() << '\n';
  return 0;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const rindler::IntegrationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIntegrationFailure;
  } catch (const rindler::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const rindler::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const rindler::CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective dynamics of uniformly accelerated two-level atoms"};
  app.require_subcommand(1);

  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  unsigned long long seed = 0;
  app.add_option("--threads", threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Reserved; the dynamics are deterministic");

  std::string config_path, out_dir, preset_name;
  std::string preset_dir = RINDLER_PRESET_DIR;

  auto* run = app.add_subcommand("run", "Run a configuration file");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("--out", out_dir, "Output directory (default: output_path key, else ./out)");

  auto* validate = app.add_subcommand("validate", "Check a configuration file without running it");
  validate->add_option("config", config_path, "Configuration file")->required();

  auto* preset = app.add_subcommand("preset", "Run one of the shipped presets");
  preset->add_option("name", preset_name, "fig2, fig3, fig4, counter_wedge or bec_design")->required();
  preset->add_option("--out", out_dir, "Output directory")->required();
  preset->add_option("--preset-dir", preset_dir, "Directory holding the preset files");

  CLI11_PARSE(app, argc, argv);

  if (*run) {
    return guarded([&] { return run_config(sc::load_config(config_path), out_dir, threads); });
  }
  if (*validate) {
    return guarded([&] {
      const auto diags = sc::validate(sc::load_config(config_path));
      for (const auto& d : diags) std::cerr << config_path << ": " << d.field << ": " << d.message << '\n';
      if (!diags.empty()) return kConfigFailure;
      std::cout << config_path << ": ok\n";
      return 0;
    });
  }
  return guarded([&] {
    return run_config(sc::load_config(sc::preset_path(preset_name, preset_dir)), out_dir, threads);
  });
}
