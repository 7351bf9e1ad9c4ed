// qdpillar: reproduce the micropillar single-photon source experiments.
//
//   qdpillar hbt --config config/nominal.cfg --out out/ --trials 200000

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qdpillar/cli_io.hpp"
#include "qdpillar/config.hpp"
#include "qdpillar/error.hpp"

int main(int argc, char** argv) {
  using namespace qdpillar;

  CLI::App app{"Pulsed resonance-fluorescence source simulator and fitter"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::int64_t> trials;
  std::optional<std::int64_t> bins;
  unsigned threads = 0;

  const char* help[] = {
      "Purcell lifetime curve, fit and resonant decay histogram",
      "Rabi oscillation: excited population versus sqrt(power)",
      "HBT histogram and g2(0) from the quantum-jump simulation",
      "Two-photon interference histograms and visibilities",
      "Emission spectrum, Fabry-Perot scan and Voigt fit",
      "Fit report for every estimator on seeded synthetic data",
      "Efficiency budget and extraction inference",
      "Every subcommand above",
  };
  std::size_t k = 0;
  for (const auto& name : subcommand_names()) {
    auto* sub = app.add_subcommand(name, help[k++]);
    sub->add_option("--config", config_path, "Config file (defaults: built-in nominal device)");
    sub->add_option("--seed", seed, "64-bit seed");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--trials", trials, "Monte Carlo pulses / pairs");
    sub->add_option("--bins", bins, "Histogram bins or spectrum samples");
    sub->add_option("--threads", threads, "Worker threads (0 = all cores); never changes output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig::defaults() : load_config(config_path);
    Overrides o;
    o.seed = seed;
    if (out_dir) o.output_dir = *out_dir;
    o.trials = trials;
    o.bins = bins;
    apply_overrides(config, o);
    run_subcommand(name, config, threads, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "qdpillar " << name << ": " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
