#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qdpillar/cli_io.hpp"
#include "qdpillar/config.hpp"
#include "qdpillar/error.hpp"

using namespace qdpillar;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config accepted: " << text);
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("defaults derive dephasing and diffusion from the line widths") {
  const ExperimentConfig c = ExperimentConfig::defaults();
  // pi * 1.91 GHz - gamma / 2 with gamma = 1 / 83.9 ps
  CHECK(c.emitter.gamma_dephasing == doctest::Approx(constants::pi * 1.91e9 - 0.5 / 83.9e-12));
  CHECK(c.emitter.diffusion.sigma == doctest::Approx(2.0 * constants::pi * 1.14e9 / 2.35482).epsilon(1e-5));
  CHECK(c.obe_rates().gamma == doctest::Approx(1.0 / 83.9e-12));
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("unit suffixes") {
  const auto c = parse_config(R"(
seed: 17
emitter:
  radiative_lifetime: 0.0839 ns
  gamma_bulk: 587.8 ps
  homogeneous_fwhm: 1910 MHz
cavity:
  wavelength: 897.44 nm
  detuning: 10 GHz
pulse:
  area: 0.5 pi
  fwhm: 3000 fs
  rep_rate: 81 MHz
hom:
  delays: [2.1 ns, 12.4 ns]
run:
  rabi_pi_power: 2 nW
  lifetime_max_detuning: 100 ueV
)");
  CHECK(c.seed == 17);
  CHECK(c.radiative_lifetime == doctest::Approx(83.9e-12));
  CHECK(c.emitter.gamma_bulk == doctest::Approx(1.0 / 587.8e-12));
  CHECK(c.cavity.wavelength == doctest::Approx(897.44e-9));
  CHECK(c.cavity_detuning == doctest::Approx(2.0 * constants::pi * 10e9));
  CHECK(c.pulse.area == doctest::Approx(0.5 * constants::pi));
  CHECK(c.pulse.fwhm == doctest::Approx(3e-12));
  CHECK(c.pulse.rep_period == doctest::Approx(1.0 / 81e6));
  REQUIRE(c.run.hom_delays.size() == 2);
  CHECK(c.run.hom_delays[1] == doctest::Approx(12.4e-9));
  CHECK(c.run.rabi_pi_power == doctest::Approx(2e-9));
  // 100 ueV / hbar
  CHECK(c.run.lifetime_max_detuning == doctest::Approx(100e-6 * 1.602176634e-19 / 1.054571817e-34).epsilon(1e-9));
}

TEST_CASE("parse and validation errors") {
  CHECK(kind_of("emitter:\n  colour: red\n") == ErrorKind::Parse);
  CHECK(kind_of("pulse:\n  fwhm: 3 parsecs\n") == ErrorKind::Parse);
  CHECK(kind_of("pulse: [1, 2\n") == ErrorKind::Parse);
  CHECK(kind_of("cavity:\n  quality_factor: -5\n") == ErrorKind::Validation);
  CHECK(kind_of("hom:\n  polarization: diagonal\n") == ErrorKind::Parse);
  try {
    parse_config("seed: 1\nemitter:\n  colour: red\n");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/qdpillar.cfg"), Error);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(Error(ErrorKind::Parse, "x")) == 2);
  CHECK(exit_code_for(Error(ErrorKind::Validation, "x")) == 2);
  CHECK(exit_code_for(Error(ErrorKind::NonFiniteResidual, "x")) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 3);
}

TEST_CASE("overrides") {
  ExperimentConfig c = ExperimentConfig::defaults();
  Overrides o;
  o.seed = 9;
  o.trials = 1234;
  o.output_dir = "/tmp/somewhere";
  apply_overrides(c, o);
  CHECK(c.seed == 9);
  CHECK(c.run.hbt_pulses == 1234);
  CHECK(c.hom.n_pairs == 1234);
  CHECK(c.output_dir == "/tmp/somewhere");
}

TEST_CASE("CSV writer keeps 17 significant digits") {
  std::ostringstream out;
  const std::vector<std::string> header{"a", "b"};
  const std::vector<std::vector<double>> cols{{0.1, 1.0 / 3.0}, {2e-12, -7.0}};
  write_csv(out, header, cols);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
  std::getline(in, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 0.1);
  std::getline(in, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 1.0 / 3.0);
  const std::vector<std::vector<double>> ragged{{1.0}, {1.0, 2.0}};
  CHECK_THROWS_AS(write_csv(out, header, ragged), Error);
}

TEST_CASE("budget subcommand writes its summary") {
  ExperimentConfig c = ExperimentConfig::defaults();
  c.output_dir = std::filesystem::temp_directory_path() / "qdpillar_unit_budget";
  std::filesystem::create_directories(c.output_dir);
  std::ostringstream log;
  run_subcommand("budget", c, 1, log);
  std::ifstream f(c.output_dir / "budget_summary.json");
  const auto j = nlohmann::json::parse(f);
  CHECK(j.at("inferred_extraction").get<double>() == doctest::Approx(0.6675).epsilon(1e-3));
  CHECK_THROWS_AS(run_subcommand("nope", c, 1, log), Error);
  std::filesystem::remove_all(c.output_dir);
}

TEST_CASE("shipped config reproduces the built-in nominal device") {
  const ExperimentConfig f = load_config(std::filesystem::path(QDPILLAR_SOURCE_DIR) / "config/nominal.cfg");
  const ExperimentConfig d = ExperimentConfig::defaults();
  CHECK(f.emitter.gamma_bulk == doctest::Approx(d.emitter.gamma_bulk));
  CHECK(f.emitter.gamma_dephasing == doctest::Approx(d.emitter.gamma_dephasing));
  CHECK(f.emitter.diffusion.sigma == doctest::Approx(d.emitter.diffusion.sigma));
  CHECK(f.obe_rates().eid_coefficient == doctest::Approx(d.obe_rates().eid_coefficient));
  CHECK(f.pulse.rep_period == doctest::Approx(d.pulse.rep_period));
  CHECK(f.post_filter_snr() == doctest::Approx(d.post_filter_snr()));
  CHECK(f.run.lifetime_max_detuning == doctest::Approx(d.run.lifetime_max_detuning));
  CHECK(chain_efficiency(f.budget.stages) == doctest::Approx(chain_efficiency(d.budget.stages)));
}
