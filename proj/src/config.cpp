#include "qdpillar/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qdpillar/error.hpp"

namespace qdpillar {

namespace {

enum class Unit {
  Time,       // s
  Rate,       // 1/s; a time is inverted, a frequency taken as 2 pi f
  Angular,    // rad/s; frequency as 2 pi f, energy as E / hbar
  Frequency,  // Hz
  Length,     // m
  Angle,      // rad
  Power,      // W
  Plain,
};

std::string where(const YAML::Node& node) {
  return "line " + std::to_string(node.Mark().line + 1);
}

[[noreturn]] void parse_fail(const YAML::Node& node, const std::string& key, const std::string& what) {
  raise(ErrorKind::Parse, "config " + where(node) + ": '" + key + "': " + what);
}

double scale_of(const std::string& suffix, const std::map<std::string, double>& table, bool& found) {
  const auto it = table.find(suffix);
  found = it != table.end();
  return found ? it->second : 0.0;
}

const std::map<std::string, double> kTime{{"s", 1.0},     {"ms", 1e-3},  {"us", 1e-6},
                                          {"ns", 1e-9},   {"ps", 1e-12}, {"fs", 1e-15}};
const std::map<std::string, double> kFrequency{
    {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}, {"THz", 1e12}};
const std::map<std::string, double> kEnergy{{"eV", 1.0}, {"meV", 1e-3}, {"ueV", 1e-6}};
const std::map<std::string, double> kLength{{"m", 1.0}, {"um", 1e-6}, {"nm", 1e-9}};
const std::map<std::string, double> kPower{{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}, {"nW", 1e-9}};

double quantity(const YAML::Node& node, const std::string& key, Unit unit) {
  if (!node.IsScalar()) parse_fail(node, key, "expected a scalar value");
  const std::string text = node.Scalar();
  static const std::regex pattern(
      R"(^\s*([-+]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][-+]?[0-9]+)?)?\s*([A-Za-z/0-9]*)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern) || (m[1].length() == 0 && m[2] != "pi"))
    parse_fail(node, key, "cannot read '" + text + "' as a number with an optional unit");
  const double value = m[1].length() ? std::stod(m[1].str()) : 1.0;
  const std::string suffix = m[2].str();
  if (suffix.empty()) return value;

  bool ok = false;
  double s = 0.0;
  switch (unit) {
    case Unit::Time:
      s = scale_of(suffix, kTime, ok);
      if (ok) return value * s;
      break;
    case Unit::Rate:
      if (suffix == "/s" || suffix == "1/s" || suffix == "rad/s") return value;
      s = scale_of(suffix, kTime, ok);
      if (ok) {
        if (value == 0.0) parse_fail(node, key, "a zero lifetime has no rate");
        return 1.0 / (value * s);
      }
      s = scale_of(suffix, kFrequency, ok);
      if (ok) return constants::two_pi * value * s;
      break;
    case Unit::Angular:
      if (suffix == "/s" || suffix == "rad/s") return value;
      s = scale_of(suffix, kFrequency, ok);
      if (ok) return constants::two_pi * value * s;
      s = scale_of(suffix, kEnergy, ok);
      if (ok) return value * s * constants::elementary_charge / constants::hbar;
      break;
    case Unit::Frequency:
      s = scale_of(suffix, kFrequency, ok);
      if (ok) return value * s;
      if (suffix == "/s") return value;
      break;
    case Unit::Length:
      s = scale_of(suffix, kLength, ok);
      if (ok) return value * s;
      break;
    case Unit::Angle:
      if (suffix == "rad") return value;
      if (suffix == "pi") return value * constants::pi;
      break;
    case Unit::Power:
      s = scale_of(suffix, kPower, ok);
      if (ok) return value * s;
      break;
    case Unit::Plain:
      break;
  }
  parse_fail(node, key, "unit '" + suffix + "' does not fit this field");
}

std::int64_t integer(const YAML::Node& node, const std::string& key) {
  const double v = quantity(node, key, Unit::Plain);
  if (v != std::floor(v) || std::abs(v) > 9.0e18) parse_fail(node, key, "expected an integer");
  return static_cast<std::int64_t>(v);
}

using Handler = std::function<void(const YAML::Node&, const std::string&)>;

void walk(const YAML::Node& section, const std::string& prefix,
          const std::map<std::string, Handler>& handlers) {
  if (!section.IsMap()) parse_fail(section, prefix, "expected a section of key: value pairs");
  for (const auto& kv : section) {
    const std::string key = kv.first.as<std::string>();
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    const auto it = handlers.find(key);
    if (it == handlers.end()) raise(ErrorKind::Parse, "config " + where(kv.first) + ": unknown key '" + full + "'");
    it->second(kv.second, full);
  }
}

Handler set(double& target, Unit unit) {
  return [&target, unit](const YAML::Node& n, const std::string& k) { target = quantity(n, k, unit); };
}

void parse_root(const YAML::Node& root, ExperimentConfig& c) {
  auto& em = c.emitter;
  auto& run = c.run;
  const std::map<std::string, Handler> diffusion{
      {"sigma", [&](const YAML::Node& n, const std::string& k) {
         em.diffusion.sigma = quantity(n, k, Unit::Angular);
         c.sigma_from_linewidth = false;
       }},
      {"inhomogeneous_fwhm", [&](const YAML::Node& n, const std::string& k) {
         c.inhomogeneous_fwhm = quantity(n, k, Unit::Frequency);
         c.sigma_from_linewidth = true;
       }},
      {"tau_c", set(em.diffusion.tau_c, Unit::Time)},
  };
  const std::map<std::string, Handler> emitter{
      {"gamma_bulk", set(em.gamma_bulk, Unit::Rate)},
      {"radiative_lifetime", set(c.radiative_lifetime, Unit::Time)},
      {"eid_coefficient", set(c.eid_coefficient, Unit::Time)},
      {"gamma_dephasing", [&](const YAML::Node& n, const std::string& k) {
         em.gamma_dephasing = quantity(n, k, Unit::Rate);
         c.dephasing_from_linewidth = false;
       }},
      {"homogeneous_fwhm", [&](const YAML::Node& n, const std::string& k) {
         c.homogeneous_fwhm = quantity(n, k, Unit::Frequency);
         c.dephasing_from_linewidth = true;
       }},
      {"spectral_diffusion", [&](const YAML::Node& n, const std::string& k) { walk(n, k, diffusion); }},
  };
  const std::map<std::string, Handler> cavity{
      {"quality_factor", set(c.cavity.quality_factor, Unit::Plain)},
      {"wavelength", set(c.cavity.wavelength, Unit::Length)},
      {"purcell_factor", set(c.cavity.purcell_factor, Unit::Plain)},
      {"detuning", set(c.cavity_detuning, Unit::Angular)},
  };
  const std::map<std::string, Handler> pulse{
      {"area", set(c.pulse.area, Unit::Angle)},
      {"fwhm", set(c.pulse.fwhm, Unit::Time)},
      {"rep_period", set(c.pulse.rep_period, Unit::Time)},
      {"rep_rate", [&](const YAML::Node& n, const std::string& k) {
         const double f = quantity(n, k, Unit::Frequency);
         if (!(f > 0.0)) raise(ErrorKind::Validation, "'" + k + "' must be > 0");
         c.pulse.rep_period = 1.0 / f;
       }},
  };
  const std::map<std::string, Handler> hom{
      {"delay", set(c.hom.delay, Unit::Time)},
      {"polarization", [&](const YAML::Node& n, const std::string& k) {
         const std::string v = n.as<std::string>();
         if (v == "parallel") c.hom.polarization = Polarization::Parallel;
         else if (v == "cross") c.hom.polarization = Polarization::Cross;
         else parse_fail(n, k, "expected 'parallel' or 'cross'");
       }},
      {"splitter_t", set(c.hom.splitter_t, Unit::Plain)},
      {"splitter_r", set(c.hom.splitter_r, Unit::Plain)},
      {"n_pairs", [&](const YAML::Node& n, const std::string& k) { c.hom.n_pairs = integer(n, k); }},
      {"detector_sigma", set(c.hom.detector_sigma, Unit::Time)},
      {"delays", [&](const YAML::Node& n, const std::string& k) {
         if (!n.IsSequence()) parse_fail(n, k, "expected a list of delays");
         run.hom_delays.clear();
         for (const auto& d : n) run.hom_delays.push_back(quantity(d, k, Unit::Time));
       }},
      {"bin_width", set(run.hom_bin_width, Unit::Time)},
  };
  const std::map<std::string, Handler> fp{
      {"finesse", set(c.fp.finesse, Unit::Plain)},
      {"fsr", set(c.fp.fsr, Unit::Frequency)},
      {"linewidth", set(c.fp.linewidth, Unit::Frequency)},
      {"transmission_peak", set(c.fp.transmission_peak, Unit::Plain)},
  };
  const std::map<std::string, Handler> budget{
      {"rep_rate", set(c.budget.rep_rate, Unit::Frequency)},
      {"detected_rate", set(c.budget.detected_rate, Unit::Frequency)},
      {"snr_pre_filter", set(c.budget.snr_pre_filter, Unit::Plain)},
      {"snr_post_filter", set(c.budget.snr_post_filter, Unit::Plain)},
      {"etalon_linewidth", set(c.etalon_linewidth, Unit::Frequency)},
      {"assumed_extraction", set(c.assumed_extraction, Unit::Plain)},
      {"stages", [&](const YAML::Node& n, const std::string& k) {
         if (!n.IsSequence()) parse_fail(n, k, "expected a list of {name, efficiency}");
         c.budget.stages.clear();
         for (const auto& item : n) {
           BudgetStage stage;
           bool has_name = false;
           bool has_eff = false;
           walk(item, k,
                {{"name", [&](const YAML::Node& v, const std::string&) {
                    stage.name = v.as<std::string>();
                    has_name = true;
                  }},
                 {"efficiency", [&](const YAML::Node& v, const std::string& kk) {
                    stage.efficiency = quantity(v, kk, Unit::Plain);
                    has_eff = true;
                  }}});
           if (!has_name || !has_eff) parse_fail(item, k, "each stage needs name and efficiency");
           c.budget.stages.push_back(stage);
         }
       }},
  };
  const std::map<std::string, Handler> runs{
      {"hbt_pulses", [&](const YAML::Node& n, const std::string& k) { run.hbt_pulses = integer(n, k); }},
      {"hbt_bin_width", set(run.hbt_bin_width, Unit::Time)},
      {"decay_pulses", [&](const YAML::Node& n, const std::string& k) { run.decay_pulses = integer(n, k); }},
      {"decay_bin_width", set(run.decay_bin_width, Unit::Time)},
      {"lifetime_points", [&](const YAML::Node& n, const std::string& k) {
         run.lifetime_points = static_cast<int>(integer(n, k));
       }},
      {"lifetime_max_detuning", set(run.lifetime_max_detuning, Unit::Angular)},
      {"lifetime_noise", set(run.lifetime_noise, Unit::Plain)},
      {"rabi_points", [&](const YAML::Node& n, const std::string& k) {
         run.rabi_points = static_cast<int>(integer(n, k));
       }},
      {"rabi_max_area", set(run.rabi_max_area, Unit::Angle)},
      {"rabi_pi_power", set(run.rabi_pi_power, Unit::Power)},
      {"spectrum_points", [&](const YAML::Node& n, const std::string& k) {
         run.spectrum_points = static_cast<int>(integer(n, k));
       }},
      {"spectrum_half_span", set(run.spectrum_half_span, Unit::Frequency)},
      {"spectrum_noise", set(run.spectrum_noise, Unit::Plain)},
  };
  walk(root, "",
       {
           {"seed", [&](const YAML::Node& n, const std::string& k) {
              const std::int64_t s = integer(n, k);
              if (s < 0) parse_fail(n, k, "seed must be non-negative");
              c.seed = static_cast<std::uint64_t>(s);
            }},
           {"output_dir", [&](const YAML::Node& n, const std::string&) { c.output_dir = n.as<std::string>(); }},
           {"emitter", [&](const YAML::Node& n, const std::string& k) { walk(n, k, emitter); }},
           {"cavity", [&](const YAML::Node& n, const std::string& k) { walk(n, k, cavity); }},
           {"pulse", [&](const YAML::Node& n, const std::string& k) { walk(n, k, pulse); }},
           {"hom", [&](const YAML::Node& n, const std::string& k) { walk(n, k, hom); }},
           {"fp", [&](const YAML::Node& n, const std::string& k) { walk(n, k, fp); }},
           {"budget", [&](const YAML::Node& n, const std::string& k) { walk(n, k, budget); }},
           {"run", [&](const YAML::Node& n, const std::string& k) { walk(n, k, runs); }},
       });
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.budget.stages = nominal_stages();
  c.derive();
  return c;
}

void ExperimentConfig::derive() {
  if (dephasing_from_linewidth)
    emitter.gamma_dephasing = std::max(constants::pi * homogeneous_fwhm - 0.5 * decay_rate(), 0.0);
  if (sigma_from_linewidth)
    emitter.diffusion.sigma = constants::two_pi * inhomogeneous_fwhm / constants::fwhm_per_sigma;
}

ObeRates ExperimentConfig::obe_rates() const {
  ObeRates r;
  r.gamma = decay_rate();
  r.gamma_dephasing = emitter.gamma_dephasing;
  r.eid_coefficient = eid_coefficient;
  return r;
}

double ExperimentConfig::post_filter_snr() const {
  if (budget.snr_post_filter > 0.0) return budget.snr_post_filter;
  const double signal = lorentzian_filter_transmission(
      homogeneous_fwhm, inhomogeneous_fwhm, etalon_linewidth);
  // Transform-limited pulse with field envelope exp(-t^2 / 2 sigma^2): the
  // spectral intensity has FWHM sqrt(ln 2) / (pi sigma) in Hz.
  const double laser_fwhm = std::sqrt(std::log(2.0)) / (constants::pi * pulse.sigma());
  const double laser = lorentzian_filter_transmission(0.0, laser_fwhm, etalon_linewidth);
  return filtered_snr(budget.snr_pre_filter, signal, laser);
}

double ExperimentConfig::background_rate(double signal_rate) const {
  return signal_rate / post_filter_snr();
}

void ExperimentConfig::validate() const {
  auto check = [](const char* section, const auto& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Validation) throw;
      raise(ErrorKind::Validation, std::string(section) + ": " + e.what());
    }
  };
  check("emitter", [&] { emitter.validate(); });
  check("emitter.radiative_lifetime", [&] {
    if (!(radiative_lifetime > 0.0)) raise(ErrorKind::InvalidParameter, "must be > 0");
  });
  check("emitter.eid_coefficient", [&] {
    if (!(eid_coefficient >= 0.0)) raise(ErrorKind::InvalidParameter, "must be >= 0");
  });
  check("emitter.homogeneous_fwhm", [&] {
    if (!(homogeneous_fwhm > 0.0)) raise(ErrorKind::InvalidParameter, "must be > 0");
  });
  check("emitter.spectral_diffusion.inhomogeneous_fwhm", [&] {
    if (!(inhomogeneous_fwhm >= 0.0)) raise(ErrorKind::InvalidParameter, "must be >= 0");
  });
  check("cavity", [&] { cavity.validate(); });
  check("pulse", [&] { pulse.validate(); });
  check("hom", [&] { hom.validate(); });
  check("fp", [&] { fp.validate(); });
  check("budget", [&] { budget.validate(); });
  check("budget.assumed_extraction", [&] {
    if (!(assumed_extraction > 0.0 && assumed_extraction <= 1.0))
      raise(ErrorKind::InvalidParameter, "must lie in (0, 1]");
  });
  check("budget.etalon_linewidth", [&] {
    if (!(etalon_linewidth > 0.0)) raise(ErrorKind::InvalidParameter, "must be > 0");
  });
  check("run", [&] {
    if (run.hbt_pulses < 1 || run.decay_pulses < 1) raise(ErrorKind::InvalidParameter, "pulse counts must be >= 1");
    if (!(run.hbt_bin_width > 0.0) || !(run.decay_bin_width > 0.0) || !(run.hom_bin_width > 0.0))
      raise(ErrorKind::InvalidParameter, "bin widths must be > 0");
    if (run.lifetime_points < 5) raise(ErrorKind::InvalidParameter, "lifetime_points must be >= 5");
    if (!(run.lifetime_max_detuning > 0.0)) raise(ErrorKind::InvalidParameter, "lifetime_max_detuning must be > 0");
    if (!(run.lifetime_noise >= 0.0) || !(run.spectrum_noise >= 0.0))
      raise(ErrorKind::InvalidParameter, "noise levels must be >= 0");
    if (run.rabi_points < 3 || !(run.rabi_max_area > 0.0) || !(run.rabi_pi_power > 0.0))
      raise(ErrorKind::InvalidParameter, "rabi grid needs >= 3 points, positive area and power");
    if (run.spectrum_points < 3 || !(run.spectrum_half_span > 0.0))
      raise(ErrorKind::InvalidParameter, "spectrum grid needs >= 3 points and a positive span");
    if (run.hom_delays.empty()) raise(ErrorKind::InvalidParameter, "hom.delays must not be empty");
    for (double d : run.hom_delays)
      if (!(d > 0.0)) raise(ErrorKind::InvalidParameter, "hom.delays must be positive");
  });
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    raise(ErrorKind::Parse, "config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c = ExperimentConfig::defaults();
  if (!root.IsNull()) {
    try {
      parse_root(root, c);
    } catch (const YAML::Exception& e) {
      raise(ErrorKind::Parse, "config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
  }
  c.derive();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Parse, "cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace qdpillar
