#include "qdpillar/emission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qdpillar/error.hpp"
#include "qdpillar/parallel.hpp"

namespace qdpillar {

namespace {

constexpr double kWindowSigmas = 5.0;

void sort_record(EmissionRecord& record) {
  const std::size_t n = record.times.size();
  if (std::is_sorted(record.times.begin(), record.times.end())) return;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return record.times[a] < record.times[b]; });
  std::vector<double> times(n);
  std::vector<PhotonSource> sources(n);
  for (std::size_t i = 0; i < n; ++i) {
    times[i] = record.times[order[i]];
    sources[i] = record.sources[order[i]];
  }
  record.times = std::move(times);
  record.sources = std::move(sources);
}

}  // namespace

std::size_t EmissionRecord::emitter_count() const noexcept {
  return static_cast<std::size_t>(
      std::count(sources.begin(), sources.end(), PhotonSource::Emitter));
}

void EmissionModel::validate() const {
  pulse.validate();
  rates.validate();
  if (!(rates.gamma > 0.0)) raise(ErrorKind::InvalidParameter, "emission needs gamma > 0");
  if (!(background_rate >= 0.0) || !std::isfinite(background_rate))
    raise(ErrorKind::InvalidParameter, "background_rate must be >= 0");
  if (!(dt >= 0.0)) raise(ErrorKind::InvalidParameter, "dt must be >= 0");
}

EmissionSampler::EmissionSampler(const EmissionModel& model) : model_(model) {
  model_.validate();
  const double s = model_.pulse.sigma();
  window_begin_ = model_.pulse.center - kWindowSigmas * s;
  window_end_ = model_.pulse.center + kWindowSigmas * s;
  const double target = model_.dt > 0.0 ? model_.dt : default_obe_step(model_.pulse, model_.rates);
  const auto steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((window_end_ - window_begin_) / target)));
  h_ = (window_end_ - window_begin_) / static_cast<double>(steps);

  table_.reserve(steps + 1);
  table_log_survival_.reserve(steps + 1);
  State s0(0.0, 1.0, 0.0, 0.0);
  table_.push_back(s0);
  table_log_survival_.push_back(0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    s0 = step(s0, window_begin_ + static_cast<double>(k) * h_, h_);
    table_.push_back(s0);
    table_log_survival_.push_back(std::log(s0(0) + s0(1)));
  }
}

EmissionSampler::State EmissionSampler::derivative(const State& s, double t) const {
  const double rabi = rabi_frequency(t, model_.pulse);
  const double g = model_.rates.gamma;
  const double g2 = model_.rates.coherence_decay(rabi);
  const double d = model_.rates.detuning;
  State ds;
  ds(0) = rabi * s(3) - g * s(0);
  ds(1) = -rabi * s(3);
  ds(2) = d * s(3) - g2 * s(2);
  ds(3) = -d * s(2) + 0.5 * rabi * (s(1) - s(0)) - g2 * s(3);
  return ds;
}

EmissionSampler::State EmissionSampler::step(const State& s, double t, double h) const {
  const State k1 = derivative(s, t);
  const State k2 = derivative(s + 0.5 * h * k1, t + 0.5 * h);
  const State k3 = derivative(s + 0.5 * h * k2, t + 0.5 * h);
  const State k4 = derivative(s + h * k3, t + h);
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double EmissionSampler::in_window_jump_probability() const {
  return 1.0 - std::exp(table_log_survival_.back());
}

double EmissionSampler::tail_jump(const State& end_state, double log_u) const {
  // Survival after the window: P_end * (1 - p + p exp(-gamma (t - t_end))).
  const double trace = end_state(0) + end_state(1);
  const double p = std::clamp(end_state(0) / trace, 0.0, 1.0);
  const double u_rel = std::exp(log_u) / trace;  // u / P_end
  const double floor = 1.0 - p;
  if (u_rel <= floor || p <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double decay = (u_rel - floor) / p;
  return window_end_ - std::log(std::min(decay, 1.0)) / model_.rates.gamma;
}

double EmissionSampler::next_jump(double t_start, double log_u) const {
  if (t_start <= window_begin_) {
    // Ground state at the window start: use the precomputed no-jump curve.
    const auto it = std::partition_point(table_log_survival_.begin(), table_log_survival_.end(),
                                         [log_u](double lp) { return lp >= log_u; });
    if (it == table_log_survival_.end()) return tail_jump(table_.back(), log_u);
    const auto k = static_cast<std::size_t>(it - table_log_survival_.begin());
    const double lp0 = table_log_survival_[k - 1];
    const double lp1 = table_log_survival_[k];
    const double frac = (lp0 - log_u) / (lp0 - lp1);
    return window_begin_ + (static_cast<double>(k - 1) + frac) * h_;
  }
  if (t_start >= window_end_) {
    // Drive is over and the emitter is in the ground state.
    return std::numeric_limits<double>::quiet_NaN();
  }

  // Ground state mid-pulse: integrate forward, first to the next grid node.
  State s(0.0, 1.0, 0.0, 0.0);
  double t = t_start;
  double log_p = 0.0;
  auto node = static_cast<std::size_t>(std::floor((t_start - window_begin_) / h_)) + 1;
  const std::size_t last = table_.size() - 1;
  while (node <= last) {
    const double t_next = window_begin_ + static_cast<double>(node) * h_;
    const double h = t_next - t;
    if (h > 0.0) {
      s = step(s, t, h);
      const double log_next = std::log(s(0) + s(1));
      if (log_next < log_u) {
        const double frac = (log_p - log_u) / (log_p - log_next);
        return t + frac * h;
      }
      log_p = log_next;
    }
    t = t_next;
    ++node;
  }
  return tail_jump(s, log_u);
}

EmissionRecord EmissionSampler::sample(std::int64_t pulse_index, Rng& rng) const {
  EmissionRecord record;
  record.pulse_index = pulse_index;

  double t = window_begin_;
  while (true) {
    const double log_u = std::log(uniform_open0(rng));
    const double jump = next_jump(t, log_u);
    if (!std::isfinite(jump)) break;
    record.times.push_back(jump - model_.pulse.center);
    record.sources.push_back(PhotonSource::Emitter);
    t = jump;
    if (t >= window_end_) break;
  }

  if (model_.background_rate > 0.0) {
    std::poisson_distribution<int> count(model_.background_rate * model_.pulse.rep_period);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      double tb = 0.0;
      if (model_.background_timing == BackgroundTiming::Pulsed) {
        std::normal_distribution<double> envelope(0.0, model_.pulse.sigma());
        tb = envelope(rng);
      } else {
        tb = (uniform_open0(rng) - 0.5) * model_.pulse.rep_period;
      }
      record.times.push_back(tb);
      record.sources.push_back(PhotonSource::Background);
    }
    sort_record(record);
  }
  return record;
}

std::vector<EmissionRecord> sample_emissions(std::int64_t n_pulses, const EmissionModel& model,
                                             std::uint64_t seed, unsigned threads) {
  if (n_pulses < 1) raise(ErrorKind::Precondition, "sample_emissions needs n_pulses >= 1");
  const EmissionSampler sampler(model);
  std::vector<EmissionRecord> records(static_cast<std::size_t>(n_pulses));
  parallel_for(records.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(seed, i, StreamTag::Emission);
      records[i] = sampler.sample(static_cast<std::int64_t>(i), rng);
    }
  });
  return records;
}

std::vector<EmissionRecord> apply_timing_jitter(std::span<const EmissionRecord> records,
                                                double sigma, std::uint64_t seed,
                                                unsigned threads) {
  if (!(sigma >= 0.0)) raise(ErrorKind::InvalidParameter, "jitter sigma must be >= 0");
  std::vector<EmissionRecord> out(records.begin(), records.end());
  if (sigma == 0.0) return out;
  parallel_for(out.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = make_stream(seed, static_cast<std::uint64_t>(out[i].pulse_index), StreamTag::Jitter);
      std::normal_distribution<double> noise(0.0, sigma);
      for (double& t : out[i].times) t += noise(rng);
      sort_record(out[i]);
    }
  });
  return out;
}

}  // namespace qdpillar
