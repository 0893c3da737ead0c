#pragma once

// Discrete-event simulation of K sensors uploading Poisson-sampled status
// data to one controller.
//
// Time is divided into training intervals of length M. Inside an interval
// the sensors share no mutable state, so each sensor advances its own event
// timeline: sample arrivals join a FIFO, and the head-of-line sample is
// uploaded as soon as the previous upload completes, with the power chosen
// by the CCP solver. The interval boundary is a barrier at which the
// scheme's training step runs (local TERM steps and aggregation, central
// MLE, or nothing) and the exceedance queue Upsilon may be replaced.
// Uploads of samples taken inside an interval are attributed to that
// interval even when they complete after its end.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <string>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aoifl/aoi.hpp"
#include "aoifl/ccp.hpp"
#include "aoifl/evt.hpp"
#include "aoifl/federation.hpp"
#include "aoifl/lyapunov.hpp"
#include "aoifl/metrics.hpp"
#include "aoifl/phy.hpp"
#include "aoifl/random.hpp"
#include "aoifl/records.hpp"

namespace aoifl::engine {

using federation::Scheme;

struct SimConfig {
  int n_sensors = 10;
  double horizon_s = 30.0;
  double sampling_rate_hz = 50.0;
  Scheme scheme = Scheme::FL;
  double V = 1e-5;
  double rho = 2.0;
  std::uint64_t seed = 1;
  /// Leading fraction of the horizon excluded from time-averaged metrics.
  double burn_in_fraction = 0.1;
  phy::ChannelParams channel{};
  aoi::StalenessParams staleness{};
  federation::RoundSchedule schedule{};
  ccp::CcpSettings ccp{};
  evt::TermSettings term{};
  phy::TrainingEnergyParams training_energy{};

  void validate() const {
    if (n_sensors < 1) throw std::invalid_argument("SimConfig: n_sensors must be >= 1");
    if (!(horizon_s > 0.0)) throw std::invalid_argument("SimConfig: horizon_s must be positive");
    if (!(sampling_rate_hz > 0.0))
      throw std::invalid_argument("SimConfig: sampling_rate_hz must be positive");
    if (!(V >= 0.0)) throw std::invalid_argument("SimConfig: V must be >= 0");
    if (!(rho > 0.0)) throw std::invalid_argument("SimConfig: rho must be positive");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
      throw std::invalid_argument("SimConfig: burn_in_fraction must lie in [0, 1)");
    channel.validate();
    staleness.validate();
    schedule.validate();
    ccp.validate();
    term.validate();
    training_energy.validate();
  }

  lyapunov::ConstraintMode constraint_mode() const {
    return scheme == Scheme::ESA ? lyapunov::ConstraintMode::staleness_only
                                 : lyapunov::ConstraintMode::full;
  }

  long interval_count() const {
    return static_cast<long>(std::ceil(horizon_s / schedule.interval_s - 1e-9));
  }
};

struct SensorState {
  int id = 0;
  aoi::AoiState aoi{};
  lyapunov::VirtualQueues queues{};
  std::deque<double> pending;
  evt::GpdModel gpd{};
  std::vector<federation::ExceedanceEvent> interval_events;
  std::uint64_t exceedance_count_cum = 0;
  double next_arrival = 0.0;
  std::optional<double> last_power;
  std::uint64_t ccp_nonconverged = 0;
  RandomStream arrivals;
  RandomStream fading;
  RandomStream ccp_init;
  RandomStream uplink;

  SensorState(int sensor_id, const SimConfig& cfg)
      : id(sensor_id),
        gpd(cfg.term.init_model),
        arrivals(cfg.seed, static_cast<std::uint64_t>(sensor_id), StreamPurpose::arrivals),
        fading(cfg.seed, static_cast<std::uint64_t>(sensor_id), StreamPurpose::fading),
        ccp_init(cfg.seed, static_cast<std::uint64_t>(sensor_id), StreamPurpose::ccp_init),
        uplink(cfg.seed, static_cast<std::uint64_t>(sensor_id), StreamPurpose::training_uplink) {
    next_arrival = arrivals.exponential(1.0 / cfg.sampling_rate_hz);
  }
};

struct ControllerState {
  evt::GpdModel global{};
  double mean_exceedance_count = 0.0;
  std::vector<double> pooled_samples;  // CENT only
  std::size_t pooled_at_last_fit = 0;
  federation::EnergyLedger ledger{};
  std::uint64_t rejected_models = 0;
  std::uint64_t failed_fits = 0;
};

/// (sensor, data index, CCP iteration, power, true objective).
using SolveTrace = std::function<void(int, std::uint64_t, int, double, double)>;

struct RunOptions {
  SolveTrace solve_trace;
};

struct RunResult {
  std::vector<TransmissionRecord> records;
  std::vector<RoundLogRow> rounds;
  metrics::MetricsSummary summary;
  std::vector<lyapunov::VirtualQueues> final_queues;
  std::vector<std::uint64_t> uploads_per_sensor;
  std::vector<evt::GpdModel> final_sensor_models;
  evt::GpdModel final_global{};
  federation::EnergyLedger training_totals{};
};

/// Appends every sample taken up to `until` to the sensor's FIFO.
inline void generate_arrivals(SensorState& s, double until, const SimConfig& cfg) {
  while (s.next_arrival <= until) {
    s.pending.push_back(s.next_arrival);
    s.next_arrival += s.arrivals.exponential(1.0 / cfg.sampling_rate_hz);
  }
}

inline lyapunov::DecisionContext decision_context(double eta, double gain,
                                                  const lyapunov::VirtualQueues& q,
                                                  const SimConfig& cfg) {
  lyapunov::DecisionContext ctx;
  ctx.eta = eta;
  ctx.gain = gain;
  ctx.queues = q;
  ctx.channel = cfg.channel;
  ctx.staleness = cfg.staleness;
  ctx.weights = {cfg.V, cfg.rho};
  ctx.mode = cfg.constraint_mode();
  return ctx;
}

/// Uploads the head-of-line sample: solve for power, realize time, energy,
/// AoI and staleness, and update the virtual queues. Returns nothing when the
/// FIFO is empty.
inline std::optional<TransmissionRecord> step_transmission(SensorState& s, const SimConfig& cfg,
                                                           const SolveTrace& trace = {}) {
  if (s.pending.empty()) return std::nullopt;
  const double tau = s.pending.front();
  s.pending.pop_front();

  TransmissionRecord rec;
  rec.sensor_id = s.id;
  rec.data_index = s.aoi.data_index + 1;
  rec.sample_instant = tau;
  rec.procrastinated = aoi::procrastinated_time(s.aoi, tau);
  rec.gain = phy::draw_channel(s.fading, cfg.channel).gain_linear;
  rec.gamma = s.queues.gamma;
  rec.upsilon = s.queues.upsilon;
  rec.lambda = s.queues.lambda;

  const auto ctx = decision_context(rec.procrastinated, rec.gain, s.queues, cfg);
  rec.p_init = ccp::initial_power(cfg.ccp, cfg.channel.p_max_w, &s.ccp_init, s.last_power);
  ccp::CcpTrace solve_trace;
  if (trace)
    solve_trace = [&](int it, double p, double obj) { trace(s.id, rec.data_index, it, p, obj); };
  const auto sol = ccp::ccp_solve(ctx, cfg.ccp, rec.p_init, solve_trace);
  if (!sol.converged) ++s.ccp_nonconverged;

  rec.power = sol.p_star;
  rec.ccp_iters = sol.iters;
  rec.ccp_converged = sol.converged;
  rec.tx_time = phy::transmission_time(rec.power, rec.gain, cfg.channel);
  rec.energy = rec.power * rec.tx_time;
  s.aoi = aoi::update_aoi(s.aoi, tau, rec.tx_time);
  rec.aoi = s.aoi.last_aoi;
  rec.staleness = aoi::staleness(rec.aoi, cfg.staleness);
  rec.exceedance = aoi::exceedance(rec.staleness, cfg.staleness);

  s.queues = lyapunov::update_all(s.queues, rec.staleness, cfg.staleness, cfg.constraint_mode());
  if (rec.exceedance) {
    ++s.exceedance_count_cum;
    s.interval_events.push_back({tau, *rec.exceedance});
  }
  s.last_power = rec.power;
  return rec;
}

/// Re-runs the power decision of a logged upload.
inline ccp::CcpResult replay_decision(const TransmissionRecord& rec, const SimConfig& cfg) {
  const lyapunov::VirtualQueues q{rec.gamma, rec.upsilon, rec.lambda};
  return ccp::ccp_solve(decision_context(rec.procrastinated, rec.gain, q, cfg), cfg.ccp, rec.p_init);
}

namespace detail {

inline void replace_all_upsilon(std::vector<SensorState>& sensors, ControllerState& ctl,
                                const federation::GlobalModel& g, const SimConfig& cfg) {
  for (auto& s : sensors) {
    bool rejected = false;
    s.queues = federation::replace_upsilon(s.queues, g, cfg.staleness, &rejected);
    if (rejected) ++ctl.rejected_models;
  }
}

}  // namespace detail

/// Training step at the end of interval m. Returns the round-log rows.
inline std::vector<RoundLogRow> interval_boundary(std::vector<SensorState>& sensors,
                                                  ControllerState& ctl, long m,
                                                  const SimConfig& cfg) {
  const std::size_t K = sensors.size();
  std::vector<std::vector<double>> samples(K);
  std::vector<std::size_t> counts(K);
  for (std::size_t k = 0; k < K; ++k) {
    samples[k] = federation::extract_window_maxima(sensors[k].interval_events, m, cfg.schedule);
    counts[k] = samples[k].size();
    sensors[k].interval_events.clear();
  }
  if (!federation::trains_model(cfg.scheme)) return {};

  std::vector<double> gains(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    if (counts[k] > 0) gains[k] = phy::draw_channel(sensors[k].uplink, cfg.channel).gain_linear;
  // Gains are only used where counts are non-zero; keep the others valid.
  for (auto& g : gains)
    if (g == 0.0) g = cfg.channel.pathloss_gain();
  const auto energy = federation::round_energy(cfg.scheme, counts, gains, cfg.channel,
                                               cfg.training_energy);

  std::vector<evt::GpdModel> local(K);
  switch (cfg.scheme) {
    case Scheme::FL: {
      std::vector<federation::LocalReport> reports(K);
      for (std::size_t k = 0; k < K; ++k) {
        local[k] = evt::local_update(ctl.global, samples[k], cfg.term);
        reports[k] = {local[k], counts[k], sensors[k].exceedance_count_cum};
      }
      const auto g = federation::aggregate(reports, ctl.global);
      ctl.global = g.model;
      ctl.mean_exceedance_count = g.mean_exceedance_count;
      for (auto& s : sensors) s.gpd = g.model;
      detail::replace_all_upsilon(sensors, ctl, g, cfg);
      break;
    }
    case Scheme::CENT: {
      double count_sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        ctl.pooled_samples.insert(ctl.pooled_samples.end(), samples[k].begin(), samples[k].end());
        count_sum += static_cast<double>(sensors[k].exceedance_count_cum);
      }
      // Refit once the pool has grown by 10% since the last fit.
      const auto refit_at = std::max<std::size_t>(
          10, static_cast<std::size_t>(std::ceil(1.1 * static_cast<double>(ctl.pooled_at_last_fit))));
      if (ctl.pooled_samples.size() >= refit_at) {
        try {
          ctl.global = evt::mle_fit(ctl.pooled_samples);
        } catch (const std::exception&) {
          ++ctl.failed_fits;
        }
        ctl.pooled_at_last_fit = ctl.pooled_samples.size();
      }
      const federation::GlobalModel g{ctl.global, count_sum / static_cast<double>(K)};
      ctl.mean_exceedance_count = g.mean_exceedance_count;
      for (std::size_t k = 0; k < K; ++k) {
        local[k] = ctl.global;
        sensors[k].gpd = ctl.global;
      }
      detail::replace_all_upsilon(sensors, ctl, g, cfg);
      break;
    }
    case Scheme::LOCAL: {
      for (std::size_t k = 0; k < K; ++k) {
        auto& s = sensors[k];
        s.gpd = evt::local_update(s.gpd, samples[k], cfg.term);
        local[k] = s.gpd;
        const federation::GlobalModel own{s.gpd, static_cast<double>(s.exceedance_count_cum)};
        bool rejected = false;
        s.queues = federation::replace_upsilon(s.queues, own, cfg.staleness, &rejected);
        if (rejected) ++ctl.rejected_models;
      }
      break;
    }
    case Scheme::NonT:
    case Scheme::ESA:
      break;
  }

  std::vector<RoundLogRow> rows;
  rows.reserve(K + 1);
  const double t_end = cfg.schedule.interval_end(m);
  federation::EnergyLedger controller_part;
  for (std::size_t k = 0; k < K; ++k) {
    RoundLogRow r;
    r.interval = m;
    r.time_s = t_end;
    r.party = sensors[k].id;
    r.local_sigma = local[k].sigma;
    r.local_xi = local[k].xi;
    r.sample_count = counts[k];
    r.global_sigma = cfg.scheme == Scheme::LOCAL ? local[k].sigma : ctl.global.sigma;
    r.global_xi = cfg.scheme == Scheme::LOCAL ? local[k].xi : ctl.global.xi;
    r.upsilon_after = sensors[k].queues.upsilon;
    r.upload_j = energy[k].sensor_upload_j;
    r.sensor_compute_j = energy[k].sensor_compute_j;
    r.uploads = energy[k].uploads;
    controller_part.controller_compute_j += energy[k].controller_compute_j;
    ctl.ledger += energy[k];
    rows.push_back(r);
  }
  if (cfg.scheme == Scheme::CENT) {
    RoundLogRow r;
    r.interval = m;
    r.time_s = t_end;
    r.party = kControllerParty;
    r.local_sigma = ctl.global.sigma;
    r.local_xi = ctl.global.xi;
    r.sample_count = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    r.global_sigma = ctl.global.sigma;
    r.global_xi = ctl.global.xi;
    r.controller_compute_j = controller_part.controller_compute_j;
    rows.push_back(r);
  }
  return rows;
}

inline metrics::MetricsSummary summarize(const RunResult& res, const SimConfig& cfg,
                                         const std::vector<SensorState>& sensors) {
  metrics::MetricsSummary out;
  out.scheme = std::string(federation::to_string(cfg.scheme));
  out.V = cfg.V;
  out.rho = cfg.rho;
  out.seed = cfg.seed;
  out.n_sensors = cfg.n_sensors;
  out.horizon_s = cfg.horizon_s;

  const double burn_start = cfg.burn_in_fraction * cfg.horizon_s;
  std::vector<TransmissionRecord> post;
  for (const auto& r : res.records)
    if (r.sample_instant >= burn_start) post.push_back(r);
  out.n_records = post.size();
  if (post.empty()) throw std::runtime_error("summarize: no uploads after burn-in");

  double training = 0.0;
  for (const auto& row : res.rounds)
    if (row.time_s > burn_start) {
      training += row.training_energy();
      out.training_uploads += row.uploads;
    }

  out.entropic_objective = metrics::entropic_objective(post, cfg.rho);
  double e_sum = 0.0;
  double f_sum = 0.0;
  std::vector<double> f_by_sensor(sensors.size(), 0.0);
  std::vector<std::uint64_t> n_by_sensor(sensors.size(), 0);
  for (const auto& r : post) {
    e_sum += r.energy;
    f_sum += r.staleness;
    if (r.exceedance) ++out.exceedances;
    f_by_sensor[static_cast<std::size_t>(r.sensor_id)] += r.staleness;
    ++n_by_sensor[static_cast<std::size_t>(r.sensor_id)];
  }
  const double n = static_cast<double>(post.size());
  out.mean_E_k = e_sum / n;
  out.training_energy_per_record = training / n;
  out.mean_E_sys = metrics::system_energy(post, training);
  out.exceedance_frequency = static_cast<double>(out.exceedances) / n;
  out.mean_staleness = f_sum / n;
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    if (n_by_sensor[k] > 0)
      out.max_sensor_mean_staleness =
          std::max(out.max_sensor_mean_staleness, f_by_sensor[k] / static_cast<double>(n_by_sensor[k]));
    if (sensors[k].aoi.data_index > 0)
      out.max_gamma_rate = std::max(
          out.max_gamma_rate, sensors[k].queues.gamma / static_cast<double>(sensors[k].aoi.data_index));
    out.ccp_nonconverged += sensors[k].ccp_nonconverged;
  }
  const double post_intervals =
      std::max(1.0, (cfg.horizon_s - burn_start) / cfg.schedule.interval_s);
  out.exceedances_per_sensor_interval =
      static_cast<double>(out.exceedances) / (post_intervals * cfg.n_sensors);
  out.queues_stable = out.max_gamma_rate < cfg.staleness.f0;

  switch (cfg.scheme) {
    case Scheme::FL:
    case Scheme::CENT:
      if (res.final_global.xi < 1.0) out.predicted_exceedance_mean = evt::gpd_mean(res.final_global);
      break;
    case Scheme::LOCAL: {
      double s = 0.0;
      int used = 0;
      for (const auto& m : res.final_sensor_models)
        if (m.xi < 1.0) {
          s += evt::gpd_mean(m);
          ++used;
        }
      if (used > 0) out.predicted_exceedance_mean = s / used;
      break;
    }
    case Scheme::NonT:
    case Scheme::ESA:
      break;
  }
  const auto exc = metrics::exceedances_of(post);
  const auto cc = metrics::ccdf_and_esms(exc, out.predicted_exceedance_mean);
  out.empirical_exceedance_mean = cc.empirical_mean;
  out.esms = cc.esms;
  out.ccdf_points = cc.points;
  return out;
}

/// Simulates the whole horizon. Deterministic for a given configuration.
inline RunResult run(const SimConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  std::vector<SensorState> sensors;
  sensors.reserve(static_cast<std::size_t>(cfg.n_sensors));
  for (int k = 0; k < cfg.n_sensors; ++k) sensors.emplace_back(k, cfg);
  ControllerState ctl;
  ctl.global = cfg.term.init_model;

  RunResult res;
  res.records.reserve(static_cast<std::size_t>(cfg.horizon_s * cfg.sampling_rate_hz * cfg.n_sensors * 1.1));
  const long intervals = cfg.interval_count();
  for (long m = 1; m <= intervals; ++m) {
    const double until = std::min(cfg.schedule.interval_end(m), cfg.horizon_s);
    for (auto& s : sensors) {
      generate_arrivals(s, until, cfg);
      while (auto rec = step_transmission(s, cfg, opt.solve_trace)) res.records.push_back(*rec);
    }
    auto rows = interval_boundary(sensors, ctl, m, cfg);
    res.rounds.insert(res.rounds.end(), rows.begin(), rows.end());
  }

  for (const auto& s : sensors) {
    res.final_queues.push_back(s.queues);
    res.uploads_per_sensor.push_back(s.aoi.data_index);
    res.final_sensor_models.push_back(s.gpd);
  }
  res.final_global = ctl.global;
  res.training_totals = ctl.ledger;
  res.summary = summarize(res, cfg, sensors);
  return res;
}

}  // namespace aoifl::engine
