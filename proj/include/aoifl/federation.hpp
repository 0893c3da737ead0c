#pragma once

// Round protocol for GPD-model training: per-window extreme-sample
// extraction, sample-count-weighted aggregation, Upsilon replacement from
// the global model, and the energy ledger of each training scheme.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aoifl/aoi.hpp"
#include "aoifl/evt.hpp"
#include "aoifl/lyapunov.hpp"
#include "aoifl/phy.hpp"

namespace aoifl::federation {

enum class Scheme { FL, CENT, LOCAL, NonT, ESA };

inline constexpr Scheme kAllSchemes[] = {Scheme::FL, Scheme::CENT, Scheme::LOCAL, Scheme::NonT,
                                         Scheme::ESA};

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::FL: return "FL";
    case Scheme::CENT: return "CENT";
    case Scheme::LOCAL: return "LOCAL";
    case Scheme::NonT: return "NonT";
    case Scheme::ESA: return "ESA";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view s) {
  for (Scheme k : kAllSchemes)
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

inline bool trains_model(Scheme s) {
  return s == Scheme::FL || s == Scheme::CENT || s == Scheme::LOCAL;
}

struct RoundSchedule {
  double interval_s = 0.030;  // M
  double window_s = 0.010;    // O

  int windows_per_interval() const {
    return static_cast<int>(std::lround(interval_s / window_s));
  }

  void validate() const {
    if (!(interval_s > 0.0) || !(window_s > 0.0))
      throw std::invalid_argument("RoundSchedule: durations must be positive");
    if (!(window_s < interval_s))
      throw std::invalid_argument("RoundSchedule: window must be shorter than the interval");
    const double ratio = interval_s / window_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
      throw std::invalid_argument("RoundSchedule: interval / window must be a positive integer");
  }

  double interval_start(long m) const { return interval_s * static_cast<double>(m - 1); }
  double interval_end(long m) const { return interval_s * static_cast<double>(m); }
};

/// An exceedance observed for the sample taken at `sample_instant`.
struct ExceedanceEvent {
  double sample_instant = 0.0;
  double q = 0.0;
};

/// Largest exceedance of each window w = 1..W of interval m, keyed on the
/// sampling instant. Window w covers (M(m-1) + O(w-1), M(m-1) + Ow]. Windows
/// without exceedances contribute nothing.
inline std::vector<double> extract_window_maxima(std::span<const ExceedanceEvent> trace, long m,
                                                 const RoundSchedule& sched) {
  const int W = sched.windows_per_interval();
  std::vector<std::optional<double>> best(static_cast<std::size_t>(W));
  const double start = sched.interval_start(m);
  for (const auto& e : trace) {
    if (!(e.q > 0.0)) continue;
    const double rel = e.sample_instant - start;
    if (rel <= 0.0 || e.sample_instant > sched.interval_end(m)) continue;
    int w = static_cast<int>(std::ceil(rel / sched.window_s));
    w = std::clamp(w, 1, W);
    auto& slot = best[static_cast<std::size_t>(w - 1)];
    if (!slot || e.q > *slot) slot = e.q;
  }
  std::vector<double> out;
  for (const auto& b : best)
    if (b) out.push_back(*b);
  return out;
}

struct LocalReport {
  evt::GpdModel model;
  std::size_t sample_count = 0;
  std::size_t exceedance_count_cum = 0;
};

struct GlobalModel {
  evt::GpdModel model;
  double mean_exceedance_count = 0.0;
};

/// theta = sum |Q_k| theta_k / sum |Q_k|. If no report carries samples, the
/// previous global model is kept. The exceedance-count mean is always taken
/// over all reports.
inline GlobalModel aggregate(std::span<const LocalReport> reports, const evt::GpdModel& previous) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  double w_total = 0.0;
  double sigma = 0.0;
  double xi = 0.0;
  double count_sum = 0.0;
  for (const auto& r : reports) {
    const double w = static_cast<double>(r.sample_count);
    w_total += w;
    sigma += w * r.model.sigma;
    xi += w * r.model.xi;
    count_sum += static_cast<double>(r.exceedance_count_cum);
  }
  GlobalModel g;
  g.model = w_total > 0.0 ? evt::GpdModel{sigma / w_total, xi / w_total} : previous;
  g.mean_exceedance_count = count_sum / static_cast<double>(reports.size());
  return g;
}

/// Upsilon <- [sigma/(1-xi) - e0]^+ * E_K[sum 1{q>0}]. A model without a
/// finite mean (xi >= 1) is rejected and the queue is returned unchanged.
inline lyapunov::VirtualQueues replace_upsilon(lyapunov::VirtualQueues q, const GlobalModel& g,
                                               const aoi::StalenessParams& sp,
                                               bool* rejected = nullptr) {
  if (rejected) *rejected = false;
  if (!(g.model.xi < 1.0)) {
    if (rejected) *rejected = true;
    return q;
  }
  q.upsilon = std::max(evt::gpd_mean(g.model) - sp.e0, 0.0) * g.mean_exceedance_count;
  return q;
}

/// Training-traffic energy of one round, split by party.
struct EnergyLedger {
  double sensor_upload_j = 0.0;
  double sensor_compute_j = 0.0;
  double controller_compute_j = 0.0;
  std::size_t uploads = 0;

  double total() const { return sensor_upload_j + sensor_compute_j + controller_compute_j; }

  EnergyLedger& operator+=(const EnergyLedger& o) {
    sensor_upload_j += o.sensor_upload_j;
    sensor_compute_j += o.sensor_compute_j;
    controller_compute_j += o.controller_compute_j;
    uploads += o.uploads;
    return *this;
  }
};

/// Per-sensor training energy for one round.
///   FL    : one model upload if the sensor has samples, plus local compute.
///   CENT  : one upload per sample; the controller computes over all of them.
///   LOCAL : local compute only.
///   NonT, ESA : nothing.
/// `sample_counts[k]` is sensor k's sample count this round and `uplink_gains[k]`
/// the channel gain of its training uploads.
inline std::vector<EnergyLedger> round_energy(Scheme scheme, std::span<const std::size_t> sample_counts,
                                              std::span<const double> uplink_gains,
                                              const phy::ChannelParams& cp,
                                              const phy::TrainingEnergyParams& tp) {
  if (sample_counts.size() != uplink_gains.size())
    throw std::invalid_argument("round_energy: counts and gains differ in length");
  std::vector<EnergyLedger> out(sample_counts.size());
  for (std::size_t k = 0; k < sample_counts.size(); ++k) {
    const std::size_t n = sample_counts[k];
    auto& e = out[k];
    switch (scheme) {
      case Scheme::FL:
        if (n > 0) {
          e.uploads = 1;
          e.sensor_upload_j = phy::model_upload_energy(uplink_gains[k], cp, tp);
          e.sensor_compute_j = phy::training_compute_energy(n, tp, false);
        }
        break;
      case Scheme::CENT:
        if (n > 0) {
          e.uploads = n;
          e.sensor_upload_j = static_cast<double>(n) * phy::model_upload_energy(uplink_gains[k], cp, tp);
          e.controller_compute_j = phy::training_compute_energy(n, tp, true);
        }
        break;
      case Scheme::LOCAL:
        e.sensor_compute_j = phy::training_compute_energy(n, tp, false);
        break;
      case Scheme::NonT:
      case Scheme::ESA:
        break;
    }
  }
  return out;
}

}  // namespace aoifl::federation
