#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace aoifl::aoi {

/// AoI bookkeeping of one sensor, carried between consecutive uploads.
struct AoiState {
  double last_sample_instant = 0.0;  // tau(i-1)
  double last_aoi = 0.0;             // a(i-1)
  std::uint64_t data_index = 0;      // uploads completed so far

  /// Instant at which the previous upload finished.
  double last_completion() const { return last_sample_instant + last_aoi; }
};

struct StalenessParams {
  double beta = -2.0;
  double f0 = 5e-4;
  double e0 = 1e-4;
  double epsilon = 2e-3;

  void validate() const {
    if (!(beta <= 0.0)) throw std::invalid_argument("StalenessParams: beta must be <= 0");
    if (!(f0 > 0.0)) throw std::invalid_argument("StalenessParams: f0 must be positive");
    if (!(e0 > 0.0)) throw std::invalid_argument("StalenessParams: e0 must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw std::invalid_argument("StalenessParams: epsilon must lie in (0, 1)");
  }
};

/// Queueing delay eta = [tau(i-1) + a(i-1) - tau(i)]^+.
inline double procrastinated_time(const AoiState& s, double new_sample_instant) {
  if (new_sample_instant < s.last_sample_instant)
    throw std::logic_error("procrastinated_time: sample instants must be non-decreasing");
  return std::max(s.last_completion() - new_sample_instant, 0.0);
}

/// a(i) = eta(i) + t(i); advances the state to data index i.
inline AoiState update_aoi(const AoiState& s, double new_sample_instant, double tx_time) {
  if (!(tx_time > 0.0)) throw std::domain_error("update_aoi: transmission time must be positive");
  const double eta = procrastinated_time(s, new_sample_instant);
  return {new_sample_instant, eta + tx_time, s.data_index + 1};
}

/// f = a^(1-beta) / (1-beta).
inline double staleness(double a, const StalenessParams& sp) {
  if (a < 0.0) throw std::domain_error("staleness: AoI must be non-negative");
  const double k = 1.0 - sp.beta;
  return std::pow(a, k) / k;
}

/// Inverse of the staleness map: the AoI whose staleness is f.
inline double aoi_for_staleness(double f, const StalenessParams& sp) {
  if (f < 0.0) throw std::domain_error("aoi_for_staleness: staleness must be non-negative");
  const double k = 1.0 - sp.beta;
  return std::pow(k * f, 1.0 / k);
}

/// q = f - f0 when strictly positive.
inline std::optional<double> exceedance(double f, const StalenessParams& sp) {
  if (f > sp.f0) return f - sp.f0;
  return std::nullopt;
}

}  // namespace aoifl::aoi
