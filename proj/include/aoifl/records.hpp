#pragma once

#include <cstdint>
#include <optional>

namespace aoifl {

/// One completed upload. Queue values are the ones the power decision saw,
/// so a record carries everything needed to replay its solve.
struct TransmissionRecord {
  int sensor_id = 0;
  std::uint64_t data_index = 0;
  double sample_instant = 0.0;
  double procrastinated = 0.0;
  double gain = 0.0;
  double p_init = 0.0;
  double power = 0.0;
  double tx_time = 0.0;
  double energy = 0.0;
  double aoi = 0.0;
  double staleness = 0.0;
  std::optional<double> exceedance;
  double gamma = 0.0;
  double upsilon = 0.0;
  double lambda = 0.0;
  int ccp_iters = 0;
  bool ccp_converged = true;
};

/// Party id used for the controller in the round log.
inline constexpr int kControllerParty = -1;

/// One party's view of one training round.
struct RoundLogRow {
  long interval = 0;
  double time_s = 0.0;  // interval end M*m
  int party = 0;        // sensor id, or kControllerParty
  double local_sigma = 0.0;
  double local_xi = 0.0;
  std::uint64_t sample_count = 0;
  double global_sigma = 0.0;
  double global_xi = 0.0;
  std::optional<double> upsilon_after;
  double upload_j = 0.0;
  double sensor_compute_j = 0.0;
  double controller_compute_j = 0.0;
  std::uint64_t uploads = 0;

  double training_energy() const { return upload_j + sensor_compute_j + controller_compute_j; }
};

}  // namespace aoifl
