#pragma once

// Radio-layer math: Shannon-rate transmission time and energy, path loss,
// Rayleigh fading, and the energy model for GPD-model training traffic.
// Everything here works in linear SI units.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include "aoifl/random.hpp"

namespace aoifl::phy {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

struct ChannelParams {
  double payload_bits = 24000.0;           // N
  double bandwidth_hz = 180e3;             // B
  double noise_psd_w_per_hz = 3.981071705534985e-21;  // N0 (-174 dBm/Hz)
  double pathloss_db = 84.83421774868651;  // 20 m at 3.5 GHz
  double p_max_w = 0.19952623149688786;    // 23 dBm

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("ChannelParams: ") + name + " must be positive");
    };
    positive(payload_bits, "payload_bits");
    positive(bandwidth_hz, "bandwidth_hz");
    positive(noise_psd_w_per_hz, "noise_psd_w_per_hz");
    positive(pathloss_db, "pathloss_db");
    positive(p_max_w, "p_max_w");
  }

  double pathloss_gain() const { return 1.0 / db_to_linear(pathloss_db); }
  double noise_power_w() const { return noise_psd_w_per_hz * bandwidth_hz; }
};

/// h_k(i): path-loss gain times the fading power of one upload.
struct ChannelRealization {
  double gain_linear = 1.0;
};

struct TrainingEnergyParams {
  double f_cpu_controller = 2e11;  // cycles/s
  double f_cpu_sensor = 1e9;       // cycles/s
  double n_tr_bits = 240.0;        // 30 bytes
  double l_req_cycles_per_bit = 87.8;
  double kappa = 1e-27;

  void validate() const {
    if (!(f_cpu_controller > 0) || !(f_cpu_sensor > 0) || !(n_tr_bits > 0) ||
        !(l_req_cycles_per_bit > 0) || !(kappa > 0))
      throw std::invalid_argument("TrainingEnergyParams: all fields must be positive");
  }
};

namespace detail {
inline void require_positive(double p, double h) {
  if (!(p > 0.0)) throw std::domain_error("transmit power must be positive");
  if (!(h > 0.0)) throw std::domain_error("channel gain must be positive");
}
}  // namespace detail

/// Spectral efficiency log2(1 + h p / (N0 B)) in bit/s/Hz.
inline double spectral_efficiency(double p, double h, const ChannelParams& cp) {
  return std::log1p(h * p / cp.noise_power_w()) / std::numbers::ln2;
}

/// t = N / (B log2(1 + h p / (N0 B))).
inline double transmission_time(double p, double h, const ChannelParams& cp) {
  detail::require_positive(p, h);
  return cp.payload_bits / (cp.bandwidth_hz * spectral_efficiency(p, h, cp));
}

inline double transmission_energy(double p, double h, const ChannelParams& cp) {
  return p * transmission_time(p, h, cp);
}

/// Smallest power that finishes the payload within `t` seconds. Returns +inf
/// when the required spectral efficiency overflows.
inline double power_for_time(double t, double h, const ChannelParams& cp) {
  if (!(t > 0.0)) throw std::domain_error("target time must be positive");
  if (!(h > 0.0)) throw std::domain_error("channel gain must be positive");
  const double bits_per_hz = cp.payload_bits / (cp.bandwidth_hz * t);
  return std::expm1(bits_per_hz * std::numbers::ln2) * cp.noise_power_w() / h;
}

/// Factory path-loss model 32.45 + 31.9 log10(d[m]) + 20 log10(f[GHz]).
inline double pathloss_db(double distance_m, double carrier_ghz) {
  if (!(distance_m > 0.0) || !(carrier_ghz > 0.0))
    throw std::domain_error("pathloss_db: distance and carrier must be positive");
  return 32.45 + 31.9 * std::log10(distance_m) + 20.0 * std::log10(carrier_ghz);
}

/// Rayleigh fading with unit variance: exponentially distributed power gain
/// with mean 1.
inline double draw_fading(RandomStream& rng) { return rng.exponential(1.0); }

inline ChannelRealization draw_channel(RandomStream& rng, const ChannelParams& cp) {
  return {cp.pathloss_gain() * draw_fading(rng)};
}

inline double training_compute_energy(std::size_t n_samples, const TrainingEnergyParams& tp,
                                      bool at_controller) {
  const double f = at_controller ? tp.f_cpu_controller : tp.f_cpu_sensor;
  return static_cast<double>(n_samples) * tp.kappa * f * f * tp.n_tr_bits *
         tp.l_req_cycles_per_bit;
}

/// One N_tr-sized training message sent at full power.
inline double model_upload_energy(double h, const ChannelParams& cp,
                                  const TrainingEnergyParams& tp) {
  detail::require_positive(cp.p_max_w, h);
  return cp.p_max_w * tp.n_tr_bits / (cp.bandwidth_hz * spectral_efficiency(cp.p_max_w, h, cp));
}

}  // namespace aoifl::phy
