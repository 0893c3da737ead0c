#pragma once

// Evaluation metrics: entropic-risk objective, system energy, exceedance
// statistics, CCDF of exceedances, and the estimation-statistic mean
// surplus (trained GPD mean minus empirical exceedance mean).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aoifl/records.hpp"

namespace aoifl::metrics {

/// (1/rho) ln( mean exp(rho E) ), evaluated with log-sum-exp.
inline double entropic_objective(std::span<const double> energies, double rho) {
  if (energies.empty()) throw std::invalid_argument("entropic_objective: no energies");
  if (!(rho > 0.0)) throw std::invalid_argument("entropic_objective: rho must be positive");
  double mx = -std::numeric_limits<double>::infinity();
  for (double e : energies) mx = std::max(mx, rho * e);
  // expm1/log1p keep precision when rho * E is tiny and every term is near 1.
  double s = 0.0;
  for (double e : energies) s += std::expm1(rho * e - mx);
  return (mx + std::log1p(s / static_cast<double>(energies.size()))) / rho;
}

inline double entropic_objective(std::span<const TransmissionRecord> records, double rho) {
  std::vector<double> e;
  e.reserve(records.size());
  for (const auto& r : records) e.push_back(r.energy);
  return entropic_objective(e, rho);
}

/// (sum of upload energies + training energy) / number of uploads.
inline double system_energy(std::span<const TransmissionRecord> records, double training_energy_j) {
  if (records.empty()) throw std::invalid_argument("system_energy: no records");
  double s = 0.0;
  for (const auto& r : records) s += r.energy;
  return (s + training_energy_j) / static_cast<double>(records.size());
}

struct CcdfResult {
  /// (q, P(Q >= q)) at each distinct observed exceedance, ascending in q.
  std::vector<std::pair<double, double>> points;
  std::optional<double> empirical_mean;
  std::optional<double> esms;
};

inline CcdfResult ccdf_and_esms(std::span<const double> exceedances,
                                std::optional<double> predicted_mean) {
  CcdfResult out;
  if (exceedances.empty()) return out;
  std::vector<double> q(exceedances.begin(), exceedances.end());
  std::sort(q.begin(), q.end());
  const double n = static_cast<double>(q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sum += q[i];
    if (i == 0 || q[i] != q[i - 1])
      out.points.emplace_back(q[i], static_cast<double>(q.size() - i) / n);
  }
  out.empirical_mean = sum / n;
  if (predicted_mean) out.esms = *predicted_mean - *out.empirical_mean;
  return out;
}

inline std::vector<double> exceedances_of(std::span<const TransmissionRecord> records) {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.exceedance) out.push_back(*r.exceedance);
  return out;
}

struct MetricsSummary {
  std::string scheme;
  double V = 0.0;
  double rho = 0.0;
  std::uint64_t seed = 0;
  int n_sensors = 0;
  double horizon_s = 0.0;
  std::uint64_t n_records = 0;  // after burn-in
  double entropic_objective = 0.0;
  double mean_E_k = 0.0;
  double training_energy_per_record = 0.0;
  double mean_E_sys = 0.0;
  double exceedance_frequency = 0.0;
  double mean_staleness = 0.0;
  double max_sensor_mean_staleness = 0.0;
  double max_gamma_rate = 0.0;  // max over sensors of Gamma(I)/I
  std::uint64_t exceedances = 0;
  double exceedances_per_sensor_interval = 0.0;
  std::optional<double> empirical_exceedance_mean;
  std::optional<double> predicted_exceedance_mean;
  std::optional<double> esms;
  std::uint64_t training_uploads = 0;
  std::uint64_t ccp_nonconverged = 0;
  bool queues_stable = true;
  std::vector<std::pair<double, double>> ccdf_points;
};

}  // namespace aoifl::metrics
