#pragma once

// CSV emitters for run artifacts. Numbers are written in the shortest form
// that round-trips (std::to_chars), which is locale-independent and always
// uses '.' as the decimal separator. Absent optional values are empty fields.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "aoifl/metrics.hpp"
#include "aoifl/records.hpp"

namespace aoifl::csv {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
  return std::string(buf, ptr);
}

inline std::string num(std::optional<double> v) { return v ? num(*v) : std::string(); }

/// Joins fields with commas; fields are never quoted, so callers pass only
/// numbers and identifiers.
class Row {
 public:
  explicit Row(std::ostream& os) : os_(os) {}
  ~Row() { os_ << '\n'; }
  Row(const Row&) = delete;
  Row& operator=(const Row&) = delete;

  Row& operator<<(std::string_view s) {
    sep();
    os_ << s;
    return *this;
  }
  Row& operator<<(const std::string& s) { return *this << std::string_view(s); }
  Row& operator<<(const char* s) { return *this << std::string_view(s); }
  Row& operator<<(double v) { return *this << num(v); }
  Row& operator<<(std::optional<double> v) { return *this << num(v); }
  Row& operator<<(int v) { return *this << std::to_string(v); }
  Row& operator<<(long v) { return *this << std::to_string(v); }
  Row& operator<<(unsigned long v) { return *this << std::to_string(v); }
  Row& operator<<(unsigned long long v) { return *this << std::to_string(v); }
  Row& operator<<(bool v) { return *this << std::string_view(v ? "1" : "0"); }

 private:
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }
  std::ostream& os_;
  bool first_ = true;
};

inline constexpr std::string_view kRecordsHeader =
    "sensor_id,data_index,sample_instant,procrastinated,gain,p_init,power,tx_time,energy,aoi,"
    "staleness,exceedance,gamma,upsilon,lambda,ccp_iters,ccp_converged";

inline void write_records(std::ostream& os, std::span<const TransmissionRecord> records) {
  os << kRecordsHeader << '\n';
  for (const auto& r : records) {
    Row(os) << r.sensor_id << static_cast<unsigned long long>(r.data_index) << r.sample_instant
            << r.procrastinated << r.gain << r.p_init << r.power << r.tx_time << r.energy << r.aoi
            << r.staleness << r.exceedance << r.gamma << r.upsilon << r.lambda << r.ccp_iters
            << r.ccp_converged;
  }
}

inline constexpr std::string_view kRoundsHeader =
    "interval,time_s,party,local_sigma,local_xi,sample_count,global_sigma,global_xi,"
    "upsilon_after,upload_j,sensor_compute_j,controller_compute_j,uploads";

inline void write_rounds(std::ostream& os, std::span<const RoundLogRow> rows) {
  os << kRoundsHeader << '\n';
  for (const auto& r : rows) {
    Row row(os);
    row << r.interval << r.time_s;
    if (r.party == kControllerParty)
      row << "controller";
    else
      row << r.party;
    row << r.local_sigma << r.local_xi << static_cast<unsigned long long>(r.sample_count)
        << r.global_sigma << r.global_xi << r.upsilon_after << r.upload_j << r.sensor_compute_j
        << r.controller_compute_j << static_cast<unsigned long long>(r.uploads);
  }
}

inline constexpr std::string_view kSummaryHeader =
    "scheme,V,rho,seed,n_sensors,horizon_s,n_records,entropic_objective,mean_E_k,"
    "training_energy_per_record,mean_E_sys,exceedance_frequency,mean_staleness,"
    "max_sensor_mean_staleness,max_gamma_rate,exceedances,exceedances_per_sensor_interval,"
    "empirical_exceedance_mean,predicted_exceedance_mean,esms,training_uploads,ccp_nonconverged,"
    "queues_stable";

inline void write_summary_row(std::ostream& os, const metrics::MetricsSummary& s) {
  Row(os) << s.scheme << s.V << s.rho << static_cast<unsigned long long>(s.seed) << s.n_sensors
          << s.horizon_s << static_cast<unsigned long long>(s.n_records) << s.entropic_objective
          << s.mean_E_k << s.training_energy_per_record << s.mean_E_sys << s.exceedance_frequency
          << s.mean_staleness << s.max_sensor_mean_staleness << s.max_gamma_rate
          << static_cast<unsigned long long>(s.exceedances) << s.exceedances_per_sensor_interval
          << s.empirical_exceedance_mean << s.predicted_exceedance_mean << s.esms
          << static_cast<unsigned long long>(s.training_uploads)
          << static_cast<unsigned long long>(s.ccp_nonconverged) << s.queues_stable;
}

inline void write_summary(std::ostream& os, std::span<const metrics::MetricsSummary> rows) {
  os << kSummaryHeader << '\n';
  for (const auto& s : rows) write_summary_row(os, s);
}

inline constexpr std::string_view kCcdfHeader = "scheme,V,rho,seed,q,ccdf";

inline void write_ccdf(std::ostream& os, const metrics::MetricsSummary& s, bool header = true) {
  if (header) os << kCcdfHeader << '\n';
  for (const auto& [q, p] : s.ccdf_points)
    Row(os) << s.scheme << s.V << s.rho << static_cast<unsigned long long>(s.seed) << q << p;
}

inline constexpr std::string_view kTraceHeader = "sensor_id,data_index,iter,power,objective";

}  // namespace aoifl::csv
