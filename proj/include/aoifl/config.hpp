#pragma once

// INI loader for SimConfig.
//
// Sections mirror the nested parameter structs ([sim], [channel],
// [staleness], [schedule], [ccp], [term], [training_energy]). Physical
// quantities may carry a unit suffix; decibel units are converted to linear
// SI values here and nowhere else. Unknown sections or keys are rejected so
// a typo cannot silently fall back to a default.
//
//   [channel]
//   p_max = 23 dBm
//   noise_psd = -174 dBm/Hz
//   bandwidth = 180 kHz

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aoifl/engine.hpp"
#include "aoifl/phy.hpp"

namespace aoifl::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Dimension { none, power, power_density, frequency, time, ratio_db, rate };

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Splits "12.5 kHz" into (12.5, "khz"). The number must use '.' decimals.
inline std::pair<double, std::string> split_number(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr == first) throw ConfigError("not a number: '" + t + "'");
  std::string unit = lower(trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr))));
  unit.erase(std::remove(unit.begin(), unit.end(), ' '), unit.end());
  return {v, unit};
}

}  // namespace detail

/// Parses a value with an optional unit suffix into linear SI units.
inline double parse_quantity(const std::string& text, Dimension dim) {
  auto [v, unit] = detail::split_number(text);
  auto bad = [&]() -> double {
    throw ConfigError("unit '" + unit + "' not valid for value '" + detail::trim(text) + "'");
  };
  if (!std::isfinite(v)) throw ConfigError("value must be finite: '" + detail::trim(text) + "'");
  switch (dim) {
    case Dimension::none:
      return unit.empty() ? v : bad();
    case Dimension::power:
      if (unit.empty() || unit == "w") return v;
      if (unit == "mw") return v * 1e-3;
      if (unit == "dbm") return phy::dbm_to_watts(v);
      if (unit == "dbw") return phy::db_to_linear(v);
      return bad();
    case Dimension::power_density:
      if (unit.empty() || unit == "w/hz") return v;
      if (unit == "dbm/hz") return phy::dbm_to_watts(v);
      if (unit == "dbw/hz") return phy::db_to_linear(v);
      return bad();
    case Dimension::frequency:
      if (unit.empty() || unit == "hz") return v;
      if (unit == "khz") return v * 1e3;
      if (unit == "mhz") return v * 1e6;
      if (unit == "ghz") return v * 1e9;
      return bad();
    case Dimension::time:
      if (unit.empty() || unit == "s") return v;
      if (unit == "ms") return v * 1e-3;
      if (unit == "us") return v * 1e-6;
      return bad();
    case Dimension::ratio_db:
      if (unit.empty() || unit == "db") return v;
      return bad();
    case Dimension::rate:
      if (unit.empty() || unit == "hz" || unit == "1/s") return v;
      return bad();
  }
  return bad();
}

namespace detail {

struct Loader {
  const boost::property_tree::ptree& root;
  std::set<std::string> seen;

  const boost::property_tree::ptree* section(const std::string& name) const {
    auto it = root.find(name);
    return it == root.not_found() ? nullptr : &it->second;
  }

  std::optional<std::string> raw(const std::string& sec, const std::string& key) {
    const auto* s = section(sec);
    if (!s) return std::nullopt;
    auto it = s->find(key);
    if (it == s->not_found()) return std::nullopt;
    seen.insert(sec + "." + key);
    return it->second.data();
  }

  void number(const std::string& sec, const std::string& key, double& out,
              Dimension dim = Dimension::none) {
    if (auto v = raw(sec, key)) {
      try {
        out = parse_quantity(*v, dim);
      } catch (const ConfigError& e) {
        throw ConfigError("[" + sec + "] " + key + ": " + e.what());
      }
    }
  }

  template <class Int>
  void integer(const std::string& sec, const std::string& key, Int& out) {
    if (auto v = raw(sec, key)) {
      const std::string t = trim(*v);
      Int parsed{};
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), parsed);
      if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigError("[" + sec + "] " + key + ": not an integer: '" + t + "'");
      out = parsed;
    }
  }

  void check_unknown() const {
    for (const auto& [sec_name, sec] : root) {
      if (!sec.data().empty() && sec.empty())
        throw ConfigError("key '" + sec_name + "' is outside any section");
      for (const auto& [key, _] : sec)
        if (!seen.contains(sec_name + "." + key))
          throw ConfigError("unknown key [" + sec_name + "] " + key);
    }
  }
};

inline ccp::InitPolicy parse_init_policy(const std::string& s) {
  const std::string t = lower(trim(s));
  if (t == "random" || t == "random_uniform") return ccp::InitPolicy::random_uniform;
  if (t == "fixed") return ccp::InitPolicy::fixed;
  if (t == "warm" || t == "warm_start") return ccp::InitPolicy::warm_start;
  throw ConfigError("[ccp] init_policy: expected random, fixed or warm_start, got '" + t + "'");
}

}  // namespace detail

inline engine::SimConfig from_ptree(const boost::property_tree::ptree& pt) {
  engine::SimConfig cfg;
  detail::Loader L{pt, {}};

  L.integer("sim", "n_sensors", cfg.n_sensors);
  L.number("sim", "horizon", cfg.horizon_s, Dimension::time);
  L.number("sim", "sampling_rate", cfg.sampling_rate_hz, Dimension::rate);
  if (auto s = L.raw("sim", "scheme")) {
    try {
      cfg.scheme = federation::parse_scheme(detail::trim(*s));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[sim] scheme: ") + e.what());
    }
  }
  L.number("sim", "V", cfg.V);
  L.number("sim", "rho", cfg.rho);
  L.integer("sim", "seed", cfg.seed);
  L.number("sim", "burn_in_fraction", cfg.burn_in_fraction);

  auto& ch = cfg.channel;
  L.number("channel", "payload_bits", ch.payload_bits);
  L.number("channel", "bandwidth", ch.bandwidth_hz, Dimension::frequency);
  L.number("channel", "noise_psd", ch.noise_psd_w_per_hz, Dimension::power_density);
  L.number("channel", "p_max", ch.p_max_w, Dimension::power);
  const bool has_pl = L.raw("channel", "pathloss").has_value();
  L.number("channel", "pathloss", ch.pathloss_db, Dimension::ratio_db);
  double distance = 0.0;
  double carrier = 0.0;
  L.number("channel", "distance_m", distance);
  L.number("channel", "carrier", carrier, Dimension::frequency);
  if (distance > 0.0 || carrier > 0.0) {
    if (has_pl) throw ConfigError("[channel] give either pathloss or distance_m + carrier, not both");
    if (!(distance > 0.0) || !(carrier > 0.0))
      throw ConfigError("[channel] distance_m and carrier must be given together");
    ch.pathloss_db = phy::pathloss_db(distance, carrier / 1e9);
  }

  auto& st = cfg.staleness;
  L.number("staleness", "beta", st.beta);
  L.number("staleness", "f0", st.f0);
  L.number("staleness", "e0", st.e0);
  L.number("staleness", "epsilon", st.epsilon);

  L.number("schedule", "interval", cfg.schedule.interval_s, Dimension::time);
  L.number("schedule", "window", cfg.schedule.window_s, Dimension::time);

  auto& cc = cfg.ccp;
  L.number("ccp", "tol_power", cc.tol_power_w, Dimension::power);
  L.integer("ccp", "max_iters", cc.max_iters);
  L.number("ccp", "inner_tol", cc.inner_tol);
  if (auto s = L.raw("ccp", "init_policy")) cc.init_policy = detail::parse_init_policy(*s);
  L.number("ccp", "init_fraction", cc.init_fraction);
  L.number("ccp", "floor_fraction", cc.floor_fraction);
  L.integer("ccp", "scan_points", cc.scan_points);

  auto& tm = cfg.term;
  L.number("term", "tilt", tm.tilt);
  L.number("term", "step_sigma", tm.step_sigma);
  L.number("term", "step_xi", tm.step_xi);
  L.number("term", "init_sigma", tm.init_model.sigma);
  L.number("term", "init_xi", tm.init_model.xi);
  L.integer("term", "epochs", tm.epochs);

  auto& te = cfg.training_energy;
  L.number("training_energy", "f_cpu_controller", te.f_cpu_controller, Dimension::frequency);
  L.number("training_energy", "f_cpu_sensor", te.f_cpu_sensor, Dimension::frequency);
  L.number("training_energy", "n_tr_bits", te.n_tr_bits);
  L.number("training_energy", "l_req_cycles_per_bit", te.l_req_cycles_per_bit);
  L.number("training_energy", "kappa", te.kappa);

  L.check_unknown();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline engine::SimConfig parse_string(const std::string& text) {
  boost::property_tree::ptree pt;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed INI: ") + e.what());
  }
  return from_ptree(pt);
}

inline engine::SimConfig load_file(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return from_ptree(pt);
}

}  // namespace aoifl::config
