#pragma once

// Parameter sweeps over V or rho. Every (value, scheme, seed) cell is an
// independent run; cells execute on a small worker pool and results are
// reduced in the canonical (value, scheme, seed) order, so the output does
// not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "aoifl/csv.hpp"
#include "aoifl/engine.hpp"
#include "aoifl/federation.hpp"
#include "aoifl/metrics.hpp"

namespace aoifl::sweep {

enum class Variable { V, rho };

inline std::string_view to_string(Variable v) { return v == Variable::V ? "V" : "rho"; }

inline Variable parse_variable(std::string_view s) {
  if (s == "V") return Variable::V;
  if (s == "rho") return Variable::rho;
  throw std::invalid_argument("sweep variable must be V or rho, got '" + std::string(s) + "'");
}

struct SweepSpec {
  Variable variable = Variable::V;
  std::vector<double> values;
  std::vector<federation::Scheme> schemes;
  std::vector<std::uint64_t> seeds;

  void validate() const {
    if (values.empty() || schemes.empty() || seeds.empty())
      throw std::invalid_argument("SweepSpec: values, schemes and seeds must be non-empty");
  }
};

struct CellRun {
  double value = 0.0;
  federation::Scheme scheme = federation::Scheme::FL;
  std::uint64_t seed = 0;
  std::optional<metrics::MetricsSummary> summary;
  std::string error;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t n = 0;
};

inline Stat mean_std(const std::vector<double>& xs) {
  Stat s;
  s.n = xs.size();
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct CellAggregate {
  double value = 0.0;
  federation::Scheme scheme = federation::Scheme::FL;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  Stat objective;
  Stat mean_E_k;
  Stat mean_E_sys;
  Stat exceedance_frequency;
  Stat mean_staleness;
  Stat esms;
};

struct SweepResult {
  std::vector<CellRun> runs;             // canonical order
  std::vector<CellAggregate> cells;      // one per (value, scheme)
};

inline engine::SimConfig cell_config(const engine::SimConfig& base, Variable var, double value,
                                     federation::Scheme scheme, std::uint64_t seed) {
  engine::SimConfig cfg = base;
  (var == Variable::V ? cfg.V : cfg.rho) = value;
  cfg.scheme = scheme;
  cfg.seed = seed;
  return cfg;
}

inline SweepResult run_sweep(const SweepSpec& spec, const engine::SimConfig& base,
                             unsigned threads = 0) {
  spec.validate();
  SweepResult out;
  for (double v : spec.values)
    for (auto s : spec.schemes)
      for (auto seed : spec.seeds) out.runs.push_back({v, s, seed, std::nullopt, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.runs.size(); i = next++) {
      auto& cell = out.runs[i];
      try {
        const auto cfg = cell_config(base, spec.variable, cell.value, cell.scheme, cell.seed);
        cell.summary = engine::run(cfg).summary;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(out.runs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  const std::size_t per_cell = spec.seeds.size();
  for (std::size_t c = 0; c * per_cell < out.runs.size(); ++c) {
    CellAggregate agg;
    agg.value = out.runs[c * per_cell].value;
    agg.scheme = out.runs[c * per_cell].scheme;
    std::vector<double> obj, ek, esys, exc, stale, esms;
    for (std::size_t j = 0; j < per_cell; ++j) {
      const auto& r = out.runs[c * per_cell + j];
      if (!r.summary) {
        ++agg.n_failed;
        continue;
      }
      ++agg.n_ok;
      obj.push_back(r.summary->entropic_objective);
      ek.push_back(r.summary->mean_E_k);
      esys.push_back(r.summary->mean_E_sys);
      exc.push_back(r.summary->exceedance_frequency);
      stale.push_back(r.summary->mean_staleness);
      if (r.summary->esms) esms.push_back(*r.summary->esms);
    }
    agg.objective = mean_std(obj);
    agg.mean_E_k = mean_std(ek);
    agg.mean_E_sys = mean_std(esys);
    agg.exceedance_frequency = mean_std(exc);
    agg.mean_staleness = mean_std(stale);
    agg.esms = mean_std(esms);
    out.cells.push_back(agg);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const SweepResult& res) {
  os << "variable,value,scheme,n_ok,n_failed,objective_mean,objective_std,E_k_mean,E_k_std,"
        "E_sys_mean,E_sys_std,exceedance_frequency_mean,exceedance_frequency_std,"
        "staleness_mean,staleness_std,esms_mean,esms_std,esms_n\n";
  for (const auto& c : res.cells) {
    auto opt = [](const Stat& s) { return s.n ? std::optional<double>(s.mean) : std::nullopt; };
    auto opt_sd = [](const Stat& s) { return s.n ? std::optional<double>(s.std) : std::nullopt; };
    csv::Row(os) << to_string(spec.variable) << c.value << federation::to_string(c.scheme)
                 << static_cast<unsigned long>(c.n_ok) << static_cast<unsigned long>(c.n_failed)
                 << opt(c.objective) << opt_sd(c.objective) << opt(c.mean_E_k)
                 << opt_sd(c.mean_E_k) << opt(c.mean_E_sys) << opt_sd(c.mean_E_sys)
                 << opt(c.exceedance_frequency) << opt_sd(c.exceedance_frequency)
                 << opt(c.mean_staleness) << opt_sd(c.mean_staleness) << opt(c.esms)
                 << opt_sd(c.esms) << static_cast<unsigned long>(c.esms.n);
  }
}

/// One row per (run, metric) for plotting tools.
inline void write_long_csv(std::ostream& os, const SweepSpec& spec, const SweepResult& res) {
  os << "variable,value,scheme,seed,metric,metric_value\n";
  for (const auto& r : res.runs) {
    if (!r.summary) continue;
    const auto& s = *r.summary;
    const std::pair<std::string_view, std::optional<double>> metrics_list[] = {
        {"entropic_objective", s.entropic_objective},
        {"mean_E_k", s.mean_E_k},
        {"mean_E_sys", s.mean_E_sys},
        {"exceedance_frequency", s.exceedance_frequency},
        {"mean_staleness", s.mean_staleness},
        {"esms", s.esms},
    };
    for (const auto& [name, v] : metrics_list) {
      if (!v) continue;
      csv::Row(os) << to_string(spec.variable) << r.value << federation::to_string(r.scheme)
                   << static_cast<unsigned long long>(r.seed) << name << *v;
    }
  }
}

/// Per-run summaries in summary.csv layout. Failed cells are skipped here
/// and listed by write_errors_csv.
inline void write_runs_csv(std::ostream& os, const SweepResult& res) {
  os << csv::kSummaryHeader << '\n';
  for (const auto& r : res.runs)
    if (r.summary) csv::write_summary_row(os, *r.summary);
}

inline void write_errors_csv(std::ostream& os, const SweepSpec& spec, const SweepResult& res) {
  os << "variable,value,scheme,seed,error\n";
  for (const auto& r : res.runs) {
    if (r.summary) continue;
    std::string msg = r.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    csv::Row(os) << to_string(spec.variable) << r.value << federation::to_string(r.scheme)
                 << static_cast<unsigned long long>(r.seed) << msg;
  }
}

}  // namespace aoifl::sweep
