#pragma once

// Convex-concave procedure for the per-transmission power problem
//
//   minimize_p  V exp(rho E(p)) + F(f(p))   s.t. 0 < p <= p_max
//
// exp(rho E(p)) is replaced by its first-order expansion around the current
// reference power; the remaining one-dimensional problem is solved on each
// branch-consistent power interval and the better branch wins.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "aoifl/lyapunov.hpp"
#include "aoifl/phy.hpp"
#include "aoifl/random.hpp"

namespace aoifl::ccp {

enum class InitPolicy { random_uniform, fixed, warm_start };

struct CcpSettings {
  double tol_power_w = 1e-6;
  int max_iters = 50;
  /// Relative (log-power) tolerance of the inner one-dimensional solver.
  double inner_tol = 1e-9;
  InitPolicy init_policy = InitPolicy::random_uniform;
  /// Used by InitPolicy::fixed, as a fraction of p_max.
  double init_fraction = 1.0;
  /// Smallest power searched, as a fraction of p_max.
  double floor_fraction = 1e-12;
  /// Log-spaced probes per branch interval before golden-section refinement.
  int scan_points = 33;

  void validate() const {
    if (!(tol_power_w > 0.0)) throw std::invalid_argument("CcpSettings: tol_power_w must be > 0");
    if (max_iters < 1) throw std::invalid_argument("CcpSettings: max_iters must be >= 1");
    if (!(inner_tol > 0.0)) throw std::invalid_argument("CcpSettings: inner_tol must be > 0");
    if (!(init_fraction > 0.0 && init_fraction <= 1.0))
      throw std::invalid_argument("CcpSettings: init_fraction must lie in (0, 1]");
    if (!(floor_fraction > 0.0 && floor_fraction < 1.0))
      throw std::invalid_argument("CcpSettings: floor_fraction must lie in (0, 1)");
    if (scan_points < 3) throw std::invalid_argument("CcpSettings: scan_points must be >= 3");
  }
};

struct CcpResult {
  double p_star = 0.0;
  int iters = 0;
  bool converged = false;
  /// Iteration stopped because the next iterate would have raised the true objective.
  bool halted_on_ascent = false;
  double objective_at_solution = 0.0;
};

/// Called once per accepted iterate: (iteration, power, true objective).
using CcpTrace = std::function<void(int, double, double)>;

/// d/dp exp(rho E(p)) at p_hat, with
///   t'(p) = -t(p)^2 B h / (N (N0 B + h p) ln 2).
inline double linearization_slope(double p_hat, double h, const phy::ChannelParams& cp,
                                  double rho) {
  const double t = phy::transmission_time(p_hat, h, cp);
  const double dt = -t * t * cp.bandwidth_hz * h /
                    (cp.payload_bits * (cp.noise_power_w() + h * p_hat) * std::numbers::ln2);
  return rho * std::exp(rho * p_hat * t) * (t + p_hat * dt);
}

namespace detail {

struct Minimum {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

// Log-spaced scan followed by golden-section refinement (in log x) of the
// bracket around the best probe. `extra` is an additional probe (the CCP
// reference point) used when it falls inside [lo, hi].
template <class Fn>
Minimum minimize_on_interval(Fn&& fn, double lo, double hi, int scan_points, double rel_tol,
                             std::optional<double> extra = std::nullopt) {
  Minimum best;
  auto probe = [&](double x) {
    const double v = fn(x);
    if (v < best.value) best = {x, v};
    return v;
  };
  if (!(hi > lo)) {
    probe(lo);
    return best;
  }
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  const double step = (log_hi - log_lo) / (scan_points - 1);
  int best_k = 0;
  for (int k = 0; k < scan_points; ++k) {
    const double x = k == scan_points - 1 ? hi : (k == 0 ? lo : std::exp(log_lo + step * k));
    const double before = best.value;
    probe(x);
    if (best.value < before) best_k = k;
  }
  if (extra && *extra > lo && *extra < hi) probe(*extra);

  double a = log_lo + step * std::max(best_k - 1, 0);
  double b = best_k == scan_points - 1 ? log_hi : log_lo + step * (best_k + 1);
  a = std::max(a, log_lo);
  b = std::min(b, log_hi);

  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = probe(std::exp(c));
  double fd = probe(std::exp(d));
  while (b - a > rel_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = probe(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = probe(std::exp(d));
    }
  }
  return best;
}

}  // namespace detail

/// Minimizes V * slope * p + F(f(p)) over the branch-consistent intervals.
inline double solve_inner(double p_ref, double slope, const lyapunov::DecisionContext& ctx,
                          const CcpSettings& settings) {
  if (!std::isfinite(slope)) throw std::domain_error("solve_inner: slope must be finite");
  const double p_max = ctx.channel.p_max_w;
  if (!(p_ref > 0.0 && p_ref <= p_max))
    throw std::domain_error("solve_inner: reference power outside (0, p_max]");

  const auto intervals = lyapunov::branch_intervals(ctx, settings.floor_fraction * p_max);
  const double linear_weight = ctx.weights.V * slope;
  detail::Minimum best;
  auto consider = [&](const std::optional<lyapunov::PowerInterval>& iv, bool exceeded) {
    if (!iv) return;
    const auto coeff = lyapunov::dpp_coefficients(ctx.queues, exceeded, ctx.staleness, ctx.mode);
    auto inner = [&](double p) {
      return linear_weight * p + lyapunov::queue_penalty(lyapunov::staleness_at(p, ctx), coeff);
    };
    const auto m = detail::minimize_on_interval(inner, iv->lo, iv->hi, settings.scan_points,
                                                settings.inner_tol, p_ref);
    if (m.value < best.value) best = m;
  };
  consider(intervals.compliant, false);
  consider(intervals.exceeded, true);
  if (!std::isfinite(best.value)) throw std::logic_error("solve_inner: no feasible branch");
  return best.x;
}

/// Draws or selects the initial reference power for a solve.
inline double initial_power(const CcpSettings& settings, double p_max, RandomStream* rng,
                            std::optional<double> previous) {
  switch (settings.init_policy) {
    case InitPolicy::fixed:
      return settings.init_fraction * p_max;
    case InitPolicy::warm_start:
      if (previous && *previous > 0.0 && *previous <= p_max) return *previous;
      [[fallthrough]];
    case InitPolicy::random_uniform:
      if (rng == nullptr) return settings.init_fraction * p_max;
      return rng->uniform_open_closed() * p_max;
  }
  return p_max;
}

inline CcpResult ccp_solve(const lyapunov::DecisionContext& ctx, const CcpSettings& settings,
                           double p_init, const CcpTrace& trace = {}) {
  const double p_max = ctx.channel.p_max_w;
  if (!(p_init > 0.0 && p_init <= p_max))
    throw std::domain_error("ccp_solve: initial power outside (0, p_max]");

  CcpResult res;
  double p = p_init;
  double obj = lyapunov::per_transmission_objective(p, ctx);
  if (trace) trace(0, p, obj);

  for (int r = 1; r <= settings.max_iters; ++r) {
    const double slope = linearization_slope(p, ctx.gain, ctx.channel, ctx.weights.rho);
    const double next = solve_inner(p, slope, ctx, settings);
    const double next_obj = lyapunov::per_transmission_objective(next, ctx);
    res.iters = r;
    if (next_obj > obj) {
      res.halted_on_ascent = true;
      res.converged = true;
      break;
    }
    const double delta = std::abs(next - p);
    p = next;
    obj = next_obj;
    if (trace) trace(r, p, obj);
    // With V = 0 the linearized term vanishes and one solve is exact.
    if (ctx.weights.V == 0.0 || delta < settings.tol_power_w) {
      res.converged = true;
      break;
    }
  }
  res.p_star = p;
  res.objective_at_solution = obj;
  return res;
}

}  // namespace aoifl::ccp
