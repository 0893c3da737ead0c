#pragma once

// Virtual queues for the three long-term AoI constraints and the
// per-transmission drift-plus-penalty objective built from them.
//
//   Gamma   : time-averaged staleness   (1/I) sum f      <= f0
//   Upsilon : exceedance size           (1/I) sum q      <= e0
//   Lambda  : violation probability     (1/I) sum 1{q>0} <= epsilon

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "aoifl/aoi.hpp"
#include "aoifl/phy.hpp"

namespace aoifl::lyapunov {

struct VirtualQueues {
  double gamma = 0.0;
  double upsilon = 0.0;
  double lambda = 0.0;

  bool valid() const { return gamma >= 0.0 && upsilon >= 0.0 && lambda >= 0.0; }
  friend bool operator==(const VirtualQueues&, const VirtualQueues&) = default;
};

/// Which constraints the controller enforces. `staleness_only` drops the
/// violation-probability and exceedance constraints (the ESA baseline).
enum class ConstraintMode { full, staleness_only };

/// Weights of F(f) = theta1 f^2 + theta2 f.
struct DppCoefficients {
  double theta1 = 0.0;
  double theta2 = 0.0;
};

/// Energy penalty weight V and risk sensitivity rho.
struct PenaltyWeights {
  double V = 1e-5;
  double rho = 2.0;
};

inline VirtualQueues update_gamma(VirtualQueues q, double f, const aoi::StalenessParams& sp) {
  q.gamma = std::max(q.gamma + f - sp.f0, 0.0);
  return q;
}

inline VirtualQueues update_upsilon(VirtualQueues q, std::optional<double> exceed,
                                    const aoi::StalenessParams& sp) {
  if (exceed) q.upsilon = std::max(q.upsilon + *exceed - sp.e0, 0.0);
  return q;
}

inline VirtualQueues update_lambda(VirtualQueues q, double f, bool exceeded,
                                   const aoi::StalenessParams& sp) {
  const double indicator = exceeded ? 1.0 : 0.0;
  q.lambda = std::max(q.lambda + (indicator - sp.epsilon) * f, 0.0);
  return q;
}

/// Applies all three queue recursions for one realized upload.
inline VirtualQueues update_all(VirtualQueues q, double f, const aoi::StalenessParams& sp,
                                ConstraintMode mode = ConstraintMode::full) {
  const auto exceed = aoi::exceedance(f, sp);
  q = update_gamma(q, f, sp);
  if (mode == ConstraintMode::staleness_only) return q;
  q = update_upsilon(q, exceed, sp);
  return update_lambda(q, f, exceed.has_value(), sp);
}

inline DppCoefficients dpp_coefficients(const VirtualQueues& q, bool exceeded_branch,
                                        const aoi::StalenessParams& sp,
                                        ConstraintMode mode = ConstraintMode::full) {
  if (mode == ConstraintMode::staleness_only) return {0.5, q.gamma - sp.f0};
  const double ind = exceeded_branch ? 1.0 : 0.0;
  const double eps = sp.epsilon;
  return {0.5 * (1.0 + eps * eps) + (1.0 - eps) * ind,
          q.gamma - sp.f0 - eps * q.lambda + (q.lambda + q.upsilon - sp.f0 - sp.e0) * ind};
}

inline double queue_penalty(double f, const DppCoefficients& c) {
  return c.theta1 * f * f + c.theta2 * f;
}

/// Everything a sensor knows when it picks the power for one upload.
struct DecisionContext {
  double eta = 0.0;  // procrastinated time of the head-of-line sample
  double gain = 1.0; // h
  VirtualQueues queues{};
  phy::ChannelParams channel{};
  aoi::StalenessParams staleness{};
  PenaltyWeights weights{};
  ConstraintMode mode = ConstraintMode::full;
};

/// Staleness reached if the upload uses power p.
inline double staleness_at(double p, const DecisionContext& ctx) {
  return aoi::staleness(ctx.eta + phy::transmission_time(p, ctx.gain, ctx.channel), ctx.staleness);
}

inline double energy_penalty(double p, const DecisionContext& ctx) {
  return ctx.weights.V *
         std::exp(ctx.weights.rho * phy::transmission_energy(p, ctx.gain, ctx.channel));
}

/// V exp(rho E(p)) + F(f(p)) with the queue weights of the given branch.
inline double branch_objective(double p, bool exceeded_branch, const DecisionContext& ctx) {
  const double f = staleness_at(p, ctx);
  return energy_penalty(p, ctx) +
         queue_penalty(f, dpp_coefficients(ctx.queues, exceeded_branch, ctx.staleness, ctx.mode));
}

/// Realized per-transmission objective: the branch follows from f(p) itself.
/// The additive constant of the drift bound is omitted.
inline double per_transmission_objective(double p, const DecisionContext& ctx) {
  const double f = staleness_at(p, ctx);
  const bool exceeded = f > ctx.staleness.f0;
  return energy_penalty(p, ctx) +
         queue_penalty(f, dpp_coefficients(ctx.queues, exceeded, ctx.staleness, ctx.mode));
}

struct PowerInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Branch-consistent power intervals within (0, p_max]. f(p) is strictly
/// decreasing, so the exceedance branch lives below the threshold power p0
/// (where f(p0) = f0) and the compliant branch at or above it. Interval ends
/// are pulled inward by a relative 1e-12 so that rounding cannot flip the
/// realized indicator at the returned endpoint.
struct BranchIntervals {
  std::optional<double> threshold_power;
  std::optional<PowerInterval> exceeded;
  std::optional<PowerInterval> compliant;
};

inline BranchIntervals branch_intervals(const DecisionContext& ctx, double p_floor) {
  const double p_max = ctx.channel.p_max_w;
  BranchIntervals out;
  const double a0 = aoi::aoi_for_staleness(ctx.staleness.f0, ctx.staleness);
  const double t0 = a0 - ctx.eta;
  double p0 = std::numeric_limits<double>::infinity();
  if (t0 > 0.0) p0 = phy::power_for_time(t0, ctx.gain, ctx.channel);
  if (std::isfinite(p0)) out.threshold_power = p0;

  if (p0 > p_floor) {
    out.exceeded = PowerInterval{p_floor, std::min(p0 * (1.0 - 1e-12), p_max)};
  }
  if (p0 <= p_max) {
    double lo = std::max(p0 * (1.0 + 1e-12), p_floor);
    if (lo > p_max) lo = p_max;
    out.compliant = PowerInterval{lo, p_max};
  }
  // Rounding can leave the boundary points on the wrong side; tighten until
  // each interval's endpoints realize its own branch.
  auto exceeds = [&](double p) { return staleness_at(p, ctx) > ctx.staleness.f0; };
  if (out.compliant) {
    for (int k = 0; k < 60 && exceeds(out.compliant->lo) && out.compliant->lo < p_max; ++k)
      out.compliant->lo = std::min(out.compliant->lo * (1.0 + 1e-12 * (1 << std::min(k, 30))), p_max);
    if (exceeds(out.compliant->lo)) out.compliant.reset();
  }
  if (out.exceeded) {
    for (int k = 0; k < 60 && !exceeds(out.exceeded->hi) && out.exceeded->hi > p_floor; ++k)
      out.exceeded->hi = std::max(out.exceeded->hi * (1.0 - 1e-12 * (1 << std::min(k, 30))), p_floor);
    if (!exceeds(out.exceeded->hi)) out.exceeded.reset();
  }
  return out;
}

}  // namespace aoifl::lyapunov
