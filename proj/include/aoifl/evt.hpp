#pragma once

// Generalized Pareto modeling of AoI exceedances.
//
//   G(sigma, xi | q) = (1/sigma) (1 + xi q / sigma)^-(1/xi + 1)
//
// Local training minimizes the tilted empirical risk
//   L(theta) = (1/t) ln( (1/|Q|) sum_q G(theta|q)^-t )
// with one gradient step per round; the centralized baseline uses a
// maximum-likelihood fit instead.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace aoifl::evt {

struct GpdModel {
  double sigma = 2e-4;
  double xi = 0.02;

  friend bool operator==(const GpdModel&, const GpdModel&) = default;
};

struct TermSettings {
  double tilt = -0.1;
  double step_sigma = 1e-9;
  double step_xi = 1e-3;
  GpdModel init_model{2e-4, 0.02};
  int epochs = 1;

  void validate() const {
    if (tilt == 0.0 || !std::isfinite(tilt))
      throw std::invalid_argument("TermSettings: tilt must be non-zero");
    if (!(step_sigma > 0.0) || !(step_xi > 0.0))
      throw std::invalid_argument("TermSettings: step sizes must be positive");
    if (!(init_model.sigma > 0.0)) throw std::invalid_argument("TermSettings: init sigma must be > 0");
    if (epochs < 1) throw std::invalid_argument("TermSettings: epochs must be >= 1");
  }
};

struct Gradient {
  double d_sigma = 0.0;
  double d_xi = 0.0;
};

inline constexpr double kSigmaFloor = 1e-8;
/// Shape ceiling kept by the projection so that the model mean is finite.
inline constexpr double kXiCeiling = 0.999;

inline bool in_support(const GpdModel& m, double q) {
  return m.sigma > 0.0 && q >= 0.0 && 1.0 + m.xi * q / m.sigma > 0.0;
}

inline double gpd_log_pdf(const GpdModel& m, double q) {
  if (!(q >= 0.0) || !in_support(m, q)) throw std::domain_error("gpd_log_pdf: q outside support");
  const double z = q / m.sigma;
  if (m.xi == 0.0) return -std::log(m.sigma) - z;
  return -std::log(m.sigma) - (1.0 / m.xi + 1.0) * std::log1p(m.xi * z);
}

inline double gpd_pdf(const GpdModel& m, double q) { return std::exp(gpd_log_pdf(m, q)); }

/// Gradient of ln G with respect to (sigma, xi).
inline Gradient gpd_log_pdf_gradient(const GpdModel& m, double q) {
  if (!in_support(m, q)) throw std::domain_error("gpd_log_pdf_gradient: q outside support");
  const double s = m.sigma;
  const double xi = m.xi;
  const double z = q / s;
  const double u = 1.0 + xi * z;
  Gradient g;
  g.d_sigma = (q - s) / (s * s * u);
  if (std::abs(xi) < 1e-6) {
    // Series in xi; the closed form cancels catastrophically near 0.
    g.d_xi = z * z / 2.0 - z + xi * (z * z - 2.0 * z * z * z / 3.0) +
             xi * xi * (0.75 * z * z * z * z - z * z * z);
  } else {
    g.d_xi = std::log1p(xi * z) / (xi * xi) - (1.0 / xi + 1.0) * z / u;
  }
  return g;
}

/// Partial derivatives of the density itself:
///   dG/dsigma = (q - sigma)/sigma^3 (1 + xi q/sigma)^(-2 - 1/xi)
///   dG/dxi    = (1 + xi q/sigma)^(-1 - 1/xi) / (sigma xi)
///               * ( -(xi + 1) q / (sigma + xi q) + ln(1 + xi q/sigma) / xi )
inline Gradient gpd_pdf_gradient(const GpdModel& m, double q) {
  const double g = gpd_pdf(m, q);
  const Gradient dl = gpd_log_pdf_gradient(m, q);
  return {g * dl.d_sigma, g * dl.d_xi};
}

inline double gpd_mean(const GpdModel& m) {
  if (!(m.xi < 1.0)) throw std::domain_error("gpd_mean: mean undefined for xi >= 1");
  return m.sigma / (1.0 - m.xi);
}

inline double gpd_quantile(const GpdModel& m, double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("gpd_quantile: p must lie in [0, 1)");
  if (m.xi == 0.0) return -m.sigma * std::log1p(-p);
  return m.sigma / m.xi * std::expm1(-m.xi * std::log1p(-p));
}

inline double gpd_survival(const GpdModel& m, double q) {
  if (q <= 0.0) return 1.0;
  if (m.xi == 0.0) return std::exp(-q / m.sigma);
  const double u = 1.0 + m.xi * q / m.sigma;
  if (u <= 0.0) return 0.0;
  return std::exp(-std::log(u) / m.xi);
}

namespace detail {
inline void require_samples(std::span<const double> samples, const GpdModel& m) {
  if (samples.empty()) throw std::invalid_argument("TERM: sample set is empty");
  for (double q : samples)
    if (!in_support(m, q)) throw std::domain_error("TERM: sample outside model support");
}

// Tilted weights w_i = G_i^-t / sum_j G_j^-t, computed in log space.
inline std::vector<double> tilted_weights(const GpdModel& m, std::span<const double> samples,
                                          double tilt, double* log_sum_out = nullptr) {
  std::vector<double> w(samples.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    w[i] = -tilt * gpd_log_pdf(m, samples[i]);
    mx = std::max(mx, w[i]);
  }
  double total = 0.0;
  for (double& v : w) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : w) v /= total;
  if (log_sum_out) *log_sum_out = mx + std::log(total);
  return w;
}
}  // namespace detail

inline double term_loss(const GpdModel& m, std::span<const double> samples, double tilt) {
  detail::require_samples(samples, m);
  if (tilt == 0.0) throw std::invalid_argument("term_loss: tilt must be non-zero");
  double log_sum = 0.0;
  detail::tilted_weights(m, samples, tilt, &log_sum);
  return (log_sum - std::log(static_cast<double>(samples.size()))) / tilt;
}

/// Mean negative log-likelihood (the tilt -> 0 limit of the TERM loss).
inline double mean_nll(const GpdModel& m, std::span<const double> samples) {
  detail::require_samples(samples, m);
  double s = 0.0;
  for (double q : samples) s -= gpd_log_pdf(m, q);
  return s / static_cast<double>(samples.size());
}

/// grad L = - sum_q grad G(q) G(q)^(-t-1) / sum_q G(q)^-t, evaluated as a
/// tilt-weighted mean of grad ln G.
inline Gradient term_gradient(const GpdModel& m, std::span<const double> samples, double tilt) {
  detail::require_samples(samples, m);
  if (tilt == 0.0) throw std::invalid_argument("term_gradient: tilt must be non-zero");
  const auto w = detail::tilted_weights(m, samples, tilt);
  Gradient g;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Gradient dl = gpd_log_pdf_gradient(m, samples[i]);
    g.d_sigma -= w[i] * dl.d_sigma;
    g.d_xi -= w[i] * dl.d_xi;
  }
  return g;
}

/// Pulls a model back into the valid region: sigma >= 1e-8, xi <= 0.999 and
/// 1 + xi q / sigma > 1e-12 for every sample q.
inline GpdModel project_model(GpdModel m, std::span<const double> samples) {
  if (!std::isfinite(m.sigma) || m.sigma < kSigmaFloor) m.sigma = kSigmaFloor;
  if (!std::isfinite(m.xi)) m.xi = 0.0;
  m.xi = std::min(m.xi, kXiCeiling);
  if (samples.empty() || m.xi >= 0.0) return m;
  const double q_max = *std::max_element(samples.begin(), samples.end());
  if (q_max <= 0.0) return m;
  const double xi_min = (2e-12 - 1.0) * m.sigma / q_max;
  if (m.xi < xi_min) m.xi = xi_min;
  return m;
}

/// One round of local training from the received model. An empty sample set
/// returns the received model unchanged.
///
/// Each epoch takes the gradient step with the configured step sizes when it
/// achieves at least 1e-4 of the first-order predicted decrease of the local
/// TERM loss (Armijo). Next to the support edge, where the gradient is huge,
/// the full step overshoots; both step sizes are then halved until the test
/// passes, and after 80 halvings the model is left where it is.
inline GpdModel local_update(const GpdModel& received, std::span<const double> samples,
                             const TermSettings& settings) {
  if (samples.empty()) return received;
  GpdModel m = project_model(received, samples);
  for (int e = 0; e < settings.epochs; ++e) {
    const Gradient g = term_gradient(m, samples, settings.tilt);
    const double loss = term_loss(m, samples, settings.tilt);
    const double predicted = settings.step_sigma * g.d_sigma * g.d_sigma +
                             settings.step_xi * g.d_xi * g.d_xi;
    double scale = 1.0;
    for (int halving = 0; halving <= 80; ++halving, scale *= 0.5) {
      const GpdModel trial = project_model(
          {m.sigma - scale * settings.step_sigma * g.d_sigma, m.xi - scale * settings.step_xi * g.d_xi},
          samples);
      if (term_loss(trial, samples, settings.tilt) <= loss - 1e-4 * scale * predicted) {
        m = trial;
        break;
      }
    }
  }
  return m;
}

namespace detail {

template <class Fn>
std::pair<double, double> golden_min(Fn&& fn, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fn(d);
    }
  }
  return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

inline double total_nll(const GpdModel& m, std::span<const double> samples) {
  double s = 0.0;
  for (double q : samples) {
    if (!in_support(m, q)) return std::numeric_limits<double>::infinity();
    s -= gpd_log_pdf(m, q);
  }
  return s;
}

}  // namespace detail

struct MleOptions {
  double xi_min = -0.9;
  double xi_max = 0.95;
  int xi_starts = 9;
  double tol = 1e-10;
};

/// Maximum-likelihood GPD fit. Profiles sigma out for each shape value, scans
/// the shape range from several starting brackets, and refines the best one
/// with golden-section search.
inline GpdModel mle_fit(std::span<const double> samples, const MleOptions& opt = {}) {
  if (samples.size() < 10) throw std::invalid_argument("mle_fit: need at least 10 samples");
  for (double q : samples)
    if (!(q > 0.0) || !std::isfinite(q)) throw std::domain_error("mle_fit: samples must be positive");
  const double q_max = *std::max_element(samples.begin(), samples.end());
  const double q_mean =
      std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());

  // Best sigma for a fixed shape, searched in log space.
  auto profile = [&](double xi, double* sigma_out) {
    const double lo_sigma = xi < 0.0 ? -xi * q_max * (1.0 + 1e-9) : q_mean * 1e-4;
    const double hi_sigma = q_mean * 1e3 + lo_sigma;
    auto nll = [&](double log_sigma) {
      return detail::total_nll({std::exp(log_sigma), xi}, samples);
    };
    const auto [ls, v] = detail::golden_min(nll, std::log(lo_sigma), std::log(hi_sigma), opt.tol);
    if (sigma_out) *sigma_out = std::exp(ls);
    return v;
  };

  const int n_scan = 2 * opt.xi_starts - 1;
  const double step = (opt.xi_max - opt.xi_min) / (n_scan - 1);
  int best_k = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_scan; ++k) {
    const double v = profile(opt.xi_min + step * k, nullptr);
    if (v < best_v) {
      best_v = v;
      best_k = k;
    }
  }
  const double a = opt.xi_min + step * std::max(best_k - 1, 0);
  const double b = opt.xi_min + step * std::min(best_k + 1, n_scan - 1);
  const auto [xi_hat, v_hat] = detail::golden_min([&](double xi) { return profile(xi, nullptr); },
                                                  a, b, opt.tol);
  GpdModel out;
  out.xi = xi_hat;
  profile(xi_hat, &out.sigma);
  (void)v_hat;
  return out;
}

}  // namespace aoifl::evt
