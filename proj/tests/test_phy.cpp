#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aoifl/phy.hpp"
#include "oracles.hpp"

using namespace aoifl;

namespace {

phy::ChannelParams desk() { return {}; }

}  // namespace

TEST(Phy, DefaultsMatchUnitConversions) {
  const oracle::Radio r;
  const auto cp = desk();
  EXPECT_NEAR(cp.noise_psd_w_per_hz / r.N0, 1.0, 1e-12);
  EXPECT_NEAR(cp.p_max_w / r.p_max, 1.0, 1e-12);
  EXPECT_NEAR(cp.pathloss_db, r.pathloss_db, 1e-12);
  EXPECT_NEAR(phy::dbm_to_watts(-174.0), 3.981071705534985e-21, 1e-33);
  EXPECT_NEAR(phy::watts_to_dbm(phy::dbm_to_watts(17.3)), 17.3, 1e-12);
  EXPECT_NEAR(phy::linear_to_db(phy::db_to_linear(-84.8)), -84.8, 1e-12);
}

TEST(Phy, UnitSnrGivesPayloadOverBandwidth) {
  auto cp = desk();
  const double h = 1.0;
  const double p = cp.noise_power_w() / h;  // h p / (N0 B) = 1
  EXPECT_NEAR(phy::transmission_time(p, h, cp), 24000.0 / 180000.0, 1e-15);
}

TEST(Phy, FullPowerUploadAtNominalPathLoss) {
  const oracle::Radio r;
  const auto cp = desk();
  const double h = cp.pathloss_gain();
  const double t = phy::transmission_time(cp.p_max_w, h, cp);
  EXPECT_NEAR(t / oracle::tx_time(r.p_max, r.gain(), r), 1.0, 1e-12);
  EXPECT_NEAR(t, 6.7330e-3, 5e-7);
  EXPECT_NEAR(phy::transmission_energy(cp.p_max_w, h, cp), 1.3434e-3, 5e-7);
}

TEST(Phy, NoisePsdReadAsDbwGivesTheLongerUploadTime) {
  // Reading -174 as dBW/Hz (30 dB more noise) reproduces the ~13.6 ms figure.
  auto cp = desk();
  cp.noise_psd_w_per_hz = phy::db_to_linear(-174.0);
  const double t = phy::transmission_time(cp.p_max_w, cp.pathloss_gain(), cp);
  EXPECT_NEAR(t, 0.01355, 5e-5);
  EXPECT_NEAR(cp.p_max_w * t, 2.70e-3, 2e-5);
}

TEST(Phy, TimeDivergesAsPowerVanishes) {
  const auto cp = desk();
  const double h = cp.pathloss_gain();
  EXPECT_GT(phy::transmission_time(1e-12, h, cp), phy::transmission_time(1e-9, h, cp));
  EXPECT_GT(phy::transmission_time(1e-12, h, cp), 1e3);
}

TEST(Phy, RejectsNonPositiveInputs) {
  const auto cp = desk();
  EXPECT_THROW(phy::transmission_time(0.0, 1.0, cp), std::domain_error);
  EXPECT_THROW(phy::transmission_time(0.1, 0.0, cp), std::domain_error);
  EXPECT_THROW(phy::transmission_time(-0.1, 1.0, cp), std::domain_error);
  EXPECT_THROW(phy::transmission_energy(0.0, 1.0, cp), std::domain_error);
  EXPECT_THROW(phy::pathloss_db(0.0, 1.0), std::domain_error);
  EXPECT_THROW(phy::pathloss_db(1.0, -1.0), std::domain_error);
}

TEST(Phy, EnergyIsPowerTimesTime) {
  const auto cp = desk();
  EXPECT_DOUBLE_EQ(0.1 * 0.1, 0.01);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double p = u(gen) * cp.p_max_w;
    const double h = cp.pathloss_gain() * u(gen) * 5;
    EXPECT_EQ(phy::transmission_energy(p, h, cp), p * phy::transmission_time(p, h, cp));
  }
}

TEST(Phy, EnergyPositiveAndContinuousOnGrid) {
  const auto cp = desk();
  const double h = cp.pathloss_gain();
  // E is increasing and t decreasing, so 0 < E(p2) - E(p1) <= t(p1) (p2 - p1).
  const double dp = cp.p_max_w / 1000.0;
  double prev = phy::transmission_energy(dp, h, cp);
  for (int k = 2; k <= 1000; ++k) {
    const double e = phy::transmission_energy(dp * k, h, cp);
    EXPECT_GT(e, prev);
    EXPECT_LE(e - prev, phy::transmission_time(dp * (k - 1), h, cp) * dp * (1 + 1e-12));
    prev = e;
  }
}

TEST(Phy, TimeStrictlyDecreasingInPowerAndGain) {
  const auto cp = desk();
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double h = cp.pathloss_gain() * std::pow(10.0, 4.0 * u(gen) - 2.0);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 50; ++k) {
      const double t = phy::transmission_time(cp.p_max_w * k / 50.0, h, cp);
      EXPECT_LT(t, prev);
      prev = t;
    }
    const double p = cp.p_max_w * (0.01 + u(gen));
    EXPECT_GT(phy::transmission_time(p, h, cp), phy::transmission_time(p, h * 1.01, cp));
  }
}

TEST(Phy, PowerForTimeInvertsTransmissionTime) {
  const auto cp = desk();
  const double h = cp.pathloss_gain();
  for (double p : {1e-6, 1e-3, 0.05, cp.p_max_w}) {
    const double t = phy::transmission_time(p, h, cp);
    EXPECT_NEAR(phy::power_for_time(t, h, cp) / p, 1.0, 1e-10);
  }
}

TEST(Phy, PathLossModel) {
  EXPECT_NEAR(phy::pathloss_db(1.0, 1.0), 32.45, 1e-12);
  EXPECT_NEAR(phy::pathloss_db(10.0, 1.0), 64.35, 1e-12);
  EXPECT_NEAR(phy::pathloss_db(20.0, 3.5), 84.83421774868651, 1e-9);
  EXPECT_NEAR(phy::pathloss_db(20.0, 3.5), 84.83, 5e-3);
}

TEST(Phy, FadingHasUnitMeanExponentialTail) {
  RandomStream rng(42, 0, StreamPurpose::fading);
  const int n = 1'000'000;
  double sum = 0.0;
  int above3 = 0;
  for (int k = 0; k < n; ++k) {
    const double g = phy::draw_fading(rng);
    ASSERT_GT(g, 0.0);
    sum += g;
    above3 += g > 3.0;
  }
  EXPECT_GE(sum / n, 0.99);
  EXPECT_LE(sum / n, 1.01);
  EXPECT_NEAR(static_cast<double>(above3) / n, std::exp(-3.0), 0.002);
}

TEST(Phy, FadingIsReproducible) {
  RandomStream a(5, 3, StreamPurpose::fading);
  RandomStream b(5, 3, StreamPurpose::fading);
  RandomStream c(5, 4, StreamPurpose::fading);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double x = phy::draw_fading(a);
    EXPECT_EQ(x, phy::draw_fading(b));
    differs |= x != phy::draw_fading(c);
  }
  EXPECT_TRUE(differs);
}

TEST(Phy, TrainingComputeEnergy) {
  const phy::TrainingEnergyParams tp;
  EXPECT_EQ(phy::training_compute_energy(0, tp, false), 0.0);
  EXPECT_EQ(phy::training_compute_energy(0, tp, true), 0.0);
  const double sensor = 1e-27 * 1e9 * 1e9 * 240 * 87.8;
  EXPECT_NEAR(phy::training_compute_energy(1, tp, false) / sensor, 1.0, 1e-12);
  EXPECT_NEAR(phy::training_compute_energy(1, tp, false), 2.107e-5, 1e-8);
  EXPECT_NEAR(phy::training_compute_energy(1, tp, true) / phy::training_compute_energy(1, tp, false),
              4e4, 1e-6);
  EXPECT_NEAR(phy::training_compute_energy(7, tp, false), 7 * sensor, 1e-18);
}

TEST(Phy, ModelUploadEnergy) {
  const oracle::Radio r;
  auto cp = desk();
  phy::TrainingEnergyParams tp;
  const double h_unit = cp.noise_power_w() / cp.p_max_w;
  EXPECT_NEAR(phy::model_upload_energy(h_unit, cp, tp), cp.p_max_w * 240.0 / 180e3, 1e-15);

  const double h = cp.pathloss_gain();
  const double expect = r.p_max * 240.0 / (r.B * std::log2(1.0 + h * r.p_max / (r.N0 * r.B)));
  EXPECT_NEAR(phy::model_upload_energy(h, cp, tp) / expect, 1.0, 1e-12);
  EXPECT_NEAR(phy::model_upload_energy(h, cp, tp), 1.3434e-5, 5e-9);

  const double once = phy::model_upload_energy(h, cp, tp);
  tp.n_tr_bits *= 2;
  EXPECT_NEAR(phy::model_upload_energy(h, cp, tp), 2 * once, 1e-18);
}

TEST(Phy, ChannelValidation) {
  phy::ChannelParams cp;
  EXPECT_NO_THROW(cp.validate());
  cp.bandwidth_hz = 0;
  EXPECT_THROW(cp.validate(), std::invalid_argument);
  phy::TrainingEnergyParams tp;
  tp.kappa = -1;
  EXPECT_THROW(tp.validate(), std::invalid_argument);
}
