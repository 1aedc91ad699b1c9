#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "cfisac/channel.hpp"
#include "oracles/svd.hpp"
#include "support.hpp"

using namespace cfisac;

namespace {

const double kLambda = kSpeedOfLight / 3.5e9;

std::vector<Point2> square_aps() { return {{650, 0}, {0, 650}, {-650, 0}, {0, -650}}; }

}  // namespace

TEST(Steering, SingleElementIsOne) {
  const CVec a = uca_steering(0.7, -0.3, 1, kLambda);
  ASSERT_EQ(a.size(), 1);
  EXPECT_EQ(a(0), cx(1.0, 0.0));
}

TEST(Steering, OverheadIsAllOnes) {
  for (double az : {0.0, 1.0, -2.5}) {
    const CVec a = uca_steering(az, kPi / 2, 8, kLambda);
    for (int m = 0; m < 8; ++m) EXPECT_NEAR(std::abs(a(m) - cx(1.0, 0.0)), 0.0, 1e-12);
  }
}

TEST(Steering, FourElementsMatchScalarFormula) {
  const int M = 4;
  const CVec a = uca_steering(0.0, 0.0, M, kLambda);
  const double r = kLambda / (4.0 * std::sin(kPi / M));
  for (int m = 0; m < M; ++m) {
    const double ph = 2.0 * kPi * r / kLambda * std::cos(-2.0 * kPi * m / M);
    EXPECT_NEAR(a(m).real(), std::cos(ph), 1e-12);
    EXPECT_NEAR(a(m).imag(), std::sin(ph), 1e-12);
  }
}

TEST(Steering, NormSquaredIsM) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int M : {2, 3, 7, 10, 16}) {
    const CVec a = uca_steering(u(rng), u(rng) / 2, M, kLambda);
    EXPECT_NEAR(a.squaredNorm(), M, 1e-12);
  }
}

TEST(Steering, NeighbourSpacingIsHalfWavelength) {
  for (int M : {3, 6, 10}) {
    const double r = kLambda / (4.0 * std::sin(kPi / M));
    EXPECT_NEAR(2.0 * r * std::sin(kPi / M), kLambda / 2, 1e-12);
  }
}

TEST(PathLoss, DecreasesWithDistance) {
  EXPECT_GT(pathloss_linear(100.0, 3.5, 650.0), pathloss_linear(200.0, 3.5, 650.0));
  EXPECT_NEAR(pathloss_linear(650.0, 3.5, 650.0), 1.0, 1e-12);
  // 21 dB per decade.
  EXPECT_NEAR(to_db(pathloss_linear(10.0, 3.5, 1.0)), -21.0, 1e-9);
}

TEST(PathLoss, FartherUeGetsWeakerChannel) {
  ScenarioConfig c;
  c.rician_k_factor = 1e9;
  const Geometry g = make_geometry(c, {{0, 0}, {5000, 0}}, {{100, 0}, {200, 0}}, {4000, 0});
  const ChannelSet ch = gen_comm_channels(g, c);
  ASSERT_EQ(ch.tx_aps, std::vector<int>{0});
  EXPECT_GT(ch.path_gain[0][0], ch.path_gain[0][1]);
  EXPECT_GT(ch.h(0, 0).squaredNorm(), ch.h(0, 1).squaredNorm());
}

TEST(Channel, LosLimitIsSteering) {
  ScenarioConfig c;
  c.rician_k_factor = 1e9;
  const Geometry g = build_scenario(c);
  const ChannelSet ch = gen_comm_channels(g, c);
  for (int k = 0; k < ch.tx_count(); ++k) {
    const int ap = ch.tx_aps[k];
    for (int u = 0; u < ch.ue_count(); ++u) {
      const CVec a = uca_steering(g.ue_azimuth[ap][u], g.ue_elevation[ap][u], c.antennas_per_ap,
                                  c.carrier_wavelength_m);
      const CVec h = ch.h(k, u) / std::sqrt(ch.path_gain[k][u]);
      EXPECT_LT((h - a).cwiseAbs().maxCoeff(), 1e-3);
    }
  }
}

TEST(Channel, RayleighMomentMatchesAntennaCount) {
  ScenarioConfig c;
  c.rician_k_factor = 0.0;
  c.ue_count = 1;
  const Geometry g = make_geometry(c, square_aps(), {{100, 100}}, {-600, 0});
  double acc = 0.0;
  const int draws = 10000;
  for (int s = 1; s <= draws; ++s) {
    c.seed = s;
    const ChannelSet ch = gen_comm_channels(g, c);
    acc += ch.h(0, 0).squaredNorm() / ch.path_gain[0][0];
  }
  EXPECT_NEAR(acc / draws / c.antennas_per_ap, 1.0, 0.03);
}

TEST(Channel, CoincidentUeAndApRejected) {
  ScenarioConfig c;
  c.ap_height_m = c.ue_height_m;
  const auto aps = square_aps();
  const Geometry g = make_geometry(c, aps, {aps[0]}, {-600, 0});
  EXPECT_THROW(gen_comm_channels(g, c), NumericalError);
}

TEST(Channel, SameSeedBitIdentical) {
  ScenarioConfig c;
  c.seed = 9;
  const Geometry g = build_scenario(c);
  const ChannelSet a = gen_comm_channels(g, c);
  const ChannelSet b = gen_comm_channels(build_scenario(c), c);
  for (int k = 0; k < a.tx_count(); ++k) EXPECT_TRUE(a.H[k] == b.H[k]);
  const auto pa = sensing_paths(g, c), pb = sensing_paths(g, c);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].gain, pb[i].gain);
}

TEST(Channel, AddingUeKeepsOtherDraws) {
  ScenarioConfig c;
  c.ue_count = 3;
  const ChannelSet a = gen_comm_channels(build_scenario(c), c);
  c.ue_count = 4;
  const ChannelSet b = gen_comm_channels(build_scenario(c), c);
  for (int k = 0; k < a.tx_count(); ++k) EXPECT_TRUE(a.H[k] == b.H[k].topRows(3));
}

TEST(Channel, ShapesFollowTxSet) {
  ScenarioConfig c;
  const Geometry g = build_scenario(c);
  const ChannelSet ch = gen_comm_channels(g, c);
  EXPECT_EQ(ch.tx_aps, g.tx_set);
  EXPECT_EQ(ch.ue_count(), 6);
  EXPECT_EQ(ch.antennas(), 10);
  EXPECT_EQ(ch.slot_of(g.rx_set.front()), -1);
}

TEST(SensingPaths, RcsVarianceEverywhere) {
  ScenarioConfig c;
  const auto paths = sensing_paths(build_scenario(c), c);
  ASSERT_EQ(paths.size(), 3u);
  for (const auto& p : paths) {
    EXPECT_EQ(p.gain_var, 0.5);
    EXPECT_EQ(p.doppler_hz, 0.0);
    EXPECT_NEAR(p.tx_steering.squaredNorm(), 10.0, 1e-12);
  }
}

TEST(SensingPaths, EquidistantDelay) {
  ScenarioConfig c;
  const auto aps = square_aps();
  const Geometry g = make_geometry(c, aps, {{10, 10}}, {0, 0});
  const auto paths = sensing_paths(g, c);
  const double d = std::hypot(650.0, c.ap_height_m - c.ue_height_m);
  for (const auto& p : paths) EXPECT_NEAR(p.delay_s, 2 * d / kSpeedOfLight, 1e-18);
}

TEST(SensingPaths, StaticTargetPhaseIsUnitModulus) {
  ScenarioConfig c;
  const auto paths = sensing_paths(build_scenario(c), c);
  const cx w = paths[0].phase(5, 3, c.ofdm);
  EXPECT_NEAR(std::abs(w), 1.0, 1e-12);
  EXPECT_EQ(paths[0].phase(5, 0, c.ofdm), paths[0].phase(5, 9, c.ofdm));
}

TEST(ChannelMetric, ScaledOrthonormalRows) {
  std::mt19937_64 rng(1);
  const CMat Q = Eigen::HouseholderQR<CMat>(testing_support::random_cmat(rng, 8, 8)).householderQ();
  EXPECT_NEAR(channel_metric(5.0 * Q.topRows(3)), 1.0, 1e-12);
}

TEST(ChannelMetric, DiagonalPadded) {
  CMat H = CMat::Zero(2, 4);
  H(0, 0) = 2.0;
  H(1, 1) = 1.0;
  EXPECT_NEAR(channel_metric(H), 0.5, 1e-12);
}

TEST(ChannelMetric, MatchesSvdOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const CMat H = testing_support::random_cmat(rng, 6, 10);
    const double m = channel_metric(H);
    EXPECT_NEAR(m, oracle::inverse_condition(H), 1e-9);
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
  }
}

TEST(ChannelMetric, RankDeficientIsZero) {
  std::mt19937_64 rng(2);
  CMat H = testing_support::random_cmat(rng, 3, 5);
  H.row(2) = H.row(0);
  EXPECT_EQ(channel_metric(H), 0.0);
}

TEST(ChannelMetric, ZeroMatrixRejected) {
  EXPECT_THROW(channel_metric(CMat::Zero(3, 4)), NumericalError);
}

TEST(ChannelCsv, RoundTrip) {
  ScenarioConfig c;
  const ChannelSet a = gen_comm_channels(build_scenario(c), c);
  const auto path = std::filesystem::temp_directory_path() / "cfisac_channels_test.csv";
  write_channels_csv(a, path);
  const ChannelSet b = read_channels_csv(path);
  std::filesystem::remove(path);
  ASSERT_EQ(a.tx_aps, b.tx_aps);
  for (int k = 0; k < a.tx_count(); ++k) EXPECT_TRUE(a.H[k] == b.H[k]);
}
