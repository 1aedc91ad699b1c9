#include <gtest/gtest.h>

#include <cmath>

#include "cfisac/config_io.hpp"
#include "cfisac/scenario.hpp"

using namespace cfisac;

namespace {

bool has_violation(const ScenarioConfig& c, const std::string& field) {
  for (const auto& v : validate_config(c)) {
    if (v.field == field) return true;
  }
  return false;
}

}  // namespace

TEST(Scenario, FourApsOnCircleAtRightAngles) {
  ScenarioConfig c;
  const Geometry g = build_scenario(c);
  ASSERT_EQ(g.ap_count(), 4);
  for (const auto& p : g.ap_positions) EXPECT_NEAR(std::hypot(p.x, p.y), 650.0, 1e-9);
  for (int a = 0; a < 4; ++a) {
    const auto& p = g.ap_positions[a];
    const auto& q = g.ap_positions[(a + 1) % 4];
    // Neighbours 90 degrees apart: orthogonal position vectors.
    EXPECT_NEAR(p.x * q.x + p.y * q.y, 0.0, 1e-6);
  }
  EXPECT_EQ(g.rx_set.size(), 1u);
  EXPECT_EQ(g.tx_set.size(), 3u);
}

TEST(Scenario, RxApIsNearestToTarget) {
  ScenarioConfig c;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    c.seed = seed;
    const Geometry g = build_scenario(c);
    const int rx = g.rx_set.front();
    for (int a = 0; a < g.ap_count(); ++a) {
      const double da = planar_distance(g.ap_positions[a], g.target_position);
      const double dr = planar_distance(g.ap_positions[rx], g.target_position);
      EXPECT_TRUE(dr < da || (dr == da && rx <= a));
    }
  }
}

TEST(Scenario, TargetOnApSelectsThatAp) {
  ScenarioConfig c;
  std::vector<Point2> aps{{650, 0}, {0, 650}, {-650, 0}, {0, -650}};
  const Geometry g = make_geometry(c, aps, {{10, 20}}, aps[2]);
  EXPECT_EQ(g.rx_set, std::vector<int>{2});
  EXPECT_EQ(g.tx_set, (std::vector<int>{0, 1, 3}));
}

TEST(Scenario, EquidistantTieGoesToLowestIndex) {
  ScenarioConfig c;
  std::vector<Point2> aps{{650, 0}, {0, 650}, {-650, 0}, {0, -650}};
  const Geometry g = make_geometry(c, aps, {{10, 20}}, {0, 0});
  EXPECT_EQ(g.rx_set, std::vector<int>{0});
}

TEST(Scenario, SameSeedSameGeometry) {
  ScenarioConfig c;
  c.seed = 42;
  const Geometry a = build_scenario(c);
  const Geometry b = build_scenario(c);
  ASSERT_EQ(a.ue_count(), b.ue_count());
  for (int i = 0; i < a.ap_count(); ++i) {
    EXPECT_EQ(a.ap_positions[i].x, b.ap_positions[i].x);
    EXPECT_EQ(a.ap_positions[i].y, b.ap_positions[i].y);
  }
  for (int u = 0; u < a.ue_count(); ++u) {
    EXPECT_EQ(a.ue_positions[u].x, b.ue_positions[u].x);
    EXPECT_EQ(a.ue_positions[u].y, b.ue_positions[u].y);
  }
  EXPECT_EQ(a.target_position.x, b.target_position.x);
  EXPECT_EQ(a.tx_set, b.tx_set);
  EXPECT_EQ(a.ue_azimuth, b.ue_azimuth);
  EXPECT_EQ(a.target_elevation, b.target_elevation);
}

TEST(Scenario, DifferentSeedsDiffer) {
  ScenarioConfig c;
  const Geometry a = build_scenario(c);
  c.seed = 2;
  const Geometry b = build_scenario(c);
  EXPECT_NE(a.ue_positions[0].x, b.ue_positions[0].x);
}

TEST(Scenario, AddingUeKeepsExistingPositions) {
  ScenarioConfig c;
  c.ue_count = 4;
  const Geometry a = build_scenario(c);
  c.ue_count = 5;
  const Geometry b = build_scenario(c);
  for (int u = 0; u < 4; ++u) {
    EXPECT_EQ(a.ue_positions[u].x, b.ue_positions[u].x);
    EXPECT_EQ(a.ue_positions[u].y, b.ue_positions[u].y);
  }
  EXPECT_EQ(a.target_position.x, b.target_position.x);
}

TEST(Scenario, PointsInsidePlacementDisk) {
  ScenarioConfig c;
  c.ue_count = 50;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    c.seed = seed;
    const Geometry g = build_scenario(c);
    for (const auto& p : g.ue_positions) EXPECT_LE(std::hypot(p.x, p.y), c.placement_radius_m);
    EXPECT_LE(std::hypot(g.target_position.x, g.target_position.y), c.placement_radius_m);
  }
}

TEST(Scenario, ElevationFromHeightDifference) {
  ScenarioConfig c;
  std::vector<Point2> aps{{0, 0}, {100, 0}};
  const Geometry g = make_geometry(c, aps, {{8.5, 0}}, {50, 50});
  EXPECT_NEAR(g.ue_elevation[0][0], -kPi / 4, 1e-12);
  EXPECT_NEAR(g.ue_azimuth[0][0], 0.0, 1e-12);
}

TEST(ScenarioValidation, TradeoffBounds) {
  ScenarioConfig c;
  c.solver.tradeoff = 0.3;
  EXPECT_TRUE(validate_config(c).empty());
  c.solver.tradeoff = 1.5;
  ASSERT_TRUE(has_violation(c, "lambda_tradeoff"));
  EXPECT_EQ(validate_config(c).front().rule, "lambda_tradeoff not in [0,1]");
}

TEST(ScenarioValidation, SingleApRejected) {
  ScenarioConfig c;
  c.ap_count = 1;
  ASSERT_TRUE(has_violation(c, "ap_count"));
  EXPECT_EQ(validate_config(c).front().rule, "N_ap >= 2 required");
  EXPECT_THROW(build_scenario(c), std::invalid_argument);
}

TEST(ScenarioValidation, CollectsEveryViolation) {
  ScenarioConfig c;
  c.ap_count = 1;
  c.noise_var = 0.0;
  c.solver.tradeoff = -1.0;
  EXPECT_EQ(validate_config(c).size(), 3u);
}

TEST(ScenarioValidation, DefaultsAreValid) { EXPECT_TRUE(validate_config(ScenarioConfig{}).empty()); }

TEST(Ofdm, DerivedNumerology) {
  OfdmConfig o;
  EXPECT_DOUBLE_EQ(o.subcarrier_spacing_hz(), 30e3);
  EXPECT_NEAR(o.symbol_period_s(), 1.0 / 30e3 + 2.34e-6, 1e-15);
}

TEST(ConfigIo, RoundTrip) {
  ScenarioConfig c;
  c.ue_count = 3;
  c.solver.tradeoff = 0.9;
  c.solver.fixed_psr = 0.25;
  c.sensing_noise_var = 0.02;
  const ScenarioConfig d = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(c), config_to_json(d));
  EXPECT_EQ(scenario_hash(c), scenario_hash(d));
}

TEST(ConfigIo, DbKeysConvert) {
  const ScenarioConfig c = config_from_json(R"({"rician_k_factor_db": 20})");
  EXPECT_NEAR(c.rician_k_factor, 100.0, 1e-9);
}

TEST(ConfigIo, UnknownKeyRejected) {
  EXPECT_THROW(config_from_json(R"({"ap_cuont": 4})"), std::invalid_argument);
}

TEST(ConfigIo, HashTracksContent) {
  ScenarioConfig c;
  const std::string h = scenario_hash(c);
  EXPECT_EQ(h.size(), 16u);
  apply_override(c, "n_ue", 5);
  EXPECT_EQ(c.ue_count, 5);
  EXPECT_NE(scenario_hash(c), h);
}
