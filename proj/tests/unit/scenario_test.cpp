#include "cran/scenario.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>

using namespace cran;

namespace {

NetworkConfig unit_gain(int n, int k) {
  auto c = NetworkConfig::homogeneous(n, k, 8.0, 8.0);
  c.reference_gain = 1.0;
  return c;
}

}  // namespace

TEST(NetworkConfig, RejectsEmptyNetworks) {
  auto c = NetworkConfig::heterogeneous(2, 1, 8.0, 8.0);
  c.num_mus = 0;
  EXPECT_THROW(generate_scenario(c, 1), std::invalid_argument);
  EXPECT_THROW(NetworkConfig::homogeneous(0, 2, 8.0, 8.0).validate(), std::invalid_argument);
}

TEST(NetworkConfig, RejectsNonPositivePowersButAllowsZeroWeight) {
  auto c = NetworkConfig::homogeneous(2, 2, 8.0, 8.0);
  c.weight = 0.0;
  EXPECT_NO_THROW(c.validate());
  c.mu_tx_limit[1] = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = NetworkConfig::homogeneous(2, 2, 8.0, 8.0);
  c.fixed_ap_positions = {{0, 0}, {1, 1}, {2, 2}};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(NetworkConfig, PresetsCarryTheSimulationBudgets) {
  const auto h = NetworkConfig::homogeneous(6, 4, 8.0, 12.0);
  EXPECT_EQ(h.total_antennas(), 12);
  EXPECT_DOUBLE_EQ(h.ap_static_power[3], 2.0);
  EXPECT_DOUBLE_EQ(h.ap_tx_limit[3], 1.0);
  EXPECT_DOUBLE_EQ(h.mu_tx_limit[0], 0.5);
  EXPECT_NEAR(h.qos_ul[0], std::pow(10.0, 1.2), 1e-12);
  EXPECT_NEAR(h.noise_power, 1e-8, 1e-20);
  EXPECT_DOUBLE_EQ(h.total_ul_budget(), 2.0);

  const auto het = NetworkConfig::heterogeneous(10, 8, 8.0, 8.0);
  EXPECT_DOUBLE_EQ(het.ap_static_power[0], 50.0);
  EXPECT_DOUBLE_EQ(het.ap_tx_limit[1], 20.0);
  EXPECT_DOUBLE_EQ(het.ap_static_power[2], 2.0);
  EXPECT_DOUBLE_EQ(het.ap_tx_limit[9], 1.0);
  EXPECT_EQ(het.antenna_offset(3), 6);
}

TEST(NetworkConfig, JsonRoundTrip) {
  auto c = NetworkConfig::heterogeneous(4, 3, 6.0, 12.0);
  c.weight = 0.25;
  c.duplex = DuplexMode::fdd_independent;
  const auto back = network_config_from_json(to_json(c));
  EXPECT_EQ(back.num_aps, 4);
  EXPECT_EQ(back.fixed_ap_positions, c.fixed_ap_positions);
  EXPECT_EQ(back.duplex, DuplexMode::fdd_independent);
  EXPECT_DOUBLE_EQ(back.weight, 0.25);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(back.qos_ul[static_cast<std::size_t>(i)], c.qos_ul[static_cast<std::size_t>(i)], 1e-12);
  EXPECT_NEAR(back.reference_gain, c.reference_gain, 1e-9 * c.reference_gain);
}

TEST(NetworkConfig, JsonBroadcastsScalarsAndRejectsBadLists) {
  const auto doc = nlohmann::json::parse(R"({"num_aps": 3, "num_mus": 2, "ap_static_power_w": [1, 2, 3],
                                            "mu_tx_limit_w": 0.2, "sinr_dl_db": 0})");
  const auto c = network_config_from_json(doc);
  EXPECT_DOUBLE_EQ(c.ap_static_power[2], 3.0);
  EXPECT_DOUBLE_EQ(c.mu_tx_limit[1], 0.2);
  EXPECT_DOUBLE_EQ(c.qos_dl[0], 1.0);
  auto bad = doc;
  bad["ap_static_power_w"] = {1, 2};
  EXPECT_THROW(network_config_from_json(bad), std::invalid_argument);
  bad = doc;
  bad["preset"] = "nonsense";
  EXPECT_THROW(network_config_from_json(bad), std::invalid_argument);
}

TEST(Scenario, HonorsFixedHapPositions) {
  const auto c = NetworkConfig::heterogeneous(6, 4, 8.0, 8.0);
  const auto s = generate_scenario(c, 3);
  EXPECT_EQ(s.ap_positions[0], (Point{-750.0, 0.0}));
  EXPECT_EQ(s.ap_positions[1], (Point{750.0, 0.0}));
}

TEST(Scenario, DeterministicAndInsideTheSquare) {
  const auto c = NetworkConfig::homogeneous(8, 6, 8.0, 8.0);
  const auto a = generate_scenario(c, 42);
  const auto b = generate_scenario(c, 42);
  EXPECT_EQ(a.ap_positions, b.ap_positions);
  EXPECT_EQ(a.mu_positions, b.mu_positions);
  EXPECT_NE(a.mu_positions, generate_scenario(c, 43).mu_positions);
  for (const auto* v : {&a.ap_positions, &a.mu_positions}) {
    for (const auto& p : *v) {
      EXPECT_LE(std::abs(p.x), 1500.0);
      EXPECT_LE(std::abs(p.y), 1500.0);
    }
  }
}

TEST(Scenario, DistanceHasAOneMeterFloor) {
  auto c = unit_gain(1, 1);
  c.fixed_ap_positions = {{0.0, 0.0}};
  auto s = generate_scenario(c, 1);
  s.mu_positions[0] = {0.0, 0.0};
  EXPECT_DOUBLE_EQ(s.distance(0, 0), 1.0);
  s.mu_positions[0] = {3.0, 4.0};
  EXPECT_DOUBLE_EQ(s.distance(0, 0), 5.0);
}

TEST(Channel, UnitFadingGivesPathlossOnly) {
  auto c = unit_gain(1, 1);
  c.fixed_ap_positions = {{0.0, 0.0}};
  auto s = generate_scenario(c, 1);
  s.mu_positions[0] = {10.0, 0.0};
  const auto ch = sample_channel(s, 5, Fading::unit);
  for (int a = 0; a < 2; ++a) EXPECT_NEAR(std::norm(ch.h[0](a)), 1e-3, 1e-15);
}

TEST(Channel, ReferenceGainScalesPower) {
  auto c = unit_gain(1, 1);
  c.reference_gain = 100.0;
  c.fixed_ap_positions = {{0.0, 0.0}};
  auto s = generate_scenario(c, 1);
  s.mu_positions[0] = {10.0, 0.0};
  const auto ch = sample_channel(s, 5, Fading::unit);
  EXPECT_NEAR(std::norm(ch.h[0](0)), 0.1, 1e-13);
}

TEST(Channel, TddIsConjugateFddIsIndependent) {
  auto c = NetworkConfig::homogeneous(3, 2, 8.0, 8.0);
  const auto s = generate_scenario(c, 9);
  const auto ch = sample_channel(s, 10);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(ch.g[static_cast<std::size_t>(i)], ch.h[static_cast<std::size_t>(i)].conjugate());

  c.duplex = DuplexMode::fdd_independent;
  const auto f = sample_channel(generate_scenario(c, 9), 10);
  EXPECT_NE(f.g[0], f.h[0].conjugate());
}

TEST(Channel, BlocksFollowAntennaPartition) {
  auto c = NetworkConfig::homogeneous(3, 2, 8.0, 8.0);
  c.antennas_per_ap = {1, 3, 2};
  const auto ch = sample_channel(generate_scenario(c, 2), 3);
  EXPECT_EQ(ch.total_antennas(), 6);
  EXPECT_EQ(ch.h[0].size(), 6);
  EXPECT_EQ(ch.offset(2), 4);
  EXPECT_EQ(ch.h_block(1, 1).size(), 3);
  EXPECT_EQ(ch.h_block(1, 2)(1), ch.h[1](5));
}

TEST(Channel, DeterministicPerSeed) {
  const auto c = NetworkConfig::homogeneous(3, 2, 8.0, 8.0);
  const auto s = generate_scenario(c, 2);
  EXPECT_EQ(sample_channel(s, 7).h[1], sample_channel(s, 7).h[1]);
  EXPECT_NE(sample_channel(s, 7).h[1], sample_channel(s, 8).h[1]);
}

TEST(Channel, PathlossIsMonotoneWithoutFading) {
  const auto c = unit_gain(6, 6);
  const auto s = generate_scenario(c, 12);
  const auto ch = sample_channel(s, 13, Fading::unit);
  std::vector<std::pair<double, double>> dg;
  for (int i = 0; i < 6; ++i)
    for (int n = 0; n < 6; ++n) dg.emplace_back(s.distance(n, i), ch.h_block(i, n).squaredNorm());
  std::sort(dg.begin(), dg.end());
  for (std::size_t k = 1; k < dg.size(); ++k) EXPECT_LE(dg[k].second, dg[k - 1].second * (1.0 + 1e-12));
}

TEST(Channel, FadingHasUnitMean) {
  const auto c = unit_gain(10, 10);
  const auto s = generate_scenario(c, 1);
  double acc = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; count < 100000; ++seed) {
    const auto ch = sample_channel(s, seed);
    for (int i = 0; i < 10; ++i) {
      for (int n = 0; n < 10; ++n) {
        acc += std::norm(ch.h_block(i, n)(0)) * std::pow(s.distance(n, i), 3.0);
        ++count;
      }
    }
  }
  EXPECT_NEAR(acc / count, 1.0, 0.02);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
  EXPECT_EQ(derive_seed(5, 3, 1), derive_seed(5, 3, 1));
}

TEST(Units, DecibelConversions) {
  EXPECT_DOUBLE_EQ(db_to_linear(10.0), 10.0);
  EXPECT_NEAR(db_to_linear(-50.0), 1e-5, 1e-20);
  EXPECT_NEAR(linear_to_db(db_to_linear(8.0)), 8.0, 1e-12);
}
