#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace cran {

using CVector = Eigen::VectorXcd;

enum class DuplexMode { tdd_reciprocal, fdd_independent };

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Network parameters in SI units; SINR targets are linear ratios.
struct NetworkConfig {
  int num_aps = 0;
  int num_mus = 0;
  std::vector<int> antennas_per_ap;
  double area_side = 3000.0;  // square centered on the origin
  double pathloss_exponent = 3.0;
  double reference_gain = 1.0;  // power gain at 1 m: gain = reference_gain * d^-alpha
  double noise_power = 1e-8;
  std::vector<double> ap_static_power;
  std::vector<double> ap_tx_limit;
  std::vector<double> mu_tx_limit;
  std::vector<double> qos_dl;
  std::vector<double> qos_ul;
  double weight = 1.0;  // lambda
  DuplexMode duplex = DuplexMode::tdd_reciprocal;
  std::vector<Point> fixed_ap_positions;
  double p_olt = 20.0;

  int total_antennas() const;
  /// Row offset of AP n's block inside a length-M channel vector.
  int antenna_offset(int n) const;
  double total_ul_budget() const;

  /// Throws std::invalid_argument on inconsistent sizes or non-positive values.
  void validate() const;

  /// All APs alike: P_c = 2 W, P^DL_max = 1 W, 2 antennas, P^UL_max = 0.5 W,
  /// sigma^2 = -50 dBm and a 24 dB reference gain.
  static NetworkConfig homogeneous(int num_aps, int num_mus, double sinr_dl_db, double sinr_ul_db);
  /// Two high-power APs fixed at (-750, 0) and (750, 0) (P_c = 50 W,
  /// P^DL_max = 20 W) followed by low-power APs (2 W / 1 W).
  static NetworkConfig heterogeneous(int num_aps, int num_mus, double sinr_dl_db, double sinr_ul_db);
};

double db_to_linear(double db);
double linear_to_db(double ratio);

/// Reads the JSON network document (SINR targets in dB). Per-AP and per-MU
/// fields accept a scalar or a list; an optional "preset" seeds defaults.
NetworkConfig network_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const NetworkConfig& config);

struct Scenario {
  NetworkConfig config;
  std::vector<Point> ap_positions;
  std::vector<Point> mu_positions;
  std::uint64_t seed = 0;

  /// AP-MU distance with the 1 m floor applied.
  double distance(int ap, int mu) const;
};

Scenario generate_scenario(const NetworkConfig& config, std::uint64_t seed);

struct ChannelRealization {
  std::vector<CVector> h;  // DL, one length-M vector per MU
  std::vector<CVector> g;  // UL
  std::vector<int> antennas_per_ap;

  int num_mus() const { return static_cast<int>(h.size()); }
  int num_aps() const { return static_cast<int>(antennas_per_ap.size()); }
  int total_antennas() const;
  int offset(int ap) const;

  auto h_block(int mu, int ap) const { return h[static_cast<std::size_t>(mu)].segment(offset(ap), antennas_per_ap[static_cast<std::size_t>(ap)]); }
  auto g_block(int mu, int ap) const { return g[static_cast<std::size_t>(mu)].segment(offset(ap), antennas_per_ap[static_cast<std::size_t>(ap)]); }
};

enum class Fading { exponential, unit };

/// Per-link power gain G0 d^-alpha * xi with xi ~ Exp(1) shared by the AP's
/// antennas and an independent uniform phase per antenna. Under TDD the UL
/// channel is the entrywise conjugate of the DL channel; under FDD it is an
/// independent draw.
ChannelRealization sample_channel(const Scenario& scenario, std::uint64_t seed,
                                  Fading fading = Fading::exponential);

/// Channels with given (already lifted) vectors; used by tests and tools.
ChannelRealization make_channels(std::vector<CVector> h, std::vector<CVector> g,
                                 std::vector<int> antennas_per_ap);

/// SplitMix64 finalizer; derive_seed mixes a counter tuple into independent
/// streams so adding trials never perturbs earlier ones.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream);

}  // namespace cran
