#pragma once

#include "cran/scenario.hpp"

#include <complex>
#include <random>
#include <vector>

namespace cran::testing {

/// Hand-sized network: unit static power 2 W, generous power budgets and a
/// unit reference gain. Geometry is irrelevant for channels built by hand.
inline NetworkConfig tiny_config(int num_aps, int num_mus, int antennas, double gamma_dl, double gamma_ul,
                                 double noise = 1.0) {
  NetworkConfig c;
  c.num_aps = num_aps;
  c.num_mus = num_mus;
  c.antennas_per_ap.assign(static_cast<std::size_t>(num_aps), antennas);
  c.noise_power = noise;
  c.ap_static_power.assign(static_cast<std::size_t>(num_aps), 2.0);
  c.ap_tx_limit.assign(static_cast<std::size_t>(num_aps), 1e3);
  c.mu_tx_limit.assign(static_cast<std::size_t>(num_mus), 1e3);
  c.qos_dl.assign(static_cast<std::size_t>(num_mus), gamma_dl);
  c.qos_ul.assign(static_cast<std::size_t>(num_mus), gamma_ul);
  c.validate();
  return c;
}

inline Scenario scenario_of(const NetworkConfig& c) {
  Scenario s;
  s.config = c;
  s.ap_positions.assign(static_cast<std::size_t>(c.num_aps), Point{});
  s.mu_positions.assign(static_cast<std::size_t>(c.num_mus), Point{});
  return s;
}

/// i.i.d. CN(0, scale) entries; g = conj(h) when `tdd`, independent otherwise.
inline ChannelRealization random_channels(int num_aps, int num_mus, int antennas, std::uint64_t seed,
                                          double scale = 1.0, bool tdd = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(scale / 2.0));
  const int M = num_aps * antennas;
  std::vector<CVector> h, g;
  for (int i = 0; i < num_mus; ++i) {
    CVector v(M), u(M);
    for (int a = 0; a < M; ++a) v(a) = {nd(rng), nd(rng)};
    for (int a = 0; a < M; ++a) u(a) = {nd(rng), nd(rng)};
    h.push_back(v);
    g.push_back(tdd ? CVector(v.conjugate()) : u);
  }
  return make_channels(h, g, std::vector<int>(static_cast<std::size_t>(num_aps), antennas));
}

}  // namespace cran::testing
