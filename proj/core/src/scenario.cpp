#include "cran/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace cran {

namespace {

constexpr double kMinDistance = 1.0;
constexpr double kPresetReferenceGainDb = 24.0;

template <class T>
void require_size(const std::vector<T>& v, int n, const char* what) {
  if (static_cast<int>(v.size()) != n)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(n) + " entries, got " +
                                std::to_string(v.size()));
}

void require_positive(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

// Scalar or list; a scalar is broadcast to n entries.
template <class T>
std::vector<T> broadcast(const nlohmann::json& v, int n, const char* what) {
  if (v.is_array()) {
    auto out = v.get<std::vector<T>>();
    require_size(out, n, what);
    return out;
  }
  return std::vector<T>(static_cast<std::size_t>(n), v.get<T>());
}

std::vector<double> db_list(const std::vector<double>& db) {
  std::vector<double> out;
  out.reserve(db.size());
  for (double x : db) out.push_back(db_to_linear(x));
  return out;
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

int NetworkConfig::total_antennas() const {
  int m = 0;
  for (int a : antennas_per_ap) m += a;
  return m;
}

int NetworkConfig::antenna_offset(int n) const {
  int off = 0;
  for (int k = 0; k < n; ++k) off += antennas_per_ap[static_cast<std::size_t>(k)];
  return off;
}

double NetworkConfig::total_ul_budget() const {
  double s = 0.0;
  for (double p : mu_tx_limit) s += p;
  return s;
}

void NetworkConfig::validate() const {
  if (num_aps <= 0) throw std::invalid_argument("num_aps must be positive");
  if (num_mus <= 0) throw std::invalid_argument("num_mus must be positive");
  require_size(antennas_per_ap, num_aps, "antennas_per_ap");
  for (int a : antennas_per_ap)
    if (a <= 0) throw std::invalid_argument("antennas_per_ap must be positive");
  require_size(ap_static_power, num_aps, "ap_static_power");
  require_size(ap_tx_limit, num_aps, "ap_tx_limit");
  require_size(mu_tx_limit, num_mus, "mu_tx_limit");
  require_size(qos_dl, num_mus, "qos_dl");
  require_size(qos_ul, num_mus, "qos_ul");
  require_positive(ap_static_power, "ap_static_power");
  require_positive(ap_tx_limit, "ap_tx_limit");
  require_positive(mu_tx_limit, "mu_tx_limit");
  require_positive(qos_dl, "qos_dl");
  require_positive(qos_ul, "qos_ul");
  if (!(area_side > 0.0)) throw std::invalid_argument("area_side must be positive");
  if (!(pathloss_exponent > 0.0)) throw std::invalid_argument("pathloss_exponent must be positive");
  if (!(reference_gain > 0.0)) throw std::invalid_argument("reference_gain must be positive");
  if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be positive");
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw std::invalid_argument("weight must be >= 0");
  if (!(p_olt >= 0.0)) throw std::invalid_argument("p_olt must be >= 0");
  if (static_cast<int>(fixed_ap_positions.size()) > num_aps)
    throw std::invalid_argument("more fixed AP positions than APs");
  const double half = 0.5 * area_side;
  for (const auto& p : fixed_ap_positions)
    if (std::abs(p.x) > half || std::abs(p.y) > half)
      throw std::invalid_argument("fixed AP position outside the area");
}

NetworkConfig NetworkConfig::homogeneous(int num_aps, int num_mus, double sinr_dl_db, double sinr_ul_db) {
  NetworkConfig c;
  c.num_aps = num_aps;
  c.num_mus = num_mus;
  const auto n = static_cast<std::size_t>(std::max(num_aps, 0));
  const auto k = static_cast<std::size_t>(std::max(num_mus, 0));
  c.reference_gain = db_to_linear(kPresetReferenceGainDb);
  c.antennas_per_ap.assign(n, 2);
  c.ap_static_power.assign(n, 2.0);
  c.ap_tx_limit.assign(n, 1.0);
  c.mu_tx_limit.assign(k, 0.5);
  c.qos_dl.assign(k, db_to_linear(sinr_dl_db));
  c.qos_ul.assign(k, db_to_linear(sinr_ul_db));
  return c;
}

NetworkConfig NetworkConfig::heterogeneous(int num_aps, int num_mus, double sinr_dl_db, double sinr_ul_db) {
  if (num_aps < 2) throw std::invalid_argument("heterogeneous setup needs at least the two high-power APs");
  auto c = homogeneous(num_aps, num_mus, sinr_dl_db, sinr_ul_db);
  for (int n = 0; n < 2; ++n) {
    c.ap_static_power[static_cast<std::size_t>(n)] = 50.0;
    c.ap_tx_limit[static_cast<std::size_t>(n)] = 20.0;
  }
  c.fixed_ap_positions = {{-750.0, 0.0}, {750.0, 0.0}};
  return c;
}

NetworkConfig network_config_from_json(const nlohmann::json& doc) {
  const int n = doc.at("num_aps").get<int>();
  const int k = doc.at("num_mus").get<int>();
  // Preset seeding only needs a scalar; lists are applied further down.
  auto scalar_db = [&](const char* key) {
    return doc.contains(key) && doc[key].is_number() ? doc[key].get<double>() : 8.0;
  };
  const double dl_db = scalar_db("sinr_dl_db");
  const double ul_db = scalar_db("sinr_ul_db");
  const std::string preset = doc.value("preset", std::string("homogeneous"));
  NetworkConfig c;
  if (preset == "homogeneous") {
    c = NetworkConfig::homogeneous(n, k, dl_db, ul_db);
  } else if (preset == "heterogeneous") {
    c = NetworkConfig::heterogeneous(n, k, dl_db, ul_db);
  } else {
    throw std::invalid_argument("unknown preset: " + preset);
  }
  if (n <= 0 || k <= 0) throw std::invalid_argument("num_aps and num_mus must be positive");
  if (doc.contains("antennas_per_ap")) c.antennas_per_ap = broadcast<int>(doc["antennas_per_ap"], n, "antennas_per_ap");
  if (doc.contains("area_side_m")) c.area_side = doc["area_side_m"].get<double>();
  if (doc.contains("pathloss_exponent")) c.pathloss_exponent = doc["pathloss_exponent"].get<double>();
  if (doc.contains("reference_gain_db")) c.reference_gain = db_to_linear(doc["reference_gain_db"].get<double>());
  if (doc.contains("noise_power_w")) c.noise_power = doc["noise_power_w"].get<double>();
  if (doc.contains("ap_static_power_w")) c.ap_static_power = broadcast<double>(doc["ap_static_power_w"], n, "ap_static_power_w");
  if (doc.contains("ap_tx_limit_w")) c.ap_tx_limit = broadcast<double>(doc["ap_tx_limit_w"], n, "ap_tx_limit_w");
  if (doc.contains("mu_tx_limit_w")) c.mu_tx_limit = broadcast<double>(doc["mu_tx_limit_w"], k, "mu_tx_limit_w");
  if (doc.contains("sinr_dl_db")) c.qos_dl = db_list(broadcast<double>(doc["sinr_dl_db"], k, "sinr_dl_db"));
  if (doc.contains("sinr_ul_db")) c.qos_ul = db_list(broadcast<double>(doc["sinr_ul_db"], k, "sinr_ul_db"));
  if (doc.contains("weight")) c.weight = doc["weight"].get<double>();
  if (doc.contains("p_olt_w")) c.p_olt = doc["p_olt_w"].get<double>();
  if (doc.contains("duplex")) {
    const auto d = doc["duplex"].get<std::string>();
    if (d == "tdd") {
      c.duplex = DuplexMode::tdd_reciprocal;
    } else if (d == "fdd") {
      c.duplex = DuplexMode::fdd_independent;
    } else {
      throw std::invalid_argument("duplex must be \"tdd\" or \"fdd\"");
    }
  }
  if (doc.contains("fixed_ap_positions_m")) {
    c.fixed_ap_positions.clear();
    for (const auto& p : doc["fixed_ap_positions_m"]) c.fixed_ap_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const NetworkConfig& c) {
  std::vector<double> dl, ul;
  for (double x : c.qos_dl) dl.push_back(linear_to_db(x));
  for (double x : c.qos_ul) ul.push_back(linear_to_db(x));
  nlohmann::json fixed = nlohmann::json::array();
  for (const auto& p : c.fixed_ap_positions) fixed.push_back({p.x, p.y});
  return {
      {"num_aps", c.num_aps},
      {"num_mus", c.num_mus},
      {"antennas_per_ap", c.antennas_per_ap},
      {"area_side_m", c.area_side},
      {"pathloss_exponent", c.pathloss_exponent},
      {"reference_gain_db", linear_to_db(c.reference_gain)},
      {"noise_power_w", c.noise_power},
      {"ap_static_power_w", c.ap_static_power},
      {"ap_tx_limit_w", c.ap_tx_limit},
      {"mu_tx_limit_w", c.mu_tx_limit},
      {"sinr_dl_db", dl},
      {"sinr_ul_db", ul},
      {"weight", c.weight},
      {"duplex", c.duplex == DuplexMode::tdd_reciprocal ? "tdd" : "fdd"},
      {"fixed_ap_positions_m", fixed},
      {"p_olt_w", c.p_olt},
  };
}

double Scenario::distance(int ap, int mu) const {
  const auto& a = ap_positions[static_cast<std::size_t>(ap)];
  const auto& m = mu_positions[static_cast<std::size_t>(mu)];
  return std::max(kMinDistance, std::hypot(a.x - m.x, a.y - m.y));
}

Scenario generate_scenario(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario s;
  s.config = config;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  const double half = 0.5 * config.area_side;
  std::uniform_real_distribution<double> U(-half, half);
  for (int n = 0; n < config.num_aps; ++n) {
    if (n < static_cast<int>(config.fixed_ap_positions.size())) {
      s.ap_positions.push_back(config.fixed_ap_positions[static_cast<std::size_t>(n)]);
    } else {
      const double x = U(rng);
      s.ap_positions.push_back({x, U(rng)});
    }
  }
  for (int i = 0; i < config.num_mus; ++i) {
    const double x = U(rng);
    s.mu_positions.push_back({x, U(rng)});
  }
  return s;
}

int ChannelRealization::total_antennas() const {
  int m = 0;
  for (int a : antennas_per_ap) m += a;
  return m;
}

int ChannelRealization::offset(int ap) const {
  int off = 0;
  for (int k = 0; k < ap; ++k) off += antennas_per_ap[static_cast<std::size_t>(k)];
  return off;
}

ChannelRealization sample_channel(const Scenario& scenario, std::uint64_t seed, Fading fading) {
  const auto& cfg = scenario.config;
  const int M = cfg.total_antennas();
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> Exp(1.0);
  std::uniform_real_distribution<double> Phase(0.0, 2.0 * std::numbers::pi);

  auto draw = [&](std::vector<CVector>& out) {
    out.assign(static_cast<std::size_t>(cfg.num_mus), CVector::Zero(M));
    for (int i = 0; i < cfg.num_mus; ++i) {
      for (int n = 0; n < cfg.num_aps; ++n) {
        const double xi = fading == Fading::exponential ? Exp(rng) : 1.0;
        const double amp = std::sqrt(cfg.reference_gain * std::pow(scenario.distance(n, i), -cfg.pathloss_exponent) * xi);
        const int off = cfg.antenna_offset(n);
        for (int a = 0; a < cfg.antennas_per_ap[static_cast<std::size_t>(n)]; ++a)
          out[static_cast<std::size_t>(i)](off + a) = std::polar(amp, Phase(rng));
      }
    }
  };

  ChannelRealization ch;
  ch.antennas_per_ap = cfg.antennas_per_ap;
  draw(ch.h);
  if (cfg.duplex == DuplexMode::tdd_reciprocal) {
    for (const auto& hi : ch.h) ch.g.push_back(hi.conjugate());
  } else {
    draw(ch.g);
  }
  return ch;
}

ChannelRealization make_channels(std::vector<CVector> h, std::vector<CVector> g, std::vector<int> antennas_per_ap) {
  ChannelRealization ch{std::move(h), std::move(g), std::move(antennas_per_ap)};
  if (ch.h.size() != ch.g.size()) throw std::invalid_argument("h and g must have one vector per MU");
  const int M = ch.total_antennas();
  for (std::size_t i = 0; i < ch.h.size(); ++i)
    if (ch.h[i].size() != M || ch.g[i].size() != M) throw std::invalid_argument("channel length must equal total antennas");
  return ch;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (stream * 0xd6e8feb86659fd93ULL));
}

}  // namespace cran
