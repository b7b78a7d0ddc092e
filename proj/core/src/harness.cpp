#include "cran/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cran {

namespace {

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemeNames[] = {
    {Scheme::gso_l12, "GSO-l12"}, {Scheme::gso_linf, "GSO-linf"}, {Scheme::rip, "RIP"},
    {Scheme::es, "ES"},           {Scheme::jp, "JP"},             {Scheme::apirss, "APIRSS"},
    {Scheme::muirss, "MUIRSS"},   {Scheme::gso_dl_only, "GSO-DL-only"},
};

template <class T>
bool all_equal(const std::vector<T>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_set(const ActiveSet& a) {
  std::string out;
  for (std::size_t k = 0; k < a.size(); ++k) out += (k ? " " : "") + std::to_string(a[k]);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(v.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

std::string to_string(Scheme scheme) {
  for (const auto& s : kSchemeNames)
    if (s.scheme == scheme) return s.name;
  throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_string(const std::string& name) {
  for (const auto& s : kSchemeNames)
    if (name == s.name) return s.scheme;
  throw std::invalid_argument("unknown scheme: " + name);
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> v = [] {
    std::vector<Scheme> out;
    for (const auto& s : kSchemeNames) out.push_back(s.scheme);
    return out;
  }();
  return v;
}

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::none: return "none";
    case SweepKind::num_mus: return "num_mus";
    case SweepKind::ap_static_power: return "ap_static_power";
    case SweepKind::lambda: return "lambda";
    case SweepKind::sinr_targets: return "sinr_targets";
  }
  return "?";
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::feasibility: return "feasibility";
    case Mode::sum_power: return "sum_power";
    case Mode::tradeoff: return "tradeoff";
  }
  return "?";
}

Mode mode_from_string(const std::string& name) {
  for (Mode m : {Mode::feasibility, Mode::sum_power, Mode::tradeoff})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown mode: " + name);
}

void ExperimentConfig::validate() const {
  base.validate();
  if (num_trials < 0) throw std::invalid_argument("num_trials must be nonnegative");
  if (schemes.empty()) throw std::invalid_argument("at least one scheme is required");
  if (es_cap < 1) throw std::invalid_argument("es_cap must be positive");
  if (workers < 0) throw std::invalid_argument("workers must be nonnegative");
  gso.validate();
  if (sweep == SweepKind::none) return;
  if (sweep == SweepKind::sinr_targets) {
    if (sinr_pairs_db.empty()) throw std::invalid_argument("sinr_targets sweep needs at least one pair");
    return;
  }
  if (sweep_values.empty()) throw std::invalid_argument("sweep needs at least one value");
  for (double v : sweep_values) {
    if (sweep == SweepKind::num_mus && (v < 1.0 || v != std::floor(v)))
      throw std::invalid_argument("num_mus sweep values must be positive integers");
    if (sweep == SweepKind::ap_static_power && !(v >= 0.0))
      throw std::invalid_argument("static power values must be nonnegative");
    if (sweep == SweepKind::lambda && !(v >= 0.0)) throw std::invalid_argument("lambda values must be nonnegative");
  }
  if (sweep == SweepKind::num_mus &&
      !(all_equal(base.mu_tx_limit) && all_equal(base.qos_dl) && all_equal(base.qos_ul)))
    throw std::invalid_argument("num_mus sweep needs identical per-MU parameters");
}

int ExperimentConfig::num_points() const {
  switch (sweep) {
    case SweepKind::none: return 1;
    case SweepKind::sinr_targets: return static_cast<int>(sinr_pairs_db.size());
    default: return static_cast<int>(sweep_values.size());
  }
}

NetworkConfig ExperimentConfig::config_at(int point) const {
  if (point < 0 || point >= num_points()) throw std::out_of_range("sweep point out of range");
  NetworkConfig c = base;
  const auto k = static_cast<std::size_t>(point);
  switch (sweep) {
    case SweepKind::none: break;
    case SweepKind::num_mus: {
      const int K = static_cast<int>(sweep_values[k]);
      c.num_mus = K;
      c.mu_tx_limit.assign(static_cast<std::size_t>(K), base.mu_tx_limit.front());
      c.qos_dl.assign(static_cast<std::size_t>(K), base.qos_dl.front());
      c.qos_ul.assign(static_cast<std::size_t>(K), base.qos_ul.front());
      break;
    }
    case SweepKind::ap_static_power: c.ap_static_power.assign(c.ap_static_power.size(), sweep_values[k]); break;
    case SweepKind::lambda: c.weight = sweep_values[k]; break;
    case SweepKind::sinr_targets:
      c.qos_dl.assign(static_cast<std::size_t>(c.num_mus), db_to_linear(sinr_pairs_db[k].first));
      c.qos_ul.assign(static_cast<std::size_t>(c.num_mus), db_to_linear(sinr_pairs_db[k].second));
      break;
  }
  c.validate();
  return c;
}

double ExperimentConfig::point_value(int point) const {
  const auto k = static_cast<std::size_t>(point);
  switch (sweep) {
    case SweepKind::none: return 0.0;
    case SweepKind::sinr_targets: return sinr_pairs_db.at(k).first;
    default: return sweep_values.at(k);
  }
}

std::string ExperimentConfig::point_label(int point) const {
  const auto k = static_cast<std::size_t>(point);
  switch (sweep) {
    case SweepKind::none: return "base";
    case SweepKind::sinr_targets:
      return format_number(sinr_pairs_db.at(k).first) + "/" + format_number(sinr_pairs_db.at(k).second);
    default: return format_number(sweep_values.at(k));
  }
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc) {
  ExperimentConfig c;
  c.base = network_config_from_json(doc.at("network"));
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    const auto kind = s.at("kind").get<std::string>();
    if (kind == "none") {
      c.sweep = SweepKind::none;
    } else if (kind == "num_mus") {
      c.sweep = SweepKind::num_mus;
    } else if (kind == "ap_static_power") {
      c.sweep = SweepKind::ap_static_power;
    } else if (kind == "lambda") {
      c.sweep = SweepKind::lambda;
    } else if (kind == "sinr_targets") {
      c.sweep = SweepKind::sinr_targets;
    } else {
      throw std::invalid_argument("unknown sweep kind: " + kind);
    }
    if (c.sweep == SweepKind::sinr_targets) {
      for (const auto& p : s.at("pairs_db")) c.sinr_pairs_db.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    } else if (c.sweep != SweepKind::none) {
      c.sweep_values = s.at("values").get<std::vector<double>>();
    }
  }
  c.num_trials = doc.value("num_trials", 0);
  c.master_seed = doc.value("master_seed", std::uint64_t{1});
  if (doc.contains("schemes")) {
    for (const auto& name : doc["schemes"]) c.schemes.push_back(scheme_from_string(name.get<std::string>()));
  } else {
    c.schemes = all_schemes();
  }
  c.mode = mode_from_string(doc.value("mode", std::string("sum_power")));
  if (doc.contains("gso")) {
    const auto& g = doc["gso"];
    c.gso.epsilon = g.value("epsilon", c.gso.epsilon);
    c.gso.convergence_eta = g.value("convergence_eta", c.gso.convergence_eta);
    c.gso.l_max = g.value("l_max", c.gso.l_max);
    c.gso.sparsity_threshold = g.value("sparsity_threshold", c.gso.sparsity_threshold);
  }
  c.es_cap = doc.value("es_cap", c.es_cap);
  c.workers = doc.value("workers", c.workers);
  c.record_wall_time = doc.value("record_wall_time", c.record_wall_time);
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json sweep{{"kind", to_string(c.sweep)}};
  if (c.sweep == SweepKind::sinr_targets) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [dl, ul] : c.sinr_pairs_db) pairs.push_back({dl, ul});
    sweep["pairs_db"] = pairs;
  } else if (c.sweep != SweepKind::none) {
    sweep["values"] = c.sweep_values;
  }
  std::vector<std::string> schemes;
  for (Scheme s : c.schemes) schemes.push_back(to_string(s));
  return {
      {"network", to_json(c.base)},
      {"sweep", sweep},
      {"num_trials", c.num_trials},
      {"master_seed", c.master_seed},
      {"schemes", schemes},
      {"mode", to_string(c.mode)},
      {"gso",
       {{"epsilon", c.gso.epsilon},
        {"convergence_eta", c.gso.convergence_eta},
        {"l_max", c.gso.l_max},
        {"sparsity_threshold", c.gso.sparsity_threshold}}},
      {"es_cap", c.es_cap},
      {"workers", c.workers},
      {"record_wall_time", c.record_wall_time},
  };
}

AssociationResult run_scheme(Scheme scheme, const Scenario& scenario, const ChannelRealization& ch,
                             const GsoParams& gso, int es_cap) {
  try {
    switch (scheme) {
      case Scheme::gso_l12: {
        auto p = gso;
        p.penalty = Penalty::l12;
        return algorithm_gso(scenario, ch, p);
      }
      case Scheme::gso_linf: {
        auto p = gso;
        p.penalty = Penalty::linf;
        return algorithm_gso(scenario, ch, p);
      }
      case Scheme::rip: return algorithm_rip(scenario, ch);
      case Scheme::es: return exhaustive_search(scenario, ch, es_cap);
      case Scheme::jp: return joint_processing(scenario, ch);
      case Scheme::apirss: return evaluate_active_set(scenario, ch, apirss_select(scenario, ch), "APIRSS");
      case Scheme::muirss: return evaluate_active_set(scenario, ch, muirss_select(scenario, ch), "MUIRSS");
      case Scheme::gso_dl_only: {
        auto p = gso;
        p.penalty = Penalty::l12;
        return algorithm_gso_dl_only(scenario, ch, p);
      }
    }
  } catch (const std::exception& e) {
    AssociationResult r;
    r.scheme = to_string(scheme);
    r.diagnostic = std::string("exception: ") + e.what();
    return r;
  }
  throw std::invalid_argument("unknown scheme");
}

bool record_less(const TrialRecord& a, const TrialRecord& b) {
  return std::tie(a.sweep_point, a.trial_index, a.scheme) < std::tie(b.sweep_point, b.trial_index, b.scheme);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult out;
  const int points = config.num_points();
  std::vector<NetworkConfig> nets;
  for (int p = 0; p < points; ++p) nets.push_back(config.config_at(p));

  for (int p = 0; p < points; ++p) {
    for (Scheme s : config.schemes) {
      if (s == Scheme::es && nets[static_cast<std::size_t>(p)].num_aps > config.es_cap) {
        out.skipped.push_back({p, to_string(s), "N = " + std::to_string(nets[static_cast<std::size_t>(p)].num_aps) +
                                                    " exceeds the ES cap of " + std::to_string(config.es_cap)});
      }
    }
  }
  if (config.num_trials == 0) return out;

  const std::size_t tasks = static_cast<std::size_t>(points) * static_cast<std::size_t>(config.num_trials);
  std::vector<std::vector<TrialRecord>> slots(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const int p = static_cast<int>(task / static_cast<std::size_t>(config.num_trials));
      const int t = static_cast<int>(task % static_cast<std::size_t>(config.num_trials));
      const auto& net = nets[static_cast<std::size_t>(p)];
      const auto ut = static_cast<std::uint64_t>(t);
      const auto scenario = generate_scenario(net, derive_seed(config.master_seed, ut, 0));
      const auto ch = sample_channel(scenario, derive_seed(config.master_seed, ut, 1));
      auto& slot = slots[task];
      for (Scheme s : config.schemes) {
        if (s == Scheme::es && net.num_aps > config.es_cap) continue;
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run_scheme(s, scenario, ch, config.gso, config.es_cap);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        TrialRecord rec;
        rec.mode = config.mode;
        rec.sweep_point = p;
        rec.sweep_label = config.point_label(p);
        rec.sweep_value = config.point_value(p);
        rec.trial_index = t;
        rec.scheme = to_string(s);
        rec.feasible = r.feasible;
        rec.dl_feasible = r.dl_feasible;
        rec.ul_feasible = r.ul_feasible;
        rec.ap_static = r.objective.ap_static;
        rec.ap_transmit = r.objective.ap_transmit;
        rec.mu_transmit = r.objective.mu_transmit;
        rec.mu_transmit_raw = r.objective.mu_transmit_raw;
        rec.total = r.objective.total;
        rec.active = r.active;
        rec.active_count = static_cast<int>(r.active.size());
        rec.wall_time = config.record_wall_time ? std::max(0.0, secs) : 0.0;
        rec.diagnostic = r.diagnostic;
        slot.push_back(std::move(rec));
      }
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers =
      std::min<std::size_t>(tasks, config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (auto& slot : slots)
    for (auto& rec : slot) out.records.push_back(std::move(rec));
  std::sort(out.records.begin(), out.records.end(), record_less);
  return out;
}

const SummaryRow& Summary::at(int sweep_point, const std::string& scheme) const {
  for (const auto& r : rows)
    if (r.sweep_point == sweep_point && r.scheme == scheme) return r;
  throw std::out_of_range("no summary row for point " + std::to_string(sweep_point) + " and scheme " + scheme);
}

Summary aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate needs at least one record");
  Summary s;
  s.mode = records.front().mode;
  for (const auto& r : records)
    if (r.mode != s.mode) throw std::invalid_argument("records mix modes");

  auto sorted = records;
  std::sort(sorted.begin(), sorted.end(), record_less);

  // Per point: which trials have every scheme feasible.
  std::map<int, std::map<int, std::pair<int, int>>> per_trial;  // point -> trial -> (records, feasible)
  std::map<int, std::set<std::string>> schemes_at;
  for (const auto& r : sorted) {
    auto& e = per_trial[r.sweep_point][r.trial_index];
    ++e.first;
    e.second += r.feasible ? 1 : 0;
    schemes_at[r.sweep_point].insert(r.scheme);
  }

  std::map<std::pair<int, std::string>, std::vector<const TrialRecord*>> groups;
  for (const auto& r : sorted) groups[{r.sweep_point, r.scheme}].push_back(&r);
  for (const auto& [key, recs] : groups) {
    SummaryRow row;
    row.sweep_point = key.first;
    row.scheme = key.second;
    row.sweep_label = recs.front()->sweep_label;
    row.sweep_value = recs.front()->sweep_value;
    row.trials = static_cast<int>(recs.size());
    std::vector<double> total, ap, mu, active;
    const auto n_schemes = static_cast<int>(schemes_at[key.first].size());
    for (const auto* r : recs) {
      if (!r->feasible) ++row.infeasible;
      const auto& e = per_trial[key.first][r->trial_index];
      if (e.first != n_schemes || e.second != n_schemes) continue;
      total.push_back(r->total);
      ap.push_back(r->ap_static + r->ap_transmit);
      mu.push_back(r->mu_transmit_raw);
      active.push_back(static_cast<double>(r->active_count));
    }
    row.paired = static_cast<int>(total.size());
    const auto t = mean_se(total), a = mean_se(ap), m = mean_se(mu), c = mean_se(active);
    row.mean_total = t.mean;
    row.se_total = t.se;
    row.mean_ap = a.mean;
    row.se_ap = a.se;
    row.mean_mu = m.mean;
    row.se_mu = m.se;
    row.mean_active = c.mean;
    row.se_active = c.se;
    s.rows.push_back(std::move(row));
  }
  return s;
}

nlohmann::json to_json(const TrialRecord& r) {
  return {
      {"mode", to_string(r.mode)},
      {"sweep_point", r.sweep_point},
      {"sweep_label", r.sweep_label},
      {"sweep_value", r.sweep_value},
      {"trial_index", r.trial_index},
      {"scheme", r.scheme},
      {"feasible", r.feasible},
      {"dl_feasible", r.dl_feasible},
      {"ul_feasible", r.ul_feasible},
      {"ap_static_w", r.ap_static},
      {"ap_transmit_w", r.ap_transmit},
      {"mu_transmit_w", r.mu_transmit},
      {"mu_transmit_raw_w", r.mu_transmit_raw},
      {"total_w", r.total},
      {"active_count", r.active_count},
      {"active", r.active},
      {"wall_time_s", r.wall_time},
      {"diagnostic", r.diagnostic},
  };
}

TrialRecord trial_record_from_json(const nlohmann::json& d) {
  TrialRecord r;
  r.mode = mode_from_string(d.at("mode").get<std::string>());
  r.sweep_point = d.at("sweep_point").get<int>();
  r.sweep_label = d.at("sweep_label").get<std::string>();
  r.sweep_value = d.at("sweep_value").get<double>();
  r.trial_index = d.at("trial_index").get<int>();
  r.scheme = d.at("scheme").get<std::string>();
  r.feasible = d.at("feasible").get<bool>();
  r.dl_feasible = d.at("dl_feasible").get<bool>();
  r.ul_feasible = d.at("ul_feasible").get<bool>();
  r.ap_static = d.at("ap_static_w").get<double>();
  r.ap_transmit = d.at("ap_transmit_w").get<double>();
  r.mu_transmit = d.at("mu_transmit_w").get<double>();
  r.mu_transmit_raw = d.at("mu_transmit_raw_w").get<double>();
  r.total = d.at("total_w").get<double>();
  r.active_count = d.at("active_count").get<int>();
  r.active = d.at("active").get<ActiveSet>();
  r.wall_time = d.at("wall_time_s").get<double>();
  r.diagnostic = d.at("diagnostic").get<std::string>();
  return r;
}

nlohmann::json to_json(const Summary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows) {
    rows.push_back({
        {"sweep_point", r.sweep_point},
        {"sweep_label", r.sweep_label},
        {"sweep_value", r.sweep_value},
        {"scheme", r.scheme},
        {"trials", r.trials},
        {"infeasible", r.infeasible},
        {"paired", r.paired},
        {"mean_total_w", r.mean_total},
        {"se_total_w", r.se_total},
        {"mean_ap_w", r.mean_ap},
        {"se_ap_w", r.se_ap},
        {"mean_mu_w", r.mean_mu},
        {"se_mu_w", r.se_mu},
        {"mean_active", r.mean_active},
        {"se_active", r.se_active},
    });
  }
  return {{"mode", to_string(s.mode)}, {"rows", rows}};
}

std::string records_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream os;
  os << "mode,sweep_point,sweep_label,sweep_value,trial_index,scheme,feasible,dl_feasible,ul_feasible,"
        "ap_static_w,ap_transmit_w,mu_transmit_w,mu_transmit_raw_w,total_w,active_count,active,wall_time_s,"
        "diagnostic\n";
  for (const auto& r : records) {
    os << to_string(r.mode) << ',' << r.sweep_point << ',' << csv_escape(r.sweep_label) << ','
       << format_number(r.sweep_value) << ',' << r.trial_index << ',' << csv_escape(r.scheme) << ','
       << int(r.feasible) << ',' << int(r.dl_feasible) << ',' << int(r.ul_feasible) << ','
       << format_number(r.ap_static) << ',' << format_number(r.ap_transmit) << ',' << format_number(r.mu_transmit)
       << ',' << format_number(r.mu_transmit_raw) << ',' << format_number(r.total) << ',' << r.active_count << ','
       << join_set(r.active) << ',' << format_number(r.wall_time) << ',' << csv_escape(r.diagnostic) << '\n';
  }
  return os.str();
}

std::string summary_csv(const Summary& s) {
  std::ostringstream os;
  os << "mode,sweep_point,sweep_label,sweep_value,scheme,trials,infeasible,paired,mean_total_w,se_total_w,"
        "mean_ap_w,se_ap_w,mean_mu_w,se_mu_w,mean_active,se_active\n";
  for (const auto& r : s.rows) {
    os << to_string(s.mode) << ',' << r.sweep_point << ',' << csv_escape(r.sweep_label) << ','
       << format_number(r.sweep_value) << ',' << csv_escape(r.scheme) << ',' << r.trials << ',' << r.infeasible << ','
       << r.paired << ',' << format_number(r.mean_total) << ',' << format_number(r.se_total) << ','
       << format_number(r.mean_ap) << ',' << format_number(r.se_ap) << ',' << format_number(r.mean_mu) << ','
       << format_number(r.se_mu) << ',' << format_number(r.mean_active) << ',' << format_number(r.se_active) << '\n';
  }
  return os.str();
}

std::vector<std::filesystem::path> emit(const ExperimentResult& result, const Summary* summary, OutputFormat format,
                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(dir / name);
  };
  switch (format) {
    case OutputFormat::csv:
      put("records.csv", records_csv(result.records));
      if (summary) put("summary.csv", summary_csv(*summary));
      break;
    case OutputFormat::json: {
      nlohmann::json recs = nlohmann::json::array();
      for (const auto& r : result.records) recs.push_back(to_json(r));
      nlohmann::json skips = nlohmann::json::array();
      for (const auto& m : result.skipped)
        skips.push_back({{"sweep_point", m.sweep_point}, {"scheme", m.scheme}, {"reason", m.reason}});
      put("records.json", nlohmann::json{{"records", recs}, {"skipped", skips}}.dump(1) + "\n");
      if (summary) put("summary.json", to_json(*summary).dump(1) + "\n");
      break;
    }
    case OutputFormat::plotdata: {
      if (!summary) throw std::invalid_argument("plotdata needs a summary");
      std::map<std::string, std::vector<const SummaryRow*>> series;
      for (const auto& r : summary->rows) series[r.scheme].push_back(&r);
      for (const auto& [scheme, rows] : series) {
        std::ostringstream os;
        switch (summary->mode) {
          case Mode::feasibility: os << "# sweep_label infeasible trials\n"; break;
          case Mode::sum_power: os << "# sweep_value mean_total_w se_total_w mean_active\n"; break;
          case Mode::tradeoff: os << "# lambda mean_ap_w se_ap_w mean_mu_w se_mu_w\n"; break;
        }
        for (const auto* r : rows) {
          switch (summary->mode) {
            case Mode::feasibility: os << r->sweep_label << ' ' << r->infeasible << ' ' << r->trials << '\n'; break;
            case Mode::sum_power:
              os << format_number(r->sweep_value) << ' ' << format_number(r->mean_total) << ' '
                 << format_number(r->se_total) << ' ' << format_number(r->mean_active) << '\n';
              break;
            case Mode::tradeoff:
              os << format_number(r->sweep_value) << ' ' << format_number(r->mean_ap) << ' ' << format_number(r->se_ap)
                 << ' ' << format_number(r->mean_mu) << ' ' << format_number(r->se_mu) << '\n';
              break;
          }
        }
        put("plot_" + scheme + ".dat", os.str());
      }
      break;
    }
  }
  return written;
}

ExperimentResult load_records(const std::filesystem::path& dir) {
  const auto path = dir / "records.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const auto doc = nlohmann::json::parse(in);
  ExperimentResult out;
  for (const auto& r : doc.at("records")) out.records.push_back(trial_record_from_json(r));
  if (doc.contains("skipped")) {
    for (const auto& m : doc["skipped"])
      out.skipped.push_back({m.at("sweep_point").get<int>(), m.at("scheme").get<std::string>(),
                             m.at("reason").get<std::string>()});
  }
  return out;
}

nlohmann::json demo_fig1(std::uint64_t seed, int max_attempts) {
  const auto cfg = NetworkConfig::heterogeneous(10, 8, 8.0, 8.0);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const auto s = seed + static_cast<std::uint64_t>(attempt);
    const auto scenario = generate_scenario(cfg, derive_seed(s, 0, 0));
    const auto ch = sample_channel(scenario, derive_seed(s, 0, 1));
    if (!check_joint_feasibility(ch, cfg, all_aps(cfg.num_aps), fixed_point_options(cfg)).feasible()) continue;

    nlohmann::json aps = nlohmann::json::array();
    for (int n = 0; n < cfg.num_aps; ++n) {
      const auto& p = scenario.ap_positions[static_cast<std::size_t>(n)];
      aps.push_back({{"index", n}, {"x_m", p.x}, {"y_m", p.y}, {"class", n < 2 ? "HAP" : "LAP"}});
    }
    nlohmann::json mus = nlohmann::json::array();
    for (const auto& p : scenario.mu_positions) mus.push_back({{"x_m", p.x}, {"y_m", p.y}});

    auto panel = [&](const std::string& name, Scheme scheme) {
      const auto r = run_scheme(scheme, scenario, ch, {}, 10);
      return nlohmann::json{{"panel", name},         {"scheme", to_string(scheme)}, {"active", r.active},
                            {"feasible", r.feasible}, {"total_w", r.objective.total}, {"diagnostic", r.diagnostic}};
    };
    return {
        {"seed", s},
        {"network", to_json(cfg)},
        {"aps", aps},
        {"mus", mus},
        {"panels",
         {panel("a", Scheme::gso_l12), panel("a", Scheme::rip), panel("a", Scheme::es), panel("b", Scheme::apirss),
          panel("c", Scheme::muirss), panel("d", Scheme::gso_dl_only)}},
    };
  }
  throw std::runtime_error("no feasible layout found in " + std::to_string(max_attempts) + " attempts");
}

}  // namespace cran
