#pragma once

#include "cran/algorithms.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cran {

enum class Scheme { gso_l12, gso_linf, rip, es, jp, apirss, muirss, gso_dl_only };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);
const std::vector<Scheme>& all_schemes();

enum class SweepKind { none, num_mus, ap_static_power, lambda, sinr_targets };
enum class Mode { feasibility, sum_power, tradeoff };

std::string to_string(SweepKind kind);
std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct ExperimentConfig {
  NetworkConfig base;
  SweepKind sweep = SweepKind::none;
  std::vector<double> sweep_values;                  // num_mus, ap_static_power or lambda
  std::vector<std::pair<double, double>> sinr_pairs_db;  // (DL, UL) for sinr_targets
  int num_trials = 0;
  std::uint64_t master_seed = 1;
  std::vector<Scheme> schemes;
  Mode mode = Mode::sum_power;
  GsoParams gso;
  int es_cap = 10;
  int workers = 0;  // 0 = hardware concurrency
  bool record_wall_time = true;

  void validate() const;
  int num_points() const;
  /// Network configuration at a sweep point.
  NetworkConfig config_at(int point) const;
  double point_value(int point) const;
  std::string point_label(int point) const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);

struct TrialRecord {
  Mode mode = Mode::sum_power;
  int sweep_point = 0;
  std::string sweep_label;
  double sweep_value = 0.0;
  int trial_index = 0;
  std::string scheme;
  bool feasible = false;
  bool dl_feasible = false;
  bool ul_feasible = false;
  double ap_static = 0.0;
  double ap_transmit = 0.0;
  double mu_transmit = 0.0;      // lambda * sum p
  double mu_transmit_raw = 0.0;  // sum p
  double total = 0.0;
  int active_count = 0;
  ActiveSet active;
  double wall_time = 0.0;  // seconds; 0 when timing is disabled
  std::string diagnostic;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// A scheme that was not run at a sweep point (ES above its cap).
struct SkipMarker {
  int sweep_point = 0;
  std::string scheme;
  std::string reason;

  friend bool operator==(const SkipMarker&, const SkipMarker&) = default;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // sorted by (sweep_point, trial_index, scheme)
  std::vector<SkipMarker> skipped;
};

/// Trial t uses placement seed derive_seed(master, t, 0) and fading seed
/// derive_seed(master, t, 1) at every sweep point.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Runs one scheme; exceptions become feasible=false records.
AssociationResult run_scheme(Scheme scheme, const Scenario& scenario, const ChannelRealization& ch,
                             const GsoParams& gso, int es_cap = 10);

bool record_less(const TrialRecord& a, const TrialRecord& b);

struct SummaryRow {
  int sweep_point = 0;
  std::string sweep_label;
  double sweep_value = 0.0;
  std::string scheme;
  int trials = 0;
  int infeasible = 0;
  // Means and standard errors over the trials where every scheme at this
  // point is feasible (paired comparison); `paired` counts those trials.
  int paired = 0;
  double mean_total = 0.0, se_total = 0.0;
  double mean_ap = 0.0, se_ap = 0.0;  // static + transmit
  double mean_mu = 0.0, se_mu = 0.0;  // raw sum of UL powers
  double mean_active = 0.0, se_active = 0.0;
};

struct Summary {
  Mode mode = Mode::sum_power;
  std::vector<SummaryRow> rows;  // sorted by (sweep_point, scheme)

  const SummaryRow& at(int sweep_point, const std::string& scheme) const;
};

/// Throws std::invalid_argument on empty input or records of mixed modes.
Summary aggregate(const std::vector<TrialRecord>& records);

nlohmann::json to_json(const TrialRecord& record);
TrialRecord trial_record_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Summary& summary);

enum class OutputFormat { csv, json, plotdata };

std::string records_csv(const std::vector<TrialRecord>& records);
std::string summary_csv(const Summary& summary);

/// Writes records.{csv,json}, summary.{csv,json} or plot_<scheme>.dat files
/// into `dir` (created if missing). Throws std::runtime_error when a file
/// cannot be written. Returns the paths written.
std::vector<std::filesystem::path> emit(const ExperimentResult& result, const Summary* summary, OutputFormat format,
                                        const std::filesystem::path& dir);

/// Reads records.json written by emit.
ExperimentResult load_records(const std::filesystem::path& dir);

/// Active sets of the proposed schemes, ES and the three baselines on one
/// heterogeneous layout (two HAPs, eight LAPs, eight MUs, 8 dB targets).
/// Seeds are tried from `seed` upward until the all-active problem is feasible.
nlohmann::json demo_fig1(std::uint64_t seed, int max_attempts = 200);

}  // namespace cran
