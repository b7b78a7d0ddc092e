#pragma once

#include "cran/beamform.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cran {

struct GsoParams {
  double epsilon = 1e-6;
  double convergence_eta = 1e-3;  // relative change of every beta_n
  int l_max = 30;
  Penalty penalty = Penalty::l12;
  double sparsity_threshold = 1e-4;  // t_n <= threshold * max_m t_m counts as zero

  void validate() const;
};

struct PriceState {
  std::vector<int> violating;  // B
  Eigen::VectorXd theta;       // size N; NaN for APs already in the candidate set
};

struct IterationRecord {
  std::string stage;
  int iteration = 0;
  Eigen::VectorXd beta;
  Eigen::VectorXd t;
  Eigen::VectorXd rho;
  std::vector<int> added;
  std::vector<int> removed;
  double objective = 0.0;
};

struct AssociationResult {
  std::string scheme;
  ActiveSet active;
  BeamformingSolution solution;
  ObjectiveBreakdown objective;
  bool feasible = false;
  bool dl_feasible = false;
  bool ul_feasible = false;
  std::vector<IterationRecord> trace;
  std::string diagnostic;

  // Reweighting summary (GSO variants): iterations run, convergence flag, the
  // last beta / t and the thresholded candidate set before any price repair.
  int reweight_iterations = 0;
  bool reweight_converged = false;
  Eigen::VectorXd final_beta;
  Eigen::VectorXd final_t;
  ActiveSet sparse_candidates;
};

nlohmann::json to_json(const AssociationResult& result);

/// beta_n = P_c,n / (t_n + eps).
Eigen::VectorXd reweight_betas(const Eigen::VectorXd& t_prev, const std::vector<double>& static_power, double epsilon);

/// theta_m = (1 / P_c,m) sum_{i in B} ((p_i - P_i) / P_i) ||g_{i,m}||^2 for
/// m outside the candidate set; returns the state and argmax (lowest index on
/// ties). Throws std::invalid_argument when B is empty or every AP is a candidate.
std::pair<PriceState, int> price_update(const ChannelRealization& ch, const Eigen::VectorXd& p_tilde,
                                        const std::vector<double>& ul_limit, const std::vector<double>& static_power,
                                        const ActiveSet& candidate);

/// Independent recheck: DL and UL SINRs, per-AP and per-MU limits, and zero
/// blocks outside the active set, all at relative tolerance `tol`. Returns
/// an empty string when everything holds.
std::string verify_association(const ChannelRealization& ch, const NetworkConfig& config,
                               const AssociationResult& result, double tol = 1e-6);

/// Joint evaluation of a fixed active set: DL min power with per-AP limits
/// plus MMSE fixed-point UL powers.
AssociationResult evaluate_active_set(const Scenario& scenario, const ChannelRealization& ch, const ActiveSet& active,
                                      std::string scheme);

AssociationResult algorithm_gso(const Scenario& scenario, const ChannelRealization& ch, const GsoParams& params = {});
AssociationResult algorithm_gso_dl_only(const Scenario& scenario, const ChannelRealization& ch,
                                        const GsoParams& params = {});
AssociationResult algorithm_rip(const Scenario& scenario, const ChannelRealization& ch);

/// Throws std::invalid_argument when N exceeds `cap`.
AssociationResult exhaustive_search(const Scenario& scenario, const ChannelRealization& ch, int cap = 10);
AssociationResult joint_processing(const Scenario& scenario, const ChannelRealization& ch);

/// Per MU the AP maximizing ref_power_n ||h_{i,n}||^2 / M_n (ref power
/// defaults to P^DL_n,max); union over MUs.
ActiveSet apirss_select(const Scenario& scenario, const ChannelRealization& ch,
                        const std::optional<std::vector<double>>& ref_power = std::nullopt);
/// Per MU the AP maximizing ||g_{i,n}||^2; union over MUs.
ActiveSet muirss_select(const Scenario& scenario, const ChannelRealization& ch);

}  // namespace cran
