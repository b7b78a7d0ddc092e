#pragma once

#include "cran/conic.hpp"
#include "cran/scenario.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cran {

/// Sorted AP indices that are awake.
using ActiveSet = std::vector<int>;

ActiveSet all_aps(int num_aps);

struct BeamformingSolution {
  std::vector<CVector> w_dl;
  std::vector<CVector> w_vdl;
  std::vector<CVector> v_ul;
  Eigen::VectorXd p_ul;

  /// Zero beamformers of length M for K users.
  static BeamformingSolution zeros(int num_mus, int total_antennas);
};

/// |h_i^H w_i|^2 / (sum_{j != i} |h_i^H w_j|^2 + noise) per MU.
Eigen::VectorXd dl_sinr(const std::vector<CVector>& h, const std::vector<CVector>& w, double noise);
Eigen::VectorXd dl_sinr(const ChannelRealization& ch, const std::vector<CVector>& w, double noise);

/// p_i |v_i^T g_i|^2 / (sum_{j != i} p_j |v_i^T g_j|^2 + noise ||v_i||^2); 0 when v_i = 0.
Eigen::VectorXd ul_sinr(const ChannelRealization& ch, const std::vector<CVector>& v, const Eigen::VectorXd& p,
                        double noise);

struct FixedPointOptions {
  double tolerance = 1e-10;  // relative change in p
  int max_iterations = 20000;
  double divergence_guard = 1e6;  // watts, on sum p
};

struct UlPowerResult {
  bool feasible = false;
  Eigen::VectorXd p;
  std::vector<CVector> v;  // MMSE filters, full length, zero outside the active set
  int iterations = 0;
  std::string diagnostic;
};

/// Minimum UL powers meeting the targets with MMSE receivers on the active
/// APs' antennas. The result is the component-wise minimum power vector.
UlPowerResult ul_fixed_point_power(const ChannelRealization& ch, const std::vector<double>& gamma, double noise,
                                   const ActiveSet& active, const FixedPointOptions& opts = {});

/// Powers for frozen receive filters: the unique solution of the linear
/// SINR-equality system, feasible iff it is nonnegative.
UlPowerResult ul_power_for_filters(const ChannelRealization& ch, const std::vector<CVector>& v,
                                   const std::vector<double>& gamma, double noise);

enum class Penalty { l12, linf };

std::string to_string(Penalty penalty);
Penalty penalty_from_string(const std::string& name);

/// Per-AP activity in the relaxed program: fixed asleep, fixed awake, or a
/// continuous indicator in [0, 1].
enum class ApState { off, on, free };

/// Which terms enter a beamforming program. Every builder below is a preset
/// of this description.
struct ProgramSpec {
  bool dl = true;
  bool vdl = true;
  double vdl_weight = 1.0;  // lambda; 0 is replaced by a 1e-6 tie-break weight
  Eigen::VectorXd beta;     // group penalty weights; empty or zero entries disable the group cone
  Penalty penalty = Penalty::l12;
  bool per_ap_dl_limits = false;
  bool ul_sum_limit = false;
  bool relaxed_activity = false;  // adds rho_n with coupled cones (P6 form)
  std::vector<ApState> ap_state;  // size N; APs in state `off` contribute no variables
};

struct ProgramResult {
  conic::SolveStatus status = conic::SolveStatus::numerical_failure;
  BeamformingSolution beams;  // w_dl / w_vdl filled, v_ul and p_ul left empty
  Eigen::VectorXd group;      // per-AP group value (l12 block norm or max entry magnitude)
  Eigen::VectorXd rho;        // relaxed indicators (1 / 0 for fixed states)
  double objective = 0.0;
  int iterations = 0;
  std::string diagnostic;

  bool optimal() const { return status == conic::SolveStatus::optimal; }
};

/// A cone program together with the variable layout needed to map its
/// solution back to complex beamformers.
struct BeamformingProgram {
  conic::ConeProgram program;
  ProgramSpec spec;
  ActiveSet aps;  // APs whose antennas carry variables
  std::vector<int> antennas_per_ap;
  int num_mus = 0;
  Eigen::Index dl_base = -1;
  Eigen::Index vdl_base = -1;
  std::vector<Eigen::Index> rho_var;  // size N, -1 when not a variable
  double objective_constant = 0.0;    // static power of APs fixed awake in the relaxed form

  int reduced_antennas() const;
  ProgramResult extract(const conic::ConeSolution& sol) const;
};

BeamformingProgram build_program(const ChannelRealization& ch, const NetworkConfig& config, const ProgramSpec& spec);
ProgramResult solve_program(const BeamformingProgram& bp, const conic::SolverTolerances& tol = {});

/// Group-penalized joint DL / virtual-DL program without power limits.
BeamformingProgram build_p4(const ChannelRealization& ch, const NetworkConfig& config, const Eigen::VectorXd& beta,
                            Penalty penalty, const ActiveSet& active);
/// P4 plus per-AP DL limits and the UL sum-power cone.
BeamformingProgram build_p5(const ChannelRealization& ch, const NetworkConfig& config, const Eigen::VectorXd& beta,
                            Penalty penalty, const ActiveSet& active);
/// Relaxed activity program; ap_state fixes or frees each rho_n.
BeamformingProgram build_p6(const ChannelRealization& ch, const NetworkConfig& config,
                            const std::vector<ApState>& ap_state);

/// Minimum sum-power DL beamforming on the active APs, optionally with
/// per-AP limits.
ProgramResult min_power_dl_beamforming(const ChannelRealization& ch, const NetworkConfig& config,
                                       const ActiveSet& active, bool per_ap_limits);
/// Minimum sum-power virtual-DL beamformers for the UL targets (channel g).
ProgramResult virtual_dl_beamforming(const ChannelRealization& ch, const NetworkConfig& config,
                                     const ActiveSet& active);

/// UL receive filters paired with a virtual-DL beamformer (v = conj(w)).
std::vector<CVector> filters_from_vdl(const std::vector<CVector>& w_vdl);

struct ObjectiveBreakdown {
  double ap_static = 0.0;
  double ap_transmit = 0.0;
  double mu_transmit = 0.0;      // lambda * sum p
  double mu_transmit_raw = 0.0;  // sum p
  double total = 0.0;
};

/// Throws std::invalid_argument if any w_dl or v_ul block outside `active`
/// is nonzero.
ObjectiveBreakdown weighted_total_power(const BeamformingSolution& sol, const ActiveSet& active,
                                        const NetworkConfig& config);

struct FeasibilityReport {
  bool dl_feasible = false;
  bool ul_feasible = false;
  std::vector<int> violating_mus;  // p_i > P^UL_i,max
  ProgramResult dl;
  UlPowerResult ul;

  bool feasible() const { return dl_feasible && ul_feasible; }
};

FeasibilityReport check_joint_feasibility(const ChannelRealization& ch, const NetworkConfig& config,
                                          const ActiveSet& active, const FixedPointOptions& opts = {});

/// Default fixed-point options for a configuration (guard = 1e6 x sum P^UL_max).
FixedPointOptions fixed_point_options(const NetworkConfig& config);

/// Audit document with per-AP block norms and achieved SINRs.
nlohmann::json beamforming_report(const BeamformingSolution& sol, const ChannelRealization& ch,
                                  const NetworkConfig& config);

}  // namespace cran
