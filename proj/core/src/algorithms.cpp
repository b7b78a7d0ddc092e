#include "cran/algorithms.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cran {

using Eigen::VectorXd;

namespace {

// Exact test; Eigen's isZero squares complex entries and underflows.
template <class V>
bool exactly_zero(const V& x) {
  return (x.array() == std::complex<double>(0.0)).all();
}

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<ApState> states_for(const ActiveSet& active, int num_aps, ApState awake = ApState::on) {
  std::vector<ApState> s(static_cast<std::size_t>(num_aps), ApState::off);
  for (int n : active) s[static_cast<std::size_t>(n)] = awake;
  return s;
}

bool within_ul_limits(const VectorXd& p, const std::vector<double>& limit) {
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > limit[static_cast<std::size_t>(i)]) return false;
  return true;
}

void insert_sorted(ActiveSet& set, int n) { set.insert(std::upper_bound(set.begin(), set.end(), n), n); }

// Fill powers, filters and flags for a final DL / virtual-DL solution on `active`.
void finalize_from_vdl(const ChannelRealization& ch, const NetworkConfig& cfg, const ActiveSet& active,
                       const ProgramResult& prog, AssociationResult& r) {
  r.active = active;
  r.solution.w_dl = prog.beams.w_dl;
  r.solution.w_vdl = prog.beams.w_vdl;
  auto ul = ul_power_for_filters(ch, filters_from_vdl(prog.beams.w_vdl), cfg.qos_ul, cfg.noise_power);
  if (!ul.feasible) {
    // Frozen filters can only fail through solver inaccuracy; fall back to MMSE.
    ul = ul_fixed_point_power(ch, cfg.qos_ul, cfg.noise_power, active, fixed_point_options(cfg));
  }
  r.solution.v_ul = ul.feasible ? ul.v : std::vector<CVector>(static_cast<std::size_t>(cfg.num_mus), CVector::Zero(cfg.total_antennas()));
  r.solution.p_ul = ul.feasible ? ul.p : VectorXd::Zero(cfg.num_mus);
  r.dl_feasible = prog.optimal();
  r.ul_feasible = ul.feasible && within_ul_limits(ul.p, cfg.mu_tx_limit);
  r.objective = weighted_total_power(r.solution, active, cfg);
  const auto issues = verify_association(ch, cfg, r);
  r.feasible = r.dl_feasible && r.ul_feasible && issues.empty();
  if (!issues.empty()) r.diagnostic += (r.diagnostic.empty() ? "" : "; ") + issues;
}

IterationRecord record(std::string stage, int iteration, const ProgramResult& res) {
  IterationRecord rec;
  rec.stage = std::move(stage);
  rec.iteration = iteration;
  rec.t = res.group;
  rec.rho = res.rho;
  rec.objective = res.objective;
  return rec;
}

AssociationResult run_gso(const Scenario& scenario, const ChannelRealization& ch, const GsoParams& params, bool joint) {
  params.validate();
  const auto& cfg = scenario.config;
  const int N = cfg.num_aps;
  const auto all = all_aps(N);
  const auto fp_opts = fixed_point_options(cfg);

  AssociationResult r;
  r.scheme = joint ? "GSO-" + to_string(params.penalty) : "GSO-DL-only";
  r.active = all;
  if (joint) {
    if (!check_joint_feasibility(ch, cfg, all, fp_opts).feasible()) {
      r.diagnostic = "infeasible with all APs active";
      return r;
    }
  } else if (!min_power_dl_beamforming(ch, cfg, all, true).optimal()) {
    r.diagnostic = "DL infeasible with all APs active";
    return r;
  }

  ProgramSpec spec;
  spec.vdl = joint;
  spec.vdl_weight = cfg.weight;
  spec.penalty = params.penalty;
  spec.per_ap_dl_limits = true;
  spec.ul_sum_limit = joint;
  spec.ap_state = states_for(all, N);
  auto solve_with = [&](const VectorXd& beta) {
    spec.beta = beta;
    return solve_program(build_program(ch, cfg, spec));
  };

  const auto init = solve_with(VectorXd::Zero(N));
  if (!init.optimal()) {
    r.diagnostic = "initial solve failed: " + conic::to_string(init.status);
    return r;
  }
  VectorXd t = init.group;
  r.trace.push_back(record("init", 0, init));

  VectorXd beta_prev;
  VectorXd beta = VectorXd::Zero(N);
  for (int l = 1; l <= params.l_max; ++l) {
    beta = reweight_betas(t, cfg.ap_static_power, params.epsilon);
    const auto res = solve_with(beta);
    if (!res.optimal()) {
      r.diagnostic = "reweighted solve failed at iteration " + std::to_string(l) + ": " + conic::to_string(res.status);
      break;
    }
    t = res.group;
    auto rec = record("reweight", l, res);
    rec.beta = beta;
    r.trace.push_back(std::move(rec));
    r.reweight_iterations = l;
    if (beta_prev.size() == N &&
        ((beta - beta_prev).array().abs() <= params.convergence_eta * beta_prev.array()).all()) {
      r.reweight_converged = true;
      break;
    }
    beta_prev = beta;
  }
  r.final_beta = beta;
  r.final_t = t;

  ActiveSet cand;
  const double tmax = t.maxCoeff();
  for (int n = 0; n < N; ++n)
    if (t(n) > params.sparsity_threshold * tmax) cand.push_back(n);
  if (cand.empty()) cand = all;
  r.sparse_candidates = cand;

  if (joint) {
    for (int round = 1;; ++round) {
      const auto fp = ul_fixed_point_power(ch, cfg.qos_ul, cfg.noise_power, cand, fp_opts);
      if (fp.feasible && within_ul_limits(fp.p, cfg.mu_tx_limit)) break;
      if (static_cast<int>(cand.size()) == N) break;
      VectorXd p_tilde(cfg.num_mus);
      for (int i = 0; i < cfg.num_mus; ++i) {
        // Without a fixed point every MU counts as violating with unit weight.
        p_tilde(i) = fp.feasible ? fp.p(i) : 2.0 * cfg.mu_tx_limit[static_cast<std::size_t>(i)];
      }
      const auto [state, m] = price_update(ch, p_tilde, cfg.mu_tx_limit, cfg.ap_static_power, cand);
      insert_sorted(cand, m);
      IterationRecord rec;
      rec.stage = "price";
      rec.iteration = round;
      rec.added = {m};
      rec.t = state.theta;
      r.trace.push_back(std::move(rec));
    }
  }

  spec.beta = VectorXd::Zero(N);
  ProgramResult final_prog;
  for (;;) {
    spec.ap_state = states_for(cand, N);
    final_prog = solve_program(build_program(ch, cfg, spec));
    if (final_prog.optimal() || static_cast<int>(cand.size()) == N) break;
    // Thresholding dropped an AP that is still needed: restore the strongest excluded one.
    int best = -1;
    for (int n = 0; n < N; ++n)
      if (!std::binary_search(cand.begin(), cand.end(), n) && (best < 0 || t(n) > t(best))) best = n;
    insert_sorted(cand, best);
    IterationRecord rec;
    rec.stage = "restore";
    rec.added = {best};
    r.trace.push_back(std::move(rec));
  }
  if (!final_prog.optimal()) {
    r.active = cand;
    r.diagnostic = "final solve failed: " + conic::to_string(final_prog.status);
    return r;
  }

  if (joint) {
    finalize_from_vdl(ch, cfg, cand, final_prog, r);
    return r;
  }

  // DL-only selection: the UL is evaluated afterwards on the chosen set.
  r.active = cand;
  r.solution.w_dl = final_prog.beams.w_dl;
  r.solution.w_vdl = std::vector<CVector>(static_cast<std::size_t>(cfg.num_mus), CVector::Zero(cfg.total_antennas()));
  const auto fp = ul_fixed_point_power(ch, cfg.qos_ul, cfg.noise_power, cand, fp_opts);
  r.solution.v_ul = fp.feasible ? fp.v : r.solution.w_vdl;
  r.solution.p_ul = fp.feasible ? fp.p : VectorXd::Zero(cfg.num_mus);
  r.dl_feasible = true;
  r.ul_feasible = fp.feasible && within_ul_limits(fp.p, cfg.mu_tx_limit);
  r.objective = weighted_total_power(r.solution, cand, cfg);
  if (!r.ul_feasible) {
    r.diagnostic = fp.feasible ? "UL per-MU limit violated" : "UL targets unreachable: " + fp.diagnostic;
    return r;
  }
  const auto issues = verify_association(ch, cfg, r);
  r.feasible = issues.empty();
  r.diagnostic = issues;
  return r;
}

}  // namespace

void GsoParams::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(convergence_eta > 0.0)) throw std::invalid_argument("convergence_eta must be positive");
  if (l_max < 1) throw std::invalid_argument("l_max must be at least 1");
  if (!(sparsity_threshold >= 0.0 && sparsity_threshold < 1.0))
    throw std::invalid_argument("sparsity_threshold must lie in [0, 1)");
}

VectorXd reweight_betas(const VectorXd& t_prev, const std::vector<double>& static_power, double epsilon) {
  if (static_cast<std::size_t>(t_prev.size()) != static_power.size())
    throw std::invalid_argument("reweight_betas: size mismatch");
  VectorXd beta(t_prev.size());
  for (Eigen::Index n = 0; n < t_prev.size(); ++n)
    beta(n) = static_power[static_cast<std::size_t>(n)] / (std::max(t_prev(n), 0.0) + epsilon);
  return beta;
}

std::pair<PriceState, int> price_update(const ChannelRealization& ch, const VectorXd& p_tilde,
                                        const std::vector<double>& ul_limit, const std::vector<double>& static_power,
                                        const ActiveSet& candidate) {
  const int N = ch.num_aps();
  const int K = ch.num_mus();
  PriceState st;
  for (int i = 0; i < K; ++i)
    if (p_tilde(i) > ul_limit[static_cast<std::size_t>(i)]) st.violating.push_back(i);
  if (st.violating.empty()) throw std::invalid_argument("price_update: no MU violates its UL limit");
  st.theta = VectorXd::Constant(N, std::numeric_limits<double>::quiet_NaN());
  int best = -1;
  for (int m = 0; m < N; ++m) {
    if (std::binary_search(candidate.begin(), candidate.end(), m)) continue;
    double acc = 0.0;
    for (int i : st.violating) {
      const double lim = ul_limit[static_cast<std::size_t>(i)];
      acc += (p_tilde(i) - lim) / lim * ch.g_block(i, m).squaredNorm();
    }
    st.theta(m) = acc / static_power[static_cast<std::size_t>(m)];
    if (best < 0 || st.theta(m) > st.theta(best)) best = m;
  }
  if (best < 0) throw std::invalid_argument("price_update: every AP is already a candidate");
  return {st, best};
}

std::string verify_association(const ChannelRealization& ch, const NetworkConfig& cfg, const AssociationResult& r,
                               double tol) {
  std::string issues;
  auto note = [&](const std::string& s) { issues += (issues.empty() ? "" : "; ") + s; };
  const int K = cfg.num_mus;
  if (static_cast<int>(r.solution.w_dl.size()) != K || static_cast<int>(r.solution.v_ul.size()) != K ||
      r.solution.p_ul.size() != K)
    return "incomplete solution";
  for (int n = 0; n < cfg.num_aps; ++n) {
    const bool on = std::binary_search(r.active.begin(), r.active.end(), n);
    const int off = cfg.antenna_offset(n);
    const int a = cfg.antennas_per_ap[static_cast<std::size_t>(n)];
    double dl_power = 0.0;
    for (int i = 0; i < K; ++i) {
      const auto blk = r.solution.w_dl[static_cast<std::size_t>(i)].segment(off, a);
      dl_power += blk.squaredNorm();
      if (!on && (!exactly_zero(blk) || !exactly_zero(r.solution.v_ul[static_cast<std::size_t>(i)].segment(off, a))))
        note("nonzero block on sleeping AP " + std::to_string(n));
    }
    if (dl_power > cfg.ap_tx_limit[static_cast<std::size_t>(n)] * (1.0 + tol))
      note("AP " + std::to_string(n) + " exceeds its DL budget");
  }
  const auto sdl = dl_sinr(ch, r.solution.w_dl, cfg.noise_power);
  const auto sul = ul_sinr(ch, r.solution.v_ul, r.solution.p_ul, cfg.noise_power);
  for (int i = 0; i < K; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (sdl(i) < cfg.qos_dl[k] * (1.0 - tol)) note("DL SINR of MU " + std::to_string(i) + " below target");
    if (sul(i) < cfg.qos_ul[k] * (1.0 - tol)) note("UL SINR of MU " + std::to_string(i) + " below target");
    if (r.solution.p_ul(i) < 0.0 || r.solution.p_ul(i) > cfg.mu_tx_limit[k] * (1.0 + tol))
      note("UL power of MU " + std::to_string(i) + " outside [0, limit]");
  }
  return issues;
}

AssociationResult evaluate_active_set(const Scenario& scenario, const ChannelRealization& ch, const ActiveSet& active,
                                      std::string scheme) {
  const auto& cfg = scenario.config;
  AssociationResult r;
  r.scheme = std::move(scheme);
  r.active = active;
  const auto rep = check_joint_feasibility(ch, cfg, active, fixed_point_options(cfg));
  const auto zeros = BeamformingSolution::zeros(cfg.num_mus, cfg.total_antennas());
  r.solution = zeros;
  if (rep.dl_feasible) r.solution.w_dl = rep.dl.beams.w_dl;
  if (rep.ul.feasible) {
    r.solution.v_ul = rep.ul.v;
    r.solution.p_ul = rep.ul.p;
  }
  r.dl_feasible = rep.dl_feasible;
  r.ul_feasible = rep.ul_feasible;
  r.objective = weighted_total_power(r.solution, active, cfg);
  if (!rep.dl_feasible) r.diagnostic = "DL infeasible: " + conic::to_string(rep.dl.status);
  if (!rep.ul_feasible) {
    const std::string d = rep.ul.feasible ? "UL per-MU limit violated" : "UL targets unreachable: " + rep.ul.diagnostic;
    r.diagnostic += (r.diagnostic.empty() ? "" : "; ") + d;
  }
  if (rep.feasible()) {
    r.diagnostic = verify_association(ch, cfg, r);
    r.feasible = r.diagnostic.empty();
  }
  return r;
}

AssociationResult algorithm_gso(const Scenario& scenario, const ChannelRealization& ch, const GsoParams& params) {
  return run_gso(scenario, ch, params, true);
}

AssociationResult algorithm_gso_dl_only(const Scenario& scenario, const ChannelRealization& ch,
                                        const GsoParams& params) {
  return run_gso(scenario, ch, params, false);
}

AssociationResult algorithm_rip(const Scenario& scenario, const ChannelRealization& ch) {
  const auto& cfg = scenario.config;
  const int N = cfg.num_aps;
  const auto all = all_aps(N);
  const auto fp_opts = fixed_point_options(cfg);

  AssociationResult r;
  r.scheme = "RIP";
  r.active = all;
  if (!check_joint_feasibility(ch, cfg, all, fp_opts).feasible()) {
    r.diagnostic = "infeasible with all APs active";
    return r;
  }

  auto best = solve_program(build_p6(ch, cfg, states_for(all, N)));
  if (!best.optimal()) {
    r.diagnostic = "all-active program failed: " + conic::to_string(best.status);
    return r;
  }
  ActiveSet best_set = all;
  r.trace.push_back(record("binary", 0, best));

  ActiveSet cand = all;
  double phi_prev = kInf;
  std::string stop = "single AP left";
  for (int l = 1; cand.size() > 1; ++l) {
    const auto relaxed = solve_program(build_p6(ch, cfg, states_for(cand, N, ApState::free)));
    if (!relaxed.optimal()) {
      stop = "relaxed program infeasible";
      break;
    }
    int weakest = cand.front();
    for (int n : cand)
      if (relaxed.rho(n) < relaxed.rho(weakest)) weakest = n;
    auto rec = record("relaxed", l, relaxed);
    rec.removed = {weakest};
    r.trace.push_back(std::move(rec));

    ActiveSet next;
    for (int n : cand)
      if (n != weakest) next.push_back(n);
    const auto binary = solve_program(build_p6(ch, cfg, states_for(next, N)));
    if (!binary.optimal()) {
      stop = "program infeasible after removing AP " + std::to_string(weakest);
      break;
    }
    r.trace.push_back(record("binary", l, binary));
    const auto fp = ul_fixed_point_power(ch, cfg.qos_ul, cfg.noise_power, next, fp_opts);
    if (!fp.feasible || !within_ul_limits(fp.p, cfg.mu_tx_limit)) {
      stop = "UL per-MU check failed after removing AP " + std::to_string(weakest);
      break;
    }
    if (binary.objective > phi_prev) {
      stop = "objective increased";
      break;
    }
    phi_prev = binary.objective;
    cand = next;
    if (binary.objective < best.objective) {
      best = binary;
      best_set = next;
    }
  }
  r.diagnostic = "stopped: " + stop;
  finalize_from_vdl(ch, cfg, best_set, best, r);
  return r;
}

AssociationResult exhaustive_search(const Scenario& scenario, const ChannelRealization& ch, int cap) {
  const auto& cfg = scenario.config;
  const int N = cfg.num_aps;
  if (N > cap) throw std::invalid_argument("exhaustive search over " + std::to_string(N) + " APs exceeds the cap of " + std::to_string(cap));
  const auto fp_opts = fixed_point_options(cfg);

  // Visit subsets by increasing static power so the static cost alone can prune.
  std::vector<std::pair<double, unsigned>> order;
  for (unsigned mask = 1; mask < (1u << N); ++mask) {
    double s = 0.0;
    for (int n = 0; n < N; ++n)
      if (mask & (1u << n)) s += cfg.ap_static_power[static_cast<std::size_t>(n)];
    order.emplace_back(s, mask);
  }
  std::sort(order.begin(), order.end());

  AssociationResult r;
  r.scheme = "ES";
  r.active = all_aps(N);
  double best_total = kInf;
  std::optional<std::pair<ActiveSet, std::pair<ProgramResult, UlPowerResult>>> best;
  for (const auto& [static_power, mask] : order) {
    if (static_power >= best_total) break;
    ActiveSet active;
    for (int n = 0; n < N; ++n)
      if (mask & (1u << n)) active.push_back(n);
    auto fp = ul_fixed_point_power(ch, cfg.qos_ul, cfg.noise_power, active, fp_opts);
    if (!fp.feasible || !within_ul_limits(fp.p, cfg.mu_tx_limit)) continue;
    if (static_power + cfg.weight * fp.p.sum() >= best_total) continue;
    auto dl = min_power_dl_beamforming(ch, cfg, active, true);
    if (!dl.optimal()) continue;
    double dl_power = 0.0;
    for (const auto& w : dl.beams.w_dl) dl_power += w.squaredNorm();
    const double total = static_power + dl_power + cfg.weight * fp.p.sum();
    if (total < best_total) {
      best_total = total;
      best = {active, {std::move(dl), std::move(fp)}};
    }
  }
  if (!best) {
    r.diagnostic = "no AP subset is feasible";
    return r;
  }
  const auto& [active, sols] = *best;
  r.solution = BeamformingSolution::zeros(cfg.num_mus, cfg.total_antennas());
  r.solution.w_dl = sols.first.beams.w_dl;
  r.solution.v_ul = sols.second.v;
  r.solution.p_ul = sols.second.p;
  // Indicator semantics: an AP counts as active iff its DL or UL block is nonzero.
  r.active.clear();
  for (int n : active) {
    bool used = false;
    for (int i = 0; i < cfg.num_mus && !used; ++i)
      used = !exactly_zero(ch.h_block(i, n)) &&
             (!exactly_zero(r.solution.w_dl[static_cast<std::size_t>(i)].segment(ch.offset(n), ch.antennas_per_ap[static_cast<std::size_t>(n)])) ||
              !exactly_zero(r.solution.v_ul[static_cast<std::size_t>(i)].segment(ch.offset(n), ch.antennas_per_ap[static_cast<std::size_t>(n)])));
    if (used) r.active.push_back(n);
  }
  r.dl_feasible = true;
  r.ul_feasible = true;
  r.objective = weighted_total_power(r.solution, r.active, cfg);
  r.diagnostic = verify_association(ch, cfg, r);
  r.feasible = r.diagnostic.empty();
  return r;
}

AssociationResult joint_processing(const Scenario& scenario, const ChannelRealization& ch) {
  return evaluate_active_set(scenario, ch, all_aps(scenario.config.num_aps), "JP");
}

ActiveSet apirss_select(const Scenario& scenario, const ChannelRealization& ch,
                        const std::optional<std::vector<double>>& ref_power) {
  const auto& cfg = scenario.config;
  const auto& ref = ref_power ? *ref_power : cfg.ap_tx_limit;
  if (static_cast<int>(ref.size()) != cfg.num_aps) throw std::invalid_argument("one reference power per AP required");
  ActiveSet out;
  for (int i = 0; i < cfg.num_mus; ++i) {
    int best = 0;
    double best_v = -1.0;
    for (int n = 0; n < cfg.num_aps; ++n) {
      const double v = ref[static_cast<std::size_t>(n)] * ch.h_block(i, n).squaredNorm() /
                       cfg.antennas_per_ap[static_cast<std::size_t>(n)];
      if (v > best_v) {
        best_v = v;
        best = n;
      }
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ActiveSet muirss_select(const Scenario& scenario, const ChannelRealization& ch) {
  const auto& cfg = scenario.config;
  ActiveSet out;
  for (int i = 0; i < cfg.num_mus; ++i) {
    int best = 0;
    double best_v = -1.0;
    for (int n = 0; n < cfg.num_aps; ++n) {
      const double v = ch.g_block(i, n).squaredNorm();
      if (v > best_v) {
        best_v = v;
        best = n;
      }
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

nlohmann::json to_json(const AssociationResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& rec : r.trace) {
    nlohmann::json j{{"stage", rec.stage}, {"iteration", rec.iteration}, {"objective", rec.objective}};
    if (rec.beta.size()) j["beta"] = to_std(rec.beta);
    if (rec.t.size()) j[rec.stage == "price" ? "theta" : "t"] = to_std(rec.t);
    if (rec.rho.size()) j["rho"] = to_std(rec.rho);
    if (!rec.added.empty()) j["added"] = rec.added;
    if (!rec.removed.empty()) j["removed"] = rec.removed;
    trace.push_back(std::move(j));
  }
  nlohmann::json doc{
      {"scheme", r.scheme},
      {"active", r.active},
      {"feasible", r.feasible},
      {"dl_feasible", r.dl_feasible},
      {"ul_feasible", r.ul_feasible},
      {"objective",
       {{"ap_static", r.objective.ap_static},
        {"ap_transmit", r.objective.ap_transmit},
        {"mu_transmit", r.objective.mu_transmit},
        {"mu_transmit_raw", r.objective.mu_transmit_raw},
        {"total", r.objective.total}}},
      {"diagnostic", r.diagnostic},
      {"trace", trace},
  };
  if (r.final_beta.size()) {
    doc["reweight"] = {{"iterations", r.reweight_iterations},
                       {"converged", r.reweight_converged},
                       {"beta", to_std(r.final_beta)},
                       {"t", to_std(r.final_t)},
                       {"candidates", r.sparse_candidates}};
  }
  return doc;
}

}  // namespace cran
