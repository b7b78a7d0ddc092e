#include "cran/beamform.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cran {

using conic::AffineExpr;
using conic::ConeProgramBuilder;
using Eigen::Index;
using Eigen::VectorXd;

namespace {

constexpr double kTieBreakWeight = 1e-6;

std::complex<double> bilinear(const CVector& v, const CVector& g) { return (v.array() * g.array()).sum(); }

CVector restrict_to(const CVector& full, const ChannelRealization& ch, const ActiveSet& active) {
  int m = 0;
  for (int n : active) m += ch.antennas_per_ap[static_cast<std::size_t>(n)];
  CVector out(m);
  int pos = 0;
  for (int n : active) {
    const int a = ch.antennas_per_ap[static_cast<std::size_t>(n)];
    out.segment(pos, a) = full.segment(ch.offset(n), a);
    pos += a;
  }
  return out;
}

CVector expand_from(const CVector& reduced, const std::vector<int>& antennas_per_ap, const ActiveSet& active) {
  int total = 0;
  std::vector<int> offset;
  for (int a : antennas_per_ap) {
    offset.push_back(total);
    total += a;
  }
  CVector out = CVector::Zero(total);
  int pos = 0;
  for (int n : active) {
    const int a = antennas_per_ap[static_cast<std::size_t>(n)];
    out.segment(offset[static_cast<std::size_t>(n)], a) = reduced.segment(pos, a);
    pos += a;
  }
  return out;
}

void check_active(const ActiveSet& active, int num_aps) {
  if (active.empty()) throw std::invalid_argument("active set must be nonempty");
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (active[k] < 0 || active[k] >= num_aps) throw std::invalid_argument("active AP index out of range");
    if (k > 0 && active[k] <= active[k - 1]) throw std::invalid_argument("active set must be sorted and unique");
  }
}

std::vector<ApState> states_for(const ActiveSet& active, int num_aps) {
  std::vector<ApState> s(static_cast<std::size_t>(num_aps), ApState::off);
  for (int n : active) s[static_cast<std::size_t>(n)] = ApState::on;
  return s;
}

}  // namespace

ActiveSet all_aps(int num_aps) {
  ActiveSet a(static_cast<std::size_t>(num_aps));
  for (int n = 0; n < num_aps; ++n) a[static_cast<std::size_t>(n)] = n;
  return a;
}

BeamformingSolution BeamformingSolution::zeros(int num_mus, int total_antennas) {
  BeamformingSolution s;
  s.w_dl.assign(static_cast<std::size_t>(num_mus), CVector::Zero(total_antennas));
  s.w_vdl = s.w_dl;
  s.v_ul = s.w_dl;
  s.p_ul = VectorXd::Zero(num_mus);
  return s;
}

Eigen::VectorXd dl_sinr(const std::vector<CVector>& h, const std::vector<CVector>& w, double noise) {
  const auto K = h.size();
  if (w.size() != K) throw std::invalid_argument("dl_sinr: one beamformer per MU required");
  VectorXd out(static_cast<Index>(K));
  for (std::size_t i = 0; i < K; ++i) {
    double interference = noise;
    for (std::size_t j = 0; j < K; ++j)
      if (j != i) interference += std::norm(h[i].dot(w[j]));
    out(static_cast<Index>(i)) = std::norm(h[i].dot(w[i])) / interference;
  }
  return out;
}

Eigen::VectorXd dl_sinr(const ChannelRealization& ch, const std::vector<CVector>& w, double noise) {
  return dl_sinr(ch.h, w, noise);
}

Eigen::VectorXd ul_sinr(const ChannelRealization& ch, const std::vector<CVector>& v, const Eigen::VectorXd& p,
                        double noise) {
  const int K = ch.num_mus();
  if (static_cast<int>(v.size()) != K || p.size() != K) throw std::invalid_argument("ul_sinr: size mismatch");
  VectorXd out = VectorXd::Zero(K);
  for (int i = 0; i < K; ++i) {
    const auto& vi = v[static_cast<std::size_t>(i)];
    const double vn = vi.squaredNorm();
    if (vn == 0.0) continue;
    double interference = noise * vn;
    for (int j = 0; j < K; ++j)
      if (j != i) interference += p(j) * std::norm(bilinear(vi, ch.g[static_cast<std::size_t>(j)]));
    out(i) = p(i) * std::norm(bilinear(vi, ch.g[static_cast<std::size_t>(i)])) / interference;
  }
  return out;
}

UlPowerResult ul_fixed_point_power(const ChannelRealization& ch, const std::vector<double>& gamma, double noise,
                                   const ActiveSet& active, const FixedPointOptions& opts) {
  check_active(active, ch.num_aps());
  const int K = ch.num_mus();
  if (static_cast<int>(gamma.size()) != K) throw std::invalid_argument("one UL target per MU required");
  std::vector<CVector> g;
  for (const auto& gi : ch.g) g.push_back(restrict_to(gi, ch, active));
  const Index m = g.empty() ? 0 : g[0].size();

  UlPowerResult r;
  VectorXd p = VectorXd::Zero(K);
  Eigen::MatrixXcd Q(m, m);
  std::vector<CVector> u(static_cast<std::size_t>(K));
  for (int it = 1; it <= opts.max_iterations; ++it) {
    VectorXd next(K);
    for (int i = 0; i < K; ++i) {
      Q.setZero();
      Q.diagonal().setConstant(noise);
      for (int j = 0; j < K; ++j)
        if (j != i) Q.noalias() += p(j) * g[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)].adjoint();
      u[static_cast<std::size_t>(i)] = Q.llt().solve(g[static_cast<std::size_t>(i)]);
      const double gain = g[static_cast<std::size_t>(i)].dot(u[static_cast<std::size_t>(i)]).real();
      next(i) = gain > 0.0 ? gamma[static_cast<std::size_t>(i)] / gain : std::numeric_limits<double>::infinity();
    }
    r.iterations = it;
    if (!next.allFinite() || next.sum() > opts.divergence_guard) {
      r.diagnostic = "powers exceed the divergence guard";
      return r;
    }
    const double change = (next - p).lpNorm<Eigen::Infinity>();
    p = next;
    if (change <= opts.tolerance * p.lpNorm<Eigen::Infinity>()) {
      r.feasible = true;
      r.p = p;
      // Filters that match the final powers.
      for (int i = 0; i < K; ++i) {
        Q.setZero();
        Q.diagonal().setConstant(noise);
        for (int j = 0; j < K; ++j)
          if (j != i) Q.noalias() += p(j) * g[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)].adjoint();
        const CVector ui = Q.llt().solve(g[static_cast<std::size_t>(i)]);
        r.v.push_back(expand_from(ui.conjugate(), ch.antennas_per_ap, active));
      }
      return r;
    }
  }
  r.diagnostic = "fixed point did not converge";
  return r;
}

UlPowerResult ul_power_for_filters(const ChannelRealization& ch, const std::vector<CVector>& v,
                                   const std::vector<double>& gamma, double noise) {
  const int K = ch.num_mus();
  if (static_cast<int>(v.size()) != K || static_cast<int>(gamma.size()) != K)
    throw std::invalid_argument("ul_power_for_filters: size mismatch");
  Eigen::MatrixXd A(K, K);
  VectorXd b(K);
  for (int i = 0; i < K; ++i) {
    const auto& vi = v[static_cast<std::size_t>(i)];
    for (int j = 0; j < K; ++j) {
      const double c = std::norm(bilinear(vi, ch.g[static_cast<std::size_t>(j)]));
      A(i, j) = i == j ? c / gamma[static_cast<std::size_t>(i)] : -c;
    }
    b(i) = noise * vi.squaredNorm();
  }
  UlPowerResult r;
  r.v = v;
  r.iterations = 1;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) {
    r.diagnostic = "singular SINR system";
    return r;
  }
  r.p = lu.solve(b);
  if (!r.p.allFinite() || r.p.minCoeff() < 0.0) {
    r.diagnostic = "no nonnegative power vector meets the targets with these filters";
    return r;
  }
  r.feasible = true;
  return r;
}

std::string to_string(Penalty penalty) { return penalty == Penalty::l12 ? "l12" : "linf"; }

Penalty penalty_from_string(const std::string& name) {
  if (name == "l12") return Penalty::l12;
  if (name == "linf") return Penalty::linf;
  throw std::invalid_argument("unknown penalty: " + name);
}

int BeamformingProgram::reduced_antennas() const {
  int m = 0;
  for (int n : aps) m += antennas_per_ap[static_cast<std::size_t>(n)];
  return m;
}

BeamformingProgram build_program(const ChannelRealization& ch, const NetworkConfig& config, const ProgramSpec& spec) {
  const int N = ch.num_aps();
  const int K = ch.num_mus();
  if (config.num_aps != N || config.num_mus != K) throw std::invalid_argument("channels do not match the configuration");
  if (static_cast<int>(spec.ap_state.size()) != N) throw std::invalid_argument("ap_state needs one entry per AP");
  if (spec.beta.size() != 0 && spec.beta.size() != N) throw std::invalid_argument("beta needs one entry per AP");
  if (!spec.dl && !spec.vdl) throw std::invalid_argument("program needs a DL or virtual-DL link");

  BeamformingProgram bp;
  bp.spec = spec;
  bp.antennas_per_ap = ch.antennas_per_ap;
  bp.num_mus = K;
  bp.rho_var.assign(static_cast<std::size_t>(N), -1);
  for (int n = 0; n < N; ++n)
    if (spec.ap_state[static_cast<std::size_t>(n)] != ApState::off) bp.aps.push_back(n);
  if (bp.aps.empty()) throw std::invalid_argument("every AP is fixed asleep");

  const int Ma = bp.reduced_antennas();
  std::vector<int> red_off(static_cast<std::size_t>(N), -1);
  {
    int pos = 0;
    for (int n : bp.aps) {
      red_off[static_cast<std::size_t>(n)] = pos;
      pos += ch.antennas_per_ap[static_cast<std::size_t>(n)];
    }
  }
  const double sigma = std::sqrt(config.noise_power);

  ConeProgramBuilder b;
  // Beam variables are interleaved (re, im) per entry, user-major.
  auto add_beams = [&](const char* tag) {
    const Index base = b.num_variables();
    for (int i = 0; i < K; ++i)
      for (int a = 0; a < Ma; ++a) {
        b.add_variable(std::string(tag) + "[" + std::to_string(i) + "][" + std::to_string(a) + "].re");
        b.add_variable(std::string(tag) + "[" + std::to_string(i) + "][" + std::to_string(a) + "].im");
      }
    return base;
  };
  auto re = [&](Index base, int i, int a) { return base + 2 * (static_cast<Index>(i) * Ma + a); };
  auto im = [&](Index base, int i, int a) { return re(base, i, a) + 1; };
  auto block_vars = [&](Index base, int n, std::vector<AffineExpr>& out) {
    const int off = red_off[static_cast<std::size_t>(n)];
    for (int i = 0; i < K; ++i)
      for (int a = off; a < off + ch.antennas_per_ap[static_cast<std::size_t>(n)]; ++a) {
        out.push_back(AffineExpr().add(re(base, i, a), 1.0));
        out.push_back(AffineExpr().add(im(base, i, a), 1.0));
      }
  };
  auto all_vars = [&](Index base, std::vector<AffineExpr>& out) {
    for (Index v = base; v < base + 2 * static_cast<Index>(K) * Ma; ++v) out.push_back(AffineExpr().add(v, 1.0));
  };

  // SINR cones with the own-signal term rotated to the real axis:
  // sqrt(1 + 1/gamma) Re(c_i^H w_i) >= || (c_i^H w_j)_{j != i}, Re(c_i^H w_i), sigma ||, scaled by 1/sigma.
  auto add_sinr = [&](Index base, const std::vector<CVector>& chan, const std::vector<double>& gamma) {
    std::vector<CVector> c;
    for (const auto& ci : chan) c.push_back(restrict_to(ci, ch, bp.aps) / sigma);
    auto real_part = [&](int i, int j) {
      AffineExpr e;
      for (int a = 0; a < Ma; ++a) {
        e.add(re(base, j, a), c[static_cast<std::size_t>(i)](a).real());
        e.add(im(base, j, a), c[static_cast<std::size_t>(i)](a).imag());
      }
      return e;
    };
    auto imag_part = [&](int i, int j) {
      AffineExpr e;
      for (int a = 0; a < Ma; ++a) {
        e.add(im(base, j, a), c[static_cast<std::size_t>(i)](a).real());
        e.add(re(base, j, a), -c[static_cast<std::size_t>(i)](a).imag());
      }
      return e;
    };
    for (int i = 0; i < K; ++i) {
      std::vector<AffineExpr> rows;
      AffineExpr head = real_part(i, i);
      const double scale = std::sqrt(1.0 + 1.0 / gamma[static_cast<std::size_t>(i)]);
      for (auto& t : head.terms) t.second *= scale;
      rows.push_back(head);
      for (int j = 0; j < K; ++j) {
        if (j == i) continue;
        rows.push_back(real_part(i, j));
        rows.push_back(imag_part(i, j));
      }
      rows.push_back(real_part(i, i));
      rows.push_back(AffineExpr(1.0));
      b.add_second_order(rows);
    }
  };

  if (spec.dl) {
    bp.dl_base = add_beams("w_dl");
    add_sinr(bp.dl_base, ch.h, config.qos_dl);
    const Index s = b.add_variable("power_dl", 1.0);
    std::vector<AffineExpr> x;
    all_vars(bp.dl_base, x);
    b.add_rotated_quadratic(AffineExpr().add(s, 1.0), AffineExpr(1.0), x);
  }
  if (spec.vdl) {
    bp.vdl_base = add_beams("w_vdl");
    add_sinr(bp.vdl_base, ch.g, config.qos_ul);
    const Index s = b.add_variable("power_vdl", std::max(spec.vdl_weight, kTieBreakWeight));
    std::vector<AffineExpr> x;
    all_vars(bp.vdl_base, x);
    b.add_rotated_quadratic(AffineExpr().add(s, 1.0), AffineExpr(1.0), x);
  }

  // Group penalties.
  for (int n : bp.aps) {
    const double beta = spec.beta.size() == 0 ? 0.0 : spec.beta(n);
    if (!(beta > 0.0)) continue;
    // Penalty variable u = beta t with cone rows (u, beta w): duals stay O(1)
    // however large beta gets.
    const Index t = b.add_variable("t" + std::to_string(n), 1.0);
    std::vector<AffineExpr> entries;
    if (spec.dl) block_vars(bp.dl_base, n, entries);
    if (spec.vdl) block_vars(bp.vdl_base, n, entries);
    for (auto& e : entries)
      for (auto& term : e.terms) term.second *= beta;
    if (spec.penalty == Penalty::l12) {
      std::vector<AffineExpr> rows{AffineExpr().add(t, 1.0)};
      rows.insert(rows.end(), entries.begin(), entries.end());
      b.add_second_order(rows);
    } else {
      for (std::size_t k = 0; k + 1 < entries.size(); k += 2) {
        const std::array rows{AffineExpr().add(t, 1.0), entries[k], entries[k + 1]};
        b.add_second_order(rows);
      }
    }
  }

  const double ul_budget = config.total_ul_budget();
  for (int n : bp.aps) {
    const auto state = spec.ap_state[static_cast<std::size_t>(n)];
    if (state == ApState::free) {
      const Index rho = b.add_variable("rho" + std::to_string(n), config.ap_static_power[static_cast<std::size_t>(n)]);
      bp.rho_var[static_cast<std::size_t>(n)] = rho;
      b.add_nonnegative(AffineExpr().add(rho, 1.0));
      b.add_nonnegative(AffineExpr(1.0).add(rho, -1.0));
      if (spec.dl) {
        std::vector<AffineExpr> x;
        block_vars(bp.dl_base, n, x);
        b.add_rotated_quadratic(AffineExpr().add(rho, config.ap_tx_limit[static_cast<std::size_t>(n)]), AffineExpr(1.0), x);
      }
      if (spec.vdl) {
        std::vector<AffineExpr> x;
        block_vars(bp.vdl_base, n, x);
        b.add_rotated_quadratic(AffineExpr().add(rho, ul_budget), AffineExpr(1.0), x);
      }
    } else if (spec.dl && (spec.per_ap_dl_limits || spec.relaxed_activity)) {
      std::vector<AffineExpr> rows{AffineExpr(std::sqrt(config.ap_tx_limit[static_cast<std::size_t>(n)]))};
      block_vars(bp.dl_base, n, rows);
      b.add_second_order(rows);
    }
  }
  if (spec.relaxed_activity) {
    AffineExpr sum(-1.0);
    for (int n : bp.aps) {
      if (bp.rho_var[static_cast<std::size_t>(n)] >= 0) {
        sum.add(bp.rho_var[static_cast<std::size_t>(n)], 1.0);
      } else {
        sum.constant += 1.0;
      }
    }
    if (!sum.terms.empty()) b.add_nonnegative(sum);
    // Awake APs with a fixed indicator pay their static power as a constant.
    for (int n : bp.aps)
      if (bp.rho_var[static_cast<std::size_t>(n)] < 0)
        bp.objective_constant += config.ap_static_power[static_cast<std::size_t>(n)];
  }
  if (spec.vdl && (spec.ul_sum_limit || spec.relaxed_activity)) {
    std::vector<AffineExpr> rows{AffineExpr(std::sqrt(ul_budget))};
    all_vars(bp.vdl_base, rows);
    b.add_second_order(rows);
  }

  bp.program = b.build();
  return bp;
}

ProgramResult BeamformingProgram::extract(const conic::ConeSolution& sol) const {
  const int N = static_cast<int>(antennas_per_ap.size());
  int M = 0;
  for (int a : antennas_per_ap) M += a;
  const int Ma = reduced_antennas();

  ProgramResult r;
  r.status = sol.status;
  r.iterations = sol.iterations;
  r.diagnostic = sol.diagnostic;
  r.beams = BeamformingSolution::zeros(num_mus, M);
  r.beams.v_ul.clear();
  r.beams.p_ul.resize(0);
  r.group = VectorXd::Zero(N);
  r.rho = VectorXd::Zero(N);
  for (int n = 0; n < N; ++n) {
    const auto st = spec.ap_state[static_cast<std::size_t>(n)];
    r.rho(n) = st == ApState::on ? 1.0 : 0.0;
  }
  if (sol.status != conic::SolveStatus::optimal) return r;

  auto read = [&](Index base, std::vector<CVector>& out) {
    for (int i = 0; i < num_mus; ++i) {
      CVector red(Ma);
      for (int a = 0; a < Ma; ++a) {
        const Index k = base + 2 * (static_cast<Index>(i) * Ma + a);
        red(a) = {sol.primal(k), sol.primal(k + 1)};
      }
      out[static_cast<std::size_t>(i)] = expand_from(red, antennas_per_ap, aps);
    }
  };
  if (dl_base >= 0) read(dl_base, r.beams.w_dl);
  if (vdl_base >= 0) read(vdl_base, r.beams.w_vdl);

  int off = 0;
  for (int n = 0; n < N; ++n) {
    const int a = antennas_per_ap[static_cast<std::size_t>(n)];
    double sq = 0.0, mx = 0.0;
    for (int i = 0; i < num_mus; ++i) {
      for (const auto* w : {&r.beams.w_dl, &r.beams.w_vdl}) {
        const auto blk = (*w)[static_cast<std::size_t>(i)].segment(off, a);
        sq += blk.squaredNorm();
        mx = std::max(mx, blk.cwiseAbs().maxCoeff());
      }
    }
    r.group(n) = spec.penalty == Penalty::l12 ? std::sqrt(sq) : mx;
    off += a;
  }

  for (int n = 0; n < N; ++n) {
    const Index v = rho_var[static_cast<std::size_t>(n)];
    if (v >= 0) r.rho(n) = sol.primal(v);
  }
  r.objective = sol.objective_value + objective_constant;
  return r;
}

ProgramResult solve_program(const BeamformingProgram& bp, const conic::SolverTolerances& tol) {
  return bp.extract(conic::solve(bp.program, tol));
}

BeamformingProgram build_p4(const ChannelRealization& ch, const NetworkConfig& config, const Eigen::VectorXd& beta,
                            Penalty penalty, const ActiveSet& active) {
  check_active(active, ch.num_aps());
  ProgramSpec s;
  s.vdl_weight = config.weight;
  s.beta = beta;
  s.penalty = penalty;
  s.ap_state = states_for(active, ch.num_aps());
  return build_program(ch, config, s);
}

BeamformingProgram build_p5(const ChannelRealization& ch, const NetworkConfig& config, const Eigen::VectorXd& beta,
                            Penalty penalty, const ActiveSet& active) {
  check_active(active, ch.num_aps());
  ProgramSpec s;
  s.vdl_weight = config.weight;
  s.beta = beta;
  s.penalty = penalty;
  s.per_ap_dl_limits = true;
  s.ul_sum_limit = true;
  s.ap_state = states_for(active, ch.num_aps());
  return build_program(ch, config, s);
}

BeamformingProgram build_p6(const ChannelRealization& ch, const NetworkConfig& config,
                            const std::vector<ApState>& ap_state) {
  ProgramSpec s;
  s.vdl_weight = config.weight;
  s.relaxed_activity = true;
  s.per_ap_dl_limits = true;
  s.ul_sum_limit = true;
  s.ap_state = ap_state;
  return build_program(ch, config, s);
}

ProgramResult min_power_dl_beamforming(const ChannelRealization& ch, const NetworkConfig& config,
                                       const ActiveSet& active, bool per_ap_limits) {
  check_active(active, ch.num_aps());
  ProgramSpec s;
  s.vdl = false;
  s.per_ap_dl_limits = per_ap_limits;
  s.ap_state = states_for(active, ch.num_aps());
  return solve_program(build_program(ch, config, s));
}

ProgramResult virtual_dl_beamforming(const ChannelRealization& ch, const NetworkConfig& config,
                                     const ActiveSet& active) {
  check_active(active, ch.num_aps());
  ProgramSpec s;
  s.dl = false;
  s.vdl_weight = 1.0;
  s.ap_state = states_for(active, ch.num_aps());
  return solve_program(build_program(ch, config, s));
}

std::vector<CVector> filters_from_vdl(const std::vector<CVector>& w_vdl) {
  std::vector<CVector> v;
  v.reserve(w_vdl.size());
  for (const auto& w : w_vdl) v.push_back(w.conjugate());
  return v;
}

ObjectiveBreakdown weighted_total_power(const BeamformingSolution& sol, const ActiveSet& active,
                                        const NetworkConfig& config) {
  std::vector<bool> on(static_cast<std::size_t>(config.num_aps), false);
  for (int n : active) {
    if (n < 0 || n >= config.num_aps) throw std::invalid_argument("active AP index out of range");
    on[static_cast<std::size_t>(n)] = true;
  }
  for (int n = 0; n < config.num_aps; ++n) {
    if (on[static_cast<std::size_t>(n)]) continue;
    const int off = config.antenna_offset(n);
    const int a = config.antennas_per_ap[static_cast<std::size_t>(n)];
    for (const auto* vecs : {&sol.w_dl, &sol.v_ul})
      for (const auto& w : *vecs)
        if (w.size() > 0 && (w.segment(off, a).array() != std::complex<double>(0.0)).any())
          throw std::invalid_argument("nonzero beamformer block on sleeping AP " + std::to_string(n));
  }
  ObjectiveBreakdown o;
  for (int n : active) o.ap_static += config.ap_static_power[static_cast<std::size_t>(n)];
  for (const auto& w : sol.w_dl) o.ap_transmit += w.squaredNorm();
  o.mu_transmit_raw = sol.p_ul.size() > 0 ? sol.p_ul.sum() : 0.0;
  o.mu_transmit = config.weight * o.mu_transmit_raw;
  o.total = o.ap_static + o.ap_transmit + o.mu_transmit;
  return o;
}

FixedPointOptions fixed_point_options(const NetworkConfig& config) {
  FixedPointOptions o;
  o.divergence_guard = 1e6 * config.total_ul_budget();
  return o;
}

FeasibilityReport check_joint_feasibility(const ChannelRealization& ch, const NetworkConfig& config,
                                          const ActiveSet& active, const FixedPointOptions& opts) {
  FeasibilityReport rep;
  rep.dl = min_power_dl_beamforming(ch, config, active, true);
  rep.dl_feasible = rep.dl.optimal();
  rep.ul = ul_fixed_point_power(ch, config.qos_ul, config.noise_power, active, opts);
  if (rep.ul.feasible) {
    for (int i = 0; i < config.num_mus; ++i)
      if (rep.ul.p(i) > config.mu_tx_limit[static_cast<std::size_t>(i)]) rep.violating_mus.push_back(i);
    rep.ul_feasible = rep.violating_mus.empty();
  } else {
    rep.violating_mus = all_aps(config.num_mus);
  }
  return rep;
}

nlohmann::json beamforming_report(const BeamformingSolution& sol, const ChannelRealization& ch,
                                  const NetworkConfig& config) {
  auto block_norms = [&](const std::vector<CVector>& w) {
    std::vector<double> out;
    for (int n = 0; n < config.num_aps; ++n) {
      double s = 0.0;
      for (const auto& wi : w)
        if (wi.size() > 0) s += wi.segment(config.antenna_offset(n), config.antennas_per_ap[static_cast<std::size_t>(n)]).squaredNorm();
      out.push_back(std::sqrt(s));
    }
    return out;
  };
  auto to_vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json doc;
  doc["dl_block_norms"] = block_norms(sol.w_dl);
  doc["vdl_block_norms"] = block_norms(sol.w_vdl);
  doc["ul_filter_block_norms"] = block_norms(sol.v_ul);
  doc["dl_sinr"] = to_vec(dl_sinr(ch, sol.w_dl, config.noise_power));
  if (sol.p_ul.size() == config.num_mus && static_cast<int>(sol.v_ul.size()) == config.num_mus) {
    doc["ul_sinr"] = to_vec(ul_sinr(ch, sol.v_ul, sol.p_ul, config.noise_power));
    doc["p_ul"] = to_vec(sol.p_ul);
  }
  return doc;
}

}  // namespace cran
