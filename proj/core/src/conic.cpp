#include "cran/conic.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cran::conic {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index ConeProgram::degree() const {
  Index d = 0;
  for (const auto& c : cones) d += (c.kind == ConeKind::nonnegative) ? c.dim : 1;
  return d;
}

void ConeProgram::validate() const {
  Index total = 0;
  for (const auto& c : cones) {
    if (c.kind == ConeKind::second_order && c.dim < 2)
      throw std::invalid_argument("second-order cone block needs dimension >= 2");
    if (c.dim < 1) throw std::invalid_argument("cone block with non-positive dimension");
    total += c.dim;
  }
  if (total != h.size())
    throw std::invalid_argument("total cone dimension does not match residual dimension");
  if (G.rows() != h.size()) throw std::invalid_argument("G row count does not match h");
  if (G.cols() != objective.size())
    throw std::invalid_argument("G column count does not match objective");
  if (!variable_names.empty() && static_cast<Index>(variable_names.size()) != objective.size())
    throw std::invalid_argument("variable_names length does not match objective");
}

// ---------------------------------------------------------------------------
// Builder

Index ConeProgramBuilder::add_variable(std::string name, double cost) {
  costs_.push_back(cost);
  names_.push_back(std::move(name));
  return static_cast<Index>(costs_.size()) - 1;
}

void ConeProgramBuilder::add_cost(Index var, double cost) {
  costs_.at(static_cast<std::size_t>(var)) += cost;
}

void ConeProgramBuilder::push_row(const AffineExpr& expr) {
  const auto row = static_cast<Index>(offsets_.size());
  offsets_.push_back(expr.constant);
  for (const auto& [var, coeff] : expr.terms) {
    if (var < 0 || var >= num_variables()) throw std::out_of_range("unknown variable in expression");
    triplets_.emplace_back(row, var, -coeff);
  }
}

void ConeProgramBuilder::add_nonnegative(const AffineExpr& expr) {
  push_row(expr);
  if (!cones_.empty() && cones_.back().kind == ConeKind::nonnegative) {
    ++cones_.back().dim;
  } else {
    cones_.push_back({ConeKind::nonnegative, 1});
  }
}

void ConeProgramBuilder::add_second_order(std::span<const AffineExpr> rows) {
  if (rows.size() < 2) throw std::invalid_argument("second-order cone needs at least two rows");
  for (const auto& r : rows) push_row(r);
  cones_.push_back({ConeKind::second_order, static_cast<Index>(rows.size())});
}

namespace {

AffineExpr combine(const AffineExpr& a, double sa, const AffineExpr& b, double sb) {
  AffineExpr out(sa * a.constant + sb * b.constant);
  for (const auto& [v, c] : a.terms) out.add(v, sa * c);
  for (const auto& [v, c] : b.terms) out.add(v, sb * c);
  return out;
}

}  // namespace

void ConeProgramBuilder::add_rotated_quadratic(const AffineExpr& a, const AffineExpr& b,
                                               std::span<const AffineExpr> x) {
  std::vector<AffineExpr> rows;
  rows.reserve(x.size() + 2);
  rows.push_back(combine(a, 1.0, b, 1.0));
  rows.push_back(combine(a, 1.0, b, -1.0));
  for (const auto& xi : x) rows.push_back(combine(xi, 2.0, AffineExpr{}, 0.0));
  add_second_order(rows);
}

ConeProgram ConeProgramBuilder::build() const {
  ConeProgram p;
  const Index n = num_variables();
  const auto m = static_cast<Index>(offsets_.size());
  p.objective = Eigen::Map<const VectorXd>(costs_.data(), n);
  p.h = Eigen::Map<const VectorXd>(offsets_.data(), m);
  p.G.resize(m, n);
  p.G.setFromTriplets(triplets_.begin(), triplets_.end());
  p.G.makeCompressed();
  p.cones = cones_;
  p.variable_names = names_;
  return p;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::primal_infeasible: return "primal-infeasible";
    case SolveStatus::dual_infeasible: return "dual-infeasible";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Cone algebra on the product cone

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Block {
  ConeKind kind;
  Index offset;
  Index dim;
};

std::vector<Block> make_blocks(const std::vector<ConeBlock>& cones) {
  std::vector<Block> blocks;
  Index off = 0;
  for (const auto& c : cones) {
    blocks.push_back({c.kind, off, c.dim});
    off += c.dim;
  }
  return blocks;
}

double soc_residual(double v0, double nrm1) { return (v0 - nrm1) * (v0 + nrm1); }

VectorXd identity(const std::vector<Block>& blocks, Index m) {
  VectorXd e = VectorXd::Zero(m);
  for (const auto& b : blocks) {
    if (b.kind == ConeKind::nonnegative) {
      e.segment(b.offset, b.dim).setOnes();
    } else {
      e(b.offset) = 1.0;
    }
  }
  return e;
}

double min_eigenvalue(const std::vector<Block>& blocks, const VectorXd& v) {
  double m = kInf;
  for (const auto& b : blocks) {
    if (b.kind == ConeKind::nonnegative) {
      m = std::min(m, v.segment(b.offset, b.dim).minCoeff());
    } else {
      m = std::min(m, v(b.offset) - v.segment(b.offset + 1, b.dim - 1).norm());
    }
  }
  return m;
}

double violation(const std::vector<Block>& blocks, const VectorXd& v) {
  double acc = 0.0;
  for (const auto& b : blocks) {
    if (b.kind == ConeKind::nonnegative) {
      for (Index i = 0; i < b.dim; ++i) {
        const double vi = v(b.offset + i);
        if (vi < 0.0) acc += vi * vi;
      }
    } else {
      const double gap = v.segment(b.offset + 1, b.dim - 1).norm() - v(b.offset);
      if (gap > 0.0) acc += gap * gap;
    }
  }
  return std::sqrt(acc);
}

VectorXd jordan_product(const std::vector<Block>& blocks, const VectorXd& u, const VectorXd& v) {
  VectorXd out(u.size());
  for (const auto& b : blocks) {
    const auto us = u.segment(b.offset, b.dim);
    const auto vs = v.segment(b.offset, b.dim);
    if (b.kind == ConeKind::nonnegative) {
      out.segment(b.offset, b.dim) = us.cwiseProduct(vs);
    } else {
      out(b.offset) = us.dot(vs);
      out.segment(b.offset + 1, b.dim - 1) =
          us(0) * vs.tail(b.dim - 1) + vs(0) * us.tail(b.dim - 1);
    }
  }
  return out;
}

/// Solves lambda o x = d for x.
VectorXd jordan_divide(const std::vector<Block>& blocks, const VectorXd& lambda, const VectorXd& d) {
  VectorXd out(d.size());
  for (const auto& b : blocks) {
    const auto ls = lambda.segment(b.offset, b.dim);
    const auto ds = d.segment(b.offset, b.dim);
    if (b.kind == ConeKind::nonnegative) {
      out.segment(b.offset, b.dim) = ds.cwiseQuotient(ls);
    } else {
      const double l0 = ls(0);
      const auto l1 = ls.tail(b.dim - 1);
      const double det = soc_residual(l0, l1.norm());
      const double x0 = (l0 * ds(0) - l1.dot(ds.tail(b.dim - 1))) / det;
      out(b.offset) = x0;
      out.segment(b.offset + 1, b.dim - 1) = (ds.tail(b.dim - 1) - x0 * l1) / l0;
    }
  }
  return out;
}

/// Largest alpha >= 0 with v + alpha * dv in K, for v in the interior of K.
double max_step(const std::vector<Block>& blocks, const VectorXd& v, const VectorXd& dv) {
  double alpha = kInf;
  for (const auto& b : blocks) {
    if (b.kind == ConeKind::nonnegative) {
      for (Index i = 0; i < b.dim; ++i) {
        const double d = dv(b.offset + i);
        if (d < 0.0) alpha = std::min(alpha, -v(b.offset + i) / d);
      }
      continue;
    }
    const auto vs = v.segment(b.offset, b.dim);
    const auto ds = dv.segment(b.offset, b.dim);
    const double v1n = vs.tail(b.dim - 1).norm();
    const double d1n = ds.tail(b.dim - 1).norm();
    // f(a) = qa a^2 + 2 qb a + qc, boundary where f = 0.
    const double qa = soc_residual(ds(0), d1n);
    const double qb = vs(0) * ds(0) - vs.tail(b.dim - 1).dot(ds.tail(b.dim - 1));
    const double qc = soc_residual(vs(0), v1n);
    double root = kInf;
    const double scale = std::max({std::abs(qa), std::abs(qb), std::abs(qc), 1e-300});
    if (std::abs(qa) <= 1e-14 * scale) {
      if (qb < 0.0) root = -qc / (2.0 * qb);
    } else {
      const double disc = qb * qb - qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -(qb + std::copysign(sq, qb));
        const double r1 = q / qa;
        const double r2 = (q != 0.0) ? qc / q : kInf;
        for (double r : {r1, r2}) {
          if (r > 0.0) root = std::min(root, r);
        }
      }
    }
    // The leading coordinate must stay nonnegative along the step.
    if (ds(0) < 0.0) root = std::min(root, -vs(0) / ds(0));
    alpha = std::min(alpha, root);
  }
  return alpha;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
//
// Orthant rows: W = diag(sqrt(s / z)).
// Second-order cones: W = eta [w0 w1'; w1 I + w1 w1' / (1 + w0)] with w'Jw = 1,
// J = diag(1, -1, ..., -1), so that W^2 = eta^2 (2 w w' - J) and
// W^{-2} = eta^{-2} (2 Jw w'J - J).

struct Scaling {
  const std::vector<Block>* blocks = nullptr;
  VectorXd d;                   // orthant diagonal (unused at SOC rows)
  std::vector<double> eta;      // per block
  std::vector<VectorXd> w;      // per block (SOC only)
  VectorXd lambda;

  void identity_init(const std::vector<Block>& bl, Index m) {
    blocks = &bl;
    d = VectorXd::Ones(m);
    eta.assign(bl.size(), 1.0);
    w.assign(bl.size(), VectorXd());
    for (std::size_t k = 0; k < bl.size(); ++k) {
      if (bl[k].kind == ConeKind::second_order) {
        w[k] = VectorXd::Zero(bl[k].dim);
        w[k](0) = 1.0;
      }
    }
  }

  bool compute(const std::vector<Block>& bl, const VectorXd& s, const VectorXd& z) {
    blocks = &bl;
    d.resize(s.size());
    eta.assign(bl.size(), 1.0);
    w.assign(bl.size(), VectorXd());
    for (std::size_t k = 0; k < bl.size(); ++k) {
      const auto& b = bl[k];
      if (b.kind == ConeKind::nonnegative) {
        d.segment(b.offset, b.dim) =
            (s.segment(b.offset, b.dim).cwiseQuotient(z.segment(b.offset, b.dim))).cwiseSqrt();
        continue;
      }
      const auto ss = s.segment(b.offset, b.dim);
      const auto zs = z.segment(b.offset, b.dim);
      const double sres = soc_residual(ss(0), ss.tail(b.dim - 1).norm());
      const double zres = soc_residual(zs(0), zs.tail(b.dim - 1).norm());
      if (!(sres > 0.0) || !(zres > 0.0)) return false;
      const VectorXd sbar = ss / std::sqrt(sres);
      const VectorXd zbar = zs / std::sqrt(zres);
      const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      VectorXd wk = sbar;
      wk(0) += zbar(0);
      wk.tail(b.dim - 1) -= zbar.tail(b.dim - 1);
      wk /= 2.0 * gamma;
      w[k] = std::move(wk);
      eta[k] = std::pow(sres / zres, 0.25);
    }
    lambda = apply_W(z);
    return lambda.allFinite();
  }

  static VectorXd applyJ(const Eigen::Ref<const VectorXd>& v) {
    VectorXd out = -v;
    out(0) = v(0);
    return out;
  }

  // [w0 sw1'; sw1 I + w1 w1' / (1 + w0)] v with s = +1 (W) or -1 (W^{-1}).
  static VectorXd boost(const VectorXd& wk, const Eigen::Ref<const VectorXd>& v, double sign) {
    const Index n = v.size() - 1;
    const auto w1 = wk.tail(n);
    const auto v1 = v.tail(n);
    const double w1v1 = w1.dot(v1);
    VectorXd out(v.size());
    out(0) = wk(0) * v(0) + sign * w1v1;
    out.tail(n) = v1 + (sign * v(0) + w1v1 / (1.0 + wk(0))) * w1;
    return out;
  }

  VectorXd apply_W(const VectorXd& v) const {
    VectorXd out(v.size());
    for (std::size_t k = 0; k < blocks->size(); ++k) {
      const auto& b = (*blocks)[k];
      const auto vs = v.segment(b.offset, b.dim);
      if (b.kind == ConeKind::nonnegative) {
        out.segment(b.offset, b.dim) = d.segment(b.offset, b.dim).cwiseProduct(vs);
      } else {
        out.segment(b.offset, b.dim) = eta[k] * boost(w[k], vs, 1.0);
      }
    }
    return out;
  }

  VectorXd apply_Winv(const VectorXd& v) const {
    VectorXd out(v.size());
    for (std::size_t k = 0; k < blocks->size(); ++k) {
      const auto& b = (*blocks)[k];
      const auto vs = v.segment(b.offset, b.dim);
      if (b.kind == ConeKind::nonnegative) {
        out.segment(b.offset, b.dim) = vs.cwiseQuotient(d.segment(b.offset, b.dim));
      } else {
        out.segment(b.offset, b.dim) = boost(w[k], vs, -1.0) / eta[k];
      }
    }
    return out;
  }

  VectorXd apply_W2(const VectorXd& v) const { return apply_W(apply_W(v)); }
  VectorXd apply_Winv2(const VectorXd& v) const { return apply_Winv(apply_Winv(v)); }
};

// ---------------------------------------------------------------------------
// Reduced KKT system
//
//   [ 0   G' ] [x]   [bx]
//   [ G  -W2 ] [z] = [bz]
//
// solved through the normal equations G' W^{-2} G x = bx + G' W^{-2} bz,
// with per-cone low-rank assembly and iterative refinement on the full system.

class KktSolver {
 public:
  KktSolver(const ConeProgram& p, const std::vector<Block>& blocks)
      : G_(p.G), Gt_(p.G.transpose()), n_(p.num_variables()) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> Gr(p.G);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& b = blocks[k];
      if (b.kind == ConeKind::nonnegative) {
        for (Index r = b.offset; r < b.offset + b.dim; ++r) pieces_.push_back(make_piece(Gr, b.kind, k, r, 1));
      } else {
        pieces_.push_back(make_piece(Gr, b.kind, k, b.offset, b.dim));
      }
    }
  }

  bool factor(const Scaling& W) {
    scaling_ = &W;
    MatrixXd H = MatrixXd::Zero(n_, n_);
    for (const auto& pc : pieces_) {
      const Index t = static_cast<Index>(pc.cols.size());
      if (t == 0) continue;
      MatrixXd M;
      if (pc.kind == ConeKind::nonnegative) {
        const double dr = W.d(pc.row);
        M = pc.gtg / (dr * dr);
      } else {
        // Gram form (W^{-1} G)'(W^{-1} G) stays PSD where 2aa' - G'JG would cancel.
        const VectorXd& w = W.w[pc.block];
        const Index dim = pc.dense.rows();
        const auto w1 = w.tail(dim - 1);
        const auto d0 = pc.dense.row(0);
        const auto d1 = pc.dense.bottomRows(dim - 1);
        const Eigen::RowVectorXd w1d1 = w1.transpose() * d1;
        MatrixXd Y(dim, t);
        Y.row(0) = w(0) * d0 - w1d1;
        Y.bottomRows(dim - 1) = d1 - w1 * d0 + w1 * (w1d1 / (1.0 + w(0)));
        Y /= W.eta[pc.block];
        M = Y.transpose() * Y;
      }
      for (Index j = 0; j < t; ++j) {
        const Index cj = pc.cols[static_cast<std::size_t>(j)];
        for (Index i = 0; i < t; ++i) H(pc.cols[static_cast<std::size_t>(i)], cj) += M(i, j);
      }
    }
    // Regularize each pivot relative to itself so a few huge diagonal
    // entries do not swamp the rest.
    const VectorXd diag = H.diagonal().cwiseMax(1e-300);
    double delta = 1e-14;
    for (int attempt = 0; attempt < 6; ++attempt) {
      MatrixXd Hreg = H;
      Hreg.diagonal().array() += delta * (diag.array() + 1e-8);
      llt_.compute(Hreg);
      if (llt_.info() == Eigen::Success) return true;
      delta *= 100.0;
    }
    return false;
  }

  void solve(const VectorXd& bx, const VectorXd& bz, VectorXd& x, VectorXd& z) const {
    reduced_solve(bx, bz, x, z);
    const double bnorm = 1.0 + std::max(bx.lpNorm<Eigen::Infinity>(), bz.lpNorm<Eigen::Infinity>());
    double prev = kInf;
    for (int it = 0; it < 8; ++it) {
      const VectorXd rx = bx - Gt_ * z;
      const VectorXd rz = bz - (G_ * x - scaling_->apply_W2(z));
      const double err = std::max(rx.lpNorm<Eigen::Infinity>(), rz.lpNorm<Eigen::Infinity>());
      if (err <= 1e-15 * bnorm || err > 0.5 * prev) break;
      prev = err;
      VectorXd dx, dz;
      reduced_solve(rx, rz, dx, dz);
      x += dx;
      z += dz;
    }
  }

 private:
  struct Piece {
    ConeKind kind;
    std::size_t block = 0;
    Index row = 0;
    std::vector<Index> cols;
    MatrixXd dense;  // rows of G restricted to `cols`
    MatrixXd gtg;    // dense' * dense, orthant rows only
  };

  static Piece make_piece(const Eigen::SparseMatrix<double, Eigen::RowMajor>& Gr, ConeKind kind,
                          std::size_t block, Index row, Index dim) {
    Piece pc;
    pc.kind = kind;
    pc.row = row;
    pc.block = block;
    for (Index r = row; r < row + dim; ++r) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Gr, r); it; ++it)
        pc.cols.push_back(it.col());
    }
    std::sort(pc.cols.begin(), pc.cols.end());
    pc.cols.erase(std::unique(pc.cols.begin(), pc.cols.end()), pc.cols.end());
    pc.dense = MatrixXd::Zero(dim, static_cast<Index>(pc.cols.size()));
    for (Index r = row; r < row + dim; ++r) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Gr, r); it; ++it) {
        const auto pos = std::lower_bound(pc.cols.begin(), pc.cols.end(), it.col()) - pc.cols.begin();
        pc.dense(r - row, pos) = it.value();
      }
    }
    if (kind == ConeKind::nonnegative) pc.gtg = pc.dense.transpose() * pc.dense;
    return pc;
  }

  void reduced_solve(const VectorXd& bx, const VectorXd& bz, VectorXd& x, VectorXd& z) const {
    const VectorXd wbz = scaling_->apply_Winv2(bz);
    x = llt_.solve(bx + Gt_ * wbz);
    z = scaling_->apply_Winv2(G_ * x - bz);
  }

  const Eigen::SparseMatrix<double>& G_;
  Eigen::SparseMatrix<double> Gt_;
  Index n_;
  std::vector<Piece> pieces_;
  Eigen::LLT<MatrixXd> llt_;
  const Scaling* scaling_ = nullptr;
};

ResidualReport optimality_report(const ConeProgram& p, const std::vector<Block>& blocks,
                                 const VectorXd& x, const VectorXd& z, const SolverTolerances& tol) {
  ResidualReport r;
  const VectorXd s = p.h - p.G * x;
  const double hn = std::max(1.0, p.h.norm());
  const double cn = std::max(1.0, p.objective.norm());
  r.primal = violation(blocks, s) / hn;
  r.dual = ((p.G.transpose() * z + p.objective).norm() + violation(blocks, z)) / cn;
  const double pcost = p.objective.dot(x);
  const double dcost = -p.h.dot(z);
  r.gap = std::abs(pcost - dcost);
  const double scale = std::max(std::abs(pcost), std::abs(dcost));
  r.gap_rel = scale > 0.0 ? r.gap / scale : (r.gap == 0.0 ? 0.0 : kInf);
  r.within_tolerance = std::isfinite(r.primal) && std::isfinite(r.dual) &&
                       r.primal <= tol.feasibility && r.dual <= tol.feasibility &&
                       (r.gap <= tol.gap_abs || r.gap_rel <= tol.gap_rel);
  if (!r.within_tolerance) {
    std::ostringstream os;
    if (!(r.primal <= tol.feasibility)) os << "primal residual " << r.primal << "; ";
    if (!(r.dual <= tol.feasibility)) os << "dual residual " << r.dual << "; ";
    if (!(r.gap <= tol.gap_abs || r.gap_rel <= tol.gap_rel)) os << "gap " << r.gap << "; ";
    r.violation = os.str();
  }
  return r;
}

/// Farkas ray for primal infeasibility: z in K, G'z = 0, h'z = -1.
ResidualReport primal_certificate_report(const ConeProgram& p, const std::vector<Block>& blocks,
                                         const VectorXd& z, const SolverTolerances& tol) {
  ResidualReport r;
  const double hz = p.h.dot(z);
  if (!(hz < 0.0)) {
    r.certificate = kInf;
    r.violation = "h'z is not negative";
    return r;
  }
  const VectorXd zn = z / (-hz);
  r.certificate = (p.G.transpose() * zn).norm() + violation(blocks, zn);
  r.within_tolerance = r.certificate <= tol.infeasibility;
  if (!r.within_tolerance) r.violation = "primal infeasibility ray residual too large";
  return r;
}

/// Ray for dual infeasibility: -Gx in K, c'x = -1.
ResidualReport dual_certificate_report(const ConeProgram& p, const std::vector<Block>& blocks,
                                       const VectorXd& x, const SolverTolerances& tol) {
  ResidualReport r;
  const double cx = p.objective.dot(x);
  if (!(cx < 0.0)) {
    r.certificate = kInf;
    r.violation = "c'x is not negative";
    return r;
  }
  const VectorXd xn = x / (-cx);
  r.certificate = violation(blocks, -(p.G * xn));
  r.within_tolerance = r.certificate <= tol.infeasibility;
  if (!r.within_tolerance) r.violation = "dual infeasibility ray residual too large";
  return r;
}

}  // namespace

double cone_violation(const ConeProgram& problem, const VectorXd& v) {
  if (v.size() != problem.num_rows()) throw std::invalid_argument("vector length does not match cone");
  return violation(make_blocks(problem.cones), v);
}

ResidualReport check_certificate(const ConeProgram& problem, const ConeSolution& solution,
                                 const SolverTolerances& tol) {
  problem.validate();
  const auto blocks = make_blocks(problem.cones);
  switch (solution.status) {
    case SolveStatus::optimal:
    case SolveStatus::numerical_failure:
      if (solution.primal.size() != problem.num_variables() || solution.dual.size() != problem.num_rows())
        throw std::invalid_argument("solution dimensions do not match problem");
      return optimality_report(problem, blocks, solution.primal, solution.dual, tol);
    case SolveStatus::primal_infeasible:
      if (solution.dual.size() != problem.num_rows())
        throw std::invalid_argument("certificate dimension does not match problem");
      return primal_certificate_report(problem, blocks, solution.dual, tol);
    case SolveStatus::dual_infeasible:
      if (solution.primal.size() != problem.num_variables())
        throw std::invalid_argument("certificate dimension does not match problem");
      return dual_certificate_report(problem, blocks, solution.primal, tol);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Interior-point driver

ConeSolution solve(const ConeProgram& problem, const SolverTolerances& tol) {
  problem.validate();
  const auto blocks = make_blocks(problem.cones);
  const Index n = problem.num_variables();
  const Index m = problem.num_rows();
  const VectorXd& c = problem.objective;
  const VectorXd& h = problem.h;
  const auto& G = problem.G;
  const Eigen::SparseMatrix<double> Gt = G.transpose();
  const double degree = static_cast<double>(problem.degree());
  const VectorXd e = identity(blocks, m);

  ConeSolution sol;
  KktSolver kkt(problem, blocks);
  Scaling W;
  W.identity_init(blocks, m);
  if (!kkt.factor(W)) {
    sol.diagnostic = "initial KKT factorization failed";
    return sol;
  }

  // Least-squares starting points, shifted into the interior of K.
  VectorXd x, s, z, tmp;
  kkt.solve(VectorXd::Zero(n), h, x, tmp);
  s = -tmp;
  kkt.solve(-c, VectorXd::Zero(m), tmp, z);
  auto shift_into_cone = [&](VectorXd& v) {
    const double mev = min_eigenvalue(blocks, v);
    const double scale = std::max(1.0, v.norm());
    if (mev <= 1e-8 * scale) v += (1.0 - mev) * e;
  };
  shift_into_cone(s);
  shift_into_cone(z);
  double tau = 1.0;
  double kappa = 1.0;

  auto finish_failure = [&](std::string why, int iter) {
    sol.status = SolveStatus::numerical_failure;
    sol.iterations = iter;
    sol.primal = x / tau;
    sol.dual = z / tau;
    sol.slack = h - G * sol.primal;
    sol.objective_value = c.dot(sol.primal);
    sol.dual_objective = -h.dot(sol.dual);
    sol.residual_report = optimality_report(problem, blocks, sol.primal, sol.dual, tol);
    sol.diagnostic = std::move(why);
    return sol;
  };

  for (int iter = 0; iter <= tol.max_iterations; ++iter) {
    if (!x.allFinite() || !z.allFinite() || !s.allFinite() || !std::isfinite(tau) || !std::isfinite(kappa))
      return finish_failure("non-finite iterate", iter);

    // Termination checks on the de-homogenized point.
    if (tau > 0.0) {
      const VectorXd xh = x / tau;
      const VectorXd zh = z / tau;
      auto report = optimality_report(problem, blocks, xh, zh, tol);
      if (report.within_tolerance) {
        sol.status = SolveStatus::optimal;
        sol.iterations = iter;
        sol.primal = xh;
        sol.dual = zh;
        sol.slack = h - G * xh;
        sol.objective_value = c.dot(xh);
        sol.dual_objective = -h.dot(zh);
        sol.residual_report = std::move(report);
        return sol;
      }
    }
    {
      auto pr = primal_certificate_report(problem, blocks, z, tol);
      if (pr.within_tolerance) {
        sol.status = SolveStatus::primal_infeasible;
        sol.iterations = iter;
        sol.dual = z / (-h.dot(z));
        sol.primal = VectorXd::Zero(n);
        sol.residual_report = std::move(pr);
        sol.objective_value = kInf;
        sol.dual_objective = kInf;
        sol.diagnostic = "primal infeasibility certificate found";
        return sol;
      }
      auto dr = dual_certificate_report(problem, blocks, x, tol);
      if (dr.within_tolerance) {
        sol.status = SolveStatus::dual_infeasible;
        sol.iterations = iter;
        sol.primal = x / (-c.dot(x));
        sol.dual = VectorXd::Zero(m);
        sol.residual_report = std::move(dr);
        sol.objective_value = -kInf;
        sol.dual_objective = -kInf;
        sol.diagnostic = "dual infeasibility certificate found";
        return sol;
      }
    }
    if (iter == tol.max_iterations) break;

    const VectorXd rx = Gt * z + c * tau;
    const VectorXd rz = G * x + s - h * tau;
    const double rtau = kappa + c.dot(x) + h.dot(z);

    if (!W.compute(blocks, s, z)) return finish_failure("iterate left the cone interior", iter);
    if (!kkt.factor(W)) return finish_failure("KKT factorization failed", iter);
    const VectorXd& lambda = W.lambda;
    const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);

    VectorXd x1, z1;
    kkt.solve(-c, h, x1, z1);
    const double denom = c.dot(x1) + h.dot(z1) - kappa / tau;

    struct Dir {
      VectorXd dx, dz, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](double rhs_scale, const VectorXd& d_s, double d_kappa) {
      Dir d;
      const VectorXd wds = W.apply_W(jordan_divide(blocks, lambda, d_s));
      const VectorXd bx = -rhs_scale * rx;
      const VectorXd bz = -rhs_scale * rz - wds;
      const double btau = -rhs_scale * rtau - d_kappa / tau;
      VectorXd x2, z2;
      kkt.solve(bx, bz, x2, z2);
      d.dtau = (btau - c.dot(x2) - h.dot(z2)) / denom;
      d.dx = x2 + d.dtau * x1;
      d.dz = z2 + d.dtau * z1;
      d.ds = wds - W.apply_W2(d.dz);
      d.dkappa = (d_kappa - kappa * d.dtau) / tau;
      return d;
    };
    auto step_to_boundary = [&](const Dir& d) {
      // s + a ds in K  <=>  lambda + a W^{-1} ds in K (and likewise W dz for z).
      double a = std::min(max_step(blocks, lambda, W.apply_Winv(d.ds)), max_step(blocks, lambda, W.apply_W(d.dz)));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    // Predictor.
    const VectorXd ll = jordan_product(blocks, lambda, lambda);
    const Dir aff = direction(1.0, -ll, -tau * kappa);
    const double alpha_aff = std::min(1.0, step_to_boundary(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3.0), 0.0, 1.0);

    // Corrector.
    const VectorXd corr = jordan_product(blocks, W.apply_Winv(aff.ds), W.apply_W(aff.dz));
    const VectorXd d_s = -ll - corr + sigma * mu * e;
    const double d_kappa = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Dir dir = direction(1.0 - sigma, d_s, d_kappa);
    const double alpha = std::min(1.0, tol.step_fraction * step_to_boundary(dir));
    if (!(alpha > 1e-12)) return finish_failure("step size collapsed", iter);

    x += alpha * dir.dx;
    s += alpha * dir.ds;
    z += alpha * dir.dz;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;
    sol.iterations = iter + 1;
  }
  return finish_failure("iteration limit reached", tol.max_iterations);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const ConeProgram& problem) {
  nlohmann::json doc;
  doc["format"] = "cone-program/1";
  doc["form"] = "minimize c'x subject to h - Gx in K";
  doc["num_variables"] = problem.num_variables();
  doc["num_rows"] = problem.num_rows();
  doc["c"] = std::vector<double>(problem.objective.data(), problem.objective.data() + problem.objective.size());
  doc["h"] = std::vector<double>(problem.h.data(), problem.h.data() + problem.h.size());
  auto& trip = doc["G"] = nlohmann::json::array();
  for (Index k = 0; k < problem.G.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(problem.G, k); it; ++it)
      trip.push_back({it.row(), it.col(), it.value()});
  }
  auto& cones = doc["cones"] = nlohmann::json::array();
  for (const auto& cb : problem.cones)
    cones.push_back({{"type", cb.kind == ConeKind::nonnegative ? "nonnegative" : "second_order"},
                     {"dim", cb.dim}});
  doc["variable_names"] = problem.variable_names;
  return doc;
}

ConeProgram cone_program_from_json(const nlohmann::json& doc) {
  ConeProgram p;
  const auto c = doc.at("c").get<std::vector<double>>();
  const auto h = doc.at("h").get<std::vector<double>>();
  p.objective = Eigen::Map<const VectorXd>(c.data(), static_cast<Index>(c.size()));
  p.h = Eigen::Map<const VectorXd>(h.data(), static_cast<Index>(h.size()));
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& t : doc.at("G")) trip.emplace_back(t.at(0).get<Index>(), t.at(1).get<Index>(), t.at(2).get<double>());
  p.G.resize(p.h.size(), p.objective.size());
  p.G.setFromTriplets(trip.begin(), trip.end());
  for (const auto& cb : doc.at("cones")) {
    const auto type = cb.at("type").get<std::string>();
    if (type != "nonnegative" && type != "second_order") throw std::invalid_argument("unknown cone type " + type);
    p.cones.push_back({type == "nonnegative" ? ConeKind::nonnegative : ConeKind::second_order, cb.at("dim").get<Index>()});
  }
  if (doc.contains("variable_names")) p.variable_names = doc.at("variable_names").get<std::vector<std::string>>();
  p.validate();
  return p;
}

}  // namespace cran::conic
