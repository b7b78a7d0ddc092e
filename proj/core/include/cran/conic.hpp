#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <nlohmann/json_fwd.hpp>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cran::conic {

enum class ConeKind { nonnegative, second_order };

struct ConeBlock {
  ConeKind kind = ConeKind::nonnegative;
  Eigen::Index dim = 0;
};

/// Affine expression `constant + sum coeff * x[var]` over the decision vector.
struct AffineExpr {
  std::vector<std::pair<Eigen::Index, double>> terms;
  double constant = 0.0;

  AffineExpr() = default;
  explicit AffineExpr(double c) : constant(c) {}
  AffineExpr& add(Eigen::Index var, double coeff) {
    if (coeff != 0.0) terms.emplace_back(var, coeff);
    return *this;
  }
};

/// Standard-form cone program
///
///     minimize    c'x
///     subject to  s = h - G x,  s in K = K_1 x ... x K_p
///
/// where every K_j is either a nonnegative orthant or a second-order cone
/// {(s0, s1) : s0 >= ||s1||}. Row blocks of G and h follow `cones` in order.
struct ConeProgram {
  Eigen::VectorXd objective;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  std::vector<ConeBlock> cones;
  std::vector<std::string> variable_names;

  Eigen::Index num_variables() const { return objective.size(); }
  Eigen::Index num_rows() const { return h.size(); }
  /// Number of cones counted with their barrier degree (1 per orthant row,
  /// 1 per second-order cone).
  Eigen::Index degree() const;

  /// Throws std::invalid_argument when the layout is inconsistent.
  void validate() const;
};

/// Incremental construction of a ConeProgram from affine expressions.
class ConeProgramBuilder {
 public:
  Eigen::Index add_variable(std::string name, double cost = 0.0);
  void add_cost(Eigen::Index var, double cost);

  /// expr >= 0
  void add_nonnegative(const AffineExpr& expr);
  /// rows[0] >= ||rows[1..]||; needs at least two rows.
  void add_second_order(std::span<const AffineExpr> rows);
  /// ||x||^2 <= a * b with a, b >= 0, encoded as the rotated cone
  /// (a + b, a - b, 2x) in the second-order cone.
  void add_rotated_quadratic(const AffineExpr& a, const AffineExpr& b,
                             std::span<const AffineExpr> x);

  Eigen::Index num_variables() const {
    return static_cast<Eigen::Index>(costs_.size());
  }

  ConeProgram build() const;

 private:
  void push_row(const AffineExpr& expr);

  std::vector<double> costs_;
  std::vector<std::string> names_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::vector<double> offsets_;
  std::vector<ConeBlock> cones_;
};

enum class SolveStatus { optimal, primal_infeasible, dual_infeasible, numerical_failure };

std::string to_string(SolveStatus status);

struct SolverTolerances {
  double feasibility = 1e-8;
  double gap_abs = 1e-8;
  double gap_rel = 1e-8;
  double infeasibility = 1e-8;
  int max_iterations = 150;
  /// Fraction of the distance to the cone boundary taken per step.
  double step_fraction = 0.99;
};

/// Residual norms recomputed from problem data.
///
/// For optimal points: primal is the cone violation of h - Gx, dual is
/// ||G'z + c|| plus the cone violation of z (both relative to max(1, ||h||)
/// and max(1, ||c||)), gap is |c'x + h'z| and gap_rel that gap over the
/// larger objective magnitude. For infeasibility certificates the ray is
/// normalized (h'z = -1 or c'x = -1) and `certificate` holds its residual.
struct ResidualReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double gap_rel = 0.0;
  double certificate = 0.0;
  bool within_tolerance = false;
  std::string violation;
};

struct ConeSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd primal;  // x
  Eigen::VectorXd slack;   // s = h - Gx
  Eigen::VectorXd dual;    // z
  double objective_value = 0.0;
  double dual_objective = 0.0;
  ResidualReport residual_report;
  int iterations = 0;
  std::string diagnostic;
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling
/// and Mehrotra predictor-corrector steps. Infeasibility is reported only
/// with a certificate that passes `check_certificate`.
ConeSolution solve(const ConeProgram& problem, const SolverTolerances& tol = {});

/// Independently recompute feasibility, optimality and certificate residuals.
/// Throws std::invalid_argument on dimension mismatch.
ResidualReport check_certificate(const ConeProgram& problem, const ConeSolution& solution,
                                 const SolverTolerances& tol = {});

/// Distance-like violation of membership in K (0 when inside).
double cone_violation(const ConeProgram& problem, const Eigen::VectorXd& v);

/// Self-describing dump for cross-checking with external conic solvers.
nlohmann::json to_json(const ConeProgram& problem);
ConeProgram cone_program_from_json(const nlohmann::json& doc);

}  // namespace cran::conic
