#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tieopt {

/// Convex quadratic program
///   min 0.5 x'Hx + c'x
///   s.t. A_eq x = b_eq,  A_in x <= b_in,  lower <= x <= upper.
/// H must be symmetric positive semidefinite; empty matrices mean "none".
struct QuadraticProgram {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd in_matrix;
  Eigen::VectorXd in_rhs;
  Eigen::VectorXd lower;  // may be empty (no bounds) or contain -inf entries
  Eigen::VectorXd upper;

  int num_vars() const { return static_cast<int>(linear.size()); }
};

enum class QpStatus { Optimal, Infeasible, Unbounded };

struct KktResiduals {
  double stationarity = 0.0;    // ||Hx + c + A_eq'y + A_in'z + bound terms||_inf
  double feasibility = 0.0;     // max constraint violation
  double complementarity = 0.0; // max |z_i * slack_i|
};

/// Primal/dual pair under the convention
///   L = 0.5 x'Hx + c'x + y'(A_eq x - b_eq) + z'(A_in x - b_in) + bound terms
/// so inequality duals z are >= 0 and d(optimal cost)/d(b_eq) = -y.
struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd in_duals;
  Eigen::VectorXd lower_duals;  // duals of -x <= -lower
  Eigen::VectorXd upper_duals;  // duals of  x <=  upper
  double objective = 0.0;
  QpStatus status = QpStatus::Infeasible;
  KktResiduals kkt;
  bool degenerate = false;  // non-unique duals detected (regularized result)
  int iterations = 0;
  std::vector<int> active_set;  // internal constraint ids, reusable as a hint
};

struct QpOptions {
  double feas_tol = 1e-8;
  double stat_tol = 1e-8;
  int max_iterations = 0;  // 0 = automatic (scales with problem size)
  /// Constraint ids from a previous QpSolution::active_set; tried first when
  /// selecting violated constraints, which keeps consecutive solves of a
  /// parametric sweep on the same active-set path.
  std::vector<int> warm_start;
};

/// Dense convex QP solve with exact duals. Status Optimal certifies the KKT
/// residuals in the result; Infeasible/Unbounded are detected, not thrown.
/// Throws NumericalFailure only when factorizations break down irrecoverably.
QpSolution solve_convex_qp(const QuadraticProgram& qp, const QpOptions& options = {});

}  // namespace tieopt
