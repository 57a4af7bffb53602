#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace fairsvm::qp {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// x^T P x + q^T x <= r, with P symmetric PSD (stored in full).
struct QuadraticConstraint {
  SparseMatrix p;
  Eigen::VectorXd q;
  double r = 0.0;
};

/// minimize    1/2 x^T Q x + c^T x
/// subject to  A_eq x  = b_eq
///             A_in x <= b_in
///             x^T P_k x + q_k^T x <= r_k
///             lower <= x <= upper   (entries may be +-infinity)
///
/// Empty matrices/vectors mean "no constraints of that kind".
struct ConvexQuadraticProgram {
  SparseMatrix objective_quadratic;  // Q, n x n, symmetric PSD
  Eigen::VectorXd objective_linear;  // c, defines n
  SparseMatrix eq_matrix;
  Eigen::VectorXd eq_rhs;
  SparseMatrix ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  std::vector<QuadraticConstraint> quadratic_constraints;
  Eigen::VectorXd lower;  // empty or length n
  Eigen::VectorXd upper;

  Eigen::Index num_variables() const { return objective_linear.size(); }
  double objective(const Eigen::VectorXd& x) const;
  /// Largest violation over all constraints (0 when feasible).
  double max_violation(const Eigen::VectorXd& x) const;
};

enum class Status { converged, max_iterations, infeasible_detected };

std::string to_string(Status status);

struct SolverResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double feasibility_residual = 0.0;  // max primal violation
  double kkt_residual = 0.0;          // max of stationarity and complementarity
  double stationarity = 0.0;
  double complementarity = 0.0;  // max_j z_j * |slack_j|
  double duality_gap = 0.0;      // s^T z
  int iterations = 0;
  Status status = Status::max_iterations;
  /// Merit value max(residual norm, floor) + s^T z at each accepted iterate.
  std::vector<double> merit_history;
  /// Multipliers: equalities, then inequality rows, bounds, quadratic
  /// constraints, in that order.
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
};

struct SolverOptions {
  double feas_tol = 1e-7;
  double kkt_tol = 1e-7;
  int max_iter = 100;
  /// Check PSD-ness of Q and every P_k before solving.
  bool verify_convexity = true;
  std::optional<Eigen::VectorXd> initial_point;
};

/// Primal-dual interior-point method (Mehrotra predictor-corrector) with a
/// backtracking line search on residual norm + s^T z. Quadratic inequality
/// constraints enter the Newton system through their gradients and Hessians;
/// the corrector also carries their second-order term. When the main phase does not converge, a phase-one
/// problem decides between max_iterations and infeasible_detected.
///
/// Throws InputError on inconsistent dimensions or a non-convex problem.
SolverResult solve(const ConvexQuadraticProgram& problem, const SolverOptions& options = {});

/// Convenience: converts a dense matrix into the sparse storage used above.
SparseMatrix to_sparse(const Eigen::MatrixXd& dense);

}  // namespace fairsvm::qp
