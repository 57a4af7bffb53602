#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fairsvm/qp.hpp"

namespace fairsvm {

struct CcpConfig {
  int max_outer_iterations = 50;
  double objective_change_tolerance = 1e-6;  // relative
  double mu = 0.0;                           // covariance penalty weight

  /// Throws InputError unless tolerance > 0, iterations >= 1, mu >= 0.
  void validate() const;
};

/// score(x) = x . w + b
struct LinearModel {
  Eigen::VectorXd w;
  double b = 0.0;
  double lambda = 0.0;
  double d = 0.0;
  double mu = 0.0;
  int iterations = 0;  // CCP subproblems accepted (0 for lsvm/zsvm)
  double penalized_objective = 0.0;
  /// Penalized objective at the initial point and after each accepted
  /// CCP step.
  std::vector<double> objective_history;
};

/// sum_i u_i + lambda ||w||^2 subject to y_i (x_i . w + b) >= 1 - u_i, u >= 0.
LinearModel train_lsvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, double lambda);

/// train_lsvm plus -d <= mean_difference . w <= d.
LinearModel train_zsvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const Eigen::VectorXi& z, double lambda, double d);

/// Spectral convex-concave procedure on
///   sum u + lambda ||w||^2 + mu |w^T (Sigma_+ - Sigma_-) w|
/// with the mean-difference constraint, started from train_zsvm. Each step
/// solves the convex subproblem with both concave parts linearized at w_k
/// and slack t penalized by mu. A step that would raise the penalized
/// objective is discarded and the loop stops at w_k.
LinearModel train_ssvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const Eigen::VectorXi& z, double lambda, double d,
                       const CcpConfig& ccp);

Eigen::VectorXd decision_values(const LinearModel& model, const Eigen::MatrixXd& x);

/// sum hinge + lambda ||w||^2 + mu |w^T gap w| for the given data.
double linear_penalized_objective(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                  const Eigen::MatrixXd& gap, double lambda, double mu,
                                  const Eigen::VectorXd& w, double b);

}  // namespace fairsvm
