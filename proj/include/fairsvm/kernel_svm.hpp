#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairsvm/linear_svm.hpp"

namespace fairsvm {

struct Kernel {
  enum class Type { linear, rbf, polynomial };

  Type type = Type::linear;
  double gamma = 1.0;   // rbf: exp(-gamma ||x - x'||^2)
  int degree = 2;       // polynomial: (x . x' + offset)^degree
  double offset = 0.0;

  static Kernel linear() { return {}; }
  static Kernel rbf(double gamma) { return {Type::rbf, gamma, 2, 0.0}; }
  static Kernel polynomial(int degree, double offset) {
    return {Type::polynomial, 1.0, degree, offset};
  }

  /// Throws InputError unless gamma > 0, degree >= 1 and offset >= 0.
  void validate() const;
  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  std::string describe() const;
};

/// 1 / (p * median of ||x_i - x_j||^2 over i < j).
double default_rbf_gamma(const Eigen::MatrixXd& x);

/// Entry (i, j) = K(a_i, b_j).
Eigen::MatrixXd gram(const Kernel& kernel, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// score(x) = K(X, x) . (Y o alpha) + b
struct KernelModel {
  Eigen::VectorXd alpha;
  double b = 0.0;
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
  Kernel kernel;
  double lambda = 0.0;
  double d = 0.0;
  double mu = 0.0;
  int iterations = 0;
  double penalized_objective = 0.0;
  std::vector<double> objective_history;
  int num_at_upper = 0;       // alpha_i at the box bound lambda
  bool bias_fallback = false; // no strict-interior alpha; midpoint rule used
};

/// minimize (Y o alpha)^T K (Y o alpha) - sum alpha
/// subject to Y . alpha = 0, 0 <= alpha <= lambda.
KernelModel train_ksvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Kernel& kernel,
                       double lambda);

/// train_ksvm plus -d <= kernel_mean_difference . (Y o alpha) <= d.
KernelModel train_kernel_zsvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                              const Eigen::VectorXi& z, const Kernel& kernel, double lambda,
                              double d);

/// Average of y_i - K(X, x_i) . (Y o alpha) over 0 < alpha_i < lambda, where
/// "strictly inside" means at least 1e-6 * lambda away from both bounds.
/// With no such index: -(max_{y=-1} f_i + min_{y=+1} f_i) / 2.
double bias(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
            const Kernel& kernel, double lambda);
/// Same, from a precomputed K(X, X). Sets *fallback when the midpoint rule was used.
double bias_from_gram(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& gram,
                      const Eigen::VectorXi& y, double lambda, bool* fallback = nullptr);

/// Kernel-space CCP on
///   (Y o alpha)^T K (Y o alpha) - sum alpha + mu |beta^T (S_+ - S_-) beta|
/// started from train_kernel_zsvm. Same stopping and step-rejection rules
/// as train_ssvm; the bias is recomputed at the returned alpha.
KernelModel train_fair_ksvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            const Eigen::VectorXi& z, const Kernel& kernel, double lambda,
                            double d, const CcpConfig& ccp);

Eigen::VectorXd kernel_decision_values(const KernelModel& model, const Eigen::MatrixXd& x);

}  // namespace fairsvm
