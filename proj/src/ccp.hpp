#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fairsvm/linalg.hpp"
#include "fairsvm/linear_svm.hpp"
#include "fairsvm/qp.hpp"

namespace fairsvm::detail {

/// Appends t as a new last variable (objective weight mu) together with
///   v^T U_+ v - 2 v_k^T U_- v + v_k^T U_- v_k <= t
///   v^T U_- v - 2 v_k^T U_+ v + v_k^T U_+ v_k <= t
/// where v = embed * x.
void add_linearized_covariance(qp::ConvexQuadraticProgram& problem, const qp::SparseMatrix& embed,
                               const SpectralSplit& split, const Eigen::VectorXd& v_k, double mu);

/// Left-hand sides of the two linearized rows at v.
std::pair<double, double> linearized_sides(const SpectralSplit& split, const Eigen::VectorXd& v,
                                           const Eigen::VectorXd& v_k);

struct CcpTrace {
  Eigen::VectorXd x;
  std::vector<double> history;
  int iterations = 0;
};

/// x holds the variables without t. `subproblem(x_k)` builds the convexified
/// program (t last) and `start(x_k)` its initial point.
CcpTrace run_ccp(const Eigen::VectorXd& x0, const CcpConfig& config,
                 const std::function<double(const Eigen::VectorXd&)>& penalized,
                 const std::function<qp::ConvexQuadraticProgram(const Eigen::VectorXd&)>& subproblem,
                 const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& start);

/// Solver settings shared by the trainers.
qp::SolverOptions training_options();

}  // namespace fairsvm::detail
