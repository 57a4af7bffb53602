#pragma once

#include <vector>

#include <Eigen/Dense>

#include "fairsvm/linalg.hpp"

namespace fairsvm {

/// Row indices of the two protected groups (z = +1 and z = -1).
struct GroupIndex {
  std::vector<Eigen::Index> positive;
  std::vector<Eigen::Index> negative;

  /// Throws InputError for entries other than +-1.
  static GroupIndex from(const Eigen::VectorXi& z);

  Eigen::Index num_positive() const { return static_cast<Eigen::Index>(positive.size()); }
  Eigen::Index num_negative() const { return static_cast<Eigen::Index>(negative.size()); }
  Eigen::Index size() const { return num_positive() + num_negative(); }
};

/// -bound <= direction . v <= bound
struct LinearFairnessConstraint {
  Eigen::VectorXd direction;
  double bound = 0.0;
};

/// gap = split.u_plus - split.u_minus
struct CovarianceGap {
  SymmetricMatrix gap;
  SpectralSplit split;
};

/// Mean of the z = +1 rows minus mean of the z = -1 rows.
/// Throws DegenerateGroupError when a group is empty.
Eigen::VectorXd mean_difference(const Eigen::MatrixXd& x, const Eigen::VectorXi& z);

/// Sigma_+ - Sigma_- with population covariances (p x p).
/// Needs at least two rows per group.
CovarianceGap covariance_gap(const Eigen::MatrixXd& x, const Eigen::VectorXi& z);

/// Kernel analogue of mean_difference, acting on beta = Y o alpha:
/// (1/#P) sum_{i in P} K(X, x_i) - (1/#N) sum_{i in N} K(X, x_i).
/// `gram` is the full n x n matrix K(X, X).
Eigen::VectorXd kernel_mean_difference(const Eigen::MatrixXd& gram, const GroupIndex& groups);

/// S_+ - S_- (n x n) acting on beta, where
///   S_+ = (1/#P) K(X,X+) (I - ee^T/#P) K(X,X+)^T
/// i.e. the covariance of the columns of K(X,X+) about their mean column.
CovarianceGap kernel_covariance_gap(const Eigen::MatrixXd& k_plus, const Eigen::MatrixXd& k_minus,
                                    const GroupIndex& groups);

/// Convenience: slices K(X,X+) and K(X,X-) out of the full Gram matrix.
CovarianceGap kernel_covariance_gap(const Eigen::MatrixXd& gram, const GroupIndex& groups);

/// beta-space direction to alpha-space: direction o y.
LinearFairnessConstraint to_alpha_space(const LinearFairnessConstraint& beta_constraint,
                                        const Eigen::VectorXi& y);

}  // namespace fairsvm
