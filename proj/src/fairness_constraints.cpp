#include "fairsvm/fairness_constraints.hpp"

#include "fairsvm/errors.hpp"

namespace fairsvm {

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
  return out;
}

Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(cols[k]);
  return out;
}

void require_rows(const Eigen::MatrixXd& x, const Eigen::VectorXi& z, const char* what) {
  if (x.rows() != z.size()) {
    throw InputError(std::string(what) + ": X and z differ in row count");
  }
  if (!x.allFinite()) throw InputError(std::string(what) + ": non-finite predictor");
}

// Centered columns: (1/m) C C^T with C = A (I - ee^T/m).
Eigen::MatrixXd column_covariance(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd mean = a.rowwise().mean();
  const Eigen::MatrixXd centered = a.colwise() - mean;
  return centered * centered.transpose() / static_cast<double>(a.cols());
}

}  // namespace

GroupIndex GroupIndex::from(const Eigen::VectorXi& z) {
  GroupIndex g;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) == 1) {
      g.positive.push_back(i);
    } else if (z(i) == -1) {
      g.negative.push_back(i);
    } else {
      throw InputError("protected attribute must be +1 or -1");
    }
  }
  return g;
}

Eigen::VectorXd mean_difference(const Eigen::MatrixXd& x, const Eigen::VectorXi& z) {
  require_rows(x, z, "mean_difference");
  const GroupIndex g = GroupIndex::from(z);
  if (g.positive.empty() || g.negative.empty()) {
    throw DegenerateGroupError("mean_difference: both protected groups must be nonempty");
  }
  Eigen::VectorXd plus = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd minus = Eigen::VectorXd::Zero(x.cols());
  for (auto i : g.positive) plus += x.row(i).transpose();
  for (auto i : g.negative) minus += x.row(i).transpose();
  return plus / static_cast<double>(g.num_positive()) -
         minus / static_cast<double>(g.num_negative());
}

CovarianceGap covariance_gap(const Eigen::MatrixXd& x, const Eigen::VectorXi& z) {
  require_rows(x, z, "covariance_gap");
  const GroupIndex g = GroupIndex::from(z);
  if (g.num_positive() < 2 || g.num_negative() < 2) {
    throw DegenerateGroupError("covariance_gap: each protected group needs at least 2 rows");
  }
  SymmetricMatrix gap =
      sample_covariance(gather_rows(x, g.positive)) - sample_covariance(gather_rows(x, g.negative));
  SpectralSplit split = spectral_split(gap);
  return {std::move(gap), std::move(split)};
}

Eigen::VectorXd kernel_mean_difference(const Eigen::MatrixXd& gram, const GroupIndex& groups) {
  if (gram.rows() != gram.cols() || gram.rows() != groups.size()) {
    throw InputError("kernel_mean_difference: Gram matrix does not match the group index");
  }
  if (groups.positive.empty() || groups.negative.empty()) {
    throw DegenerateGroupError("kernel_mean_difference: both protected groups must be nonempty");
  }
  return gather_cols(gram, groups.positive).rowwise().mean() -
         gather_cols(gram, groups.negative).rowwise().mean();
}

CovarianceGap kernel_covariance_gap(const Eigen::MatrixXd& k_plus, const Eigen::MatrixXd& k_minus,
                                    const GroupIndex& groups) {
  if (k_plus.rows() != k_minus.rows() || k_plus.cols() != groups.num_positive() ||
      k_minus.cols() != groups.num_negative()) {
    throw InputError("kernel_covariance_gap: Gram blocks do not match the group sizes");
  }
  if (groups.num_positive() < 2 || groups.num_negative() < 2) {
    throw DegenerateGroupError("kernel_covariance_gap: each protected group needs at least 2 rows");
  }
  SymmetricMatrix gap(column_covariance(k_plus) - column_covariance(k_minus));
  SpectralSplit split = spectral_split(gap);
  return {std::move(gap), std::move(split)};
}

CovarianceGap kernel_covariance_gap(const Eigen::MatrixXd& gram, const GroupIndex& groups) {
  if (gram.rows() != gram.cols() || gram.rows() != groups.size()) {
    throw InputError("kernel_covariance_gap: Gram matrix does not match the group index");
  }
  return kernel_covariance_gap(gather_cols(gram, groups.positive),
                               gather_cols(gram, groups.negative), groups);
}

LinearFairnessConstraint to_alpha_space(const LinearFairnessConstraint& beta_constraint,
                                        const Eigen::VectorXi& y) {
  if (beta_constraint.direction.size() != y.size()) {
    throw InputError("to_alpha_space: length mismatch");
  }
  return {beta_constraint.direction.cwiseProduct(y.cast<double>()), beta_constraint.bound};
}

}  // namespace fairsvm
