#pragma once

#include <optional>

#include <Eigen/Dense>

namespace fairsvm {

/// Dense symmetric matrix. The upper triangle of the input is authoritative;
/// the lower triangle is overwritten on construction so storage is exactly
/// symmetric.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Eigen::MatrixXd entries);

  static SymmetricMatrix zero(Eigen::Index order);

  Eigen::Index order() const { return entries_.rows(); }
  const Eigen::MatrixXd& matrix() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

  /// xᵀ A x
  double quadratic_form(const Eigen::VectorXd& x) const;
  double max_abs() const;

 private:
  Eigen::MatrixXd entries_;
};

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b);

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues(i)
  int sweeps = 0;
};

/// The PSD pair whose difference is the input matrix.
struct SpectralSplit {
  SymmetricMatrix u_plus;
  SymmetricMatrix u_minus;
};

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps until the off-diagonal Frobenius norm falls below
/// 1e-12 * ||A||_F (at most 100 sweeps). Eigenvalues are returned in
/// descending order; each eigenvector is signed so that its
/// largest-magnitude entry is positive.
EigenDecomposition sym_eig(const SymmetricMatrix& a);

/// Default threshold below which an eigenvalue counts as zero:
/// 1e-9 times the largest eigenvalue magnitude.
double default_zero_tolerance(const EigenDecomposition& eig);

/// Splits `a` into u_plus - u_minus with both parts PSD. Eigenvalues with
/// |value| <= zero_tol go to neither part.
SpectralSplit spectral_split(const SymmetricMatrix& a,
                             std::optional<double> zero_tol = std::nullopt);
SpectralSplit spectral_split(const EigenDecomposition& eig,
                             std::optional<double> zero_tol = std::nullopt);

/// Population covariance (divide by the number of rows) of the rows of
/// `rows`, giving a p x p matrix. Throws DegenerateGroupError for fewer
/// than two rows.
SymmetricMatrix sample_covariance(const Eigen::MatrixXd& rows);

/// Smallest eigenvalue >= -tol.
bool is_psd(const SymmetricMatrix& a, double tol = 1e-8);

}  // namespace fairsvm
