#include "fairsvm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fairsvm/errors.hpp"

namespace fairsvm {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalRelTol = 1e-12;

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entry");
  }
}

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) sum += 2.0 * a(i, j) * a(i, j);
  }
  return std::sqrt(sum);
}

// Zeroes a(p,q) with a plane rotation applied from both sides and
// accumulates the rotation into v.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw InputError("SymmetricMatrix: matrix is not square");
  }
  require_finite(entries_, "SymmetricMatrix");
  entries_.triangularView<Eigen::StrictlyLower>() = entries_.transpose();
}

SymmetricMatrix SymmetricMatrix::zero(Eigen::Index order) {
  return SymmetricMatrix(Eigen::MatrixXd::Zero(order, order));
}

double SymmetricMatrix::quadratic_form(const Eigen::VectorXd& x) const {
  return x.dot(entries_ * x);
}

double SymmetricMatrix::max_abs() const {
  return entries_.size() == 0 ? 0.0 : entries_.cwiseAbs().maxCoeff();
}

SymmetricMatrix operator-(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.order() != b.order()) throw InputError("SymmetricMatrix: order mismatch");
  return SymmetricMatrix(a.matrix() - b.matrix());
}

EigenDecomposition sym_eig(const SymmetricMatrix& a) {
  const Eigen::Index n = a.order();
  if (n < 1) throw InputError("sym_eig: empty matrix");

  Eigen::MatrixXd work = a.matrix();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double threshold = kOffDiagonalRelTol * work.norm();

  int sweeps = 0;
  while (off_diagonal_norm(work) > threshold) {
    if (sweeps == kMaxSweeps) {
      throw std::runtime_error("sym_eig: Jacobi sweeps did not converge");
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(work, v, p, q);
    }
    ++sweeps;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return work(i, i) > work(j, j);
  });

  EigenDecomposition out;
  out.sweeps = sweeps;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = work(src, src);
    Eigen::VectorXd col = v.col(src);
    Eigen::Index largest = 0;
    col.cwiseAbs().maxCoeff(&largest);
    if (col(largest) < 0.0) col = -col;
    out.eigenvectors.col(k) = col;
  }
  return out;
}

double default_zero_tolerance(const EigenDecomposition& eig) {
  if (eig.eigenvalues.size() == 0) return 0.0;
  return 1e-9 * eig.eigenvalues.cwiseAbs().maxCoeff();
}

SpectralSplit spectral_split(const EigenDecomposition& eig, std::optional<double> zero_tol) {
  const double tol = zero_tol.value_or(default_zero_tolerance(eig));
  if (!(tol >= 0.0)) throw InputError("spectral_split: zero_tol must be >= 0");

  const Eigen::Index n = eig.eigenvalues.size();
  Eigen::MatrixXd plus = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd minus = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zeta = eig.eigenvalues(i);
    const auto vi = eig.eigenvectors.col(i);
    if (zeta > tol) {
      plus.noalias() += zeta * vi * vi.transpose();
    } else if (zeta < -tol) {
      minus.noalias() -= zeta * vi * vi.transpose();
    }
  }
  return SpectralSplit{SymmetricMatrix(std::move(plus)), SymmetricMatrix(std::move(minus))};
}

SpectralSplit spectral_split(const SymmetricMatrix& a, std::optional<double> zero_tol) {
  if (zero_tol && !(*zero_tol >= 0.0)) {
    throw InputError("spectral_split: zero_tol must be >= 0");
  }
  return spectral_split(sym_eig(a), zero_tol);
}

SymmetricMatrix sample_covariance(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) {
    throw DegenerateGroupError("sample_covariance: need at least 2 rows");
  }
  require_finite(rows, "sample_covariance");
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  return SymmetricMatrix((centered.transpose() * centered) / static_cast<double>(rows.rows()));
}

bool is_psd(const SymmetricMatrix& a, double tol) {
  if (a.order() == 0) return true;
  return sym_eig(a).eigenvalues.minCoeff() >= -tol;
}

}  // namespace fairsvm
