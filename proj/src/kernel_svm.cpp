#include "fairsvm/kernel_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ccp.hpp"
#include "fairsvm/errors.hpp"
#include "fairsvm/fairness_constraints.hpp"

namespace fairsvm {

namespace {

constexpr double kInteriorMargin = 1e-6;
constexpr double kZeroBoundRetry = 1e-8;

double int_power(double base, int degree) {
  double out = 1.0;
  for (int k = 0; k < degree; ++k) out *= base;
  return out;
}

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Kernel& kernel,
                  double lambda) {
  kernel.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
  if (x.rows() != y.size()) throw InputError("X and Y differ in row count");
  if (x.rows() < 2) throw InputError("need at least two rows");
  if (!x.allFinite()) throw InputError("non-finite predictor");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 1) {
      pos = true;
    } else if (y(i) == -1) {
      neg = true;
    } else {
      throw InputError("labels must be +1 or -1");
    }
  }
  if (!pos || !neg) throw DegenerateLabelError("both labels must be present");
}

GroupIndex check_groups(const Eigen::MatrixXd& x, const Eigen::VectorXi& z, double d) {
  if (z.size() != x.rows()) throw InputError("X and z differ in row count");
  if (!(d >= 0.0)) throw InputError("d must be nonnegative");
  GroupIndex g = GroupIndex::from(z);
  if (g.positive.empty() || g.negative.empty()) {
    throw DegenerateGroupError("both protected groups must be nonempty");
  }
  return g;
}

// Dual over alpha: Q = 2 Y K Y, c = -1, y . alpha = 0, 0 <= alpha <= lambda.
qp::ConvexQuadraticProgram dual_problem(const Eigen::MatrixXd& k, const Eigen::VectorXi& y,
                                        double lambda) {
  const Eigen::Index n = y.size();
  const Eigen::VectorXd yd = y.cast<double>();
  qp::ConvexQuadraticProgram prob;
  prob.objective_quadratic = qp::to_sparse(2.0 * yd.asDiagonal() * k * yd.asDiagonal());
  prob.objective_linear = Eigen::VectorXd::Constant(n, -1.0);
  prob.eq_matrix = qp::to_sparse(yd.transpose());
  prob.eq_rhs = Eigen::VectorXd::Zero(1);
  prob.lower = Eigen::VectorXd::Zero(n);
  prob.upper = Eigen::VectorXd::Constant(n, lambda);
  return prob;
}

void add_mean_difference(qp::ConvexQuadraticProgram& prob, const Eigen::VectorXd& direction,
                         double d) {
  const Eigen::Index n = prob.num_variables();
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
  row.head(direction.size()) = direction.transpose();
  if (d == 0.0) {
    Eigen::MatrixXd eq(2, n);
    eq << Eigen::MatrixXd(prob.eq_matrix), row;
    prob.eq_matrix = qp::to_sparse(eq);
    prob.eq_rhs = Eigen::VectorXd::Zero(2);
  } else {
    Eigen::MatrixXd in(2, n);
    in << row, -row;
    prob.ineq_matrix = qp::to_sparse(in);
    prob.ineq_rhs = Eigen::VectorXd::Constant(2, d);
  }
}

Eigen::VectorXd solve_dual(const Eigen::MatrixXd& k, const Eigen::VectorXi& y, double lambda,
                           const Eigen::VectorXd* direction, double d) {
  auto build = [&](double bound) {
    qp::ConvexQuadraticProgram prob = dual_problem(k, y, lambda);
    if (direction) add_mean_difference(prob, *direction, bound);
    return prob;
  };
  qp::SolverResult r = qp::solve(build(d), detail::training_options());
  if (r.status != qp::Status::converged && direction && d == 0.0) {
    r = qp::solve(build(kZeroBoundRetry), detail::training_options());
  }
  if (r.status != qp::Status::converged) {
    throw TrainingError("kernel dual solve " + qp::to_string(r.status), 0);
  }
  return r.x.cwiseMax(0.0).cwiseMin(lambda);
}

double dual_objective(const Eigen::MatrixXd& k, const Eigen::VectorXi& y,
                      const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd beta = alpha.cwiseProduct(y.cast<double>());
  return beta.dot(k * beta) - alpha.sum();
}

KernelModel finish(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Kernel& kernel,
                   const Eigen::MatrixXd& k, const Eigen::VectorXd& alpha, double lambda,
                   double d) {
  KernelModel m;
  m.alpha = alpha;
  m.b = bias_from_gram(alpha, k, y, lambda, &m.bias_fallback);
  m.x = x;
  m.y = y;
  m.kernel = kernel;
  m.lambda = lambda;
  m.d = d;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha(i) >= lambda * (1.0 - kInteriorMargin)) ++m.num_at_upper;
  }
  return m;
}

}  // namespace

void Kernel::validate() const {
  switch (type) {
    case Type::linear:
      return;
    case Type::rbf:
      if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("rbf gamma must be positive");
      return;
    case Type::polynomial:
      if (degree < 1) throw InputError("polynomial degree must be at least 1");
      if (!(offset >= 0.0) || !std::isfinite(offset)) {
        throw InputError("polynomial offset must be nonnegative");
      }
      return;
  }
}

double Kernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  switch (type) {
    case Type::linear:
      return a.dot(b);
    case Type::rbf:
      return std::exp(-gamma * (a - b).squaredNorm());
    case Type::polynomial:
      return int_power(a.dot(b) + offset, degree);
  }
  return 0.0;
}

std::string Kernel::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (type) {
    case Type::linear:
      out << "linear";
      break;
    case Type::rbf:
      out << "rbf " << gamma;
      break;
    case Type::polynomial:
      out << "poly " << degree << ' ' << offset;
      break;
  }
  return out.str();
}

double default_rbf_gamma(const Eigen::MatrixXd& x) {
  if (x.rows() < 2 || x.cols() < 1) throw InputError("default_rbf_gamma: need two rows");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(x.rows() * (x.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) dist.push_back((x.row(i) - x.row(j)).squaredNorm());
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  double median = *mid;
  if (dist.size() % 2 == 0) median = 0.5 * (median + *std::max_element(dist.begin(), mid));
  if (!(median > 0.0)) throw InputError("default_rbf_gamma: all rows coincide");
  return 1.0 / (static_cast<double>(x.cols()) * median);
}

Eigen::MatrixXd gram(const Kernel& kernel, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  kernel.validate();
  if (a.cols() != b.cols()) throw InputError("gram: column counts differ");
  Eigen::MatrixXd out(a.rows(), b.rows());
  switch (kernel.type) {
    case Kernel::Type::linear:
      out.noalias() = a * b.transpose();
      break;
    case Kernel::Type::polynomial:
      out.noalias() = a * b.transpose();
      out = out.unaryExpr([&](double v) { return int_power(v + kernel.offset, kernel.degree); });
      break;
    case Kernel::Type::rbf:
      for (Eigen::Index j = 0; j < b.rows(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
          out(i, j) = std::exp(-kernel.gamma * (a.row(i) - b.row(j)).squaredNorm());
      break;
  }
  return out;
}

double bias_from_gram(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& gram,
                      const Eigen::VectorXi& y, double lambda, bool* fallback) {
  const Eigen::VectorXd f = gram * alpha.cwiseProduct(y.cast<double>());
  const double lo = kInteriorMargin * lambda, hi = lambda - kInteriorMargin * lambda;
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha(i) > lo && alpha(i) < hi) sum += y(i) - f(i), ++count;
  }
  if (fallback) *fallback = count == 0;
  if (count > 0) return sum / count;
  double max_neg = -std::numeric_limits<double>::infinity();
  double min_pos = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (y(i) == -1) max_neg = std::max(max_neg, f(i));
    else min_pos = std::min(min_pos, f(i));
  }
  return -(max_neg + min_pos) / 2.0;
}

double bias(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
            const Kernel& kernel, double lambda) {
  if (alpha.size() != x.rows() || y.size() != x.rows()) throw InputError("bias: length mismatch");
  return bias_from_gram(alpha, gram(kernel, x, x), y, lambda);
}

KernelModel train_ksvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Kernel& kernel,
                       double lambda) {
  check_inputs(x, y, kernel, lambda);
  const Eigen::MatrixXd k = gram(kernel, x, x);
  KernelModel m = finish(x, y, kernel, k, solve_dual(k, y, lambda, nullptr, 0.0), lambda,
                         std::numeric_limits<double>::infinity());
  m.penalized_objective = dual_objective(k, y, m.alpha);
  m.objective_history = {m.penalized_objective};
  return m;
}

KernelModel train_kernel_zsvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                              const Eigen::VectorXi& z, const Kernel& kernel, double lambda,
                              double d) {
  check_inputs(x, y, kernel, lambda);
  const GroupIndex groups = check_groups(x, z, d);
  const Eigen::MatrixXd k = gram(kernel, x, x);
  const Eigen::VectorXd direction =
      kernel_mean_difference(k, groups).cwiseProduct(y.cast<double>());
  KernelModel m = finish(x, y, kernel, k, solve_dual(k, y, lambda, &direction, d), lambda, d);
  m.penalized_objective = dual_objective(k, y, m.alpha);
  m.objective_history = {m.penalized_objective};
  return m;
}

KernelModel train_fair_ksvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                            const Eigen::VectorXi& z, const Kernel& kernel, double lambda,
                            double d, const CcpConfig& ccp) {
  check_inputs(x, y, kernel, lambda);
  const GroupIndex groups = check_groups(x, z, d);
  ccp.validate();
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd yd = y.cast<double>();
  const Eigen::MatrixXd k = gram(kernel, x, x);
  const Eigen::VectorXd direction = kernel_mean_difference(k, groups).cwiseProduct(yd);
  const CovarianceGap cov = kernel_covariance_gap(k, groups);
  const Eigen::VectorXd init = solve_dual(k, y, lambda, &direction, d);

  qp::SparseMatrix embed(n, n);
  for (Eigen::Index i = 0; i < n; ++i) embed.insert(i, i) = yd(i);

  auto penalized = [&](const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd beta = alpha.cwiseProduct(yd);
    return dual_objective(k, y, alpha) + ccp.mu * std::abs(cov.gap.quadratic_form(beta));
  };
  auto subproblem = [&](const Eigen::VectorXd& alpha) {
    qp::ConvexQuadraticProgram prob = dual_problem(k, y, lambda);
    add_mean_difference(prob, direction, d);
    detail::add_linearized_covariance(prob, embed, cov.split, alpha.cwiseProduct(yd), ccp.mu);
    return prob;
  };
  auto start = [&](const Eigen::VectorXd& alpha) {
    Eigen::VectorXd s(n + 1);
    s.head(n) = alpha;
    const Eigen::VectorXd beta = alpha.cwiseProduct(yd);
    const auto [lhs1, lhs2] = detail::linearized_sides(cov.split, beta, beta);
    s(n) = std::max(lhs1, lhs2) + 1.0;
    return s;
  };
  auto clamp = [&](const Eigen::VectorXd& alpha) {
    return Eigen::VectorXd(alpha.cwiseMax(0.0).cwiseMin(lambda));
  };
  const detail::CcpTrace trace = detail::run_ccp(
      init, ccp, [&](const Eigen::VectorXd& a) { return penalized(clamp(a)); }, subproblem, start);

  KernelModel m = finish(x, y, kernel, k, clamp(trace.x), lambda, d);
  m.mu = ccp.mu;
  m.iterations = trace.iterations;
  m.objective_history = trace.history;
  m.penalized_objective = trace.history.back();
  return m;
}

Eigen::VectorXd kernel_decision_values(const KernelModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.x.cols()) throw InputError("kernel_decision_values: column count mismatch");
  const Eigen::VectorXd beta = model.alpha.cwiseProduct(model.y.cast<double>());
  return (gram(model.kernel, x, model.x) * beta).array() + model.b;
}

}  // namespace fairsvm
