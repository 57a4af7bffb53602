#include "fairsvm/linear_svm.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/SparseCore>

#include "ccp.hpp"
#include "fairsvm/errors.hpp"
#include "fairsvm/fairness_constraints.hpp"

namespace fairsvm {

namespace {

constexpr double kZeroBoundRetry = 1e-8;

void check_training_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
  if (x.rows() != y.size()) throw InputError("X and Y differ in row count");
  if (x.rows() < 2) throw InputError("need at least two rows");
  if (x.cols() < 1) throw InputError("need at least one predictor");
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

void check_groups(const Eigen::MatrixXd& x, const Eigen::VectorXi& z, double d) {
  if (z.size() != x.rows()) throw InputError("X and z differ in row count");
  if (!(d >= 0.0)) throw InputError("d must be nonnegative");
  const GroupIndex g = GroupIndex::from(z);
  if (g.positive.empty() || g.negative.empty()) {
    throw DegenerateGroupError("both protected groups must be nonempty");
  }
}

// Variables: w (p), b, u (n).
struct Layout {
  Eigen::Index p, n;
  Eigen::Index b() const { return p; }
  Eigen::Index u(Eigen::Index i) const { return p + 1 + i; }
  Eigen::Index size() const { return p + 1 + n; }
};

qp::ConvexQuadraticProgram hinge_problem(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                         double lambda) {
  const Layout at{x.cols(), x.rows()};
  qp::ConvexQuadraticProgram prob;
  prob.objective_quadratic.resize(at.size(), at.size());
  std::vector<Eigen::Triplet<double>> q;
  for (Eigen::Index j = 0; j < at.p; ++j) q.emplace_back(j, j, 2.0 * lambda);
  prob.objective_quadratic.setFromTriplets(q.begin(), q.end());
  prob.objective_linear = Eigen::VectorXd::Zero(at.size());
  prob.objective_linear.tail(at.n).setOnes();

  std::vector<Eigen::Triplet<double>> g;
  for (Eigen::Index i = 0; i < at.n; ++i) {
    const double yi = y(i);
    for (Eigen::Index j = 0; j < at.p; ++j) {
      if (x(i, j) != 0.0) g.emplace_back(i, j, -yi * x(i, j));
    }
    g.emplace_back(i, at.b(), -yi);
    g.emplace_back(i, at.u(i), -1.0);
  }
  prob.ineq_matrix.resize(at.n, at.size());
  prob.ineq_matrix.setFromTriplets(g.begin(), g.end());
  prob.ineq_rhs = Eigen::VectorXd::Constant(at.n, -1.0);

  const double inf = std::numeric_limits<double>::infinity();
  prob.lower = Eigen::VectorXd::Constant(at.size(), -inf);
  prob.lower.tail(at.n).setZero();
  prob.upper = Eigen::VectorXd::Constant(at.size(), inf);
  return prob;
}

void append_rows(qp::SparseMatrix& m, Eigen::VectorXd& rhs, const Eigen::MatrixXd& rows,
                 const Eigen::VectorXd& values) {
  const Eigen::Index old = m.rows();
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (qp::SparseMatrix::InnerIterator it(m, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index j = 0; j < rows.cols(); ++j)
      if (rows(r, j) != 0.0) t.emplace_back(old + r, j, rows(r, j));
  const Eigen::Index cols = m.cols() > 0 ? m.cols() : rows.cols();
  m.resize(old + rows.rows(), cols);
  m.setFromTriplets(t.begin(), t.end());
  rhs.conservativeResize(old + rows.rows());
  rhs.tail(rows.rows()) = values;
}

// -d <= m . w <= d, an equality when d = 0.
void add_mean_difference(qp::ConvexQuadraticProgram& prob, const Eigen::VectorXd& m, double d) {
  Eigen::MatrixXd row = Eigen::MatrixXd::Zero(1, prob.num_variables());
  row.leftCols(m.size()) = m.transpose();
  if (d == 0.0) {
    append_rows(prob.eq_matrix, prob.eq_rhs, row, Eigen::VectorXd::Zero(1));
  } else {
    Eigen::MatrixXd rows(2, row.cols());
    rows << row, -row;
    append_rows(prob.ineq_matrix, prob.ineq_rhs, rows, Eigen::VectorXd::Constant(2, d));
  }
}

Eigen::VectorXd hinge(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Eigen::VectorXd& w,
                      double b) {
  const Eigen::ArrayXd margin = y.cast<double>().array() * ((x * w).array() + b);
  return (1.0 - margin).max(0.0);
}

LinearModel unpack(const Eigen::VectorXd& sol, Eigen::Index p, double lambda, double d) {
  LinearModel m;
  m.w = sol.head(p);
  m.b = sol(p);
  m.lambda = lambda;
  m.d = d;
  return m;
}

qp::SolverResult solve_or_throw(const qp::ConvexQuadraticProgram& prob, const char* what) {
  const qp::SolverResult r = qp::solve(prob, detail::training_options());
  if (r.status != qp::Status::converged) {
    throw TrainingError(std::string(what) + " solve " + qp::to_string(r.status), 0);
  }
  return r;
}

// Solution vector (w, b, u) of the mean-difference constrained problem.
Eigen::VectorXd solve_zsvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                           const Eigen::VectorXd& m, double lambda, double d) {
  qp::ConvexQuadraticProgram prob = hinge_problem(x, y, lambda);
  add_mean_difference(prob, m, d);
  qp::SolverResult r = qp::solve(prob, detail::training_options());
  if (r.status != qp::Status::converged && d == 0.0) {
    prob = hinge_problem(x, y, lambda);
    add_mean_difference(prob, m, kZeroBoundRetry);
    r = qp::solve(prob, detail::training_options());
  }
  if (r.status != qp::Status::converged) {
    throw TrainingError("zsvm solve " + qp::to_string(r.status), 0);
  }
  return r.x;
}

}  // namespace

void CcpConfig::validate() const {
  if (!(objective_change_tolerance > 0.0)) throw InputError("CCP tolerance must be positive");
  if (max_outer_iterations < 1) throw InputError("CCP needs at least one outer iteration");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InputError("mu must be nonnegative");
}

double linear_penalized_objective(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                  const Eigen::MatrixXd& gap, double lambda, double mu,
                                  const Eigen::VectorXd& w, double b) {
  double value = hinge(x, y, w, b).sum() + lambda * w.squaredNorm();
  if (mu != 0.0) value += mu * std::abs(w.dot(gap * w));
  return value;
}

LinearModel train_lsvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, double lambda) {
  check_training_inputs(x, y, lambda);
  const qp::SolverResult r = solve_or_throw(hinge_problem(x, y, lambda), "lsvm");
  LinearModel m = unpack(r.x, x.cols(), lambda, std::numeric_limits<double>::infinity());
  m.penalized_objective = hinge(x, y, m.w, m.b).sum() + lambda * m.w.squaredNorm();
  m.objective_history = {m.penalized_objective};
  return m;
}

LinearModel train_zsvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const Eigen::VectorXi& z, double lambda, double d) {
  check_training_inputs(x, y, lambda);
  check_groups(x, z, d);
  const Eigen::VectorXd sol = solve_zsvm(x, y, mean_difference(x, z), lambda, d);
  LinearModel m = unpack(sol, x.cols(), lambda, d);
  m.penalized_objective = hinge(x, y, m.w, m.b).sum() + lambda * m.w.squaredNorm();
  m.objective_history = {m.penalized_objective};
  return m;
}

LinearModel train_ssvm(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const Eigen::VectorXi& z, double lambda, double d,
                       const CcpConfig& ccp) {
  check_training_inputs(x, y, lambda);
  check_groups(x, z, d);
  ccp.validate();
  const Eigen::Index p = x.cols();
  const Eigen::VectorXd mdiff = mean_difference(x, z);
  const CovarianceGap cov = covariance_gap(x, z);
  const Eigen::VectorXd init = solve_zsvm(x, y, mdiff, lambda, d).head(p + 1);

  qp::SparseMatrix embed(p, p + 1 + x.rows());
  for (Eigen::Index j = 0; j < p; ++j) embed.insert(j, j) = 1.0;

  auto penalized = [&](const Eigen::VectorXd& v) {
    return linear_penalized_objective(x, y, cov.gap.matrix(), lambda, ccp.mu, v.head(p), v(p));
  };
  auto subproblem = [&](const Eigen::VectorXd& v) {
    qp::ConvexQuadraticProgram prob = hinge_problem(x, y, lambda);
    add_mean_difference(prob, mdiff, d);
    detail::add_linearized_covariance(prob, embed, cov.split, v.head(p), ccp.mu);
    return prob;
  };
  auto start = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd s(p + 1 + x.rows() + 1);
    s.head(p + 1) = v;
    s.segment(p + 1, x.rows()) = hinge(x, y, v.head(p), v(p));
    const auto [lhs1, lhs2] = detail::linearized_sides(cov.split, v.head(p), v.head(p));
    s(s.size() - 1) = std::max(lhs1, lhs2) + 1.0;
    return s;
  };
  // The CCP iterates over (w, b); the slacks u are recovered from the hinge.
  const detail::CcpTrace trace = detail::run_ccp(init, ccp, penalized, subproblem, start);

  LinearModel m = unpack(trace.x, p, lambda, d);
  m.mu = ccp.mu;
  m.iterations = trace.iterations;
  m.objective_history = trace.history;
  m.penalized_objective = trace.history.back();
  return m;
}

Eigen::VectorXd decision_values(const LinearModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.w.size()) throw InputError("decision_values: column count mismatch");
  return (x * model.w).array() + model.b;
}

}  // namespace fairsvm
