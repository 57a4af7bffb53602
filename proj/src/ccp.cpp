#include "ccp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/SparseCore>

#include "fairsvm/errors.hpp"

namespace fairsvm::detail {

namespace {

qp::SparseMatrix widen(const qp::SparseMatrix& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() == 0) return qp::SparseMatrix(0, cols);
  qp::SparseMatrix out(rows, cols);
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (qp::SparseMatrix::InnerIterator it(m, k); it; ++it)
      entries.emplace_back(it.row(), it.col(), it.value());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace

void add_linearized_covariance(qp::ConvexQuadraticProgram& problem, const qp::SparseMatrix& embed,
                               const SpectralSplit& split, const Eigen::VectorXd& v_k, double mu) {
  const Eigen::Index n = problem.num_variables();
  const Eigen::Index t = n;
  problem.objective_quadratic = widen(problem.objective_quadratic, n + 1, n + 1);
  problem.objective_linear.conservativeResize(n + 1);
  problem.objective_linear(t) = mu;
  problem.eq_matrix = widen(problem.eq_matrix, problem.eq_matrix.rows(), n + 1);
  problem.ineq_matrix = widen(problem.ineq_matrix, problem.ineq_matrix.rows(), n + 1);
  if (problem.lower.size() > 0) {
    problem.lower.conservativeResize(n + 1);
    problem.lower(t) = -std::numeric_limits<double>::infinity();
  }
  if (problem.upper.size() > 0) {
    problem.upper.conservativeResize(n + 1);
    problem.upper(t) = std::numeric_limits<double>::infinity();
  }
  for (auto& qc : problem.quadratic_constraints) {
    qc.p = widen(qc.p, n + 1, n + 1);
    qc.q.conservativeResize(n + 1);
    qc.q(t) = 0.0;
  }

  const qp::SparseMatrix e = widen(embed, embed.rows(), n + 1);
  auto row = [&](const SymmetricMatrix& convex, const SymmetricMatrix& concave) {
    const Eigen::VectorXd g = concave.matrix() * v_k;
    qp::QuadraticConstraint qc;
    qc.p = qp::SparseMatrix(e.transpose() * qp::to_sparse(convex.matrix()) * e);
    qc.q = -2.0 * (e.transpose() * g);
    qc.q(t) = -1.0;
    qc.r = -v_k.dot(g);
    problem.quadratic_constraints.push_back(std::move(qc));
  };
  row(split.u_plus, split.u_minus);
  row(split.u_minus, split.u_plus);
}

std::pair<double, double> linearized_sides(const SpectralSplit& split, const Eigen::VectorXd& v,
                                           const Eigen::VectorXd& v_k) {
  const double pp = split.u_plus.quadratic_form(v), mm = split.u_minus.quadratic_form(v);
  const double kp = split.u_plus.quadratic_form(v_k), km = split.u_minus.quadratic_form(v_k);
  const double cp = v_k.dot(split.u_plus.matrix() * v), cm = v_k.dot(split.u_minus.matrix() * v);
  return {pp - 2.0 * cm + km, mm - 2.0 * cp + kp};
}

CcpTrace run_ccp(const Eigen::VectorXd& x0, const CcpConfig& config,
                 const std::function<double(const Eigen::VectorXd&)>& penalized,
                 const std::function<qp::ConvexQuadraticProgram(const Eigen::VectorXd&)>& subproblem,
                 const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& start) {
  CcpTrace trace{x0, {penalized(x0)}, 0};
  if (config.mu == 0.0) return trace;

  qp::SolverOptions options = training_options();
  for (int k = 1; k <= config.max_outer_iterations; ++k) {
    const qp::ConvexQuadraticProgram problem = subproblem(trace.x);
    options.initial_point = start(trace.x);
    qp::SolverResult r = qp::solve(problem, options);
    if (r.status != qp::Status::converged) {
      options.initial_point.reset();
      r = qp::solve(problem, options);
    }
    trace.iterations = k;
    if (r.status != qp::Status::converged) {
      throw TrainingError("CCP subproblem " + qp::to_string(r.status), k);
    }
    const Eigen::VectorXd next = r.x.head(trace.x.size());
    const double before = trace.history.back();
    const double after = penalized(next);
    if (!(after <= before)) break;
    trace.x = next;
    trace.history.push_back(after);
    if (before - after < config.objective_change_tolerance * std::max(std::abs(before), 1.0)) break;
  }
  return trace;
}

qp::SolverOptions training_options() {
  qp::SolverOptions options;
  options.verify_convexity = false;
  options.max_iter = 200;
  return options;
}

}  // namespace fairsvm::detail
