#include "fairsvm/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/SparseCholesky>

#include "fairsvm/errors.hpp"
#include "fairsvm/linalg.hpp"

namespace fairsvm::qp {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

constexpr double kRegularization = 1e-10;
constexpr double kStepFraction = 0.995;
constexpr int kMaxBacktracks = 40;
constexpr double kDivergence = 1e12;
// Dense factorization once the Newton matrix is this full.
constexpr double kDenseFillRatio = 0.2;
constexpr Index kMaxSpectralCheckOrder = 400;
constexpr int kPolishIterations = 12;
constexpr int kRefinementSteps = 3;
// Residual norms below this fraction of the tolerances count as zero in
// the merit function.
constexpr double kMeritFloor = 1e-2;
constexpr double kGapGuard = 1e-2;
constexpr double kCurvatureGuard = 0.25;
constexpr double kShortStep = 1e-2;
constexpr double kPolishGap = 1e-14;

const double kInf = std::numeric_limits<double>::infinity();

// All inequalities written as g(x) <= 0: linear rows (including finite
// bounds) followed by the quadratic constraints.
struct Inequalities {
  SparseMatrix linear;  // G
  VectorXd linear_rhs;  // h
  const std::vector<QuadraticConstraint>* quadratic = nullptr;

  Index num_linear() const { return linear.rows(); }
  Index size() const { return num_linear() + static_cast<Index>(quadratic->size()); }

  VectorXd values(const VectorXd& x) const {
    VectorXd g(size());
    if (num_linear() > 0) g.head(num_linear()) = linear * x - linear_rhs;
    for (std::size_t k = 0; k < quadratic->size(); ++k) {
      const auto& qc = (*quadratic)[k];
      g(num_linear() + static_cast<Index>(k)) = x.dot(qc.p * x) + qc.q.dot(x) - qc.r;
    }
    return g;
  }

  std::vector<VectorXd> quadratic_gradients(const VectorXd& x) const {
    std::vector<VectorXd> grads;
    grads.reserve(quadratic->size());
    for (const auto& qc : *quadratic) grads.push_back(2.0 * (qc.p * x) + qc.q);
    return grads;
  }

  // J v
  VectorXd jacobian_times(const std::vector<VectorXd>& grads, const VectorXd& v) const {
    VectorXd out(size());
    if (num_linear() > 0) out.head(num_linear()) = linear * v;
    for (std::size_t k = 0; k < grads.size(); ++k) {
      out(num_linear() + static_cast<Index>(k)) = grads[k].dot(v);
    }
    return out;
  }

  // J^T w
  VectorXd jacobian_transpose_times(const std::vector<VectorXd>& grads, const VectorXd& w,
                                    Index n) const {
    VectorXd out = VectorXd::Zero(n);
    if (num_linear() > 0) out = linear.transpose() * w.head(num_linear());
    for (std::size_t k = 0; k < grads.size(); ++k) {
      out += w(num_linear() + static_cast<Index>(k)) * grads[k];
    }
    return out;
  }
};

Inequalities collect_inequalities(const ConvexQuadraticProgram& prob) {
  const Index n = prob.num_variables();
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  Index row = 0;

  const SparseMatrix& a = prob.ineq_matrix;
  for (Index k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      triplets.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index i = 0; i < prob.ineq_rhs.size(); ++i) rhs.push_back(prob.ineq_rhs(i));
  row = prob.ineq_rhs.size();

  if (prob.lower.size() == n) {
    for (Index j = 0; j < n; ++j) {
      if (std::isfinite(prob.lower(j))) {
        triplets.emplace_back(row++, j, -1.0);
        rhs.push_back(-prob.lower(j));
      }
    }
  }
  if (prob.upper.size() == n) {
    for (Index j = 0; j < n; ++j) {
      if (std::isfinite(prob.upper(j))) {
        triplets.emplace_back(row++, j, 1.0);
        rhs.push_back(prob.upper(j));
      }
    }
  }

  Inequalities ineq;
  ineq.linear.resize(row, n);
  ineq.linear.setFromTriplets(triplets.begin(), triplets.end());
  ineq.linear_rhs = Eigen::Map<VectorXd>(rhs.data(), static_cast<Index>(rhs.size()));
  ineq.quadratic = &prob.quadratic_constraints;
  return ineq;
}

void check_dimensions(const ConvexQuadraticProgram& prob) {
  const Index n = prob.num_variables();
  if (n == 0) throw InputError("qp: problem has no variables");
  auto fail = [](const std::string& what) { throw InputError("qp: " + what); };
  if (prob.objective_quadratic.size() != 0 &&
      (prob.objective_quadratic.rows() != n || prob.objective_quadratic.cols() != n)) {
    fail("objective quadratic term has wrong dimensions");
  }
  if (prob.eq_matrix.rows() != prob.eq_rhs.size() ||
      (prob.eq_matrix.rows() > 0 && prob.eq_matrix.cols() != n)) {
    fail("equality constraints have inconsistent dimensions");
  }
  if (prob.ineq_matrix.rows() != prob.ineq_rhs.size() ||
      (prob.ineq_matrix.rows() > 0 && prob.ineq_matrix.cols() != n)) {
    fail("inequality constraints have inconsistent dimensions");
  }
  if (prob.lower.size() != 0 && prob.lower.size() != n) fail("lower bound length mismatch");
  if (prob.upper.size() != 0 && prob.upper.size() != n) fail("upper bound length mismatch");
  for (const auto& qc : prob.quadratic_constraints) {
    if (qc.p.rows() != n || qc.p.cols() != n || qc.q.size() != n) {
      fail("quadratic constraint has wrong dimensions");
    }
  }
  if (!prob.objective_linear.allFinite() || !prob.eq_rhs.allFinite() ||
      !prob.ineq_rhs.allFinite()) {
    fail("non-finite problem data");
  }
  if (prob.lower.size() == n && prob.upper.size() == n) {
    for (Index j = 0; j < n; ++j) {
      if (std::isnan(prob.lower(j)) || std::isnan(prob.upper(j))) fail("NaN bound");
    }
  }
}

// PSD check on the principal submatrix of rows/columns that carry entries.
void require_psd(const SparseMatrix& m, const char* what) {
  if (m.nonZeros() == 0) return;
  std::vector<Index> active;
  std::vector<Index> position(static_cast<std::size_t>(m.rows()), -1);
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      for (Index idx : {it.row(), it.col()}) {
        auto& slot = position[static_cast<std::size_t>(idx)];
        if (slot < 0) {
          slot = static_cast<Index>(active.size());
          active.push_back(idx);
        }
      }
    }
  }
  const Index order = static_cast<Index>(active.size());
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(order, order);
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      block(position[static_cast<std::size_t>(it.row())],
            position[static_cast<std::size_t>(it.col())]) = it.value();
    }
  }
  if (!block.allFinite()) throw InputError(std::string("qp: non-finite ") + what);
  const double scale = std::max(1.0, block.cwiseAbs().maxCoeff());
  if ((block - block.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InputError(std::string("qp: ") + what + " is not symmetric");
  }
  double negative_part = 0.0;
  if (order <= kMaxSpectralCheckOrder) {
    negative_part = spectral_split(SymmetricMatrix(block)).u_minus.max_abs();
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(block);
    negative_part = std::max(0.0, -ldlt.vectorD().minCoeff());
  }
  if (negative_part > 1e-8 * scale) {
    throw InputError(std::string("qp: ") + what + " is not positive semidefinite");
  }
}

// Factorization of the reduced Newton matrix M, dense or sparse.
class NewtonSolver {
 public:
  // Factors m + shift*I; solves are refined against m itself.
  bool factor(const SparseMatrix& m, double shift) {
    matrix_ = &m;
    SparseMatrix identity(m.rows(), m.cols());
    identity.setIdentity();
    const SparseMatrix shifted = m + shift * identity;
    const double n = static_cast<double>(m.rows());
    dense_ = static_cast<double>(m.nonZeros()) > kDenseFillRatio * n * n;
    if (dense_) {
      dense_ldlt_.compute(Eigen::MatrixXd(shifted));
      return dense_ldlt_.info() == Eigen::Success;
    }
    sparse_ldlt_.compute(shifted);
    return sparse_ldlt_.info() == Eigen::Success;
  }

  VectorXd solve(const VectorXd& rhs) const {
    VectorXd x = raw_solve(rhs);
    for (int k = 0; k < kRefinementSteps; ++k) {
      const VectorXd residual = rhs - (*matrix_) * x;
      x += raw_solve(residual);
    }
    return x;
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    Eigen::MatrixXd out(rhs.rows(), rhs.cols());
    for (Index j = 0; j < rhs.cols(); ++j) out.col(j) = solve(VectorXd(rhs.col(j)));
    return out;
  }

 private:
  VectorXd raw_solve(const VectorXd& rhs) const {
    return dense_ ? VectorXd(dense_ldlt_.solve(rhs)) : VectorXd(sparse_ldlt_.solve(rhs));
  }

  const SparseMatrix* matrix_ = nullptr;
  bool dense_ = false;
  Eigen::LDLT<Eigen::MatrixXd> dense_ldlt_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> sparse_ldlt_;
};

struct Iterate {
  VectorXd x, y, z, s;
};

struct Residuals {
  VectorXd dual;  // r_d
  VectorXd eq;    // r_eq
  VectorXd ineq;  // r_in = g + s
  VectorXd g;
  std::vector<VectorXd> grads;

  // Residual norm (floored at the solver's noise level) plus s^T z. Newton
  // directions with centering below one are descent directions.
  double norm() const {
    return std::sqrt(dual.squaredNorm() + eq.squaredNorm() + ineq.squaredNorm());
  }
  double merit(const Iterate& it, double floor) const {
    return std::max(norm(), floor) + it.s.dot(it.z);
  }
};

struct Direction {
  VectorXd dx, dy, dz, ds;
};

class InteriorPoint {
 public:
  InteriorPoint(const ConvexQuadraticProgram& prob, const SolverOptions& opts)
      : prob_(prob), opts_(opts), ineq_(collect_inequalities(prob)) {
    n_ = prob.num_variables();
    q_ = prob.objective_quadratic.size() == 0 ? SparseMatrix(n_, n_) : prob.objective_quadratic;
    c_scale_ = std::max(1.0, prob.objective_linear.lpNorm<Eigen::Infinity>());
    merit_floor_ = kMeritFloor * std::min(opts.feas_tol, opts.kkt_tol);
  }

  SolverResult run() {
    SolverResult result;
    Iterate it = initial_iterate();
    Residuals res = residuals(it);
    double merit = res.merit(it, merit_floor_);
    result.merit_history.push_back(merit);
    if (m() > 0 && res.norm() > merit_floor_) gap_per_residual_ = it.s.dot(it.z) / res.norm();

    // Once the tolerances hold, a few extra iterations drive complementarity
    // toward machine precision; the last iterate meeting the tolerances is
    // returned.
    std::optional<Iterate> accepted;
    SolverResult accepted_measures;
    int polish_left = kPolishIterations;

    int iter = 0;
    for (;; ++iter) {
      fill_measures(it, res, result);
      if (is_converged(result)) {
        accepted = it;
        accepted_measures = result;
        accepted_measures.iterations = iter;
        if (polish_left-- == 0 || polished(result)) break;
      } else if (accepted) {
        break;
      }
      if (iter >= opts_.max_iter) break;
      if (diverging(it)) break;

      std::optional<Iterate> next = step(it, res, merit);
      if (!next) break;
      it = std::move(*next);
      res = residuals(it);
      merit = res.merit(it, merit_floor_);
      result.merit_history.push_back(merit);
    }
    if (accepted) {
      std::vector<double> history = std::move(result.merit_history);
      history.resize(static_cast<std::size_t>(accepted_measures.iterations) + 1);
      result = std::move(accepted_measures);
      result.merit_history = std::move(history);
      result.status = Status::converged;
      it = std::move(*accepted);
    } else {
      result.iterations = iter;
    }
    result.x = it.x;
    result.eq_multipliers = it.y;
    result.ineq_multipliers = it.z;
    return result;
  }

 private:
  Index m() const { return ineq_.size(); }

  Iterate initial_iterate() const {
    Iterate it;
    it.x = opts_.initial_point ? *opts_.initial_point : VectorXd::Zero(n_);
    if (it.x.size() != n_) throw InputError("qp: initial point has wrong length");
    it.y = VectorXd::Zero(prob_.eq_rhs.size());
    const VectorXd g = ineq_.values(it.x);
    it.s = (-g).cwiseMax(1.0);
    it.z = VectorXd::Ones(m());
    return it;
  }

  Residuals residuals(const Iterate& it) const {
    Residuals r;
    r.g = ineq_.values(it.x);
    r.grads = ineq_.quadratic_gradients(it.x);
    r.dual = q_ * it.x + prob_.objective_linear +
             ineq_.jacobian_transpose_times(r.grads, it.z, n_);
    if (prob_.eq_rhs.size() > 0) r.dual += prob_.eq_matrix.transpose() * it.y;
    r.eq = prob_.eq_rhs.size() > 0 ? VectorXd(prob_.eq_matrix * it.x - prob_.eq_rhs)
                                   : VectorXd();
    r.ineq = r.g + it.s;
    return r;
  }

  void fill_measures(const Iterate& it, const Residuals& r, SolverResult& out) const {
    double feas = 0.0;
    if (r.eq.size() > 0) feas = r.eq.lpNorm<Eigen::Infinity>();
    if (m() > 0) feas = std::max(feas, r.g.maxCoeff());
    out.feasibility_residual = std::max(feas, 0.0);
    out.stationarity = r.dual.lpNorm<Eigen::Infinity>() / c_scale_;
    double comp = 0.0;
    for (Index j = 0; j < m(); ++j) comp = std::max(comp, it.z(j) * std::max(-r.g(j), 0.0));
    out.complementarity = comp;
    out.duality_gap = m() > 0 ? it.s.dot(it.z) : 0.0;
    out.kkt_residual = std::max(out.stationarity, out.complementarity);
    out.objective = prob_.objective(it.x);
  }

  bool is_converged(const SolverResult& r) const {
    return r.feasibility_residual <= opts_.feas_tol && r.kkt_residual <= opts_.kkt_tol &&
           r.duality_gap <= opts_.kkt_tol * (1.0 + std::abs(r.objective));
  }

  bool polished(const SolverResult& r) const {
    return r.duality_gap <= kPolishGap * (1.0 + std::abs(r.objective));
  }

  bool diverging(const Iterate& it) const {
    return !it.x.allFinite() || it.x.lpNorm<Eigen::Infinity>() > kDivergence ||
           (m() > 0 && it.z.maxCoeff() > kDivergence * c_scale_);
  }

  SparseMatrix newton_matrix(const Iterate& it, const Residuals& r) const {
    SparseMatrix mat = q_;
    const Index ml = ineq_.num_linear();
    if (ml > 0) {
      const VectorXd d = it.z.head(ml).cwiseQuotient(it.s.head(ml));
      SparseMatrix gd = ineq_.linear.transpose() * d.asDiagonal();
      mat += SparseMatrix(gd * ineq_.linear);
    }
    for (std::size_t k = 0; k < r.grads.size(); ++k) {
      const Index row = ml + static_cast<Index>(k);
      const auto& qc = (*ineq_.quadratic)[k];
      mat += (2.0 * it.z(row)) * qc.p;
      const Eigen::SparseVector<double> a = r.grads[k].sparseView();
      SparseMatrix outer = SparseMatrix(a) * SparseMatrix(a.transpose());
      mat += (it.z(row) / it.s(row)) * outer;
    }
    mat.makeCompressed();
    return mat;
  }

  // Solves the Newton system for a given complementarity target r_c.
  // `curvature` adds second-order terms of the quadratic rows to r_in.
  Direction direction(const Iterate& it, const Residuals& r, const VectorXd& rc,
                      const NewtonSolver& solver, const Eigen::MatrixXd& eq_solved,
                      const Eigen::LDLT<Eigen::MatrixXd>& schur,
                      const VectorXd& curvature = VectorXd()) const {
    const VectorXd r_in = curvature.size() > 0 ? VectorXd(r.ineq + curvature) : r.ineq;
    const VectorXd w = (-rc + it.z.cwiseProduct(r_in)).cwiseQuotient(it.s);
    const VectorXd rho = -r.dual - ineq_.jacobian_transpose_times(r.grads, w, n_);
    Direction d;
    const VectorXd u = solver.solve(rho);
    if (prob_.eq_rhs.size() > 0) {
      d.dy = schur.solve(prob_.eq_matrix * u + r.eq);
      d.dx = u - eq_solved * d.dy;
    } else {
      d.dy = VectorXd();
      d.dx = u;
    }
    const VectorXd jdx = ineq_.jacobian_times(r.grads, d.dx);
    d.ds = -r_in - jdx;
    d.dz = w + it.z.cwiseQuotient(it.s).cwiseProduct(jdx);
    return d;
  }

  VectorXd quadratic_curvature(const VectorXd& dx) const {
    VectorXd out = VectorXd::Zero(m());
    const Index ml = ineq_.num_linear();
    for (std::size_t k = 0; k < ineq_.quadratic->size(); ++k) {
      out(ml + static_cast<Index>(k)) = dx.dot((*ineq_.quadratic)[k].p * dx);
    }
    return out;
  }

  static double max_step(const VectorXd& v, const VectorXd& dv) {
    double alpha = 1.0;
    for (Index j = 0; j < v.size(); ++j) {
      if (dv(j) < 0.0) alpha = std::min(alpha, -v(j) / dv(j));
    }
    return alpha;
  }

  Iterate advance(const Iterate& it, const Direction& d, double alpha) const {
    Iterate next;
    next.x = it.x + alpha * d.dx;
    next.y = it.y.size() > 0 ? VectorXd(it.y + alpha * d.dy) : it.y;
    next.z = it.z + alpha * d.dz;
    next.s = it.s + alpha * d.ds;
    return next;
  }

  // The gap may not fall far below the infeasibility it started next to.
  bool in_neighborhood(const Iterate& it, const Residuals& r) const {
    const double res = r.norm();
    if (res <= merit_floor_) return true;
    return it.s.dot(it.z) >= kGapGuard * gap_per_residual_ * res;
  }

  // On quadratic rows, the error of the linear model over the step must stay
  // small next to the slack.
  bool curvature_acceptable(const Residuals& r, double alpha, const Iterate& next,
                            const Residuals& nr) const {
    const Index ml = ineq_.num_linear();
    for (Index j = ml; j < m(); ++j) {
      const double old_r = r.ineq(j);
      const double err = std::abs(nr.ineq(j) - (1.0 - alpha) * old_r);
      if (err > kCurvatureGuard * std::max(next.s(j), std::abs(old_r))) return false;
    }
    return true;
  }

  struct Step {
    Iterate next;
    double alpha = 0.0;
  };

  std::optional<Step> line_search(const Iterate& it, const Residuals& r, const Direction& d,
                                  double merit) const {
    const double first = std::min(1.0, kStepFraction * std::min(max_step(it.s, d.ds),
                                                                max_step(it.z, d.dz)));
    double alpha = first;
    for (int k = 0; k < kMaxBacktracks && alpha > 0.0; ++k, alpha *= 0.5) {
      Iterate next = advance(it, d, alpha);
      if (!next.x.allFinite()) continue;
      const Residuals nr = residuals(next);
      if (!in_neighborhood(next, nr)) continue;
      if (!curvature_acceptable(r, alpha, next, nr)) continue;
      if (nr.merit(next, merit_floor_) < merit) return Step{std::move(next), alpha};
    }
    return std::nullopt;
  }

  std::optional<Iterate> step(const Iterate& it, const Residuals& r, double merit) const {
    const SparseMatrix mat = newton_matrix(it, r);
    NewtonSolver solver;
    if (!solver.factor(mat, kRegularization)) return std::nullopt;

    Eigen::MatrixXd eq_solved;
    Eigen::LDLT<Eigen::MatrixXd> schur;
    if (prob_.eq_rhs.size() > 0) {
      eq_solved = solver.solve(Eigen::MatrixXd(prob_.eq_matrix.transpose()));
      Eigen::MatrixXd s = prob_.eq_matrix * eq_solved;
      s.diagonal().array() += kRegularization;
      schur.compute(s);
    }

    if (m() == 0) {
      Direction d = direction(it, r, VectorXd(), solver, eq_solved, schur);
      d.dz = VectorXd();
      d.ds = VectorXd();
      Iterate next = advance(it, d, 1.0);
      return next;
    }

    const double mu = it.s.dot(it.z) / static_cast<double>(m());
    const VectorXd sz = it.s.cwiseProduct(it.z);

    // Predictor.
    const Direction aff = direction(it, r, sz, solver, eq_solved, schur);
    const double alpha_aff = std::min(max_step(it.s, aff.ds), max_step(it.z, aff.dz));
    const double mu_aff = (it.s + alpha_aff * aff.ds).dot(it.z + alpha_aff * aff.dz) /
                          static_cast<double>(m());
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector.
    const VectorXd rc = sz + aff.ds.cwiseProduct(aff.dz) - VectorXd::Constant(m(), sigma * mu);
    const Direction combined =
        direction(it, r, rc, solver, eq_solved, schur, quadratic_curvature(alpha_aff * aff.dx));
    std::optional<Step> best = line_search(it, r, combined, merit);

    // Plain centered Newton directions, tried when the combined step is
    // rejected or short; the longest accepted step wins.
    for (double centering : {0.1, 0.5, 0.9}) {
      if (best && best->alpha >= kShortStep) break;
      const VectorXd rc_safe = sz - VectorXd::Constant(m(), std::max(sigma, centering) * mu);
      const Direction centered = direction(it, r, rc_safe, solver, eq_solved, schur);
      std::optional<Step> trial = line_search(it, r, centered, merit);
      if (trial && (!best || trial->alpha > best->alpha)) best = std::move(trial);
    }
    if (!best) return std::nullopt;
    return std::move(best->next);
  }

  const ConvexQuadraticProgram& prob_;
  const SolverOptions& opts_;
  Inequalities ineq_;
  SparseMatrix q_;
  Index n_ = 0;
  double c_scale_ = 1.0;
  double merit_floor_ = 0.0;
  double gap_per_residual_ = 0.0;
};

// min tau  s.t. every inequality relaxed by tau, |A_eq x - b_eq| <= tau,
// tau >= -1. Its optimum is <= 0 exactly when the original problem is
// feasible.
double phase_one_optimum(const ConvexQuadraticProgram& prob, const SolverOptions& opts) {
  const Index n = prob.num_variables();
  const Index tau = n;
  const Inequalities ineq = collect_inequalities(prob);

  ConvexQuadraticProgram p1;
  p1.objective_linear = VectorXd::Zero(n + 1);
  p1.objective_linear(tau) = 1.0;
  p1.objective_quadratic.resize(n + 1, n + 1);

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  Index row = 0;
  const SparseMatrix& g = ineq.linear;
  for (Index k = 0; k < g.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(g, k); it; ++it) {
      triplets.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index i = 0; i < g.rows(); ++i) {
    triplets.emplace_back(i, tau, -1.0);
    rhs.push_back(ineq.linear_rhs(i));
  }
  row = g.rows();
  const SparseMatrix& a = prob.eq_matrix;
  for (int sign : {1, -1}) {
    for (Index k = 0; k < a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        triplets.emplace_back(row + it.row(), it.col(), sign * it.value());
      }
    }
    for (Index i = 0; i < a.rows(); ++i) {
      triplets.emplace_back(row + i, tau, -1.0);
      rhs.push_back(sign * prob.eq_rhs(i));
    }
    row += a.rows();
  }
  p1.ineq_matrix.resize(row, n + 1);
  p1.ineq_matrix.setFromTriplets(triplets.begin(), triplets.end());
  p1.ineq_rhs = Eigen::Map<VectorXd>(rhs.data(), static_cast<Index>(rhs.size()));

  for (const auto& qc : prob.quadratic_constraints) {
    QuadraticConstraint relaxed;
    relaxed.p = qc.p;
    relaxed.p.conservativeResize(n + 1, n + 1);
    relaxed.q = VectorXd::Zero(n + 1);
    relaxed.q.head(n) = qc.q;
    relaxed.q(tau) = -1.0;
    relaxed.r = qc.r;
    p1.quadratic_constraints.push_back(std::move(relaxed));
  }
  p1.lower = VectorXd::Constant(n + 1, -kInf);
  p1.lower(tau) = -1.0;

  SolverOptions o;
  o.feas_tol = opts.feas_tol;
  o.kkt_tol = opts.kkt_tol;
  o.max_iter = std::max(opts.max_iter, 100);
  o.verify_convexity = false;
  InteriorPoint ipm(p1, o);
  const SolverResult r = ipm.run();
  return r.x(tau);
}

}  // namespace

double ConvexQuadraticProgram::objective(const VectorXd& x) const {
  double value = objective_linear.dot(x);
  if (objective_quadratic.nonZeros() > 0) value += 0.5 * x.dot(objective_quadratic * x);
  return value;
}

double ConvexQuadraticProgram::max_violation(const VectorXd& x) const {
  double worst = 0.0;
  if (eq_rhs.size() > 0) worst = (eq_matrix * x - eq_rhs).lpNorm<Eigen::Infinity>();
  if (ineq_rhs.size() > 0) worst = std::max(worst, (ineq_matrix * x - ineq_rhs).maxCoeff());
  for (const auto& qc : quadratic_constraints) {
    worst = std::max(worst, x.dot(qc.p * x) + qc.q.dot(x) - qc.r);
  }
  for (Index j = 0; j < lower.size(); ++j) worst = std::max(worst, lower(j) - x(j));
  for (Index j = 0; j < upper.size(); ++j) worst = std::max(worst, x(j) - upper(j));
  return std::max(worst, 0.0);
}

std::string to_string(Status status) {
  switch (status) {
    case Status::converged:
      return "converged";
    case Status::max_iterations:
      return "max-iterations";
    case Status::infeasible_detected:
      return "infeasible-detected";
  }
  return "unknown";
}

SolverResult solve(const ConvexQuadraticProgram& problem, const SolverOptions& options) {
  if (!(options.feas_tol > 0.0) || !(options.kkt_tol > 0.0) || options.max_iter < 1) {
    throw InputError("qp: tolerances must be positive and max_iter >= 1");
  }
  check_dimensions(problem);
  if (options.verify_convexity) {
    require_psd(problem.objective_quadratic, "objective quadratic term");
    for (const auto& qc : problem.quadratic_constraints) {
      require_psd(qc.p, "quadratic constraint matrix");
    }
  }

  InteriorPoint ipm(problem, options);
  SolverResult result = ipm.run();
  if (result.status != Status::converged) {
    if (phase_one_optimum(problem, options) > options.feas_tol) {
      result.status = Status::infeasible_detected;
    }
  }
  return result;
}

SparseMatrix to_sparse(const Eigen::MatrixXd& dense) {
  SparseMatrix out = dense.sparseView();
  out.makeCompressed();
  return out;
}

}  // namespace fairsvm::qp
