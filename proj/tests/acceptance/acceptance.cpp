// Acceptance checks. Usage: acceptance [AC1 ... AC8]; no argument runs all.
// One line per criterion: "<id> PASS|FAIL <seconds>s <detail>".

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <thread>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairsvm/data.hpp"
#include "fairsvm/errors.hpp"
#include "fairsvm/experiment.hpp"
#include "fairsvm/fairness_constraints.hpp"
#include "fairsvm/kernel_svm.hpp"
#include "fairsvm/linalg.hpp"
#include "fairsvm/linear_svm.hpp"
#include "fairsvm/metrics.hpp"
#include "fairsvm/qp.hpp"
#include "support/oracles.hpp"

using namespace fairsvm;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Dataset synthetic(std::uint64_t seed, Eigen::Index n = 200, Eigen::Index p = 2) {
  SyntheticConfig c;
  c.n = n;
  c.p = p;
  c.seed = seed;
  return synthesize(c).data;
}

Dataset wine() {
  std::optional<std::filesystem::path> dir;
  if (const char* env = std::getenv("FAIRSVM_DATA_DIR")) dir = env;
  return load_recipe_dataset(
      load_recipe(std::filesystem::path(FAIRSVM_SOURCE_DIR) / "recipes" / "wine.recipe"), dir);
}

bool non_increasing(const std::vector<double>& h, double tol) {
  for (std::size_t k = 1; k < h.size(); ++k) {
    if (h[k] > h[k - 1] + tol) return false;
  }
  return true;
}

// SSVM(mu = 0) against ZSVM on one train/test split.
Outcome mu_zero_pair(const Dataset& ds, const std::string& name) {
  const auto [train, test] = split(ds, 0.7, 1);
  TrainSpec z;
  z.method = Method::zsvm;
  z.d = 0.075;
  TrainSpec s = z;
  s.method = Method::ssvm;
  s.ccp.mu = 0.0;
  const VectorXd fz = train_model(train, z).decision_values(test.x);
  const VectorXd fs = train_model(train, s).decision_values(test.x);
  const double scores = (fz - fs).cwiseAbs().maxCoeff();
  const FairnessReport rz = evaluate(fz, test.y, test.z), rs = evaluate(fs, test.y, test.z);
  const double metrics = std::max(std::abs(rz.auc_y - rs.auc_y), std::abs(rz.dp_delta - rs.dp_delta));
  return {scores <= 1e-5 && metrics <= 1e-6,
          name + ": max|f_z - f_s| " + fmt("%.2e", scores) + ", metric gap " + fmt("%.2e", metrics)};
}

Outcome ac1() {
  Outcome syn = mu_zero_pair(synthetic(1), "synthetic");
  Outcome w;
  try {
    Dataset all = wine();
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(all.rows()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
    Rng rng(1);
    rng.shuffle(rows);
    rows.resize(std::min<std::size_t>(500, rows.size()));
    std::sort(rows.begin(), rows.end());
    w = mu_zero_pair(all.subset(rows), "wine 500");
  } catch (const LoadError& e) {
    w = {false, std::string("wine: ") + e.what()};
  }
  return {syn.pass && w.pass, syn.detail + "; " + w.detail};
}

Outcome ac2() {
  int runs = 0, engaged = 0, bad = 0, capped = 0;
  int worst_iters = 0;
  std::string first_bad;
  // Capped: 50 steps taken and the last one still above the stopping tolerance.
  auto record = [&](const std::vector<double>& h, int iterations, const std::string& tag) {
    ++runs;
    engaged += iterations > 0;
    worst_iters = std::max(worst_iters, iterations);
    const std::size_t k = h.size();
    const bool cap = iterations >= 50 && k >= 2 &&
                     h[k - 2] - h[k - 1] >= 1e-6 * std::max(std::abs(h[k - 2]), 1.0);
    capped += cap;
    if (!non_increasing(h, 1e-8) || iterations > 50 || cap) {
      if (bad++ == 0) first_bad = tag;
    }
  };
  const double ds[] = {0.0, 0.05, 0.1};
  const double mus[] = {1.0, 10.0, 100.0};
  const Eigen::Index ps[] = {2, 3, 5};
  for (int t = 0; t < 36; ++t) {
    const Dataset s = standardize(synthetic(100 + t, 120, ps[t % 3]));
    const double lambda = t % 2 ? 1.0 : 0.1;
    const std::string tag = "linear trial " + std::to_string(t);
    try {
      const auto m = train_ssvm(s.x, s.y, s.z, lambda, ds[(t / 3) % 3], CcpConfig{50, 1e-6, mus[(t / 9) % 3]});
      record(m.objective_history, m.iterations, tag);
    } catch (const std::exception& e) {
      ++runs;
      if (bad++ == 0) first_bad = tag + ": " + e.what();
    }
  }
  const Kernel kernels[] = {Kernel::linear(), Kernel::rbf(0.5), Kernel::polynomial(2, 1.0)};
  for (int t = 0; t < 24; ++t) {
    const Dataset s = standardize(synthetic(200 + t, 60, 2 + t % 2));
    const std::string tag = "kernel trial " + std::to_string(t);
    try {
      const auto m = train_fair_ksvm(s.x, s.y, s.z, kernels[t % 3], t % 2 ? 0.25 : 2.5,
                                     ds[(t / 3) % 3] / 2.0, CcpConfig{50, 1e-6, mus[(t / 6) % 3]});
      record(m.objective_history, m.iterations, tag);
    } catch (const std::exception& e) {
      ++runs;
      if (bad++ == 0) first_bad = tag + ": " + e.what();
    }
  }
  std::string detail = std::to_string(runs) + " trainings, " + std::to_string(engaged) +
                       " with CCP steps, max iterations " + std::to_string(worst_iters) + ", " +
                       std::to_string(capped) + " stopped by the cap before the tolerance";
  if (bad) detail += ", " + std::to_string(bad) + " violations (first: " + first_bad + ")";
  return {bad == 0 && runs >= 50, detail};
}

Outcome ac3() {
  std::vector<double> dp_l, dp_z, dp_s, auc_l, auc_s;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset ds = synthetic(seed);
    for (Method m : {Method::lsvm, Method::zsvm, Method::ssvm}) {
      TrainSpec spec;
      spec.method = m;
      spec.d = 0.075;
      spec.ccp.mu = 10.0;
      const FairnessReport r = evaluate(train_model(ds, spec).decision_values(ds.x), ds.y, ds.z);
      (m == Method::lsvm ? dp_l : m == Method::zsvm ? dp_z : dp_s).push_back(r.dp_delta);
      if (m == Method::lsvm) auc_l.push_back(r.auc_y);
      if (m == Method::ssvm) auc_s.push_back(r.auc_y);
    }
  }
  const double l = median(dp_l), z = median(dp_z), s = median(dp_s);
  const double al = median(auc_l), as = median(auc_s);
  const bool order = s <= z && z <= l;
  const bool level = s <= 0.15;
  const bool accuracy = as >= al - 0.10;
  return {order && level && accuracy,
          "median DP lsvm " + fmt("%.4f", l) + " zsvm " + fmt("%.4f", z) + " ssvm " + fmt("%.4f", s) +
              " (order " + (order ? "ok" : "violated") + ", ssvm <= 0.15 " + (level ? "ok" : "violated") +
              "); median AUC lsvm " + fmt("%.4f", al) + " ssvm " + fmt("%.4f", as) + " (" +
              (accuracy ? "ok" : "below lsvm - 0.10") + ")"};
}

Outcome ac4() {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index n = 6 + t % 15, p = 2 + t % 4;
    MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
    VectorXi y(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = unit(gen) < 0.5 ? 1 : -1;
      z(i) = i < 2 ? 1 : (i < 4 ? -1 : (unit(gen) < 0.5 ? 1 : -1));
    }
    VectorXd alpha(n);
    for (Eigen::Index i = 0; i < n; ++i) alpha(i) = unit(gen);
    const VectorXd beta = y.cast<double>().cwiseProduct(alpha);
    const VectorXd w = x.transpose() * beta;
    const MatrixXd k = x * x.transpose();
    const double lhs = kernel_covariance_gap(k, GroupIndex::from(z)).gap.quadratic_form(beta);
    const double rhs = covariance_gap(x, z).gap.quadratic_form(w);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-14}));
  }

  const auto [train, test] = split(synthetic(1), 0.7, 1);
  TrainSpec lin;
  lin.method = Method::ssvm;
  lin.d = 0.075;
  lin.ccp.mu = 10.0;
  TrainSpec ker = lin;
  ker.method = Method::fair_ksvm;
  const FairnessReport a = evaluate(train_model(train, lin).decision_values(test.x), test.y, test.z);
  const FairnessReport b = evaluate(train_model(train, ker).decision_values(test.x), test.y, test.z);
  const double dauc = std::abs(a.auc_y - b.auc_y), ddp = std::abs(a.dp_delta - b.dp_delta);
  return {worst <= 1e-6 && dauc <= 0.02 && ddp <= 0.02,
          "identity worst relative error " + fmt("%.2e", worst) + "; ssvm vs linear-kernel fair-ksvm AUC gap " +
              fmt("%.2e", dauc) + ", DP gap " + fmt("%.2e", ddp)};
}

VectorXd vec(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }
VectorXi ivec(const std::vector<int>& v) { return Eigen::Map<const VectorXi>(v.data(), static_cast<Eigen::Index>(v.size())); }

Outcome ac5() {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> size(3, 30), level(0, 6), coin(0, 1);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = size(gen);
    std::vector<double> s;
    std::vector<int> y, z;
    for (int i = 0; i < n; ++i) {
      s.push_back(t % 2 ? 0.25 * level(gen) : normal(gen));
      y.push_back(coin(gen) ? 1 : -1);
      z.push_back(coin(gen) ? 1 : -1);
    }
    y[0] = 1, y[1] = -1, y[2] = 1;
    z[0] = 1, z[1] = -1, z[2] = -1;

    const RocCurve c = roc(vec(s), ivec(y));
    const auto expected = oracle::roc_by_enumeration(s, y);
    if (c.points.size() != expected.size()) return {false, "instance " + std::to_string(t) + ": ROC length differs"};
    for (std::size_t k = 0; k < expected.size(); ++k) {
      worst = std::max({worst, std::abs(c.points[k].fpr - expected[k].first),
                        std::abs(c.points[k].tpr - expected[k].second)});
    }
    worst = std::max(worst, std::abs(auc(c) - oracle::auc_pairwise(s, y)));
    worst = std::max(worst, std::abs(dp_delta(vec(s), ivec(z)) - oracle::dp_by_intervals(s, z)));
    std::vector<double> sp;
    std::vector<int> zp;
    for (int i = 0; i < n; ++i) {
      if (y[i] == 1) sp.push_back(s[i]), zp.push_back(z[i]);
    }
    worst = std::max(worst, std::abs(eo_delta(vec(s), ivec(z), ivec(y)) - oracle::dp_by_intervals(sp, zp)));
  }
  return {worst <= 1e-12, "1000 instances, worst deviation " + fmt("%.2e", worst)};
}

Outcome ac6() {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> dim(1, 10);
  double worst_x = 0.0, worst_kkt = 0.0;
  int converged = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = dim(gen);
    MatrixXd b(n, n);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = normal(gen);
    const MatrixXd q = b.transpose() * b / n + 0.1 * MatrixXd::Identity(n, n);
    VectorXd c(n), lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      c(i) = 2.0 * normal(gen);
      lo(i) = t % 4 == 0 ? -INFINITY : -std::abs(normal(gen));
      hi(i) = std::abs(normal(gen));
    }
    VectorXd lo_oracle = lo.cwiseMax(-1e6);
    const VectorXd expected = oracle::projected_gradient(q, c, lo_oracle, hi);
    qp::ConvexQuadraticProgram p;
    p.objective_quadratic = qp::to_sparse(q);
    p.objective_linear = c;
    p.lower = lo;
    p.upper = hi;
    const qp::SolverResult r = qp::solve(p);
    if (r.status != qp::Status::converged) {
      return {false, "QP " + std::to_string(t) + " ended with " + qp::to_string(r.status)};
    }
    ++converged;
    worst_x = std::max(worst_x, (r.x - expected).lpNorm<Eigen::Infinity>());
    worst_kkt = std::max(worst_kkt, r.kkt_residual);
  }
  return {worst_x <= 1e-6 && worst_kkt <= 1e-7,
          std::to_string(converged) + " QPs converged, worst |x - oracle| " + fmt("%.2e", worst_x) +
              ", worst KKT residual " + fmt("%.2e", worst_kkt)};
}

Outcome ac7() {
  Dataset ds;
  try {
    ds = wine();
  } catch (const LoadError& e) {
    return {false, e.what()};
  }
  SweepSpec spec;
  spec.methods = {Method::ssvm};
  spec.mu_grid = {0.0, 1.0, 10.0};
  spec.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto rows = run_sweep(ds, spec);
  std::map<std::pair<double, double>, std::vector<double>> dp, au;
  for (const auto& r : rows) {
    if (r.kind != "cell" || r.status != "ok") continue;
    dp[{r.d, r.mu}].push_back(r.dp_delta);
    au[{r.d, r.mu}].push_back(r.auc);
  }
  bool a = true;
  std::string worst;
  for (double d : spec.d_grid) {
    if (!(median(dp[{d, 10.0}]) <= median(dp[{d, 0.0}]))) {
      a = false;
      worst += " d=" + fmt("%g", d);
    }
  }
  const double auc_hi = median(au[{0.1, 0.0}]), auc_lo = median(au[{0.0, 10.0}]);
  const double dp_hi = median(dp[{0.1, 0.0}]), dp_lo = median(dp[{0.0, 10.0}]);
  const double auc_drop = (auc_hi - auc_lo) / auc_hi, dp_drop = (dp_hi - dp_lo) / dp_hi;
  const bool b = auc_drop < dp_drop;
  return {a && b, std::string("(a) ") + (a ? "ok" : "violated at" + worst) + "; (b) AUC drop " +
                      fmt("%.4f", auc_drop) + " vs DP drop " + fmt("%.4f", dp_drop)};
}

Outcome ac8() {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  double orth = 0.0, recon = 0.0, split_err = 0.0, trace_err = 0.0, min_eig = 0.0;
  int count = 0;
  for (int order : {1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 200}) {
    const int reps = order <= 55 ? 4 : (order < 200 ? 2 : 1);
    for (int rep = 0; rep < reps; ++rep) {
      MatrixXd b(order, order);
      for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = normal(gen);
      MatrixXd a = 0.5 * (b + b.transpose());
      if (rep == 1) {
        // Rank-deficient indefinite: few modes of each sign.
        const int r = std::max(1, order / 4);
        const MatrixXd u = b.leftCols(r), v = b.rightCols(r);
        a = u * u.transpose() - v * v.transpose();
      }
      ++count;
      const SymmetricMatrix s(a);
      const EigenDecomposition e = sym_eig(s);
      const MatrixXd& vecs = e.eigenvectors;
      const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
      orth = std::max(orth, (vecs.transpose() * vecs - MatrixXd::Identity(order, order)).cwiseAbs().maxCoeff());
      recon = std::max(recon, (a - vecs * e.eigenvalues.asDiagonal() * vecs.transpose()).cwiseAbs().maxCoeff() / scale);
      trace_err = std::max(trace_err, std::abs(a.trace() - e.eigenvalues.sum()) / std::max(1.0, std::abs(a.trace())));
      const SpectralSplit sp = spectral_split(s);
      split_err = std::max(split_err, (sp.u_plus.matrix() - sp.u_minus.matrix() - a).cwiseAbs().maxCoeff() / scale);
      for (const auto* part : {&sp.u_plus, &sp.u_minus}) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> check(part->matrix(), Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, check.eigenvalues().minCoeff() / scale);
      }
    }
  }
  const bool pass = orth <= 1e-10 && recon <= 1e-8 && split_err <= 1e-8 && trace_err <= 1e-8 && min_eig >= -1e-8;
  return {pass, std::to_string(count) + " matrices up to order 200: orthonormality " + fmt("%.1e", orth) +
                    ", reconstruction " + fmt("%.1e", recon) + ", split " + fmt("%.1e", split_err) +
                    ", trace " + fmt("%.1e", trace_err) + ", min part eigenvalue " + fmt("%.1e", min_eig)};
}

struct Criterion {
  const char* id;
  std::function<Outcome()> run;
  double budget_seconds;  // 0: none stated
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"AC1", ac1, 60},  {"AC2", ac2, 0}, {"AC3", ac3, 300}, {"AC4", ac4, 0},
      {"AC5", ac5, 60},  {"AC6", ac6, 0}, {"AC7", ac7, 1800}, {"AC8", ac8, 60},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && seconds > c.budget_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt("%g", c.budget_seconds) + " s budget";
    }
    std::printf("%s %s %.1fs %s\n", c.id, o.pass ? "PASS" : "FAIL", seconds, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matches\n");
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
