#include "fairsvm/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fairsvm/errors.hpp"

namespace fairsvm {
namespace {

namespace fs = std::filesystem;

Dataset synthetic(std::uint64_t seed, Eigen::Index n = 120) {
  SyntheticConfig c;
  c.n = n;
  c.seed = seed;
  return synthesize(c).data;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("fairsvm_experiment_" + name);
}

TEST(Method, NamesRoundTrip) {
  for (Method m : {Method::lsvm, Method::zsvm, Method::ssvm, Method::ksvm, Method::fair_ksvm}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_THROW(parse_method("svm"), InputError);
}

TEST(TrainModel, LinearKernelReproducesLinearScores) {
  const Dataset ds = synthetic(4);
  TrainSpec lin;
  lin.lambda = 0.5;
  TrainSpec ker = lin;
  ker.method = Method::ksvm;
  const auto a = train_model(ds, lin).decision_values(ds.x);
  const auto b = train_model(ds, ker).decision_values(ds.x);
  // Kernel scores are half the primal ones up to a shift.
  const Eigen::VectorXd gap = a - 2.0 * b;
  EXPECT_LT((gap.array() - gap.mean()).abs().maxCoeff(), 1e-4);
}

TEST(TrainModel, ScoresRawRowsThroughStoredStandardization) {
  Dataset ds = synthetic(5);
  ds.x = (ds.x.array() * 7.0 + 3.0).matrix();
  const TrainedModel m = train_model(ds, TrainSpec{});
  ASSERT_TRUE(m.standardization.has_value());
  const Dataset s = standardize(ds);
  const auto& lm = std::get<LinearModel>(m.model);
  const Eigen::VectorXd expect = (s.x * lm.w).array() + lm.b;
  EXPECT_LT((m.decision_values(ds.x) - expect).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(m.decision_values(Eigen::MatrixXd::Zero(3, 5)), InputError);
}

TEST(ModelFile, RoundTripsLinearAndKernel) {
  const Dataset ds = synthetic(6, 60);
  for (Method method : {Method::ssvm, Method::fair_ksvm}) {
    TrainSpec spec;
    spec.method = method;
    spec.d = 0.05;
    spec.ccp.mu = 5.0;
    spec.kernel = Kernel::rbf(0.7);
    const TrainedModel m = train_model(ds, spec);
    const auto path = temp_file("model");
    save_model(m, path);
    const TrainedModel back = load_model(path);
    EXPECT_EQ(back.method, method);
    EXPECT_EQ(back.columns, ds.columns);
    EXPECT_EQ(back.iterations(), m.iterations());
    EXPECT_EQ(back.decision_values(ds.x), m.decision_values(ds.x));
    fs::remove(path);
  }
}

TEST(ModelFile, RejectsForeignAndTruncatedFiles) {
  const auto path = temp_file("bad");
  std::ofstream(path) << "something else\n";
  EXPECT_THROW(load_model(path), LoadError);
  std::ofstream(path) << "fairsvm-model 1\nmethod lsvm\ncolumns 1 a\nlambda 1\n";
  EXPECT_THROW(load_model(path), LoadError);
  fs::remove(path);
  EXPECT_THROW(load_model(path), LoadError);
}

TEST(SweepRecord, FormatParseRoundTrip) {
  SweepRecord r;
  r.method = Method::fair_ksvm;
  r.d = 0.001;
  r.mu = 10;
  r.round = 3;
  r.lambda = 0.1;
  r.auc = 0.123456789012345678;
  r.dp_delta = 1.0 / 3.0;
  r.eo_delta = 0.0;
  r.iterations = 7;
  r.status = "failed: a, b";
  const SweepRecord back = parse_record(format_record(r));
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.d, r.d);
  EXPECT_EQ(back.auc, r.auc);
  EXPECT_EQ(back.dp_delta, r.dp_delta);
  EXPECT_EQ(back.iterations, 7);
  EXPECT_EQ(back.status, "failed: a; b");
  EXPECT_EQ(format_record(back), format_record(r));
  EXPECT_THROW(parse_record("cell,lsvm,0"), LoadError);
}

TEST(Sweep, SingleCellCountsAndMuZeroDuplicatesZsvm) {
  SweepSpec spec;
  spec.d_grid = {0.05};
  spec.mu_grid = {0.0};
  spec.rounds = 1;
  spec.lambda = 1.0;
  const auto rows = run_sweep(synthetic(7), spec);
  ASSERT_EQ(rows.size(), 6u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(rows[i].kind, "cell");
  for (int i = 3; i < 6; ++i) EXPECT_EQ(rows[i].kind, "mean");
  EXPECT_EQ(rows[0].method, Method::lsvm);
  EXPECT_EQ(rows[1].method, Method::zsvm);
  EXPECT_EQ(rows[2].method, Method::ssvm);
  EXPECT_NEAR(rows[1].auc, rows[2].auc, 1e-6);
  EXPECT_NEAR(rows[1].dp_delta, rows[2].dp_delta, 1e-6);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_GE(r.auc, 0.0);
    EXPECT_LE(r.auc, 1.0);
    EXPECT_GE(r.dp_delta, 0.0);
    EXPECT_LE(r.dp_delta, 1.0);
    EXPECT_EQ(r.wall_time, 0.0);
  }
}

TEST(Sweep, CanonicalOrderAndThreadIndependence) {
  SweepSpec spec;
  spec.methods = {Method::ssvm, Method::lsvm};
  spec.d_grid = {0.1, 0.0};
  spec.mu_grid = {10.0, 0.0};
  spec.rounds = 2;
  spec.folds = 3;
  spec.lambda_grid = {0.1, 1.0};
  const Dataset ds = synthetic(8);
  spec.threads = 1;
  const auto one = run_sweep(ds, spec);
  spec.threads = 4;
  const auto four = run_sweep(ds, spec);
  ASSERT_EQ(one.size(), 2u * 2 * 2 * 2 + 2 * 2 * 2);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(format_record(one[i]), format_record(four[i]));
  }
  auto key = [](const SweepRecord& r) {
    return std::make_tuple(r.kind == "mean", r.method, r.d, r.mu, r.round, r.fold);
  };
  for (std::size_t i = 1; i < one.size(); ++i) EXPECT_LT(key(one[i - 1]), key(one[i]));
}

TEST(Sweep, FailedCellsAreRecorded) {
  SweepSpec spec;
  spec.methods = {Method::ssvm};
  spec.d_grid = {0.0};
  spec.mu_grid = {1.0};
  spec.rounds = 1;
  spec.lambda = 1.0;
  spec.ccp.max_outer_iterations = 1;
  spec.ccp.objective_change_tolerance = 1e-6;
  const Dataset ds = synthetic(9);
  const auto ok = run_sweep(ds, spec);
  EXPECT_EQ(ok[0].status, "ok");

  spec.methods = {Method::fair_ksvm};
  spec.kernel = Kernel::polynomial(400, 1.0);  // Gram entries overflow
  const auto rows = run_sweep(ds, spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].status.rfind("failed: ", 0), 0u) << rows[0].status;
  EXPECT_TRUE(std::isnan(rows[0].auc));
  EXPECT_EQ(rows[1].status, "failed");
}

TEST(Sweep, RejectsBadSpecs) {
  const Dataset ds = synthetic(10);
  SweepSpec spec;
  spec.d_grid.clear();
  EXPECT_THROW(run_sweep(ds, spec), InputError);
  spec = SweepSpec{};
  spec.mu_grid = {-1.0};
  EXPECT_THROW(run_sweep(ds, spec), InputError);
  spec = SweepSpec{};
  spec.folds = 1;
  EXPECT_THROW(run_sweep(ds, spec), InputError);
  spec = SweepSpec{};
  spec.train_fraction = 1.0;
  EXPECT_THROW(run_sweep(ds, spec), InputError);
}

TEST(SelectLambda, PicksBestMeanAuc) {
  const Dataset ds = synthetic(11);
  const double best = select_lambda(ds, {0.01, 1.0, 1000.0}, 4, 3);
  EXPECT_TRUE(best == 0.01 || best == 1.0 || best == 1000.0);
  EXPECT_EQ(select_lambda(ds, {2.0}, 4, 3), 2.0);
  EXPECT_EQ(select_lambda(ds, {0.01, 1.0, 1000.0}, 4, 3, 4), best);
}

}  // namespace
}  // namespace fairsvm
