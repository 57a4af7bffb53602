#include "fairsvm/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "fairsvm/errors.hpp"

namespace fairsvm {
namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXi;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("fairsvm_data_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Dataset toy(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.x.resize(n, 3);
  ds.y.resize(n);
  ds.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) ds.x(i, j) = rng.normal() * (j + 1) + j;
    ds.y(i) = i % 2 ? 1 : -1;
    ds.z(i) = (i / 2) % 2 ? 1 : -1;
  }
  ds.columns = {"a", "b", "c"};
  return ds;
}

TEST(Rng, UniformRangeAndDeterminism) {
  Rng a(42), b(42);
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
  }
}

TEST(Rng, FirstDrawFollowsDocumentedRecipe) {
  std::mt19937_64 engine(7);
  Rng rng(7);
  EXPECT_EQ(rng.uniform(), static_cast<double>(engine() >> 11) / 9007199254740992.0);
}

TEST(Rng, NormalMoments) {
  Rng rng(1);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double v = rng.normal();
    s += v, s2 += v * v;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 7000; ++k) ++counts[rng.below(7)];
  for (int c : counts) EXPECT_GT(c, 800);
}

TEST(ValueRule, ParsesAndMatches) {
  EXPECT_TRUE(ValueRule::parse(">= 6").matches("6"));
  EXPECT_FALSE(ValueRule::parse(">= 6").matches("5"));
  EXPECT_TRUE(ValueRule::parse("== A151").matches("A151"));
  EXPECT_FALSE(ValueRule::parse("== A151").matches("A152"));
  EXPECT_TRUE(ValueRule::parse("== 2").matches("2.0"));
  EXPECT_TRUE(ValueRule::parse("!= red").matches("white"));
  EXPECT_TRUE(ValueRule::parse("< 0.5").matches("0.25"));
  EXPECT_THROW(ValueRule::parse("~ 3"), InputError);
  EXPECT_THROW(ValueRule::parse(">= high"), InputError);
}

TEST(LoadCsv, ThreeRowsByHand) {
  TempDir dir;
  const auto path = dir.write("t.csv",
                              "num,color,label,group\n"
                              "1.5,red,yes,m\n"
                              "-2,blue,no,f\n"
                              "0,red,no,m\n"
                              "4,green,yes,f\n");
  const Dataset ds =
      load_csv(path, "label", "group", ValueRule::parse("== yes"), ValueRule::parse("== f"));
  const std::vector<std::string> names{"num", "color=blue", "color=green", "color=red"};
  EXPECT_EQ(ds.columns, names);
  MatrixXd expected(4, 4);
  expected << 1.5, 0, 0, 1, -2, 1, 0, 0, 0, 0, 0, 1, 4, 0, 1, 0;
  EXPECT_EQ(ds.x, expected);
  EXPECT_EQ(ds.y, (VectorXi(4) << 1, -1, -1, 1).finished());
  EXPECT_EQ(ds.z, (VectorXi(4) << -1, 1, -1, 1).finished());
}

TEST(LoadCsv, SemicolonsAndQuotes) {
  TempDir dir;
  const auto path = dir.write("w.csv",
                              "\"fixed acidity\";\"quality\";\"kind\"\n"
                              "7.4;5;a\n8.1;6;b\n6.0;7;a\n5.5;4;b\n");
  const Dataset ds =
      load_csv(path, "quality", "kind", ValueRule::parse(">= 6"), ValueRule::parse("== a"));
  EXPECT_EQ(ds.columns, std::vector<std::string>{"fixed acidity"});
  EXPECT_EQ(ds.y, (VectorXi(4) << -1, 1, 1, -1).finished());
  EXPECT_DOUBLE_EQ(ds.x(1, 0), 8.1);
}

TEST(LoadCsv, Errors) {
  TempDir dir;
  const auto missing = dir.write("m.csv", "a,y,z\n1,1,1\n,0,0\n3,1,0\n4,0,1\n");
  EXPECT_THROW(load_csv(missing, "y", "z", ValueRule::parse("== 1"), ValueRule::parse("== 1")),
               LoadError);
  const auto ok = dir.write("o.csv", "a,y,z\n1,1,1\n2,0,0\n3,1,0\n4,0,1\n");
  EXPECT_THROW(load_csv(ok, "label", "z", ValueRule::parse("== 1"), ValueRule::parse("== 1")),
               LoadError);
  EXPECT_THROW(load_csv(dir.path() / "absent.csv", "y", "z", ValueRule::parse("== 1"),
                        ValueRule::parse("== 1")),
               LoadError);
  const auto single = dir.write("s.csv", "a,y,z\n1,1,1\n2,1,0\n3,1,0\n4,1,1\n");
  EXPECT_THROW(load_csv(single, "y", "z", ValueRule::parse("== 1"), ValueRule::parse("== 1")),
               DegenerateLabelError);
  const auto ragged = dir.write("r.csv", "a,y,z\n1,1\n");
  EXPECT_THROW(read_table(ragged), LoadError);
}

TEST(Recipe, StacksSourcesWithConstants) {
  TempDir dir;
  dir.write("red.csv", "alc;quality\n9;5\n10;6\n");
  dir.write("white.csv", "alc;quality\n11;7\n12;3\n");
  const auto path = dir.write("wine.recipe",
                              "# comment\n"
                              "source = red.csv color=red\n"
                              "source = white.csv color=white\n"
                              "label = quality\n"
                              "positive_label = >= 6\n"
                              "protected = color\n"
                              "positive_group = == white\n");
  const Dataset ds = load_recipe_dataset(load_recipe(path));
  EXPECT_EQ(ds.columns, std::vector<std::string>{"alc"});
  EXPECT_EQ(ds.y, (VectorXi(4) << -1, 1, 1, -1).finished());
  EXPECT_EQ(ds.z, (VectorXi(4) << -1, -1, 1, 1).finished());
}

TEST(Recipe, ShippedGermanRecipeMapsDefaultAndRenting) {
  const fs::path recipe = fs::path(FAIRSVM_SOURCE_DIR) / "recipes" / "german.recipe";
  const Dataset ds = load_recipe_dataset(load_recipe(recipe));
  EXPECT_EQ(ds.rows(), 1000);
  EXPECT_EQ((ds.y.array() == 1).count(), 300);
  EXPECT_EQ((ds.z.array() == 1).count(), 179);
  for (const auto& c : ds.columns) {
    EXPECT_NE(c.rfind("class", 0), 0u);
    EXPECT_NE(c.rfind("housing", 0), 0u);
  }
}

TEST(Recipe, MissingFileIsALoadError) {
  TempDir dir;
  const auto path = dir.write("x.recipe",
                              "source = nowhere.csv\nlabel = y\npositive_label = == 1\n"
                              "protected = z\npositive_group = == 1\n");
  EXPECT_THROW(load_recipe_dataset(load_recipe(path)), LoadError);
  const auto bad = dir.write("bad.recipe", "label = y\n");
  EXPECT_THROW(load_recipe(bad), LoadError);
}

TEST(WriteCsv, RoundTrip) {
  TempDir dir;
  const Dataset ds = toy(12, 5);
  write_csv(ds, dir.path() / "d.csv");
  const Dataset back =
      load_csv(dir.path() / "d.csv", "y", "z", ValueRule::parse("== 1"), ValueRule::parse("== 1"));
  EXPECT_EQ(back.x, ds.x);
  EXPECT_EQ(back.y, ds.y);
  EXPECT_EQ(back.z, ds.z);
}

TEST(Synthesize, PerfectAlignmentWithoutNoiseCopiesLabels) {
  SyntheticConfig c;
  c.alignment = 1.0;
  c.deterministic = true;
  const auto s = synthesize(c);
  EXPECT_EQ(s.data.y, s.data.z);
  EXPECT_DOUBLE_EQ(s.correlation, 1.0);
}

TEST(Synthesize, DefaultCorrelationInRange) {
  std::vector<double> corr;
  for (std::uint64_t seed = 1; seed <= 41; ++seed) {
    SyntheticConfig c;
    c.seed = seed;
    const auto s = synthesize(c);
    EXPECT_NEAR(s.theta_y.dot(s.theta_z), 0.85, 1e-12);
    EXPECT_NEAR(s.theta_z.norm(), 1.0, 1e-12);
    corr.push_back(s.correlation);
  }
  std::nth_element(corr.begin(), corr.begin() + 20, corr.end());
  EXPECT_GE(corr[20], 0.40);
  EXPECT_LE(corr[20], 0.50);
  SyntheticConfig c;
  c.seed = 7;
  const double fixed = synthesize(c).correlation;
  EXPECT_GE(fixed, 0.30);
  EXPECT_LE(fixed, 0.60);
}

TEST(Synthesize, OrthogonalParametersGiveSmallCorrelation) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticConfig c;
    c.alignment = 0.0;
    c.n = 1000;
    c.seed = seed;
    EXPECT_LE(std::abs(synthesize(c).correlation), 0.15);
  }
}

TEST(Synthesize, SkewStretchesPositiveGroup) {
  SyntheticConfig c;
  c.n = 2000;
  const auto skewed = synthesize(c);
  c.skew = 1.0;
  const auto plain = synthesize(c);
  EXPECT_EQ(skewed.data.z, plain.data.z);
  auto top = [](const Dataset& ds) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < ds.rows(); ++i)
      if (ds.z(i) == 1) rows.push_back(i);
    const MatrixXd x = ds.subset(rows).x;
    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(centered.transpose() * centered / x.rows());
    return eig.eigenvalues().maxCoeff();
  };
  EXPECT_NEAR(top(skewed.data) / top(plain.data), 3.0, 1e-9);
}

TEST(Synthesize, DeterministicUnderSeed) {
  SyntheticConfig c;
  c.seed = 9;
  const auto a = synthesize(c), b = synthesize(c);
  EXPECT_EQ(a.data.x, b.data.x);
  EXPECT_EQ(a.data.y, b.data.y);
  c.seed = 10;
  EXPECT_NE(synthesize(c).data.x, a.data.x);
}

TEST(Synthesize, BadConfigThrows) {
  SyntheticConfig c;
  c.n = 5;
  EXPECT_THROW(synthesize(c), InputError);
  c = SyntheticConfig{};
  c.alignment = 1.5;
  EXPECT_THROW(synthesize(c), InputError);
}

TEST(Standardize, ColumnStatistics) {
  Dataset ds = toy(50, 2);
  ds.x.col(1).setConstant(4.0);
  const Dataset s = standardize(ds);
  for (int j = 0; j < 3; ++j) {
    const double mean = s.x.col(j).mean();
    const double sd = std::sqrt((s.x.col(j).array() - mean).square().mean());
    EXPECT_NEAR(mean, 0.0, 1e-12);
    if (j == 1) {
      EXPECT_EQ(s.x.col(j).cwiseAbs().maxCoeff(), 0.0);
    } else {
      EXPECT_NEAR(sd, 1.0, 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(s.standardization->mean(0), ds.x.col(0).mean());
}

TEST(Standardize, Idempotent) {
  const Dataset once = standardize(toy(40, 3));
  const Dataset twice = standardize(once);
  EXPECT_LE((once.x - twice.x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, AppliesTrainingParameters) {
  const Dataset train = toy(30, 4), test = toy(10, 5);
  const Dataset s = standardize(train);
  const Dataset t = apply_standardization(test, *s.standardization);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(t.x(0, j), (test.x(0, j) - s.standardization->mean(j)) / s.standardization->scale(j),
                1e-14);
  }
}

TEST(Split, SeventyThirty) {
  const Dataset ds = toy(100, 6);
  const auto [train, test] = split_indices(ds, 0.7, 11);
  EXPECT_EQ(train.size(), 70u);
  EXPECT_EQ(test.size(), 30u);
  std::set<Eigen::Index> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_EQ(split_indices(ds, 0.7, 11), split_indices(ds, 0.7, 11));
  EXPECT_NE(split_indices(ds, 0.7, 11), split_indices(ds, 0.7, 12));
}

TEST(Split, StratifiesCells) {
  const Dataset ds = toy(100, 7);
  const auto [train, test] = split(ds, 0.7, 3);
  EXPECT_NEAR(static_cast<double>((train.y.array() == 1).count()), 35.0, 1.0);
  EXPECT_NEAR(static_cast<double>((test.z.array() == 1).count()), 15.0, 1.0);
  EXPECT_EQ(train.rows(), 70);
}

TEST(Split, ImpossibleStratificationThrows) {
  Dataset ds = toy(10, 8);
  ds.y.setConstant(-1);
  ds.y(0) = 1;
  EXPECT_THROW(split_indices(ds, 0.7, 1), DegenerateGroupError);
  EXPECT_THROW(split_indices(toy(10, 8), 1.0, 1), InputError);
}

TEST(Kfold, DisjointAndCovering) {
  const Dataset ds = toy(40, 9);
  const auto folds = kfold(ds, 5, 1);
  ASSERT_EQ(folds.size(), 5u);
  std::set<Eigen::Index> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.size(), 8u);
    for (auto i : f) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), 40u);
  EXPECT_EQ(kfold(ds, 5, 1), folds);
  const auto rest = complement(40, folds[0]);
  EXPECT_EQ(rest.size(), 32u);
}

TEST(Kfold, LeaveOneOut) {
  const Dataset ds = toy(12, 10);
  const auto folds = kfold(ds, 12, 2);
  for (const auto& f : folds) EXPECT_EQ(f.size(), 1u);
  EXPECT_THROW(kfold(ds, 13, 2), DegenerateGroupError);
  EXPECT_THROW(kfold(ds, 1, 2), InputError);
}

}  // namespace
}  // namespace fairsvm
