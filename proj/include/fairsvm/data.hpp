#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fairsvm {

/// Seedable pseudorandom source, fixed so that draws are reproducible.
///
/// Engine: std::mt19937_64 seeded with the 64-bit seed.
///   uniform()  = (next() >> 11) * 2^-53, in [0, 1)
///   normal()   = Box-Muller on (1 - uniform(), uniform()); the sine branch
///                is cached and returned by the following call
///   below(n)   = next() % n after rejecting draws >= the largest multiple of n
///   shuffle    = Fisher-Yates from the back, swapping i with below(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t n);

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // population sd; 1 for constant columns
};

struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
  Eigen::VectorXi z;
  std::vector<std::string> columns;
  std::optional<Standardization> standardization;

  Eigen::Index rows() const { return x.rows(); }
  /// Throws unless n >= 4, values finite and both labels and groups occur.
  void validate() const;
  /// Rows in the given order.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Comparison applied to a raw cell: "== v", "!= v", ">= v", "> v", "<= v", "< v".
/// Ordered comparisons are numeric; equality is numeric when both sides
/// parse as numbers and textual otherwise.
struct ValueRule {
  enum class Op { eq, ne, ge, gt, le, lt };
  Op op = Op::eq;
  std::string value;

  static ValueRule parse(const std::string& text);
  bool matches(const std::string& cell) const;
};

/// Header row plus string cells, delimiter ',' or ';' (whichever occurs more
/// often in the header). Surrounding whitespace and double quotes are removed.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_table(const std::filesystem::path& path);

/// Builds a dataset from a table. The label and protected columns become
/// y and z (+1 where the rule matches, -1 otherwise) and are left out of X.
/// Columns that all parse as numbers are kept; any other column is one-hot
/// encoded with one indicator per distinct value (sorted), named col=value.
/// Throws LoadError for empty, "?" or "NA" cells and unknown columns.
Dataset table_to_dataset(const Table& table, const std::string& label_column,
                         const std::string& protected_column, const ValueRule& positive_label,
                         const ValueRule& positive_group);

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& protected_column, const ValueRule& positive_label,
                 const ValueRule& positive_group);

/// key = value text file:
///   source = <file> [column=value ...]   (repeatable; files are stacked)
///   label = <column>
///   positive_label = <rule>
///   protected = <column>
///   positive_group = <rule>
///   drop = <column>                      (repeatable)
/// Lines starting with '#' are comments. Relative source paths resolve
/// against the recipe's directory.
struct Recipe {
  struct Source {
    std::filesystem::path path;
    std::vector<std::pair<std::string, std::string>> constants;
  };
  std::string name;
  std::vector<Source> sources;
  std::string label;
  ValueRule positive_label;
  std::string protected_column;
  ValueRule positive_group;
  std::vector<std::string> drop;
};

Recipe load_recipe(const std::filesystem::path& path);

/// When data_dir is set, each source is looked up there by file name.
Dataset load_recipe_dataset(const Recipe& recipe,
                            const std::optional<std::filesystem::path>& data_dir = std::nullopt);

/// CSV with columns x1..xp, y, z as written by write_csv.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

struct SyntheticConfig {
  Eigen::Index n = 200;
  Eigen::Index p = 2;
  double alignment = 0.85;   // theta_y . theta_z, both unit norm
  double skew = 3.0;         // top covariance eigenvalue multiplier for z = +1
  double logit_scale = 3.0;  // P(y = 1 | x) = sigmoid(logit_scale * theta_y . x)
  bool deterministic = false;  // y = sign(theta_y . x), z likewise
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticDataset {
  Dataset data;
  Eigen::VectorXd theta_y;
  Eigen::VectorXd theta_z;
  double correlation = 0.0;  // empirical corr(y, z)
};

/// x_i ~ N(0, I_p); y and z drawn from their logit models on x; then the
/// z = +1 rows are stretched about their mean along the top eigenvector of
/// their covariance so that eigenvalue grows by `skew`.
SyntheticDataset synthesize(const SyntheticConfig& config);

double correlation(const Eigen::VectorXi& a, const Eigen::VectorXi& b);

/// Centers and scales every column; stores the parameters.
Dataset standardize(const Dataset& ds);
/// Applies stored parameters (e.g. training-set ones to a test set).
Dataset apply_standardization(const Dataset& ds, const Standardization& params);

/// Stratified by (y, z) cell; the training size is round(train_fraction * n)
/// shared out across cells by largest remainder. Index lists are ascending.
/// Throws DegenerateGroupError if a part would miss a label or group.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(
    const Dataset& ds, double train_fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// k disjoint folds covering all rows. Rows are shuffled within each (y, z)
/// cell and dealt round-robin, the dealing position carrying over between
/// cells. Index lists are ascending.
std::vector<std::vector<Eigen::Index>> kfold(const Dataset& ds, int k, std::uint64_t seed);

/// Rows not listed in `fold`, ascending.
std::vector<Eigen::Index> complement(Eigen::Index n, const std::vector<Eigen::Index>& fold);

}  // namespace fairsvm
