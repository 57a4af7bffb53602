#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fairsvm/data.hpp"
#include "fairsvm/kernel_svm.hpp"
#include "fairsvm/linear_svm.hpp"
#include "fairsvm/metrics.hpp"

namespace fairsvm {

enum class Method { lsvm, zsvm, ssvm, ksvm, fair_ksvm };

std::string to_string(Method method);
/// "lsvm", "zsvm", "ssvm", "ksvm" or "fair-ksvm"; InputError otherwise.
Method parse_method(const std::string& text);
bool is_kernel(Method method);
bool uses_d(Method method);
bool uses_mu(Method method);

/// lambda, d and mu are on the linear scale for every method. Kernel methods
/// train with box bound 1/(4 lambda), bound d/2 and weight mu/lambda, which
/// reproduces the linear model under the linear kernel.
struct TrainSpec {
  Method method = Method::lsvm;
  double lambda = 1.0;
  double d = 0.0;
  CcpConfig ccp;
  Kernel kernel;
  bool auto_gamma = false;  // rbf gamma from default_rbf_gamma on the training rows

  void validate() const;
};

struct TrainedModel {
  Method method = Method::lsvm;
  std::variant<LinearModel, KernelModel> model;
  std::optional<Standardization> standardization;
  std::vector<std::string> columns;

  int iterations() const;
  /// Scores for raw rows; the stored standardization is applied first.
  Eigen::VectorXd decision_values(const Eigen::MatrixXd& raw) const;
};

/// Standardizes `train` and fits the requested method on it.
TrainedModel train_model(const Dataset& train, const TrainSpec& spec);

/// Text format, one record per line, values printed with %.17g:
///   fairsvm-model 1
///   method <name>
///   columns <p> <name>...
///   standardization <p> <mean>... <scale>...
///   lambda <v> | d <v> | mu <v> | iterations <k> | b <v>
///   linear:  w <p> <v>...
///   kernel:  kernel linear | kernel rbf <gamma> | kernel polynomial <degree> <offset>
///            alpha <n> <v>...   y <n> <+-1>...   x <n> <p> <row-major values>
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

struct SweepSpec {
  std::vector<Method> methods{Method::lsvm, Method::zsvm, Method::ssvm};
  std::vector<double> d_grid{0.0, 0.001, 0.002, 0.005, 0.01, 0.025, 0.05, 0.1};
  std::vector<double> mu_grid{0.0, 1.0, 10.0};
  std::vector<double> lambda_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  std::optional<double> lambda;  // skips selection when set
  int folds = 5;
  int rounds = 5;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  CcpConfig ccp{50, 1e-6, 0.0};
  Kernel kernel;
  bool auto_gamma = false;
  int threads = 1;
  bool timing = false;  // wall_time is 0 unless set

  void validate() const;
};

struct SweepRecord {
  std::string kind = "cell";  // cell | mean
  Method method = Method::lsvm;
  double d = 0.0;
  double mu = 0.0;
  int round = 0;  // 1-based; 0 on mean rows
  int fold = 0;
  double lambda = 0.0;
  double auc = 0.0;
  double dp_delta = 0.0;
  double eo_delta = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  std::string status = "ok";
};

extern const char* const kSweepHeader;
std::string format_record(const SweepRecord& record);
SweepRecord parse_record(const std::string& line);

/// Per round: stratified split, lambda by k-fold AUC of LSVM on the training
/// part, then every (method, d, mu) cell trained there and scored on the
/// held-out part. Cell rows come sorted by method, d, mu, round and fold,
/// followed by one mean row per (method, d, mu).
std::vector<SweepRecord> run_sweep(const Dataset& data, const SweepSpec& spec);

/// Mean cross-validated AUC of LSVM for each lambda; returns the best
/// (first on ties).
double select_lambda(const Dataset& train, const std::vector<double>& grid, int folds,
                     std::uint64_t seed, int threads = 1);

}  // namespace fairsvm
