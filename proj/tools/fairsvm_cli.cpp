#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fairsvm/data.hpp"
#include "fairsvm/errors.hpp"
#include "fairsvm/experiment.hpp"
#include "fairsvm/metrics.hpp"

namespace fs = std::filesystem;
using namespace fairsvm;

namespace {

struct DataArgs {
  std::string data;
  std::string recipe;
};

struct ModelArgs {
  std::string method = "lsvm";
  std::string kernel = "linear";
  std::optional<double> gamma;
  int degree = 2;
  double offset = 1.0;
  int max_ccp_iters = 50;
  double ccp_tol = 1e-6;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data,
                  "CSV with a y and a z column (+-1); with --recipe, the directory holding "
                  "the recipe's source files");
  cmd->add_option("--recipe", a.recipe, "dataset recipe file");
}

void add_model_options(CLI::App* cmd, ModelArgs& a) {
  cmd->add_option("--kernel", a.kernel, "linear, rbf or poly")
      ->check(CLI::IsMember({"linear", "rbf", "poly"}));
  cmd->add_option("--gamma", a.gamma, "rbf width; default 1/(p * median squared distance)");
  cmd->add_option("--degree", a.degree, "polynomial degree");
  cmd->add_option("--offset", a.offset, "polynomial offset");
  cmd->add_option("--max-ccp-iters", a.max_ccp_iters, "outer iteration cap");
  cmd->add_option("--ccp-tol", a.ccp_tol, "relative objective change that stops the iteration");
}

Dataset load(const DataArgs& a) {
  Dataset ds;
  if (!a.recipe.empty()) {
    std::optional<fs::path> dir;
    if (!a.data.empty()) dir = fs::path(a.data);
    ds = load_recipe_dataset(load_recipe(a.recipe), dir);
  } else if (!a.data.empty()) {
    const ValueRule one{ValueRule::Op::eq, "1"};
    ds = load_csv(a.data, "y", "z", one, one);
  } else {
    throw InputError("one of --data or --recipe is required");
  }
  ds.validate();
  return ds;
}

Kernel kernel_of(const ModelArgs& a) {
  if (a.kernel == "rbf") return Kernel::rbf(a.gamma.value_or(1.0));
  if (a.kernel == "poly") return Kernel::polynomial(a.degree, a.offset);
  return Kernel::linear();
}

std::string invocation(int argc, char** argv) {
  std::string s = "fairsvm";
  for (int i = 1; i < argc; ++i) s += std::string(" ") + argv[i];
  return s;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw LoadError("cannot write " + path.string());
  return f;
}

void write_roc(const RocCurve& curve, const fs::path& path) {
  auto f = open_out(path);
  f << "fpr,tpr\n";
  for (const auto& p : curve.points) f << num(p.fpr) << ',' << num(p.tpr) << '\n';
}

std::pair<Dataset, Dataset> parts(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return {ds, Dataset{}};
  return split(ds, fraction, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair linear and kernel SVMs with covariance constraints"};
  app.require_subcommand(1);

  DataArgs data;
  ModelArgs model;
  std::uint64_t seed = 1;
  std::string out;
  double fraction = 0.7;

  // train
  double lambda = 1.0, d = 0.0, mu = 0.0;
  std::string report;
  auto* train = app.add_subcommand("train", "fit one model; write it and a metrics report");
  add_data_options(train, data);
  add_model_options(train, model);
  train->add_option("--method", model.method, "lsvm, zsvm, ssvm, ksvm or fair-ksvm");
  train->add_option("--lambda", lambda, "regularization weight");
  train->add_option("--d", d, "mean-difference bound");
  train->add_option("--mu", mu, "covariance penalty weight");
  train->add_option("--seed", seed, "split seed");
  train->add_option("--train-fraction", fraction, "training share; 1 trains on every row");
  train->add_option("--out", out, "model file")->required();
  train->add_option("--report", report, "report file (default: <out>.report)");

  // sweep
  SweepSpec spec;
  std::vector<std::string> methods{"lsvm", "zsvm", "ssvm"};
  std::optional<double> fixed_lambda;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* sweep = app.add_subcommand("sweep", "cross-validated (d, mu) tradeoff table");
  add_data_options(sweep, data);
  add_model_options(sweep, model);
  sweep->add_option("--method", methods, "comma-separated methods")->delimiter(',');
  sweep->add_option("--d", spec.d_grid, "comma-separated d grid")->delimiter(',');
  sweep->add_option("--mu", spec.mu_grid, "comma-separated mu grid")->delimiter(',');
  sweep->add_option("--lambda", fixed_lambda, "fixed lambda; skips selection");
  sweep->add_option("--lambda-grid", spec.lambda_grid, "lambda selection grid")->delimiter(',');
  sweep->add_option("--folds", spec.folds, "folds for lambda selection");
  sweep->add_option("--rounds", spec.rounds, "train/test rounds");
  sweep->add_option("--train-fraction", spec.train_fraction, "training share per round");
  sweep->add_option("--seed", spec.seed, "base seed");
  sweep->add_option("--threads", threads, "worker threads");
  sweep->add_flag("--timing", spec.timing, "record wall time per cell");
  sweep->add_option("--out", out, "table file (default: stdout)");

  // roc
  std::string model_path, part = "all";
  auto* rocc = app.add_subcommand("roc", "ROC point files for y, z and z given y = +1");
  add_data_options(rocc, data);
  rocc->add_option("--model", model_path, "model file")->required();
  rocc->add_option("--part", part, "rows to score: all, train or test")
      ->check(CLI::IsMember({"all", "train", "test"}));
  rocc->add_option("--seed", seed, "split seed for --part");
  rocc->add_option("--train-fraction", fraction, "training share for --part");
  rocc->add_option("--out", out, "output prefix")->required();

  // synth
  SyntheticConfig synth_config;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  synth->add_option("--n", synth_config.n, "rows");
  synth->add_option("--p", synth_config.p, "features");
  synth->add_option("--alignment", synth_config.alignment, "theta_y . theta_z");
  synth->add_option("--skew", synth_config.skew, "top eigenvalue multiplier for z = +1");
  synth->add_option("--logit-scale", synth_config.logit_scale, "label noise scale");
  synth->add_flag("--deterministic", synth_config.deterministic, "labels by sign, no noise");
  synth->add_option("--seed", synth_config.seed, "seed");
  synth->add_option("--out", out, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*train) {
      const Dataset ds = load(data);
      TrainSpec ts;
      ts.method = parse_method(model.method);
      ts.lambda = lambda;
      ts.d = d;
      ts.ccp = CcpConfig{model.max_ccp_iters, model.ccp_tol, mu};
      ts.kernel = kernel_of(model);
      ts.auto_gamma = model.kernel == "rbf" && !model.gamma;
      const auto [tr, te] = parts(ds, fraction, seed);
      const TrainedModel m = train_model(tr, ts);
      save_model(m, out);
      auto f = open_out(report.empty() ? out + ".report" : report);
      f << "# " << invocation(argc, argv) << '\n';
      f << "method " << to_string(m.method) << '\n';
      f << "iterations " << m.iterations() << '\n';
      auto metrics = [&](const char* name, const Dataset& part_ds) {
        const FairnessReport r = evaluate(m.decision_values(part_ds.x), part_ds.y, part_ds.z);
        f << name << "_auc_y " << num(r.auc_y) << '\n';
        f << name << "_dp_delta " << num(r.dp_delta) << '\n';
        f << name << "_eo_delta " << num(r.eo_delta) << '\n';
      };
      metrics("train", tr);
      if (te.rows() > 0) metrics("test", te);
    } else if (*sweep) {
      const Dataset ds = load(data);
      spec.methods.clear();
      for (const auto& name : methods) spec.methods.push_back(parse_method(name));
      spec.lambda = fixed_lambda;
      spec.ccp = CcpConfig{model.max_ccp_iters, model.ccp_tol, 0.0};
      spec.kernel = kernel_of(model);
      spec.auto_gamma = model.kernel == "rbf" && !model.gamma;
      spec.threads = threads;
      const auto rows = run_sweep(ds, spec);
      std::ofstream file;
      if (!out.empty()) file = open_out(out);
      std::ostream& o = out.empty() ? std::cout : file;
      o << "# " << invocation(argc, argv) << '\n' << kSweepHeader << '\n';
      for (const auto& r : rows) o << format_record(r) << '\n';
    } else if (*rocc) {
      const TrainedModel m = load_model(model_path);
      const Dataset ds = load(data);
      Dataset scored = ds;
      if (part != "all") {
        auto [tr, te] = split(ds, fraction, seed);
        scored = part == "train" ? tr : te;
      }
      const FairnessReport r = evaluate(m.decision_values(scored.x), scored.y, scored.z);
      write_roc(r.roc_y, out + ".y.csv");
      write_roc(r.roc_z, out + ".z.csv");
      write_roc(r.roc_z_given_y_pos, out + ".z_given_y.csv");
      std::cout << "auc_y " << num(r.auc_y) << "\ndp_delta " << num(r.dp_delta)
                << "\neo_delta " << num(r.eo_delta) << '\n';
    } else if (*synth) {
      const SyntheticDataset s = synthesize(synth_config);
      write_csv(s.data, out);
      std::cout << "correlation " << num(s.correlation) << '\n';
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
