#include "fairsvm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "fairsvm/errors.hpp"

namespace fairsvm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != token.size()) throw LoadError("bad number: '" + token + "'");
  return v;
}

int to_int(const std::string& token) {
  const double v = to_double(token);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw LoadError("bad integer: '" + token + "'");
  return static_cast<int>(v);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  const std::size_t extra =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count) - (count > 0);
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < extra; ++t) pool.emplace_back(worker);
  worker();
}

std::string one_line(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::lsvm: return "lsvm";
    case Method::zsvm: return "zsvm";
    case Method::ssvm: return "ssvm";
    case Method::ksvm: return "ksvm";
    case Method::fair_ksvm: return "fair-ksvm";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  for (Method m : {Method::lsvm, Method::zsvm, Method::ssvm, Method::ksvm, Method::fair_ksvm}) {
    if (text == to_string(m)) return m;
  }
  throw InputError("unknown method: " + text);
}

bool is_kernel(Method method) { return method == Method::ksvm || method == Method::fair_ksvm; }
bool uses_d(Method method) {
  return method == Method::zsvm || method == Method::ssvm || method == Method::fair_ksvm;
}
bool uses_mu(Method method) { return method == Method::ssvm || method == Method::fair_ksvm; }

void TrainSpec::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be positive");
  if (!(d >= 0.0)) throw InputError("d must be nonnegative");
  ccp.validate();
  kernel.validate();
}

int TrainedModel::iterations() const {
  return std::visit([](const auto& m) { return m.iterations; }, model);
}

Eigen::VectorXd TrainedModel::decision_values(const Eigen::MatrixXd& raw) const {
  Eigen::MatrixXd x = raw;
  if (standardization) {
    if (standardization->mean.size() != raw.cols()) {
      throw InputError("model expects " + std::to_string(standardization->mean.size()) +
                       " columns, data has " + std::to_string(raw.cols()));
    }
    x = ((raw.rowwise() - standardization->mean.transpose()).array().rowwise() /
         standardization->scale.transpose().array())
            .matrix();
  }
  if (const auto* lm = std::get_if<LinearModel>(&model)) return fairsvm::decision_values(*lm, x);
  return kernel_decision_values(std::get<KernelModel>(model), x);
}

TrainedModel train_model(const Dataset& train, const TrainSpec& spec) {
  spec.validate();
  const Dataset s = standardize(train);
  TrainedModel out;
  out.method = spec.method;
  out.standardization = s.standardization;
  out.columns = train.columns;

  CcpConfig ccp = spec.ccp;
  Kernel kernel = spec.kernel;
  if (spec.auto_gamma && kernel.type == Kernel::Type::rbf) kernel.gamma = default_rbf_gamma(s.x);
  const double box = 1.0 / (4.0 * spec.lambda);
  switch (spec.method) {
    case Method::lsvm: out.model = train_lsvm(s.x, s.y, spec.lambda); break;
    case Method::zsvm: out.model = train_zsvm(s.x, s.y, s.z, spec.lambda, spec.d); break;
    case Method::ssvm: out.model = train_ssvm(s.x, s.y, s.z, spec.lambda, spec.d, ccp); break;
    case Method::ksvm: out.model = train_ksvm(s.x, s.y, kernel, box); break;
    case Method::fair_ksvm:
      ccp.mu = spec.ccp.mu / spec.lambda;
      out.model = train_fair_ksvm(s.x, s.y, s.z, kernel, box, spec.d / 2.0, ccp);
      break;
  }
  return out;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ostringstream o;
  auto vec = [&](const char* key, const Eigen::VectorXd& v) {
    o << key << ' ' << v.size();
    for (Eigen::Index i = 0; i < v.size(); ++i) o << ' ' << num(v(i));
    o << '\n';
  };
  o << "fairsvm-model 1\n";
  o << "method " << to_string(model.method) << '\n';
  o << "columns " << model.columns.size();
  for (const auto& c : model.columns) o << ' ' << c;
  o << '\n';
  if (model.standardization) {
    const auto& st = *model.standardization;
    o << "standardization " << st.mean.size();
    for (Eigen::Index i = 0; i < st.mean.size(); ++i) o << ' ' << num(st.mean(i));
    for (Eigen::Index i = 0; i < st.scale.size(); ++i) o << ' ' << num(st.scale(i));
    o << '\n';
  }
  std::visit(
      [&](const auto& m) {
        o << "lambda " << num(m.lambda) << "\nd " << num(m.d) << "\nmu " << num(m.mu)
          << "\niterations " << m.iterations << "\nb " << num(m.b) << '\n';
      },
      model.model);
  if (const auto* lm = std::get_if<LinearModel>(&model.model)) {
    vec("w", lm->w);
  } else {
    const auto& km = std::get<KernelModel>(model.model);
    o << "kernel ";
    switch (km.kernel.type) {
      case Kernel::Type::linear: o << "linear"; break;
      case Kernel::Type::rbf: o << "rbf " << num(km.kernel.gamma); break;
      case Kernel::Type::polynomial:
        o << "polynomial " << km.kernel.degree << ' ' << num(km.kernel.offset);
        break;
    }
    o << '\n';
    vec("alpha", km.alpha);
    o << "y " << km.y.size();
    for (Eigen::Index i = 0; i < km.y.size(); ++i) o << ' ' << km.y(i);
    o << "\nx " << km.x.rows() << ' ' << km.x.cols();
    for (Eigen::Index i = 0; i < km.x.rows(); ++i) {
      for (Eigen::Index j = 0; j < km.x.cols(); ++j) o << ' ' << num(km.x(i, j));
    }
    o << '\n';
  }
  std::ofstream f(path);
  if (!f) throw LoadError("cannot write " + path.string());
  f << o.str();
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw LoadError("model not found: " + path.string());
  std::map<std::string, std::vector<std::string>> fields;
  std::string line;
  if (!std::getline(f, line) || line != "fairsvm-model 1") {
    throw LoadError("not a fairsvm-model 1 file: " + path.string());
  }
  while (std::getline(f, line)) {
    std::istringstream in(line);
    std::string key, tok;
    if (!(in >> key)) continue;
    auto& v = fields[key];
    while (in >> tok) v.push_back(tok);
  }
  auto get = [&](const std::string& key) -> const std::vector<std::string>& {
    auto it = fields.find(key);
    if (it == fields.end()) throw LoadError("model file lacks '" + key + "'");
    return it->second;
  };
  auto scalar = [&](const std::string& key) {
    const auto& v = get(key);
    if (v.size() != 1) throw LoadError("bad '" + key + "' record");
    return to_double(v[0]);
  };
  auto vec = [&](const std::string& key) {
    const auto& v = get(key);
    if (v.empty() || to_int(v[0]) != static_cast<int>(v.size()) - 1) {
      throw LoadError("bad '" + key + "' record");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()) - 1);
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = to_double(v[i + 1]);
    return out;
  };

  TrainedModel out;
  const auto& method = get("method");
  if (method.size() != 1) throw LoadError("bad 'method' record");
  out.method = parse_method(method[0]);
  const auto& cols = get("columns");
  if (cols.empty() || to_int(cols[0]) != static_cast<int>(cols.size()) - 1) {
    throw LoadError("bad 'columns' record");
  }
  out.columns.assign(cols.begin() + 1, cols.end());
  if (fields.count("standardization")) {
    const auto& v = fields["standardization"];
    const int p = v.empty() ? -1 : to_int(v[0]);
    if (p < 0 || static_cast<int>(v.size()) != 1 + 2 * p) throw LoadError("bad 'standardization' record");
    Standardization st{Eigen::VectorXd(p), Eigen::VectorXd(p)};
    for (int i = 0; i < p; ++i) {
      st.mean(i) = to_double(v[1 + i]);
      st.scale(i) = to_double(v[1 + p + i]);
    }
    out.standardization = st;
  }

  auto common = [&](auto& m) {
    m.lambda = scalar("lambda");
    m.d = scalar("d");
    m.mu = scalar("mu");
    m.iterations = static_cast<int>(scalar("iterations"));
    m.b = scalar("b");
  };
  if (!is_kernel(out.method)) {
    LinearModel m;
    common(m);
    m.w = vec("w");
    out.model = std::move(m);
    return out;
  }
  KernelModel m;
  common(m);
  const auto& k = get("kernel");
  if (k.size() == 1 && k[0] == "linear") {
    m.kernel = Kernel::linear();
  } else if (k.size() == 2 && k[0] == "rbf") {
    m.kernel = Kernel::rbf(to_double(k[1]));
  } else if (k.size() == 3 && k[0] == "polynomial") {
    m.kernel = Kernel::polynomial(to_int(k[1]), to_double(k[2]));
  } else {
    throw LoadError("bad 'kernel' record");
  }
  m.kernel.validate();
  m.alpha = vec("alpha");
  const Eigen::VectorXd y = vec("y");
  m.y = y.cast<int>();
  const auto& xs = get("x");
  if (xs.size() < 2) throw LoadError("bad 'x' record");
  const int n = to_int(xs[0]), p = to_int(xs[1]);
  if (n < 0 || p < 0 || static_cast<std::size_t>(n) * p + 2 != xs.size()) {
    throw LoadError("bad 'x' record");
  }
  m.x.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) m.x(i, j) = to_double(xs[2 + static_cast<std::size_t>(i) * p + j]);
  }
  if (m.alpha.size() != n || m.y.size() != n) throw LoadError("kernel model sizes disagree");
  out.model = std::move(m);
  return out;
}

void SweepSpec::validate() const {
  auto grid = [](const std::vector<double>& g, const char* name) {
    if (g.empty()) throw InputError(std::string(name) + " grid is empty");
    for (double v : g) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InputError(std::string(name) + " grid values must be finite and >= 0");
      }
    }
  };
  if (methods.empty()) throw InputError("no methods");
  grid(d_grid, "d");
  grid(mu_grid, "mu");
  grid(lambda_grid, "lambda");
  for (double v : lambda_grid) {
    if (v == 0.0) throw InputError("lambda grid values must be positive");
  }
  if (lambda && !(*lambda > 0.0)) throw InputError("lambda must be positive");
  if (folds < 2) throw InputError("folds must be >= 2");
  if (rounds < 1) throw InputError("rounds must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train fraction must lie in (0, 1)");
  }
  CcpConfig check = ccp;
  check.mu = 0.0;
  check.validate();
  kernel.validate();
}

const char* const kSweepHeader =
    "kind,method,d,mu,round,fold,lambda,auc,dp_delta,eo_delta,iterations,wall_time,status";

std::string format_record(const SweepRecord& r) {
  std::ostringstream o;
  o << r.kind << ',' << to_string(r.method) << ',' << num(r.d) << ',' << num(r.mu) << ','
    << r.round << ',' << r.fold << ',' << num(r.lambda) << ',' << num(r.auc) << ','
    << num(r.dp_delta) << ',' << num(r.eo_delta) << ',' << r.iterations << ','
    << num(r.wall_time) << ',' << one_line(r.status);
  return o.str();
}

SweepRecord parse_record(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  if (cells.size() != 13) throw LoadError("sweep row needs 13 fields: " + line);
  SweepRecord r;
  r.kind = cells[0];
  if (r.kind != "cell" && r.kind != "mean") throw LoadError("bad row kind: " + r.kind);
  r.method = parse_method(cells[1]);
  r.d = to_double(cells[2]);
  r.mu = to_double(cells[3]);
  r.round = to_int(cells[4]);
  r.fold = to_int(cells[5]);
  r.lambda = to_double(cells[6]);
  r.auc = to_double(cells[7]);
  r.dp_delta = to_double(cells[8]);
  r.eo_delta = to_double(cells[9]);
  r.iterations = to_int(cells[10]);
  r.wall_time = to_double(cells[11]);
  r.status = cells[12];
  return r;
}

double select_lambda(const Dataset& train, const std::vector<double>& grid, int folds,
                     std::uint64_t seed, int threads) {
  if (grid.empty()) throw InputError("lambda grid is empty");
  const auto parts = kfold(train, folds, seed);
  const std::size_t k = parts.size();
  std::vector<double> scores(grid.size() * k, kNaN);
  parallel_for(scores.size(), threads, [&](std::size_t i) {
    const auto& fold = parts[i % k];
    try {
      TrainSpec spec;
      spec.lambda = grid[i / k];
      const TrainedModel m = train_model(train.subset(complement(train.rows(), fold)), spec);
      const Dataset held = train.subset(fold);
      scores[i] = auc(roc(m.decision_values(held.x), held.y));
    } catch (const std::exception&) {
    }
  });
  double best = kNaN, best_auc = -1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    int used = 0;
    for (std::size_t f = 0; f < k; ++f) {
      if (std::isfinite(scores[g * k + f])) {
        sum += scores[g * k + f];
        ++used;
      }
    }
    if (used > 0 && sum / used > best_auc) {
      best_auc = sum / used;
      best = grid[g];
    }
  }
  if (std::isnan(best)) throw TrainingError("lambda selection failed for every grid value", 0);
  return best;
}

std::vector<SweepRecord> run_sweep(const Dataset& data, const SweepSpec& spec) {
  spec.validate();
  data.validate();

  std::vector<Method> methods = spec.methods;
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  std::vector<double> ds = spec.d_grid, mus = spec.mu_grid;
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  std::sort(mus.begin(), mus.end());
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());

  struct Round {
    Dataset train, test;
    double lambda = kNaN;
    std::string error;
  };
  std::vector<Round> rounds(static_cast<std::size_t>(spec.rounds));
  for (int r = 0; r < spec.rounds; ++r) {
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(r);
    auto [train, test] = split(data, spec.train_fraction, seed);
    Round& round = rounds[static_cast<std::size_t>(r)];
    round.train = std::move(train);
    round.test = std::move(test);
    try {
      round.lambda = spec.lambda ? *spec.lambda
                                 : select_lambda(round.train, spec.lambda_grid, spec.folds, seed,
                                                 spec.threads);
    } catch (const std::exception& e) {
      round.error = e.what();
    }
  }

  // Cells that cannot differ (a parameter the method ignores) are trained once.
  using Key = std::tuple<Method, double, double, int>;
  auto key_of = [](Method m, double d, double mu, int r) {
    return Key{m, uses_d(m) ? d : 0.0, uses_mu(m) ? mu : 0.0, r};
  };
  std::map<Key, SweepRecord> unique;
  for (Method m : methods) {
    for (double d : ds) {
      for (double mu : mus) {
        for (int r = 1; r <= spec.rounds; ++r) unique.try_emplace(key_of(m, d, mu, r));
      }
    }
  }
  std::vector<std::pair<const Key, SweepRecord>*> tasks;
  for (auto& entry : unique) tasks.push_back(&entry);

  parallel_for(tasks.size(), spec.threads, [&](std::size_t i) {
    const auto& [m, d, mu, r] = tasks[i]->first;
    SweepRecord& out = tasks[i]->second;
    const Round& round = rounds[static_cast<std::size_t>(r - 1)];
    out.method = m;
    out.round = r;
    out.lambda = round.lambda;
    out.auc = out.dp_delta = out.eo_delta = kNaN;
    const auto start = std::chrono::steady_clock::now();
    try {
      if (!round.error.empty()) throw TrainingError(round.error, 0);
      TrainSpec ts;
      ts.method = m;
      ts.lambda = round.lambda;
      ts.d = d;
      ts.ccp = spec.ccp;
      ts.ccp.mu = mu;
      ts.kernel = spec.kernel;
      ts.auto_gamma = spec.auto_gamma;
      const TrainedModel model = train_model(round.train, ts);
      const FairnessReport rep =
          evaluate(model.decision_values(round.test.x), round.test.y, round.test.z);
      out.auc = rep.auc_y;
      out.dp_delta = rep.dp_delta;
      out.eo_delta = rep.eo_delta;
      out.iterations = model.iterations();
      out.status = "ok";
    } catch (const std::exception& e) {
      out.status = std::string("failed: ") + e.what();
    }
    if (spec.timing) {
      out.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  std::vector<SweepRecord> cells, means;
  for (Method m : methods) {
    for (double d : ds) {
      for (double mu : mus) {
        SweepRecord mean;
        mean.kind = "mean";
        mean.method = m;
        mean.d = d;
        mean.mu = mu;
        double auc_sum = 0.0, dp_sum = 0.0, eo_sum = 0.0, lambda_sum = 0.0, time_sum = 0.0;
        long iter_sum = 0;
        int ok = 0;
        for (int r = 1; r <= spec.rounds; ++r) {
          SweepRecord cell = unique.at(key_of(m, d, mu, r));
          cell.d = d;
          cell.mu = mu;
          lambda_sum += cell.lambda;
          time_sum += cell.wall_time;
          if (cell.status == "ok") {
            ++ok;
            auc_sum += cell.auc;
            dp_sum += cell.dp_delta;
            eo_sum += cell.eo_delta;
            iter_sum += cell.iterations;
          }
          cells.push_back(std::move(cell));
        }
        mean.lambda = lambda_sum / spec.rounds;
        mean.wall_time = time_sum / spec.rounds;
        if (ok > 0) {
          mean.auc = auc_sum / ok;
          mean.dp_delta = dp_sum / ok;
          mean.eo_delta = eo_sum / ok;
          mean.iterations = static_cast<int>(std::lround(static_cast<double>(iter_sum) / ok));
        } else {
          mean.auc = mean.dp_delta = mean.eo_delta = kNaN;
        }
        mean.status = ok == spec.rounds ? "ok"
                      : ok == 0         ? "failed"
                                        : "partial " + std::to_string(ok) + "/" +
                                              std::to_string(spec.rounds);
        means.push_back(std::move(mean));
      }
    }
  }
  cells.insert(cells.end(), means.begin(), means.end());
  return cells;
}

}  // namespace fairsvm
