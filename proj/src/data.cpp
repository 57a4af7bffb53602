#include "fairsvm/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fairsvm/errors.hpp"
#include "fairsvm/linalg.hpp"

namespace fairsvm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == delim && !quoted) {
      out.push_back(unquote(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(unquote(cell));
  return out;
}

char detect_delimiter(const std::string& header) {
  std::size_t commas = 0, semis = 0;
  bool quoted = false;
  for (char c : header) {
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    commas += c == ',';
    semis += c == ';';
  }
  return semis > commas ? ';' : ',';
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?" || cell == "NA"; }

Eigen::Index find_column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw LoadError("unknown column '" + name + "'");
  return it - header.begin();
}

// (y, z) cells in a fixed order.
std::array<std::vector<Eigen::Index>, 4> cells(const Dataset& ds) {
  std::array<std::vector<Eigen::Index>, 4> out;
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    out[(ds.y(i) == 1 ? 2 : 0) + (ds.z(i) == 1 ? 1 : 0)].push_back(i);
  }
  return out;
}

void require_both(const Dataset& ds, const std::vector<Eigen::Index>& rows, const char* part) {
  bool yp = false, yn = false, zp = false, zn = false;
  for (auto i : rows) {
    (ds.y(i) == 1 ? yp : yn) = true;
    (ds.z(i) == 1 ? zp : zn) = true;
  }
  if (!(yp && yn && zp && zn)) {
    throw DegenerateGroupError(std::string("split: ") + part +
                               " part would miss a label or protected group");
  }
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (cached_normal_) {
    const double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(angle);
  return r * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InputError("Rng::below: empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = next();
  while (v >= limit) v = next();
  return v % n;
}

void Dataset::validate() const {
  if (x.rows() != y.size() || x.rows() != z.size()) throw InputError("dataset: row counts differ");
  if (x.rows() < 4) throw InputError("dataset: need at least 4 rows");
  if (!x.allFinite()) throw InputError("dataset: non-finite predictor");
  if (static_cast<Eigen::Index>(columns.size()) != x.cols()) {
    throw InputError("dataset: column names do not match X");
  }
  bool yp = false, yn = false, zp = false, zn = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (std::abs(y(i)) != 1 || std::abs(z(i)) != 1) throw InputError("dataset: labels must be +-1");
    (y(i) == 1 ? yp : yn) = true;
    (z(i) == 1 ? zp : zn) = true;
  }
  if (!(yp && yn)) throw DegenerateLabelError("dataset: only one label present");
  if (!(zp && zn)) throw DegenerateGroupError("dataset: only one protected group present");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.x.resize(n, x.cols());
  out.y.resize(n);
  out.z.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.x.row(k) = x.row(rows[k]);
    out.y(k) = y(rows[k]);
    out.z(k) = z(rows[k]);
  }
  out.columns = columns;
  out.standardization = standardization;
  return out;
}

ValueRule ValueRule::parse(const std::string& text) {
  static const std::vector<std::pair<std::string, Op>> ops{
      {"==", Op::eq}, {"!=", Op::ne}, {">=", Op::ge}, {"<=", Op::le}, {">", Op::gt}, {"<", Op::lt}};
  const std::string t = trim(text);
  for (const auto& [sym, op] : ops) {
    if (t.rfind(sym, 0) == 0) {
      ValueRule r{op, unquote(t.substr(sym.size()))};
      if (r.value.empty()) break;
      if (op != Op::eq && op != Op::ne && !parse_number(r.value)) {
        throw InputError("rule '" + text + "': ordered comparison needs a number");
      }
      return r;
    }
  }
  throw InputError("cannot parse rule '" + text + "'");
}

bool ValueRule::matches(const std::string& cell) const {
  const auto a = parse_number(cell), b = parse_number(value);
  if (op == Op::eq || op == Op::ne) {
    const bool equal = (a && b) ? *a == *b : cell == value;
    return (op == Op::eq) == equal;
  }
  if (!a) throw LoadError("value '" + cell + "' is not numeric");
  switch (op) {
    case Op::ge: return *a >= *b;
    case Op::gt: return *a > *b;
    case Op::le: return *a <= *b;
    case Op::lt: return *a < *b;
    default: return false;
  }
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("dataset not found: " + path.string());
  Table t;
  std::string line;
  char delim = ',';
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (t.header.empty()) {
      delim = detect_delimiter(line);
      t.header = split_line(line, delim);
      continue;
    }
    auto cells = split_line(line, delim);
    if (cells.size() != t.header.size()) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(t.header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw LoadError(path.string() + ": no header row");
  return t;
}

Dataset table_to_dataset(const Table& table, const std::string& label_column,
                         const std::string& protected_column, const ValueRule& positive_label,
                         const ValueRule& positive_group) {
  const Eigen::Index label = find_column(table.header, label_column);
  const Eigen::Index group = find_column(table.header, protected_column);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < table.header.size(); ++j)
      if (is_missing(table.rows[i][j])) {
        throw LoadError("missing value in row " + std::to_string(i + 1) + ", column '" +
                        table.header[j] + "'");
      }

  Dataset ds;
  ds.y.resize(n);
  ds.z.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.y(i) = positive_label.matches(table.rows[i][label]) ? 1 : -1;
    ds.z(i) = positive_group.matches(table.rows[i][group]) ? 1 : -1;
  }

  std::vector<Eigen::VectorXd> cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (static_cast<Eigen::Index>(j) == label || static_cast<Eigen::Index>(j) == group) continue;
    Eigen::VectorXd numeric(n);
    bool all_numeric = true;
    for (Eigen::Index i = 0; i < n && all_numeric; ++i) {
      const auto v = parse_number(table.rows[i][j]);
      all_numeric = v.has_value();
      if (v) numeric(i) = *v;
    }
    if (all_numeric) {
      cols.push_back(numeric);
      ds.columns.push_back(table.header[j]);
      continue;
    }
    std::set<std::string> levels;
    for (Eigen::Index i = 0; i < n; ++i) levels.insert(table.rows[i][j]);
    for (const auto& level : levels) {
      Eigen::VectorXd indicator(n);
      for (Eigen::Index i = 0; i < n; ++i) indicator(i) = table.rows[i][j] == level ? 1.0 : 0.0;
      cols.push_back(indicator);
      ds.columns.push_back(table.header[j] + "=" + level);
    }
  }
  ds.x.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) ds.x.col(static_cast<Eigen::Index>(j)) = cols[j];
  ds.validate();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const std::string& protected_column, const ValueRule& positive_label,
                 const ValueRule& positive_group) {
  return table_to_dataset(read_table(path), label_column, protected_column, positive_label,
                          positive_group);
}

Recipe load_recipe(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("recipe not found: " + path.string());
  Recipe r;
  r.name = path.stem().string();
  bool has_label_rule = false, has_group_rule = false;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw LoadError("recipe line without '=': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "source") {
      std::istringstream words(value);
      Recipe::Source s;
      std::string word;
      words >> word;
      s.path = std::filesystem::path(word);
      if (s.path.is_relative()) s.path = path.parent_path() / s.path;
      while (words >> word) {
        const auto at = word.find('=');
        if (at == std::string::npos) throw LoadError("recipe source constant needs col=value");
        s.constants.emplace_back(word.substr(0, at), word.substr(at + 1));
      }
      r.sources.push_back(std::move(s));
    } else if (key == "label") {
      r.label = value;
    } else if (key == "positive_label") {
      r.positive_label = ValueRule::parse(value);
      has_label_rule = true;
    } else if (key == "protected") {
      r.protected_column = value;
    } else if (key == "positive_group") {
      r.positive_group = ValueRule::parse(value);
      has_group_rule = true;
    } else if (key == "drop") {
      r.drop.push_back(value);
    } else if (key == "name") {
      r.name = value;
    } else {
      throw LoadError("unknown recipe key '" + key + "'");
    }
  }
  if (r.sources.empty() || r.label.empty() || r.protected_column.empty() || !has_label_rule ||
      !has_group_rule) {
    throw LoadError("recipe " + path.string() + " is incomplete");
  }
  return r;
}

Dataset load_recipe_dataset(const Recipe& recipe,
                            const std::optional<std::filesystem::path>& data_dir) {
  Table all;
  for (const auto& source : recipe.sources) {
    const auto file = data_dir ? *data_dir / source.path.filename() : source.path;
    Table t = read_table(file);
    for (const auto& [col, value] : source.constants) {
      t.header.push_back(col);
      for (auto& row : t.rows) row.push_back(value);
    }
    if (all.header.empty()) {
      all.header = t.header;
    } else if (all.header != t.header) {
      throw LoadError("recipe sources have different columns: " + file.string());
    }
    for (auto& row : t.rows) all.rows.push_back(std::move(row));
  }
  for (const auto& col : recipe.drop) {
    const Eigen::Index j = find_column(all.header, col);
    all.header.erase(all.header.begin() + j);
    for (auto& row : all.rows) row.erase(row.begin() + j);
  }
  return table_to_dataset(all, recipe.label, recipe.protected_column, recipe.positive_label,
                          recipe.positive_group);
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw LoadError("cannot write " + path.string());
  for (const auto& c : ds.columns) std::fprintf(f, "%s,", c.c_str());
  std::fprintf(f, "y,z\n");
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) std::fprintf(f, "%.17g,", ds.x(i, j));
    std::fprintf(f, "%d,%d\n", ds.y(i), ds.z(i));
  }
  if (std::fclose(f) != 0) throw LoadError("cannot write " + path.string());
}

void SyntheticConfig::validate() const {
  if (n < 10) throw InputError("synthetic n must be at least 10");
  if (p < 1) throw InputError("synthetic p must be at least 1");
  if (!(alignment >= -1.0 && alignment <= 1.0)) throw InputError("alignment must lie in [-1, 1]");
  if (p == 1 && std::abs(alignment) != 1.0) {
    throw InputError("alignment other than +-1 needs p >= 2");
  }
  if (!(skew > 0.0)) throw InputError("skew must be positive");
  if (!(logit_scale > 0.0)) throw InputError("logit scale must be positive");
}

SyntheticDataset synthesize(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const Eigen::Index n = config.n, p = config.p;

  SyntheticDataset out;
  Eigen::VectorXd ty(p), e(p);
  for (Eigen::Index j = 0; j < p; ++j) ty(j) = rng.normal();
  for (Eigen::Index j = 0; j < p; ++j) e(j) = rng.normal();
  ty.normalize();
  out.theta_y = ty;
  out.theta_z = config.alignment * ty;
  if (p > 1) {
    e -= e.dot(ty) * ty;
    e.normalize();
    out.theta_z += std::sqrt(1.0 - config.alignment * config.alignment) * e;
  }

  Dataset& ds = out.data;
  ds.x.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) ds.x(i, j) = rng.normal();
  ds.y.resize(n);
  ds.z.resize(n);
  auto draw = [&](double u) {
    if (config.deterministic) return u >= 0.0 ? 1 : -1;
    return rng.uniform() < 1.0 / (1.0 + std::exp(-config.logit_scale * u)) ? 1 : -1;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.y(i) = draw(ds.x.row(i).dot(out.theta_y));
    ds.z(i) = draw(ds.x.row(i).dot(out.theta_z));
  }

  std::vector<Eigen::Index> plus;
  for (Eigen::Index i = 0; i < n; ++i)
    if (ds.z(i) == 1) plus.push_back(i);
  if (plus.size() >= 2 && config.skew != 1.0) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(plus.size()), p);
    for (std::size_t k = 0; k < plus.size(); ++k) rows.row(static_cast<Eigen::Index>(k)) = ds.x.row(plus[k]);
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    const Eigen::VectorXd v = sym_eig(sample_covariance(rows)).eigenvectors.col(0);
    const double stretch = std::sqrt(config.skew) - 1.0;
    for (auto i : plus) {
      const Eigen::RowVectorXd c = ds.x.row(i) - mean;
      ds.x.row(i) += stretch * c.dot(v.transpose()) * v.transpose();
    }
  }

  for (Eigen::Index j = 0; j < p; ++j) ds.columns.push_back("x" + std::to_string(j + 1));
  ds.validate();
  out.correlation = correlation(ds.y, ds.z);
  return out;
}

double correlation(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  if (a.size() != b.size() || a.size() == 0) throw InputError("correlation: length mismatch");
  const Eigen::ArrayXd x = a.cast<double>().array() - a.cast<double>().mean();
  const Eigen::ArrayXd y = b.cast<double>().array() - b.cast<double>().mean();
  const double denom = std::sqrt((x * x).sum() * (y * y).sum());
  return denom > 0.0 ? (x * y).sum() / denom : 0.0;
}

Dataset standardize(const Dataset& ds) {
  Standardization params;
  params.mean = ds.x.colwise().mean().transpose();
  params.scale.resize(ds.x.cols());
  for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
    const double var = (ds.x.col(j).array() - params.mean(j)).square().mean();
    params.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return apply_standardization(ds, params);
}

Dataset apply_standardization(const Dataset& ds, const Standardization& params) {
  if (params.mean.size() != ds.x.cols() || params.scale.size() != ds.x.cols()) {
    throw InputError("standardization parameters do not match the column count");
  }
  Dataset out = ds;
  out.x = ((ds.x.rowwise() - params.mean.transpose()).array().rowwise() /
           params.scale.transpose().array())
              .matrix();
  out.standardization = params;
  return out;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(
    const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train fraction must lie in (0, 1)");
  }
  auto groups = cells(ds);
  const auto n_train = static_cast<Eigen::Index>(std::llround(train_fraction * ds.rows()));
  std::array<Eigen::Index, 4> take{};
  std::array<double, 4> rest{};
  Eigen::Index assigned = 0;
  for (int c = 0; c < 4; ++c) {
    const double quota = train_fraction * static_cast<double>(groups[c].size());
    take[c] = static_cast<Eigen::Index>(std::floor(quota));
    rest[c] = quota - std::floor(quota);
    assigned += take[c];
  }
  std::array<int, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rest[a] > rest[b]; });
  for (int k = 0; assigned < n_train; k = (k + 1) % 4) {
    const int c = order[k];
    if (take[c] < static_cast<Eigen::Index>(groups[c].size())) ++take[c], ++assigned;
  }

  Rng rng(seed);
  std::vector<Eigen::Index> train, test;
  for (int c = 0; c < 4; ++c) {
    rng.shuffle(groups[c]);
    for (std::size_t k = 0; k < groups[c].size(); ++k) {
      (static_cast<Eigen::Index>(k) < take[c] ? train : test).push_back(groups[c][k]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  require_both(ds, train, "training");
  require_both(ds, test, "test");
  return {train, test};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  const auto [train, test] = split_indices(ds, train_fraction, seed);
  return {ds.subset(train), ds.subset(test)};
}

std::vector<std::vector<Eigen::Index>> kfold(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw InputError("kfold: k must be at least 2");
  if (k > ds.rows()) throw DegenerateGroupError("kfold: more folds than rows");
  auto groups = cells(ds);
  Rng rng(seed);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(k));
  std::size_t pos = 0;
  for (auto& g : groups) {
    rng.shuffle(g);
    for (auto i : g) folds[pos++ % folds.size()].push_back(i);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::vector<Eigen::Index> complement(Eigen::Index n, const std::vector<Eigen::Index>& fold) {
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (auto i : fold) in[static_cast<std::size_t>(i)] = true;
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

}  // namespace fairsvm
