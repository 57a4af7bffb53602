#include "fairsvm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "fairsvm/errors.hpp"

namespace fairsvm {

namespace {

void check_inputs(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels,
                  const char* what) {
  if (scores.size() != labels.size()) {
    throw InputError(std::string(what) + ": scores and labels differ in length");
  }
  if (!scores.allFinite()) throw InputError(std::string(what) + ": non-finite score");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1 && labels(i) != -1) {
      throw InputError(std::string(what) + ": labels must be +1 or -1");
    }
  }
}

// Scores and groups of the rows with y = +1.
std::pair<Eigen::VectorXd, Eigen::VectorXi> positive_rows(const Eigen::VectorXd& scores,
                                                          const Eigen::VectorXi& z,
                                                          const Eigen::VectorXi& y) {
  const Eigen::Index m = (y.array() == 1).count();
  Eigen::VectorXd s(m);
  Eigen::VectorXi g(m);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 1) continue;
    s(k) = scores(i);
    g(k++) = z(i);
  }
  return {s, g};
}

}  // namespace

RocCurve roc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  check_inputs(scores, labels, "roc");
  const Eigen::Index n = scores.size();
  const Eigen::Index positives = (labels.array() == 1).count();
  const Eigen::Index negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw DegenerateLabelError("roc: both label values must be present");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  Eigen::Index tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double value = scores(order[k]);
    // every row tied at `value` crosses the threshold together
    for (; k < order.size() && scores(order[k]) == value; ++k) {
      if (labels(order[k]) == 1) {
        ++tp;
      } else {
        ++fp;
      }
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  return area;
}

double dp_delta(const Eigen::VectorXd& scores, const Eigen::VectorXi& z) {
  check_inputs(scores, z, "dp_delta");
  const Eigen::Index plus = (z.array() == 1).count();
  if (plus == 0 || plus == z.size()) {
    throw DegenerateGroupError("dp_delta: both protected groups must be present");
  }
  double delta = 0.0;
  for (const auto& p : roc(scores, z).points) delta = std::max(delta, std::abs(p.tpr - p.fpr));
  return delta;
}

double eo_delta(const Eigen::VectorXd& scores, const Eigen::VectorXi& z,
                const Eigen::VectorXi& y) {
  check_inputs(scores, z, "eo_delta");
  check_inputs(scores, y, "eo_delta");
  const auto [s, g] = positive_rows(scores, z, y);
  return dp_delta(s, g);
}

FairnessReport evaluate(const Eigen::VectorXd& scores, const Eigen::VectorXi& y,
                        const Eigen::VectorXi& z) {
  FairnessReport r;
  r.roc_y = roc(scores, y);
  r.auc_y = auc(r.roc_y);
  r.roc_z = roc(scores, z);
  r.dp_delta = dp_delta(scores, z);
  r.eo_delta = eo_delta(scores, z, y);

  const auto [s, g] = positive_rows(scores, z, y);
  r.roc_z_given_y_pos = roc(s, g);
  return r;
}

}  // namespace fairsvm
