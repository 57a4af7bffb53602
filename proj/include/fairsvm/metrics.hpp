#pragma once

#include <vector>

#include <Eigen/Dense>

namespace fairsvm {

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Points from (0,0) to (1,1), one per distinct score. A score counts as a
/// positive prediction at threshold t when score >= t.
struct RocCurve {
  std::vector<RocPoint> points;
};

struct FairnessReport {
  double auc_y = 0.0;
  double dp_delta = 0.0;
  double eo_delta = 0.0;
  RocCurve roc_y;
  RocCurve roc_z;
  RocCurve roc_z_given_y_pos;
};

/// Labels must be +-1 with both present (DegenerateLabelError otherwise).
RocCurve roc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels);

/// Trapezoid rule.
double auc(const RocCurve& curve);

/// max_t |P(score >= t | z=+1) - P(score >= t | z=-1)|.
/// Throws DegenerateGroupError when a group is empty.
double dp_delta(const Eigen::VectorXd& scores, const Eigen::VectorXi& z);

/// dp_delta over the rows with y = +1.
double eo_delta(const Eigen::VectorXd& scores, const Eigen::VectorXi& z,
                const Eigen::VectorXi& y);

FairnessReport evaluate(const Eigen::VectorXd& scores, const Eigen::VectorXi& y,
                        const Eigen::VectorXi& z);

}  // namespace fairsvm
