// Point forecasting: map a new past-cone row to a predictive state and emit
// that state's mean future cone. Kernel smoothers over past-cone distance
// (input space) and over pilot predictions (output space) are provided as
// standalone alternative predictors; they are not part of the state pipeline.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "licors/states.hpp"

namespace licors {

// Nearest cluster centroid in standardized coordinates decides the cluster;
// the cluster-to-state map decides the state. Ties break toward the lower
// centroid index. The row is raw (unstandardized).
int assign_state(const Eigen::VectorXd& plc_row, const StateModel& model);

// state_means[assign_state(row)].
Eigen::VectorXd predict_point(const Eigen::VectorXd& plc_row,
                              const StateModel& model);

struct Forecast {
  Eigen::MatrixXd predictions;       // N x n_f
  std::vector<int> per_point_state;  // N
};

Forecast predict_batch(const Eigen::MatrixXd& plc_rows, const StateModel& model,
                       int threads = 0);

struct SmoothResult {
  Eigen::VectorXd value;
  bool nn_fallback = false;  // all kernel weights underflowed; nearest row used
};

// Kernel-weighted mean of train_flc with Gaussian weights
// exp(-d^2 / h_x) on standardized past-cone distance.
SmoothResult riemann_smooth(const Eigen::VectorXd& query_plc,
                            const Eigen::MatrixXd& train_plc,
                            const Eigen::MatrixXd& train_flc, double h_x);

// Two-stage smoother: pilot predictions for every training point and the
// query via riemann_smooth, then Gaussian weights exp(-|pilot_i - pilot_q|^2
// / h_y) applied to train_flc.
SmoothResult lebesgue_smooth(const Eigen::VectorXd& query_plc,
                             const Eigen::MatrixXd& train_plc,
                             const Eigen::MatrixXd& train_flc, double h_x,
                             double h_y);

// Mean squared error over all entries.
double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals);

}  // namespace licors
