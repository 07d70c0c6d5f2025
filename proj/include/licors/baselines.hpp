// Competing forecasters: per-site time average, per-site AR(p) by OLS, and
// per-patch VAR(p) fit equation-by-equation with lasso regularization via
// cyclic coordinate descent. All are one-step-ahead predictors over sites.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "licors/field.hpp"

namespace licors {

// Time range [t_begin, t_end) used for fitting.
struct TrainRange {
  int t_begin = 0;
  int t_end = 0;
};

struct SiteMeanModel {
  Eigen::VectorXd means;  // per site
};

SiteMeanModel fit_site_mean(const Field& field, TrainRange range);

struct ArModel {
  int p = 0;
  // Per site: [intercept, coef lag-1, ..., coef lag-p].
  Eigen::MatrixXd coef;  // n_space x (p+1)
  bool ridge_fallback = false;
};

// Per-site OLS with intercept on p lags; singular normal equations fall back
// to a tiny ridge and flag the model.
ArModel fit_ar(const Field& field, int p, TrainRange range);

struct PatchVarModel {
  int p = 0;
  int patch_size = 0;
  double lambda = 0.0;
  std::vector<int> patch_begin;  // first site of each patch
  // Per patch: (1 + p * patch) x patch coefficient matrix, intercept first
  // row; columns are responses (sites within the patch).
  std::vector<Eigen::MatrixXd> coef;
  bool sweep_cap_hit = false;
};

PatchVarModel fit_var_lasso(const Field& field, int p, int patch_size,
                            double lambda, TrainRange range);

// One-step-ahead forecasts for all sites at time t, from actual history.
Eigen::VectorXd baseline_predict(const SiteMeanModel& m, const Field& field, int t);
Eigen::VectorXd baseline_predict(const ArModel& m, const Field& field, int t);
Eigen::VectorXd baseline_predict(const PatchVarModel& m, const Field& field, int t);

struct LassoOptions {
  bool standardize = true;   // z-score regressors internally
  bool intercept = true;     // unpenalized
  double tol = 1e-7;         // max coefficient change per sweep
  int max_sweeps = 10000;
};

struct LassoFit {
  Eigen::VectorXd coef;  // on the original scale
  double intercept = 0.0;
  int sweeps = 0;
  bool cap_hit = false;
  std::vector<double> objective_trace;  // 0.5*RSS + lambda*|coef|_1 per sweep
};

// Minimizes 0.5 * |y - b0 - X b|^2 + lambda * |b|_1 by cyclic coordinate
// descent with soft-thresholding.
LassoFit lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  double lambda, const LassoOptions& options = {});

// Hyperparameter selection on an 80/20 time split of the training range:
// candidates are fit on the early part and scored by one-step MSE on the
// tail; the winner is refit on the whole range.
ArModel select_and_fit_ar(const Field& field, TrainRange range,
                          const std::vector<int>& p_grid = {1, 2, 3});

struct VarSelection {
  std::vector<int> p_grid = {1, 2, 3};
  int patch_size = 5;
  int lambda_grid_size = 8;
  double lambda_min_ratio = 1e-3;
};

PatchVarModel select_and_fit_var_lasso(const Field& field, TrainRange range,
                                       const VarSelection& sel = {});

}  // namespace licors
