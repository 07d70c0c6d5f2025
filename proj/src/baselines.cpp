#include "licors/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace licors {

namespace {

void check_range(const Field& field, TrainRange r) {
  if (r.t_begin < 0 || r.t_end > field.T() || r.t_begin >= r.t_end)
    throw std::invalid_argument("baselines: empty or out-of-range train range");
}

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

SiteMeanModel fit_site_mean(const Field& field, TrainRange range) {
  check_range(field, range);
  SiteMeanModel m;
  m.means = Eigen::VectorXd::Zero(field.n_space());
  for (int t = range.t_begin; t < range.t_end; ++t)
    for (int r = 0; r < field.n_space(); ++r) m.means[r] += field.at(r, t);
  m.means /= static_cast<double>(range.t_end - range.t_begin);
  return m;
}

ArModel fit_ar(const Field& field, int p, TrainRange range) {
  check_range(field, range);
  if (p < 1) throw std::invalid_argument("fit_ar: p must be positive");
  if (range.t_end - range.t_begin <= p + 1)
    throw std::invalid_argument("fit_ar: train range too short for the lag order");

  const int n_obs = range.t_end - range.t_begin - p;
  const int dim = p + 1;
  ArModel m;
  m.p = p;
  m.coef.resize(field.n_space(), dim);

  Eigen::MatrixXd X(n_obs, dim);
  Eigen::VectorXd y(n_obs);
  for (int site = 0; site < field.n_space(); ++site) {
    for (int i = 0; i < n_obs; ++i) {
      int t = range.t_begin + p + i;
      X(i, 0) = 1.0;
      for (int l = 1; l <= p; ++l) X(i, l) = field.at(site, t - l);
      y[i] = field.at(site, t);
    }
    Eigen::MatrixXd XtX = X.transpose() * X;
    Eigen::VectorXd Xty = X.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(XtX);
    Eigen::VectorXd beta;
    bool bad = ldlt.info() != Eigen::Success || !ldlt.isPositive();
    if (!bad) {
      Eigen::VectorXd piv = ldlt.vectorD();
      double dmax = piv.cwiseAbs().maxCoeff();
      bad = !(dmax > 0.0) || piv.minCoeff() < 1e-10 * dmax;
    }
    if (!bad) {
      beta = ldlt.solve(Xty);
      bad = !beta.allFinite();
    }
    if (bad) {
      XtX.diagonal().array() += 1e-8;
      beta = XtX.ldlt().solve(Xty);
      m.ridge_fallback = true;
    }
    m.coef.row(site) = beta.transpose();
  }
  return m;
}

LassoFit lasso_cd(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  double lambda, const LassoOptions& options) {
  if (X.rows() != y.size() || X.rows() == 0)
    throw std::invalid_argument("lasso_cd: bad shapes");
  if (lambda < 0.0) throw std::invalid_argument("lasso_cd: negative lambda");
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());

  Eigen::VectorXd col_mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(d);
  Eigen::MatrixXd Z = X;
  double y_mean = 0.0;
  Eigen::VectorXd yc = y;
  if (options.intercept) {
    y_mean = y.mean();
    yc.array() -= y_mean;
    col_mean = X.colwise().mean();
    Z.rowwise() -= col_mean.transpose();
  }
  if (options.standardize) {
    for (int j = 0; j < d; ++j) {
      double s = std::sqrt(Z.col(j).squaredNorm() / n);
      col_scale[j] = s > 1e-12 ? s : 1.0;
      Z.col(j) /= col_scale[j];
    }
  }

  Eigen::VectorXd colsq(d);
  for (int j = 0; j < d; ++j) colsq[j] = Z.col(j).squaredNorm();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd resid = yc;
  LassoFit fit;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int j = 0; j < d; ++j) {
      if (colsq[j] <= 0.0) { beta[j] = 0.0; continue; }
      double rho = Z.col(j).dot(resid) + colsq[j] * beta[j];
      double nb = soft_threshold(rho, lambda) / colsq[j];
      double delta = nb - beta[j];
      if (delta != 0.0) {
        resid -= Z.col(j) * delta;
        beta[j] = nb;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    fit.sweeps = sweep + 1;
    fit.objective_trace.push_back(0.5 * resid.squaredNorm() +
                                  lambda * beta.lpNorm<1>());
    if (max_change < options.tol) break;
    if (sweep + 1 == options.max_sweeps) fit.cap_hit = true;
  }

  fit.coef = beta.cwiseQuotient(col_scale);
  fit.intercept = options.intercept ? y_mean - fit.coef.dot(col_mean) : 0.0;
  return fit;
}

namespace {

std::vector<int> patch_starts(int n_space, int patch_size) {
  std::vector<int> starts;
  for (int s = 0; s < n_space; s += patch_size) starts.push_back(s);
  return starts;
}

// Regressor row for predicting time t from the patch's p lags.
Eigen::RowVectorXd var_row(const Field& field, int start, int size, int p,
                           int t) {
  Eigen::RowVectorXd row(p * size);
  for (int l = 1; l <= p; ++l)
    for (int s = 0; s < size; ++s)
      row[(l - 1) * size + s] = field.at(start + s, t - l);
  return row;
}

}  // namespace

PatchVarModel fit_var_lasso(const Field& field, int p, int patch_size,
                            double lambda, TrainRange range) {
  check_range(field, range);
  if (p < 1 || patch_size < 1)
    throw std::invalid_argument("fit_var_lasso: bad p or patch size");
  if (range.t_end - range.t_begin <= p * patch_size)
    throw std::invalid_argument("fit_var_lasso: train range too short");

  PatchVarModel m;
  m.p = p;
  m.patch_size = patch_size;
  m.lambda = lambda;
  m.patch_begin = patch_starts(field.n_space(), patch_size);

  const int n_obs = range.t_end - range.t_begin - p;
  for (int start : m.patch_begin) {
    const int size = std::min(patch_size, field.n_space() - start);
    Eigen::MatrixXd X(n_obs, p * size);
    Eigen::MatrixXd Y(n_obs, size);
    for (int i = 0; i < n_obs; ++i) {
      int t = range.t_begin + p + i;
      X.row(i) = var_row(field, start, size, p, t);
      for (int s = 0; s < size; ++s) Y(i, s) = field.at(start + s, t);
    }
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(1 + p * size, size);
    for (int s = 0; s < size; ++s) {
      LassoFit f = lasso_cd(X, Y.col(s), lambda);
      coef(0, s) = f.intercept;
      coef.block(1, s, p * size, 1) = f.coef;
      m.sweep_cap_hit = m.sweep_cap_hit || f.cap_hit;
    }
    m.coef.push_back(std::move(coef));
  }
  return m;
}

Eigen::VectorXd baseline_predict(const SiteMeanModel& m, const Field& field,
                                 int t) {
  if (t < 0 || t >= field.T())
    throw std::invalid_argument("baseline_predict: t out of range");
  return m.means;
}

Eigen::VectorXd baseline_predict(const ArModel& m, const Field& field, int t) {
  if (t < m.p || t >= field.T())
    throw std::invalid_argument("baseline_predict: insufficient history for the lag order");
  Eigen::VectorXd out(field.n_space());
  for (int site = 0; site < field.n_space(); ++site) {
    double v = m.coef(site, 0);
    for (int l = 1; l <= m.p; ++l) v += m.coef(site, l) * field.at(site, t - l);
    out[site] = v;
  }
  return out;
}

Eigen::VectorXd baseline_predict(const PatchVarModel& m, const Field& field,
                                 int t) {
  if (t < m.p || t >= field.T())
    throw std::invalid_argument("baseline_predict: insufficient history for the lag order");
  Eigen::VectorXd out(field.n_space());
  for (size_t pi = 0; pi < m.patch_begin.size(); ++pi) {
    int start = m.patch_begin[pi];
    int size = std::min(m.patch_size, field.n_space() - start);
    Eigen::RowVectorXd row = var_row(field, start, size, m.p, t);
    Eigen::RowVectorXd pred =
        m.coef[pi].row(0) + row * m.coef[pi].bottomRows(m.p * size);
    out.segment(start, size) = pred.transpose();
  }
  return out;
}

namespace {

// One-step MSE of a fitted model over [t_begin, t_end).
template <typename Model>
double one_step_mse(const Model& m, const Field& field, int t_begin, int t_end) {
  double sse = 0.0;
  int64_t n = 0;
  for (int t = t_begin; t < t_end; ++t) {
    Eigen::VectorXd pred = baseline_predict(m, field, t);
    for (int r = 0; r < field.n_space(); ++r) {
      double e = pred[r] - field.at(r, t);
      sse += e * e;
      ++n;
    }
  }
  return n > 0 ? sse / static_cast<double>(n) : std::numeric_limits<double>::infinity();
}

}  // namespace

ArModel select_and_fit_ar(const Field& field, TrainRange range,
                          const std::vector<int>& p_grid) {
  check_range(field, range);
  if (p_grid.empty()) throw std::invalid_argument("select_and_fit_ar: empty grid");
  const int len = range.t_end - range.t_begin;
  const int fit_end = range.t_begin + std::max(2, (len * 4) / 5);

  int best_p = p_grid.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (int p : p_grid) {
    if (fit_end - range.t_begin <= p + 1) continue;
    ArModel cand = fit_ar(field, p, {range.t_begin, fit_end});
    int val_begin = std::max(fit_end, range.t_begin + p);
    if (val_begin >= range.t_end) continue;
    double v = one_step_mse(cand, field, val_begin, range.t_end);
    if (v < best_mse) { best_mse = v; best_p = p; }
  }
  return fit_ar(field, best_p, range);
}

PatchVarModel select_and_fit_var_lasso(const Field& field, TrainRange range,
                                       const VarSelection& sel) {
  check_range(field, range);
  const int len = range.t_end - range.t_begin;
  const int fit_end = range.t_begin + std::max(2, (len * 4) / 5);

  // Shared log-spaced lambda grid anchored at the largest gradient over
  // patches and orders, so every candidate path starts fully shrunk.
  double lambda_max = 0.0;
  auto starts = patch_starts(field.n_space(), sel.patch_size);
  for (int p : sel.p_grid) {
    if (fit_end - range.t_begin <= p * sel.patch_size) continue;
    int n_obs = fit_end - range.t_begin - p;
    for (int start : starts) {
      int size = std::min(sel.patch_size, field.n_space() - start);
      Eigen::MatrixXd X(n_obs, p * size);
      Eigen::MatrixXd Y(n_obs, size);
      for (int i = 0; i < n_obs; ++i) {
        int t = range.t_begin + p + i;
        X.row(i) = var_row(field, start, size, p, t);
        for (int s = 0; s < size; ++s) Y(i, s) = field.at(start + s, t);
      }
      Eigen::MatrixXd Z = X.rowwise() - X.colwise().mean();
      for (int j = 0; j < Z.cols(); ++j) {
        double sc = std::sqrt(Z.col(j).squaredNorm() / n_obs);
        if (sc > 1e-12) Z.col(j) /= sc;
      }
      Eigen::MatrixXd Yc = Y.rowwise() - Y.colwise().mean();
      lambda_max = std::max(lambda_max,
                            (Z.transpose() * Yc).cwiseAbs().maxCoeff());
    }
  }
  if (lambda_max <= 0.0) lambda_max = 1.0;

  std::vector<double> lambdas;
  for (int i = 0; i < sel.lambda_grid_size; ++i) {
    double f = sel.lambda_grid_size == 1
                   ? 1.0
                   : static_cast<double>(i) / (sel.lambda_grid_size - 1);
    lambdas.push_back(lambda_max * std::pow(sel.lambda_min_ratio, f));
  }

  int best_p = sel.p_grid.front();
  double best_lambda = lambdas.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (int p : sel.p_grid) {
    if (fit_end - range.t_begin <= p * sel.patch_size) continue;
    for (double lambda : lambdas) {
      PatchVarModel cand =
          fit_var_lasso(field, p, sel.patch_size, lambda, {range.t_begin, fit_end});
      int val_begin = std::max(fit_end, range.t_begin + p);
      if (val_begin >= range.t_end) continue;
      double v = one_step_mse(cand, field, val_begin, range.t_end);
      if (v < best_mse) { best_mse = v; best_p = p; best_lambda = lambda; }
    }
  }
  return fit_var_lasso(field, best_p, sel.patch_size, best_lambda, range);
}

}  // namespace licors
