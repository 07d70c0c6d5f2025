#include "licors/forecast.hpp"

#include <cmath>
#include <stdexcept>

#include "licors/util.hpp"

namespace licors {

namespace {

int nearest_centroid(const Eigen::VectorXd& z, const Eigen::MatrixXd& centroids) {
  int best = 0;
  double best_sq = (centroids.row(0).transpose() - z).squaredNorm();
  for (int c = 1; c < centroids.rows(); ++c) {
    double sq = (centroids.row(c).transpose() - z).squaredNorm();
    if (sq < best_sq) { best_sq = sq; best = c; }
  }
  return best;
}

}  // namespace

int assign_state(const Eigen::VectorXd& plc_row, const StateModel& model) {
  if (plc_row.size() != model.cluster_centroids.cols())
    throw std::invalid_argument("assign_state: past-cone dimension mismatch");
  Eigen::VectorXd z = standardize_row(plc_row, model.standardization);
  return model.cluster_to_state[nearest_centroid(z, model.cluster_centroids)];
}

Eigen::VectorXd predict_point(const Eigen::VectorXd& plc_row,
                              const StateModel& model) {
  return model.state_means.row(assign_state(plc_row, model));
}

Forecast predict_batch(const Eigen::MatrixXd& plc_rows, const StateModel& model,
                       int threads) {
  if (plc_rows.cols() != model.cluster_centroids.cols())
    throw std::invalid_argument("predict_batch: past-cone dimension mismatch");
  const int64_t N = plc_rows.rows();
  Forecast out;
  out.predictions.resize(N, model.n_f());
  out.per_point_state.resize(N);

  Eigen::MatrixXd Z = standardize(plc_rows, model.standardization);
  const Eigen::MatrixXd& C = model.cluster_centroids;
  Eigen::VectorXd csq = C.rowwise().squaredNorm();

  const int block = 256;
  const int64_t n_blocks = (N + block - 1) / block;
  parallel_for(n_blocks, threads, [&](int64_t bi) {
    const int64_t lo = bi * block;
    const int64_t hi = std::min<int64_t>(N, lo + block);
    Eigen::MatrixXd G = Z.middleRows(lo, hi - lo) * C.transpose();
    for (int64_t q = lo; q < hi; ++q) {
      // Cheap expansion scan first, exact recheck near the winner to keep
      // the lower-index tie-break bit-for-bit reliable.
      double best_e = csq[0] - 2.0 * G(q - lo, 0);
      for (int c = 1; c < C.rows(); ++c)
        best_e = std::min(best_e, csq[c] - 2.0 * G(q - lo, c));
      double cut = best_e + 1e-9 * (1.0 + std::abs(best_e));
      int winner = -1;
      double winner_sq = 0.0;
      for (int c = 0; c < C.rows(); ++c) {
        double e = csq[c] - 2.0 * G(q - lo, c);
        if (e > cut) continue;
        double sq = (C.row(c).transpose() - Z.row(q).transpose()).squaredNorm();
        if (winner < 0 || sq < winner_sq) { winner_sq = sq; winner = c; }
      }
      int s = model.cluster_to_state[winner];
      out.per_point_state[q] = s;
      out.predictions.row(q) = model.state_means.row(s);
    }
  });
  return out;
}

SmoothResult riemann_smooth(const Eigen::VectorXd& query_plc,
                            const Eigen::MatrixXd& train_plc,
                            const Eigen::MatrixXd& train_flc, double h_x) {
  if (!(h_x > 0.0)) throw std::invalid_argument("riemann_smooth: h_x must be positive");
  if (train_plc.rows() != train_flc.rows() || train_plc.rows() == 0)
    throw std::invalid_argument("riemann_smooth: bad training data");
  if (query_plc.size() != train_plc.cols())
    throw std::invalid_argument("riemann_smooth: dimension mismatch");

  Standardization s = compute_standardization(train_plc);
  Eigen::MatrixXd Z = standardize(train_plc, s);
  Eigen::VectorXd zq = standardize_row(query_plc, s);

  Eigen::VectorXd sq = (Z.rowwise() - zq.transpose()).rowwise().squaredNorm();
  // Scalar std::exp: the vectorized exp clamps very negative arguments to a
  // denormal instead of 0, which would mask genuine underflow here.
  Eigen::VectorXd w =
      sq.unaryExpr([h_x](double d) { return std::exp(-d / h_x); });
  double total = w.sum();

  SmoothResult out;
  if (!(total > 0.0) || !std::isfinite(total)) {
    int nn;
    sq.minCoeff(&nn);
    out.value = train_flc.row(nn);
    out.nn_fallback = true;
    return out;
  }
  out.value = (train_flc.transpose() * w) / total;
  return out;
}

SmoothResult lebesgue_smooth(const Eigen::VectorXd& query_plc,
                             const Eigen::MatrixXd& train_plc,
                             const Eigen::MatrixXd& train_flc, double h_x,
                             double h_y) {
  if (!(h_y > 0.0)) throw std::invalid_argument("lebesgue_smooth: h_y must be positive");
  const int64_t n = train_plc.rows();

  // Stage 1: pilot predictions at every training point and at the query.
  Eigen::MatrixXd pilots(n, train_flc.cols());
  bool any_fallback = false;
  for (int64_t i = 0; i < n; ++i) {
    SmoothResult r = riemann_smooth(train_plc.row(i), train_plc, train_flc, h_x);
    pilots.row(i) = r.value;
    any_fallback = any_fallback || r.nn_fallback;
  }
  SmoothResult pilot_q = riemann_smooth(query_plc, train_plc, train_flc, h_x);
  any_fallback = any_fallback || pilot_q.nn_fallback;

  // Stage 2: weights in prediction space.
  Eigen::VectorXd sq =
      (pilots.rowwise() - pilot_q.value.transpose()).rowwise().squaredNorm();
  Eigen::VectorXd w =
      sq.unaryExpr([h_y](double d) { return std::exp(-d / h_y); });
  double total = w.sum();

  SmoothResult out;
  out.nn_fallback = any_fallback;
  if (!(total > 0.0) || !std::isfinite(total)) {
    int nn;
    sq.minCoeff(&nn);
    out.value = train_flc.row(nn);
    out.nn_fallback = true;
    return out;
  }
  out.value = (train_flc.transpose() * w) / total;
  return out;
}

double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals) {
  if (predictions.rows() != actuals.rows() || predictions.cols() != actuals.cols())
    throw std::invalid_argument("mse: shape mismatch");
  if (predictions.size() == 0) throw std::invalid_argument("mse: empty input");
  return (predictions - actuals).array().square().mean();
}

}  // namespace licors
