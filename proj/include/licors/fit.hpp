// End-to-end estimation pipeline: extract cones, standardize past-cone rows,
// group them (k-means++ pre-clustering, or per-row kNN / delta-ball
// neighborhoods for direct estimation), merge groups into predictive states,
// and package everything needed for prediction into a StateModel.
#pragma once

#include <cstdint>
#include <optional>

#include "licors/cones.hpp"
#include "licors/field.hpp"
#include "licors/forecast.hpp"
#include "licors/states.hpp"

namespace licors {

struct FitConfig {
  ConeGeometry geometry;
  FitMode mode = FitMode::DirectKnn;
  int K = 200;        // pre-clustered mode
  int k = 50;         // direct kNN mode
  double delta = 1.0; // direct delta mode, in standardized units
  double alpha = 0.05;
  uint64_t seed = 0;
  int kmeans_max_iter = 50;
  int n_proj = 10;             // projections for multivariate future cones
  bool overlap_exclusion = true;  // thin samples when h_f >= 1
  MergeOptions merge;
  int threads = 0;
};

// The alpha-independent part of a fit (cones, standardization, grouping).
// Cross-validation reuses one FitBase across a whole row of alpha values.
struct FitBase {
  ConeSet cones;
  Standardization standardization;
  Eigen::MatrixXd z;  // standardized past cones
  FitConfig config;
  std::optional<ClusterAssignment> clusters;
  std::vector<NeighborhoodIndex> neighborhoods;  // direct modes
  std::vector<int> unsampled_rows;  // delta mode: rows without a testable ball
};

FitBase prepare_fit(const Field& train, const FitConfig& config);

struct FitReport {
  StateModel model;
  int n_states = 0;
  int64_t tests_run = 0;
  int passes = 0;
  double max_cluster_diameter = 0.0;  // pre-clustered mode only
};

FitReport complete_fit(const FitBase& base, double alpha);

inline FitReport fit_licors(const Field& train, const FitConfig& config) {
  return complete_fit(prepare_fit(train, config), config.alpha);
}

struct EvalOutput {
  double mse = 0.0;
  int64_t n_rows = 0;
  Forecast forecast;
  std::vector<Coord> coords;  // global (r, t) per forecast row
};

// Predicts every cone whose present time lies in [t_begin, t_end) and scores
// it against the observed future cone. Requires t_begin >= h_p and
// t_end + h_f <= T so each stencil fits.
EvalOutput evaluate_model(const Field& field, const StateModel& model,
                          int t_begin, int t_end, int threads = 0);

// Same, on an already-extracted cone set.
EvalOutput evaluate_cones(const ConeSet& cones, const StateModel& model,
                          int threads = 0);

}  // namespace licors
