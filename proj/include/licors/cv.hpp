// Split-half cross-validation over control settings (past horizon, test
// level), the forecasting competition driver, and excess-risk evaluation.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "licors/field.hpp"
#include "licors/fit.hpp"

namespace licors {

// First floor(T/2) steps and the remainder. In the default strict protocol,
// test cones come from the second half alone, so their past cones never
// reach into training data; the lenient protocol lets test cones use the
// last h_p training slices as history.
std::pair<Field, Field> split_half(const Field& field);

struct CvGrid {
  std::vector<int> h_p_values;
  std::vector<double> alpha_values;
  int c = 1;
  int h_f = 0;
  FitMode mode = FitMode::DirectKnn;
  int K = 200;
  int k = 50;
  int n_proj = 10;
};

struct CvCell {
  int h_p = 0;
  double alpha = 0.0;
  double test_mse = 0.0;
  int m_hat = 0;
  bool valid = false;
  std::string error;
};

struct EvalReport {
  std::vector<CvCell> table;  // (h_p major, alpha minor) order
  int chosen = -1;            // index into table, -1 when no cell succeeded
  double in_sample_mse = 0.0;
  double future_mse = 0.0;
  double independent_mse = 0.0;  // filled by drivers that hold a fresh realization
  bool has_independent = false;
  // Chosen settings scored on the next replicate against its oracle cell;
  // filled by run_cv_study, at least 1 up to floating point.
  double excess_risk_ratio = 0.0;
  bool has_excess_risk = false;
  StateModel chosen_model;

  const CvCell& chosen_cell() const { return table.at(chosen); }
};

// Fits every grid cell on the first half and scores it on the second.
// Failures are recorded per cell and never abort the grid. Cell results
// depend only on (field, seed, h_p, alpha), so extending the grid leaves
// existing cells untouched. Ties in test MSE resolve toward smaller h_p,
// then larger alpha.
EvalReport grid_search(const Field& field, const CvGrid& grid, uint64_t seed,
                       bool strict_split = true, int threads = 0);

// Ratio of the test MSE that the settings chosen on an earlier realization
// achieve on this report's realization, over the best test MSE in this
// report's table. At least 1 up to floating-point division.
double excess_risk(const EvalReport& next_report, int chosen_h_p,
                   double chosen_alpha);

struct CvStudyConfig {
  CvGrid grid;
  int n_space = 100;
  int T = 200;
  int burn_in = 100;
  bool strict_split = true;
  int threads = 0;
};

struct CvStudy {
  std::vector<EvalReport> reports;       // one per replicate
  std::vector<double> excess_risks;      // pairs (i, i+1)
};

// Simulates n_replicates fields, cross-validates each, evaluates the chosen
// model on an independent realization, and computes excess risks over
// consecutive replicate pairs.
CvStudy run_cv_study(int n_replicates, uint64_t seed, const CvStudyConfig& cfg);

void write_cv_table(std::ostream& os, const std::vector<EvalReport>& reports);
void write_excess_risk(std::ostream& os, const CvStudy& study);

// ---------------------------------------------------------------------------
// Forecasting competition
// ---------------------------------------------------------------------------

struct CompetitionConfig {
  int n_space = 100;
  int T = 200;
  int burn_in = 100;
  int h_p = 2;
  int c = 1;
  double alpha = 0.05;
  int k = 50;   // direct variant
  int K = 200;  // pre-clustered variant
  int threads = 0;
};

struct CompetitionRow {
  int replicate = 0;
  std::string method;
  std::string setting;
  double in_mse = 0.0;
  double out_mse = 0.0;
};

struct CompetitionResult {
  std::vector<CompetitionRow> rows;  // (replicate, fixed method order)
  std::string to_csv() const;
};

// Per replicate: simulate, split in time, and score six one-step-ahead
// predictors on shared in/out-of-sample targets: the exact conditional mean,
// both estimator variants, the per-site time average, per-site AR, and
// per-patch lasso VAR. Replicate failures are skipped, not fatal.
CompetitionResult run_competition(int n_replicates, uint64_t seed,
                                  const CompetitionConfig& cfg = {});

}  // namespace licors
