// Reconstruction of predictive states: merge pre-clusters (or per-row
// neighborhoods) whose conditional future-cone samples cannot be told apart,
// summarize each state's predictive distribution, and build the equivalence
// matrix used for small-instance validation.
//
// The merge scan walks units in ascending index order. For each unit k that
// still owns its state, every later unmerged unit j is tested against k's
// pooled sample; failing to reject (p >= alpha) relabels j into k and pools
// j's sample before the next test. Scans repeat until one completes with no
// merge. States are numbered densely in order of first appearance.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "licors/cones.hpp"
#include "licors/neighborhoods.hpp"
#include "licors/two_sample.hpp"

namespace licors {

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // coordinates with zero spread get sd 1
};

Standardization compute_standardization(const Eigen::MatrixXd& X);
Eigen::MatrixXd standardize(const Eigen::MatrixXd& X, const Standardization& s);
Eigen::VectorXd standardize_row(const Eigen::VectorXd& row,
                                const Standardization& s);

enum class FitMode { PreClustered, DirectKnn, DirectDelta };

// Everything needed to map a new past-cone row to a state and emit the
// state's predictive mean. Centroids live in standardized coordinates; in
// the direct modes they are the training rows themselves.
struct StateModel {
  ConeGeometry geometry;
  int spatial_dims = 1;
  Standardization standardization;
  Eigen::MatrixXd cluster_centroids;  // K x n_p
  std::vector<int> cluster_to_state;  // K -> 0..m-1, surjective
  Eigen::MatrixXd state_means;        // m x n_f
  std::vector<int64_t> state_sample_counts;
  double alpha = 0.05;
  FitMode mode = FitMode::DirectKnn;
  double mode_param = 0.0;  // K, k, or delta

  int n_states() const { return static_cast<int>(state_means.rows()); }
  int n_p() const { return static_cast<int>(cluster_centroids.cols()); }
  int n_f() const { return static_cast<int>(state_means.cols()); }

  // Versioned field-tagged binary; all reals little-endian f64.
  std::vector<uint8_t> serialize() const;
  static StateModel deserialize(const std::vector<uint8_t>& bytes);
  void save(const std::string& path) const;
  static StateModel load(const std::string& path);
  // Canonical text rendering (JSON, fixed field order) for diffing.
  std::string to_json() const;
  void save_text(const std::string& path) const;
};

// One pre-merge unit: a cluster or a per-row neighborhood.
struct MergeUnit {
  std::vector<int> member_rows;   // rows labeled with this unit
  std::vector<int> sample_rows;   // sorted; rows forming the unit's test sample
  std::vector<int> summary_rows;  // rows entering the state summary; empty = member_rows
};

// View of a pooled state sample handed to the tester. sorted_values is
// non-null only for univariate future cones.
struct MergeSample {
  const Eigen::MatrixXd* flc = nullptr;
  const std::vector<int>* rows = nullptr;
  const std::vector<double>* sorted_values = nullptr;
};

using MergeTester =
    std::function<TestOutcome(const MergeSample&, const MergeSample&)>;

// Default tester: KS on the pre-sorted pooled values when n_f = 1, otherwise
// the staged mean-pretest / random-projection dispatch. Projection seeds are
// drawn from an internal counter, so calls must happen in a deterministic
// order (the merge scan is sequential).
MergeTester make_default_tester(const TestSettings& settings);

struct MergeOptions {
  int max_passes = 0;  // 0 = rescan until a pass performs no merge
};

struct MergeResult {
  std::vector<int> unit_to_state;
  std::vector<int> row_states;  // -1 for rows not owned by any unit
  Eigen::MatrixXd state_means;
  std::vector<int64_t> state_sample_counts;
  int n_states = 0;
  int passes = 0;
  int64_t tests_run = 0;
};

MergeResult merge_states(const Eigen::MatrixXd& flc,
                         const std::vector<MergeUnit>& units, double alpha,
                         const MergeTester& tester,
                         const MergeOptions& options = {});

// Pre-clustered labeling. Singleton clusters are first reassigned to the
// nearest cluster (by centroid distance) holding at least two rows, since a
// one-point sample cannot be tested.
MergeResult merge_states(const Eigen::MatrixXd& flc,
                         const ClusterAssignment& clusters, double alpha,
                         const MergeTester& tester,
                         const MergeOptions& options = {});

// Direct labeling: one unit per row, sampled through its neighborhood.
MergeResult merge_states(const Eigen::MatrixXd& flc,
                         const std::vector<NeighborhoodIndex>& neighborhoods,
                         double alpha, const MergeTester& tester,
                         const MergeOptions& options = {});

// Thins member_rows so that no two kept rows have future-cone stencils
// sharing a lattice cell (greedy scan in row order). No-op when h_f = 0.
std::vector<int> exclude_overlaps(const std::vector<Coord>& coords,
                                  const ConeGeometry& geometry,
                                  const std::vector<int>& spatial_extent,
                                  Boundary boundary,
                                  const std::vector<int>& member_rows);

struct StateSummary {
  Eigen::MatrixXd means;              // m x n_f
  std::vector<int64_t> counts;        // per state
  std::vector<double> hist_edges;     // shared grid; empty when n_f > 1
  Eigen::MatrixXd hist_counts;        // m x bins
};

StateSummary state_summary(const Eigen::MatrixXd& flc,
                           const std::vector<int>& state_labels,
                           int hist_bins = 30);

struct EquivalenceMatrix {
  int n = 0;
  std::vector<uint8_t> a;  // row-major n x n, symmetric, unit diagonal
  uint8_t at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
  bool operator==(const EquivalenceMatrix& o) const = default;
};

// a[i][j] = 1 iff rows i and j share a state. Memory is quadratic, so N is
// capped; past the cap, compare sampled row pairs instead of materializing.
EquivalenceMatrix equivalence_matrix(const std::vector<int>& state_labels,
                                     int cap = 5000);

}  // namespace licors
