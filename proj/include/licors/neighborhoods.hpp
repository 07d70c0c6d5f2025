// Grouping of past-cone configurations into conditional samples:
// k-means++ pre-clustering, k-nearest-neighbor and delta-ball neighborhoods,
// and pairwise disjointification of overlapping neighborhoods.
//
// Distances are Euclidean; callers are expected to standardize rows first
// (the fit pipeline z-scores per coordinate with train-set statistics).
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace licors {

struct ClusterAssignment {
  std::vector<int> labels;    // per row, 0..K-1
  Eigen::MatrixXd centroids;  // K x n_p
  int K = 0;
  std::vector<double> objective_trace;  // within-cluster SSE after each Lloyd step
  double max_diameter_bound = 0.0;      // 2 * max distance of a point to its centroid
};

// Lloyd's algorithm with k-means++ seeding. Deterministic given the seed and
// invariant under row permutation: seeding walks rows in a canonical order
// (lexicographic by row content), assignment ties break toward the lower
// centroid index, and empty clusters are repaired by splitting the largest
// cluster at its farthest member.
ClusterAssignment kmeanspp_fit(const Eigen::MatrixXd& points, int K,
                               uint64_t seed, int max_iter = 50);

struct NeighborhoodMode {
  enum Kind { Delta, Knn } kind = Knn;
  double delta = 0.0;
  int k = 0;
  static NeighborhoodMode knn(int k) { return {Knn, 0.0, k}; }
  static NeighborhoodMode ball(double delta) { return {Delta, delta, 0}; }
};

struct NeighborhoodIndex {
  int anchor = 0;
  std::vector<int> members;  // sorted row indices, anchor included
  NeighborhoodMode mode;
};

// The k rows closest to row i (the anchor itself is at distance 0). Distance
// ties break toward the lower row index.
NeighborhoodIndex knn_neighborhood(const Eigen::MatrixXd& points, int i, int k);

// All rows within the open Euclidean ball of radius delta around row i.
NeighborhoodIndex delta_neighborhood(const Eigen::MatrixXd& points, int i,
                                     double delta);

// Makes two neighborhoods disjoint while preserving their union: the
// intersection is split as evenly as possible (sizes differ by at most one),
// lower indices going to `a`, except that each anchor always stays on its own
// side. Requires distinct anchors.
std::pair<NeighborhoodIndex, NeighborhoodIndex> disjointify(
    const NeighborhoodIndex& a, const NeighborhoodIndex& b);

// Batch exact kNN over all rows; result row i holds the sorted member list of
// knn_neighborhood(points, i, k). Blocked matrix products keep this fast at
// the sample sizes used by the direct-estimation fit.
std::vector<std::vector<int>> knn_all(const Eigen::MatrixXd& points, int k,
                                      int threads = 0);

}  // namespace licors
