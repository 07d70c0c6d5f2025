#include "licors/neighborhoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "licors/util.hpp"

namespace licors {

namespace {

bool row_less(const Eigen::MatrixXd& X, int a, int b) {
  for (int j = 0; j < X.cols(); ++j) {
    if (X(a, j) < X(b, j)) return true;
    if (X(a, j) > X(b, j)) return false;
  }
  return false;
}

}  // namespace

ClusterAssignment kmeanspp_fit(const Eigen::MatrixXd& X, int K, uint64_t seed,
                               int max_iter) {
  const int N = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (K < 1) throw std::invalid_argument("kmeanspp_fit: K must be positive");
  if (K > N) throw std::invalid_argument("kmeanspp_fit: K exceeds the number of rows");
  if (!X.allFinite()) throw std::invalid_argument("kmeanspp_fit: non-finite input");
  if (max_iter < 1) throw std::invalid_argument("kmeanspp_fit: max_iter must be positive");

  // Canonical row order: sort indices by row content so that the seeding walk
  // (and hence the whole fit) commutes with row permutations.
  std::vector<int> canon(N);
  std::iota(canon.begin(), canon.end(), 0);
  std::sort(canon.begin(), canon.end(),
            [&](int a, int b) { return row_less(X, a, b); });

  SplitMix64 rng(mix_seed(seed, 0x6b6d6561));
  Eigen::MatrixXd centroids(K, d);
  std::vector<double> min_sq(N, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(N, 0);

  {
    int first = canon[static_cast<size_t>(rng.below(N))];
    centroids.row(0) = X.row(first);
    chosen[first] = 1;
  }
  for (int c = 1; c < K; ++c) {
    double total = 0.0;
    for (int pos = 0; pos < N; ++pos) {
      int i = canon[pos];
      double sq = (X.row(i) - centroids.row(c - 1)).squaredNorm();
      if (sq < min_sq[i]) min_sq[i] = sq;
      total += min_sq[i];
    }
    int pick = -1;
    if (total > 0.0) {
      double u = rng.uniform01() * total;
      double acc = 0.0;
      for (int pos = 0; pos < N; ++pos) {
        int i = canon[pos];
        acc += min_sq[i];
        if (acc >= u) { pick = i; break; }
      }
      if (pick < 0) pick = canon[N - 1];
    }
    if (pick < 0 || chosen[pick]) {
      // All remaining mass sits on already-chosen duplicates; take the first
      // unchosen row in canonical order.
      pick = -1;
      for (int pos = 0; pos < N; ++pos)
        if (!chosen[canon[pos]]) { pick = canon[pos]; break; }
    }
    chosen[pick] = 1;
    centroids.row(c) = X.row(pick);
  }

  // Canonical position of each row, for permutation-stable tie-breaks during
  // empty-cluster repair.
  std::vector<int> canon_pos(N);
  for (int pos = 0; pos < N; ++pos) canon_pos[canon[pos]] = pos;

  std::vector<int> labels(N, 0);
  std::vector<int> counts(K, 0);
  ClusterAssignment out;

  auto assign_all = [&]() {
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < N; ++i) {
      int best = 0;
      double best_sq = (X.row(i) - centroids.row(0)).squaredNorm();
      for (int c = 1; c < K; ++c) {
        double sq = (X.row(i) - centroids.row(c)).squaredNorm();
        if (sq < best_sq) { best_sq = sq; best = c; }
      }
      labels[i] = best;
      ++counts[best];
    }
  };

  auto repair_empty = [&]() {
    for (int c = 0; c < K; ++c) {
      if (counts[c] > 0) continue;
      int big = static_cast<int>(std::max_element(counts.begin(), counts.end()) -
                                 counts.begin());
      int far_row = -1;
      double far_sq = -1.0;
      for (int i = 0; i < N; ++i) {
        if (labels[i] != big) continue;
        double sq = (X.row(i) - centroids.row(big)).squaredNorm();
        if (sq > far_sq || (sq == far_sq && far_row >= 0 &&
                            canon_pos[i] < canon_pos[far_row])) {
          far_sq = sq;
          far_row = i;
        }
      }
      centroids.row(c) = X.row(far_row);
      labels[far_row] = c;
      --counts[big];
      ++counts[c];
    }
  };

  assign_all();
  repair_empty();
  std::vector<int> prev_labels;
  for (int iter = 0; iter < max_iter; ++iter) {
    // Update step.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, d);
    std::vector<int> n(K, 0);
    for (int i = 0; i < N; ++i) {
      sums.row(labels[i]) += X.row(i);
      ++n[labels[i]];
    }
    for (int c = 0; c < K; ++c)
      if (n[c] > 0) centroids.row(c) = sums.row(c) / n[c];

    prev_labels = labels;
    assign_all();
    repair_empty();

    double sse = 0.0;
    for (int i = 0; i < N; ++i)
      sse += (X.row(i) - centroids.row(labels[i])).squaredNorm();
    out.objective_trace.push_back(sse);
    if (labels == prev_labels) break;
  }

  double max_d = 0.0;
  for (int i = 0; i < N; ++i)
    max_d = std::max(max_d, (X.row(i) - centroids.row(labels[i])).norm());

  out.labels = std::move(labels);
  out.centroids = std::move(centroids);
  out.K = K;
  out.max_diameter_bound = 2.0 * max_d;
  return out;
}

NeighborhoodIndex knn_neighborhood(const Eigen::MatrixXd& X, int i, int k) {
  const int N = static_cast<int>(X.rows());
  if (i < 0 || i >= N) throw std::invalid_argument("knn_neighborhood: anchor out of range");
  if (k < 1 || k > N) throw std::invalid_argument("knn_neighborhood: k out of range");

  std::vector<std::pair<double, int>> dist(N);
  for (int j = 0; j < N; ++j)
    dist[j] = {(X.row(j) - X.row(i)).squaredNorm(), j};
  std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
  std::sort(dist.begin(), dist.begin() + k);

  NeighborhoodIndex out;
  out.anchor = i;
  out.mode = NeighborhoodMode::knn(k);
  out.members.reserve(k);
  for (int j = 0; j < k; ++j) out.members.push_back(dist[j].second);
  std::sort(out.members.begin(), out.members.end());
  return out;
}

NeighborhoodIndex delta_neighborhood(const Eigen::MatrixXd& X, int i,
                                     double delta) {
  const int N = static_cast<int>(X.rows());
  if (i < 0 || i >= N) throw std::invalid_argument("delta_neighborhood: anchor out of range");
  if (!(delta > 0.0)) throw std::invalid_argument("delta_neighborhood: delta must be positive");

  NeighborhoodIndex out;
  out.anchor = i;
  out.mode = NeighborhoodMode::ball(delta);
  const double sq = delta * delta;
  for (int j = 0; j < N; ++j)
    if ((X.row(j) - X.row(i)).squaredNorm() < sq) out.members.push_back(j);
  return out;
}

std::pair<NeighborhoodIndex, NeighborhoodIndex> disjointify(
    const NeighborhoodIndex& a, const NeighborhoodIndex& b) {
  if (a.anchor == b.anchor)
    throw std::invalid_argument("disjointify: anchors must differ");

  std::vector<int> common;
  std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(),
                        b.members.end(), std::back_inserter(common));
  if (common.empty()) return {a, b};

  NeighborhoodIndex ra = a, rb = b;
  auto remove_common = [&](std::vector<int>& m) {
    std::vector<int> kept;
    std::set_difference(m.begin(), m.end(), common.begin(), common.end(),
                        std::back_inserter(kept));
    m = std::move(kept);
  };
  remove_common(ra.members);
  remove_common(rb.members);

  // Anchors stay on their own side; the rest of the intersection is split as
  // evenly as possible with lower indices going to `a`.
  const int n = static_cast<int>(common.size());
  int to_a = (n + 1) / 2;
  std::vector<int> rest;
  for (int idx : common) {
    if (idx == a.anchor) {
      ra.members.push_back(idx);
      --to_a;
    } else if (idx == b.anchor) {
      rb.members.push_back(idx);
    } else {
      rest.push_back(idx);
    }
  }
  to_a = std::clamp(to_a, 0, static_cast<int>(rest.size()));
  for (size_t j = 0; j < rest.size(); ++j) {
    if (static_cast<int>(j) < to_a)
      ra.members.push_back(rest[j]);
    else
      rb.members.push_back(rest[j]);
  }
  std::sort(ra.members.begin(), ra.members.end());
  std::sort(rb.members.begin(), rb.members.end());
  return {ra, rb};
}

std::vector<std::vector<int>> knn_all(const Eigen::MatrixXd& X, int k,
                                      int threads) {
  const int N = static_cast<int>(X.rows());
  if (k < 1 || k > N) throw std::invalid_argument("knn_all: k out of range");

  Eigen::VectorXd sq = X.rowwise().squaredNorm();
  std::vector<std::vector<int>> result(N);

  const int block = 256;
  const int n_blocks = (N + block - 1) / block;
  parallel_for(n_blocks, threads, [&](int64_t bi) {
    const int lo = static_cast<int>(bi) * block;
    const int hi = std::min(N, lo + block);
    // dist2(q, j) = |x_q|^2 + |x_j|^2 - 2 x_q . x_j  (clamped at 0)
    Eigen::MatrixXd G = X.middleRows(lo, hi - lo) * X.transpose();
    std::vector<std::pair<double, int>> dist(N);
    for (int q = lo; q < hi; ++q) {
      for (int j = 0; j < N; ++j) {
        double d2 = sq[q] + sq[j] - 2.0 * G(q - lo, j);
        dist[j] = {d2 > 0.0 ? d2 : 0.0, j};
      }
      // Exact distance recheck near the cut avoids ties induced by the
      // floating-point expansion above.
      std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
      double cut = dist[k - 1].first;
      std::vector<std::pair<double, int>> exact;
      for (int j = 0; j < N; ++j) {
        double d2 = sq[j] + sq[q] - 2.0 * G(q - lo, j);
        if (d2 <= cut * (1.0 + 1e-9) + 1e-9)
          exact.push_back({(X.row(j) - X.row(q)).squaredNorm(), j});
      }
      std::sort(exact.begin(), exact.end());
      std::vector<int>& members = result[q];
      members.reserve(k);
      for (int j = 0; j < k && j < static_cast<int>(exact.size()); ++j)
        members.push_back(exact[j].second);
      std::sort(members.begin(), members.end());
    }
  });
  return result;
}

}  // namespace licors
