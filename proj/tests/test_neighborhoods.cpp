#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "licors/cones.hpp"
#include "licors/neighborhoods.hpp"
#include "licors/simulate.hpp"
#include "licors/states.hpp"
#include "test_helpers.hpp"

using namespace licors;

TEST_CASE("K = N puts each distinct row in its own cluster with objective 0") {
  Eigen::MatrixXd X = testutil::random_matrix(12, 3, 5);
  ClusterAssignment ca = kmeanspp_fit(X, 12, 7);
  std::vector<int> seen(12, 0);
  for (int l : ca.labels) ++seen[l];
  for (int c = 0; c < 12; ++c) CHECK(seen[c] == 1);
  double sse = 0.0;
  for (int i = 0; i < 12; ++i)
    sse += (X.row(i) - ca.centroids.row(ca.labels[i])).squaredNorm();
  CHECK(sse == doctest::Approx(0.0));
}

TEST_CASE("two well-separated blobs are recovered") {
  // 40 points, two blobs; membership is the generator's labeling.
  Eigen::MatrixXd X(40, 2);
  std::vector<int> truth(40);
  SplitMix64 rng(123);
  for (int i = 0; i < 40; ++i) {
    bool second = i >= 20;
    truth[i] = second;
    X(i, 0) = (second ? 10.0 : 0.0) + rng.gaussian() * 0.5;
    X(i, 1) = (second ? 10.0 : 0.0) + rng.gaussian() * 0.5;
  }
  ClusterAssignment ca = kmeanspp_fit(X, 2, 99);
  int agree = 0;
  for (int i = 0; i < 40; ++i) agree += (ca.labels[i] == ca.labels[truth[i] ? 39 : 0]);
  // >= 99% of 40 points means exact recovery up to label swap.
  CHECK(agree >= 40);
}

TEST_CASE("K=200 on simulation cones yields 200 nonempty clusters") {
  SimOutput sim = simulate(100, 200, 100, 4242);
  ConeSet cs = extract_cones(sim.x, {1, 2, 0, PresentIn::Future});
  Standardization s = compute_standardization(cs.plc);
  ClusterAssignment ca = kmeanspp_fit(standardize(cs.plc, s), 200, 11, 30);
  std::vector<int> counts(200, 0);
  for (int l : ca.labels) ++counts[l];
  for (int c = 0; c < 200; ++c) CHECK(counts[c] > 0);
  CHECK(ca.max_diameter_bound > 0.0);
}

TEST_CASE("kmeans rejects bad input") {
  Eigen::MatrixXd X = testutil::random_matrix(5, 2, 1);
  CHECK_THROWS(kmeanspp_fit(X, 6, 0));
  X(2, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS(kmeanspp_fit(X, 2, 0));
}

TEST_CASE("kmeans objective trace is non-increasing") {
  Eigen::MatrixXd X = testutil::gaussian_matrix(300, 4, 77);
  ClusterAssignment ca = kmeanspp_fit(X, 8, 3);
  for (size_t i = 1; i < ca.objective_trace.size(); ++i)
    CHECK(ca.objective_trace[i] <= ca.objective_trace[i - 1] + 1e-9);
}

TEST_CASE("kmeans is permutation-equivariant") {
  Eigen::MatrixXd X = testutil::gaussian_matrix(60, 3, 2024);
  ClusterAssignment a = kmeanspp_fit(X, 5, 42);

  // Deterministic permutation.
  std::vector<int> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng(9);
  for (int i = 59; i > 0; --i)
    std::swap(perm[i], perm[rng.below(i + 1)]);

  Eigen::MatrixXd Y(60, 3);
  for (int i = 0; i < 60; ++i) Y.row(perm[i]) = X.row(i);
  ClusterAssignment b = kmeanspp_fit(Y, 5, 42);

  for (int i = 0; i < 60; ++i) CHECK(b.labels[perm[i]] == a.labels[i]);
  CHECK(a.centroids.isApprox(b.centroids));
}

TEST_CASE("knn basics") {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 1.0, 10.0;
  NeighborhoodIndex nb = knn_neighborhood(X, 0, 1);
  CHECK(nb.members == std::vector<int>{0});
  nb = knn_neighborhood(X, 0, 2);
  CHECK(nb.members == std::vector<int>{0, 1});
  nb = knn_neighborhood(X, 1, 3);
  CHECK(nb.members == std::vector<int>{0, 1, 2});
}

TEST_CASE("knn matches brute-force full sort, and batch matches single") {
  int trials = 0;
  for (uint64_t seed = 0; seed < 110; ++seed) {
    Eigen::MatrixXd X = testutil::random_matrix(50, 8, seed * 13 + 1);
    SplitMix64 rng(seed);
    int anchor = static_cast<int>(rng.below(50));
    int k = 5;
    NeighborhoodIndex nb = knn_neighborhood(X, anchor, k);

    // O(N^2) oracle: full sort by (distance, index).
    std::vector<std::pair<double, int>> d(50);
    for (int j = 0; j < 50; ++j)
      d[j] = {(X.row(j) - X.row(anchor)).squaredNorm(), j};
    std::sort(d.begin(), d.end());
    std::vector<int> expected;
    for (int j = 0; j < k; ++j) expected.push_back(d[j].second);
    std::sort(expected.begin(), expected.end());
    CHECK(nb.members == expected);

    auto all = knn_all(X, k);
    CHECK(all[anchor] == expected);
    ++trials;
  }
  CHECK(trials >= 100);
}

TEST_CASE("knn with k = N returns every row") {
  Eigen::MatrixXd X = testutil::random_matrix(17, 3, 8);
  for (int i = 0; i < 17; ++i) {
    NeighborhoodIndex nb = knn_neighborhood(X, i, 17);
    CHECK(nb.members.size() == 17);
  }
}

TEST_CASE("delta neighborhood basics") {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.5, 2.0;
  CHECK(delta_neighborhood(X, 0, 1.0).members == std::vector<int>{0, 1});
  CHECK(delta_neighborhood(X, 0, 0.25).members == std::vector<int>{0});
  CHECK(delta_neighborhood(X, 0, 1e9).members == std::vector<int>{0, 1, 2});
  CHECK_THROWS(delta_neighborhood(X, 0, 0.0));
}

TEST_CASE("disjointify hand cases") {
  NeighborhoodIndex a, b;
  a.anchor = 1;
  a.members = {1, 2, 3, 4};
  b.anchor = 6;
  b.members = {3, 4, 5, 6};
  auto [ra, rb] = disjointify(a, b);
  CHECK(ra.members == std::vector<int>{1, 2, 3});
  CHECK(rb.members == std::vector<int>{4, 5, 6});

  // Disjoint inputs pass through unchanged.
  a.members = {1, 2};
  b.members = {5, 6};
  std::tie(ra, rb) = disjointify(a, b);
  CHECK(ra.members == a.members);
  CHECK(rb.members == b.members);

  // Identical member sets of even size split in half.
  a.anchor = 0;
  a.members = {0, 1, 2, 9};
  b.anchor = 9;
  b.members = {0, 1, 2, 9};
  std::tie(ra, rb) = disjointify(a, b);
  CHECK(ra.members.size() == 2);
  CHECK(rb.members.size() == 2);
}

TEST_CASE("disjointify properties: disjoint, union-preserving, anchors kept") {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    SplitMix64 rng(seed * 31 + 7);
    auto random_members = [&](int anchor) {
      std::vector<int> m{anchor};
      for (int v = 0; v < 20; ++v)
        if (rng.below(3) == 0) m.push_back(v);
      std::sort(m.begin(), m.end());
      m.erase(std::unique(m.begin(), m.end()), m.end());
      return m;
    };
    NeighborhoodIndex a, b;
    a.anchor = static_cast<int>(rng.below(20));
    do { b.anchor = static_cast<int>(rng.below(20)); } while (b.anchor == a.anchor);
    a.members = random_members(a.anchor);
    b.members = random_members(b.anchor);

    std::vector<int> uni;
    std::set_union(a.members.begin(), a.members.end(), b.members.begin(),
                   b.members.end(), std::back_inserter(uni));

    auto [ra, rb] = disjointify(a, b);
    std::vector<int> inter;
    std::set_intersection(ra.members.begin(), ra.members.end(),
                          rb.members.begin(), rb.members.end(),
                          std::back_inserter(inter));
    CHECK(inter.empty());
    std::vector<int> uni2;
    std::set_union(ra.members.begin(), ra.members.end(), rb.members.begin(),
                   rb.members.end(), std::back_inserter(uni2));
    CHECK(uni2 == uni);
    CHECK(std::binary_search(ra.members.begin(), ra.members.end(), a.anchor));
    CHECK(std::binary_search(rb.members.begin(), rb.members.end(), b.anchor));
    // Total membership preserved and split within one.
    CHECK(ra.members.size() + rb.members.size() == uni.size());
  }
}
