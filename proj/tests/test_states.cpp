#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "licors/cones.hpp"
#include "licors/fit.hpp"
#include "licors/forecast.hpp"
#include "licors/simulate.hpp"
#include "licors/states.hpp"
#include "test_helpers.hpp"

using namespace licors;

namespace {

// Clusters with n rows each, cluster c drawn from N(mean[c], 1).
struct GaussianClusters {
  Eigen::MatrixXd flc;
  ClusterAssignment assignment;
  std::vector<int> truth;  // generating cluster per row
};

GaussianClusters make_clusters(const std::vector<double>& means, int n,
                               uint64_t seed) {
  const int K = static_cast<int>(means.size());
  GaussianClusters g;
  g.flc.resize(K * n, 1);
  g.assignment.K = K;
  g.assignment.labels.resize(K * n);
  g.assignment.centroids = Eigen::MatrixXd::Zero(K, 1);
  g.truth.resize(K * n);
  SplitMix64 rng(seed);
  for (int c = 0; c < K; ++c) {
    g.assignment.centroids(c, 0) = means[c];
    for (int i = 0; i < n; ++i) {
      int row = c * n + i;
      g.flc(row, 0) = means[c] + rng.gaussian();
      g.assignment.labels[row] = c;
      g.truth[row] = c;
    }
  }
  return g;
}

// Answers through the generating distribution of the units' rows; every unit
// is pure in these fixtures, so sameness is well defined. The vector maps a
// row to the id of the distribution it was drawn from.
MergeTester oracle_tester(std::vector<int> row_dist) {
  return [row_dist = std::move(row_dist)](const MergeSample& a,
                                          const MergeSample& b) {
    TestOutcome o;
    o.p_value =
        row_dist[a.rows->front()] == row_dist[b.rows->front()] ? 1.0 : 0.0;
    return o;
  };
}

std::vector<int> dist_ids(const GaussianClusters& g,
                          const std::vector<double>& means) {
  std::vector<int> ids(g.truth.size());
  for (size_t i = 0; i < ids.size(); ++i)
    ids[i] = static_cast<int>(means[g.truth[i]]);
  return ids;
}

}  // namespace

TEST_CASE("clusters from one distribution collapse to a single state") {
  int collapsed = 0;
  const int seeds = 20;
  for (uint64_t seed = 0; seed < seeds; ++seed) {
    GaussianClusters g = make_clusters({0, 0, 0, 0, 0}, 500, 100 + seed);
    MergeResult r = merge_states(g.flc, g.assignment, 0.001,
                                 make_default_tester({}));
    if (r.n_states == 1) ++collapsed;
  }
  CHECK(collapsed >= 18);
}

TEST_CASE("well-separated clusters never merge and keep the exact partition") {
  GaussianClusters g = make_clusters({0, 10, 20, 30, 40}, 200, 7);
  MergeResult r = merge_states(g.flc, g.assignment, 0.05,
                               make_default_tester({}));
  CHECK(r.n_states == 5);
  for (int c = 0; c < 5; ++c) CHECK(r.unit_to_state[c] == c);
  for (size_t i = 0; i < g.truth.size(); ++i)
    CHECK(r.row_states[i] == g.truth[i]);
}

TEST_CASE("a single cluster runs no tests") {
  GaussianClusters g = make_clusters({0}, 50, 3);
  int64_t calls = 0;
  MergeTester counting = [&calls](const MergeSample&, const MergeSample&) {
    ++calls;
    TestOutcome o;
    o.p_value = 1.0;
    return o;
  };
  MergeResult r = merge_states(g.flc, g.assignment, 0.05, counting);
  CHECK(r.n_states == 1);
  CHECK(calls == 0);
}

TEST_CASE("alpha bounds are enforced") {
  GaussianClusters g = make_clusters({0, 1}, 20, 5);
  CHECK_THROWS(merge_states(g.flc, g.assignment, 0.0, make_default_tester({})));
  CHECK_THROWS(merge_states(g.flc, g.assignment, 1.0, make_default_tester({})));
}

TEST_CASE("an oracle tester recovers the true partition exactly") {
  // Plumbing correctness independent of test power: interleave labels so
  // cluster ids do not align with scan order.
  std::vector<double> means{0, 1, 0, 2, 1, 0};
  GaussianClusters g = make_clusters(means, 30, 11);
  MergeResult r =
      merge_states(g.flc, g.assignment, 0.05, oracle_tester(dist_ids(g, means)));
  CHECK(r.n_states == 3);
  // Rows with equal generating mean share a state, others never do.
  for (size_t i = 0; i < g.truth.size(); ++i)
    for (size_t j = i + 1; j < g.truth.size(); j += 97)
      CHECK((means[g.truth[i]] == means[g.truth[j]]) ==
            (r.row_states[i] == r.row_states[j]));
}

TEST_CASE("every row lands in exactly one dense state") {
  GaussianClusters g = make_clusters({0, 0.4, 4.0, 4.2}, 120, 21);
  MergeResult r = merge_states(g.flc, g.assignment, 0.05,
                               make_default_tester({}));
  std::set<int> used;
  for (int s : r.row_states) {
    CHECK(s >= 0);
    CHECK(s < r.n_states);
    used.insert(s);
  }
  CHECK(static_cast<int>(used.size()) == r.n_states);
  int64_t total = 0;
  for (int64_t c : r.state_sample_counts) total += c;
  CHECK(total == g.flc.rows());
}

TEST_CASE("singleton clusters fold into their nearest testable cluster") {
  Eigen::MatrixXd flc = testutil::gaussian_matrix(7, 1, 9);
  ClusterAssignment ca;
  ca.K = 3;
  ca.labels = {0, 0, 0, 1, 1, 1, 2};  // cluster 2 is a singleton
  ca.centroids.resize(3, 1);
  ca.centroids << 0.0, 5.0, 4.0;  // nearest testable neighbor of 2 is 1
  MergeResult r = merge_states(flc, ca, 0.05, oracle_tester({0, 0, 0, 1, 1, 1, 1}));
  CHECK(r.unit_to_state[2] == r.unit_to_state[1]);
  CHECK(r.row_states[6] == r.row_states[3]);
}

TEST_CASE("direct neighborhoods on the benchmark field land in the reported band") {
  SimOutput sim = simulate(100, 200, 100, 12345);
  FitConfig cfg;
  cfg.geometry = {1, 2, 0, PresentIn::Future};
  cfg.mode = FitMode::DirectKnn;
  cfg.k = 50;
  cfg.alpha = 0.05;
  cfg.seed = 1;
  FitReport fit = fit_licors(sim.x, cfg);
  CHECK(fit.n_states >= 30);
  CHECK(fit.n_states <= 90);
}

TEST_CASE("less merging at looser alpha (median over seeds)") {
  std::vector<double> m_loose, m_strict;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    SimOutput sim = simulate(40, 100, 50, 900 + seed);
    FitConfig cfg;
    cfg.geometry = {1, 2, 0, PresentIn::Future};
    cfg.mode = FitMode::DirectKnn;
    cfg.k = 50;
    cfg.seed = seed;
    FitBase base = prepare_fit(sim.x, cfg);
    m_loose.push_back(complete_fit(base, 0.2).n_states);
    m_strict.push_back(complete_fit(base, 0.01).n_states);
  }
  CHECK(testutil::median(m_loose) >= testutil::median(m_strict));
}

TEST_CASE("multivariate future cones fit end to end with overlap thinning") {
  SimOutput sim = simulate(24, 90, 30, 55);
  for (FitMode mode : {FitMode::PreClustered, FitMode::DirectKnn}) {
    FitConfig cfg;
    cfg.geometry = {1, 2, 1, PresentIn::Future};  // n_f = 4
    cfg.mode = mode;
    cfg.K = 15;
    cfg.k = 25;
    cfg.alpha = 0.05;
    cfg.seed = 6;
    FitReport fit = fit_licors(sim.x, cfg);
    CHECK(fit.n_states >= 1);
    CHECK(fit.model.n_f() == 4);
    int64_t total = 0;
    for (int64_t c : fit.model.state_sample_counts) total += c;
    // Thinned samples cannot exceed the cone count.
    ConeSet cs = extract_cones(sim.x, cfg.geometry);
    CHECK(total <= cs.plc.rows());
    CHECK(total > 0);
    // Prediction still lands on a state mean row.
    Eigen::VectorXd pred = predict_point(cs.plc.row(7), fit.model);
    bool on_state = false;
    for (int s = 0; s < fit.model.n_states(); ++s)
      if (pred.transpose() == fit.model.state_means.row(s)) on_state = true;
    CHECK(on_state);
  }
}

TEST_CASE("identical inputs and seeds give identical model bytes") {
  SimOutput sim = simulate(30, 80, 40, 77);
  FitConfig cfg;
  cfg.geometry = {1, 1, 0, PresentIn::Future};
  cfg.mode = FitMode::PreClustered;
  cfg.K = 25;
  cfg.alpha = 0.05;
  cfg.seed = 5;
  auto a = fit_licors(sim.x, cfg).model.serialize();
  auto b = fit_licors(sim.x, cfg).model.serialize();
  CHECK(a == b);
}

TEST_CASE("model binary and text round trips") {
  SimOutput sim = simulate(20, 60, 30, 3);
  FitConfig cfg;
  cfg.geometry = {1, 1, 0, PresentIn::Future};
  cfg.mode = FitMode::PreClustered;
  cfg.K = 10;
  cfg.seed = 2;
  StateModel m = fit_licors(sim.x, cfg).model;
  std::string path = "test_model_roundtrip.lsm";
  m.save(path);
  StateModel n = StateModel::load(path);
  CHECK(n.serialize() == m.serialize());
  CHECK(n.to_json() == m.to_json());
  CHECK(n.cluster_to_state == m.cluster_to_state);
  std::remove(path.c_str());
}

// ---------------------------------------------------------------------------
// Overlap exclusion
// ---------------------------------------------------------------------------

namespace {

// Cell-by-cell future stencil of a point, as a set of (axis coords..., t).
std::set<std::vector<int>> stencil_cells(const Coord& p, const ConeGeometry& g,
                                         const std::vector<int>& extent,
                                         Boundary boundary) {
  ConeStencil st = cone_offsets(g, static_cast<int>(extent.size()));
  std::set<std::vector<int>> cells;
  // unravel p.r
  std::vector<int> base(extent.size());
  int r = p.r;
  for (int d = static_cast<int>(extent.size()) - 1; d >= 0; --d) {
    base[d] = r % extent[d];
    r /= extent[d];
  }
  for (const Offset& o : st.flc) {
    std::vector<int> cell;
    bool ok = true;
    for (size_t d = 0; d < extent.size(); ++d) {
      int v = base[d] + o.dr[d];
      if (boundary == Boundary::Wrap) v = ((v % extent[d]) + extent[d]) % extent[d];
      else if (v < 0 || v >= extent[d]) { ok = false; break; }
      cell.push_back(v);
    }
    if (!ok) continue;
    cell.push_back(p.t + o.dt);
    cells.insert(cell);
  }
  return cells;
}

bool stencils_intersect(const Coord& a, const Coord& b, const ConeGeometry& g,
                        const std::vector<int>& extent, Boundary boundary) {
  auto ca = stencil_cells(a, g, extent, boundary);
  auto cb = stencil_cells(b, g, extent, boundary);
  for (const auto& c : ca)
    if (cb.count(c)) return true;
  return false;
}

}  // namespace

TEST_CASE("zero future horizon keeps everything") {
  std::vector<Coord> coords{{0, 2}, {1, 2}, {2, 2}};
  std::vector<int> rows{0, 1, 2};
  auto kept = exclude_overlaps(coords, {1, 2, 0, PresentIn::Future}, {10},
                               Boundary::Wrap, rows);
  CHECK(kept == rows);
}

TEST_CASE("greedy exclusion matches the brute-force intersection oracle") {
  int trials = 0;
  for (uint64_t seed = 0; seed < 120; ++seed) {
    SplitMix64 rng(seed * 11 + 5);
    int dims = rng.below(2) == 0 ? 1 : 2;
    std::vector<int> extent;
    int n_space = 1;
    for (int d = 0; d < dims; ++d) {
      extent.push_back(6 + static_cast<int>(rng.below(6)));
      n_space *= extent.back();
    }
    ConeGeometry g;
    g.c = 1 + static_cast<int>(rng.below(2));
    g.h_p = 1;
    g.h_f = 1 + static_cast<int>(rng.below(2));
    g.present_in = PresentIn::Future;
    Boundary b = rng.below(2) == 0 ? Boundary::Wrap : Boundary::Truncate;

    int T = 12;
    std::vector<Coord> coords;
    for (int t = g.h_p; t < T - g.h_f; ++t)
      for (int r = 0; r < n_space; ++r) coords.push_back({r, t});
    std::vector<int> rows;
    for (size_t i = 0; i < coords.size(); ++i)
      if (rng.below(4) == 0) rows.push_back(static_cast<int>(i));
    if (rows.size() < 2) continue;

    auto kept = exclude_overlaps(coords, g, extent, b, rows);
    // Kept rows are pairwise non-overlapping, verified cell by cell.
    for (size_t i = 0; i < kept.size(); ++i)
      for (size_t j = i + 1; j < kept.size(); ++j)
        CHECK_FALSE(stencils_intersect(coords[kept[i]], coords[kept[j]], g,
                                       extent, b));
    // Every dropped row overlaps some kept row (greedy maximality).
    std::set<int> kept_set(kept.begin(), kept.end());
    for (int row : rows) {
      if (kept_set.count(row)) continue;
      bool hit = false;
      for (int k : kept)
        if (stencils_intersect(coords[row], coords[k], g, extent, b)) hit = true;
      CHECK(hit);
    }
    // Geometric packing bound.
    int w = 2 * g.h_f + 1;
    for (int d = 0; d < dims; ++d) w *= 4 * g.c * g.h_f + 1;
    CHECK(kept.size() * static_cast<size_t>(w) >= rows.size());
    ++trials;
  }
  CHECK(trials >= 100);
}

TEST_CASE("stencils spaced beyond the packing distance all survive") {
  ConeGeometry g{1, 1, 1, PresentIn::Future};
  std::vector<Coord> coords;
  std::vector<int> rows;
  for (int r = 0; r < 30; r += 2 * g.c * g.h_f + 1) {
    rows.push_back(static_cast<int>(coords.size()));
    coords.push_back({r, 5});
  }
  auto kept = exclude_overlaps(coords, g, {30}, Boundary::Wrap, rows);
  CHECK(kept == rows);
}

// ---------------------------------------------------------------------------
// Summaries and the equivalence matrix
// ---------------------------------------------------------------------------

TEST_CASE("state summary means and independence across states") {
  Eigen::MatrixXd flc(4, 1);
  flc << 1.0, 3.0, 100.0, 200.0;
  StateSummary s = state_summary(flc, {0, 0, 1, 1});
  CHECK(s.means(0, 0) == doctest::Approx(2.0));
  CHECK(s.means(1, 0) == doctest::Approx(150.0));
  CHECK(s.counts == std::vector<int64_t>{2, 2});

  // Perturbing the other state's samples leaves state 0 untouched.
  flc(2, 0) = -5.0;
  StateSummary s2 = state_summary(flc, {0, 0, 1, 1});
  CHECK(s2.means(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("state means on oracle labels track the conditional means") {
  SimOutput sim = simulate(100, 300, 100, 31);
  ConeSet cs = extract_cones(sim.x, {1, 2, 0, PresentIn::Future});
  // Dense labels keyed by the generator's conditional mean; rare extreme
  // states may be absent from a single realization.
  std::map<int, int> label_of_mean;
  std::vector<int> labels(cs.coords.size());
  std::vector<double> mean_of_label;
  for (size_t i = 0; i < cs.coords.size(); ++i) {
    int mean = static_cast<int>(sim.true_state_mean.at(cs.coords[i].r, cs.coords[i].t));
    auto [it, fresh] = label_of_mean.try_emplace(mean, static_cast<int>(mean_of_label.size()));
    if (fresh) mean_of_label.push_back(mean);
    labels[i] = it->second;
  }
  CHECK(label_of_mean.size() >= 5);
  StateSummary s = state_summary(cs.flc, labels);
  for (size_t k = 0; k < mean_of_label.size(); ++k) {
    if (s.counts[k] < 16) continue;
    double tol = 3.0 / std::sqrt(static_cast<double>(s.counts[k]));
    CHECK(std::abs(s.means(k, 0) - mean_of_label[k]) <= tol);
  }
  // Histograms exist on a shared grid for univariate cones.
  CHECK(s.hist_edges.size() == 31);
  CHECK(s.hist_counts.rows() == static_cast<int64_t>(mean_of_label.size()));
}

TEST_CASE("equivalence matrix basics") {
  EquivalenceMatrix ones = equivalence_matrix({0, 0, 0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(ones.at(i, j) == 1);

  EquivalenceMatrix m = equivalence_matrix({0, 1, 0});
  std::vector<uint8_t> expected{1, 0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(m.a == expected);

  CHECK_THROWS(equivalence_matrix(std::vector<int>(6000, 0), 5000));
}

TEST_CASE("estimated matrix equals the generator's matrix on separated data") {
  GaussianClusters g = make_clusters({0, 10, 20}, 100, 13);
  MergeResult r = merge_states(g.flc, g.assignment, 0.05,
                               make_default_tester({}));
  EquivalenceMatrix est = equivalence_matrix(r.row_states);
  EquivalenceMatrix truth = equivalence_matrix(g.truth);
  CHECK(est == truth);
}
