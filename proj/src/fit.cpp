#include "licors/fit.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "licors/neighborhoods.hpp"
#include "licors/util.hpp"

namespace licors {

FitBase prepare_fit(const Field& train, const FitConfig& config) {
  FitBase base;
  base.config = config;
  base.cones = extract_cones(train, config.geometry);
  const int64_t N = base.cones.plc.rows();
  if (N < 2) throw std::invalid_argument("prepare_fit: too few cones");
  base.standardization = compute_standardization(base.cones.plc);
  base.z = standardize(base.cones.plc, base.standardization);

  switch (config.mode) {
    case FitMode::PreClustered: {
      base.clusters = kmeanspp_fit(base.z, config.K,
                                   mix_seed(config.seed, 0x636c75),
                                   config.kmeans_max_iter);
      break;
    }
    case FitMode::DirectKnn: {
      if (config.k < 2)
        throw std::invalid_argument("prepare_fit: k must be >= 2");
      auto members = knn_all(base.z, std::min<int>(config.k, N), config.threads);
      base.neighborhoods.resize(N);
      for (int64_t i = 0; i < N; ++i) {
        base.neighborhoods[i].anchor = static_cast<int>(i);
        base.neighborhoods[i].members = std::move(members[i]);
        base.neighborhoods[i].mode = NeighborhoodMode::knn(config.k);
      }
      break;
    }
    case FitMode::DirectDelta: {
      for (int64_t i = 0; i < N; ++i) {
        NeighborhoodIndex nb =
            delta_neighborhood(base.z, static_cast<int>(i), config.delta);
        if (nb.members.size() < 2)
          base.unsampled_rows.push_back(static_cast<int>(i));
        else
          base.neighborhoods.push_back(std::move(nb));
      }
      if (base.neighborhoods.empty())
        throw std::invalid_argument(
            "prepare_fit: no delta ball holds two rows; increase delta");
      break;
    }
  }
  return base;
}

namespace {

// Thin a row set so no two kept future-cone stencils share a lattice cell.
// A unit whose thinned sample would drop below two rows keeps its original
// sample; the merge precondition wins over thinning there.
std::vector<int> thin_rows(const FitBase& base, const std::vector<int>& rows) {
  std::vector<int> kept = exclude_overlaps(
      base.cones.coords, base.config.geometry, base.cones.field_extent,
      base.cones.field_boundary, rows);
  if (kept.size() < 2) return rows;
  return kept;
}

}  // namespace

FitReport complete_fit(const FitBase& base, double alpha) {
  const FitConfig& cfg = base.config;
  const int64_t N = base.z.rows();
  TestSettings ts;
  ts.alpha = alpha;
  ts.n_proj = cfg.n_proj;
  ts.seed = mix_seed(cfg.seed, 0x74657374);
  MergeTester tester = make_default_tester(ts);

  const bool thinning = cfg.overlap_exclusion && cfg.geometry.h_f >= 1;

  MergeResult merged;
  StateModel model;
  model.geometry = cfg.geometry;
  model.spatial_dims = base.cones.spatial_dims;
  model.standardization = base.standardization;
  model.alpha = alpha;

  if (cfg.mode == FitMode::PreClustered) {
    const ClusterAssignment& ca = *base.clusters;
    if (!thinning) {
      merged = merge_states(base.cones.flc, ca, alpha, tester, cfg.merge);
    } else {
      // Build units by cluster with thinned samples and summaries.
      std::vector<std::vector<int>> members(ca.K);
      for (size_t i = 0; i < ca.labels.size(); ++i)
        members[ca.labels[i]].push_back(static_cast<int>(i));
      // Singletons fold into the nearest cluster exactly as the plain path.
      std::vector<int> redirect(ca.K);
      for (int c = 0; c < ca.K; ++c) redirect[c] = c;
      for (int c = 0; c < ca.K; ++c) {
        if (members[c].size() != 1) continue;
        int best = -1;
        double best_sq = std::numeric_limits<double>::infinity();
        for (int o = 0; o < ca.K; ++o) {
          if (o == c || members[o].size() < 2) continue;
          double sq = (ca.centroids.row(c) - ca.centroids.row(o)).squaredNorm();
          if (sq < best_sq) { best_sq = sq; best = o; }
        }
        if (best < 0) throw std::invalid_argument("complete_fit: all clusters singleton");
        members[best].push_back(members[c][0]);
        members[c].clear();
        redirect[c] = best;
      }
      std::vector<MergeUnit> units;
      std::vector<int> unit_of_cluster(ca.K, -1);
      for (int c = 0; c < ca.K; ++c) {
        if (members[c].empty()) continue;
        std::sort(members[c].begin(), members[c].end());
        MergeUnit u;
        u.member_rows = members[c];
        u.sample_rows = thin_rows(base, members[c]);
        u.summary_rows = u.sample_rows;
        unit_of_cluster[c] = static_cast<int>(units.size());
        units.push_back(std::move(u));
      }
      merged = merge_states(base.cones.flc, units, alpha, tester, cfg.merge);
      std::vector<int> cluster_to_state(ca.K);
      for (int c = 0; c < ca.K; ++c) {
        int t = c;
        while (unit_of_cluster[t] < 0) t = redirect[t];
        cluster_to_state[c] = merged.unit_to_state[unit_of_cluster[t]];
      }
      merged.unit_to_state = std::move(cluster_to_state);
    }
    model.mode = FitMode::PreClustered;
    model.mode_param = cfg.K;
    model.cluster_centroids = ca.centroids;
    model.cluster_to_state = merged.unit_to_state;
  } else {
    std::vector<MergeUnit> units(base.neighborhoods.size());
    for (size_t i = 0; i < base.neighborhoods.size(); ++i) {
      const NeighborhoodIndex& nb = base.neighborhoods[i];
      units[i].member_rows = {nb.anchor};
      units[i].sample_rows = thinning ? thin_rows(base, nb.members) : nb.members;
    }
    merged = merge_states(base.cones.flc, units, alpha, tester, cfg.merge);

    // Per-row states; delta mode may have rows without a unit, attached to
    // the state of the nearest sampled row.
    std::vector<int> row_state(N);
    for (size_t i = 0; i < base.neighborhoods.size(); ++i)
      row_state[base.neighborhoods[i].anchor] = merged.unit_to_state[i];
    for (int r : base.unsampled_rows) {
      int best = -1;
      double best_sq = std::numeric_limits<double>::infinity();
      for (const auto& nb : base.neighborhoods) {
        double sq = (base.z.row(nb.anchor) - base.z.row(r)).squaredNorm();
        if (sq < best_sq) { best_sq = sq; best = nb.anchor; }
      }
      row_state[r] = row_state[best];
    }
    if (!base.unsampled_rows.empty()) {
      StateSummary ss = state_summary(base.cones.flc, row_state, 0);
      merged.state_means = ss.means;
      merged.state_sample_counts = ss.counts;
    }

    model.mode = cfg.mode;
    model.mode_param =
        cfg.mode == FitMode::DirectKnn ? cfg.k : cfg.delta;
    model.cluster_centroids = base.z;
    model.cluster_to_state = row_state;
  }

  model.state_means = merged.state_means;
  model.state_sample_counts = merged.state_sample_counts;

  FitReport report;
  report.n_states = merged.n_states;
  report.tests_run = merged.tests_run;
  report.passes = merged.passes;
  report.max_cluster_diameter =
      base.clusters ? base.clusters->max_diameter_bound : 0.0;
  report.model = std::move(model);
  return report;
}

EvalOutput evaluate_cones(const ConeSet& cones, const StateModel& model,
                          int threads) {
  EvalOutput out;
  out.forecast = predict_batch(cones.plc, model, threads);
  out.mse = mse(out.forecast.predictions, cones.flc);
  out.n_rows = cones.plc.rows();
  out.coords = cones.coords;
  return out;
}

EvalOutput evaluate_model(const Field& field, const StateModel& model,
                          int t_begin, int t_end, int threads) {
  const ConeGeometry& g = model.geometry;
  if (t_begin < g.h_p || t_end + g.h_f > field.T() || t_begin >= t_end)
    throw std::invalid_argument("evaluate_model: time range does not fit the horizons");
  Field slice = field.time_slice(t_begin - g.h_p, (t_end + g.h_f) - (t_begin - g.h_p));
  ConeSet cones = extract_cones(slice, g);
  EvalOutput out = evaluate_cones(cones, model, threads);
  for (Coord& c : out.coords) c.t += t_begin - g.h_p;
  return out;
}

}  // namespace licors
