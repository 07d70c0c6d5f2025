#include "licors/states.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "licors/util.hpp"

namespace licors {

Standardization compute_standardization(const Eigen::MatrixXd& X) {
  const int64_t n = X.rows();
  Standardization s;
  s.mean = X.colwise().mean();
  s.sd.resize(X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    double var = (X.col(j).array() - s.mean[j]).square().sum() /
                 std::max<int64_t>(n - 1, 1);
    double sd = std::sqrt(var);
    s.sd[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& X, const Standardization& s) {
  return (X.rowwise() - s.mean.transpose()).array().rowwise() /
         s.sd.transpose().array();
}

Eigen::VectorXd standardize_row(const Eigen::VectorXd& row,
                                const Standardization& s) {
  return (row - s.mean).cwiseQuotient(s.sd);
}

// ---------------------------------------------------------------------------
// Merge scan
// ---------------------------------------------------------------------------

namespace {

struct PooledState {
  std::vector<int> units;          // absorbed unit ids, root first
  std::vector<int> sample_rows;    // sorted union of unit sample rows
  std::vector<double> sorted_vals; // univariate fast path
};

// Pools sample rows into dst, deduplicating by row index: a shared row is one
// observation, not two. The univariate value array stays sorted throughout.
void pool_rows(PooledState& dst, const std::vector<int>& rows,
               const Eigen::MatrixXd& flc, bool univariate) {
  std::vector<int> fresh;
  std::set_difference(rows.begin(), rows.end(), dst.sample_rows.begin(),
                      dst.sample_rows.end(), std::back_inserter(fresh));
  if (fresh.empty()) return;
  std::vector<int> merged;
  merged.reserve(dst.sample_rows.size() + fresh.size());
  std::merge(dst.sample_rows.begin(), dst.sample_rows.end(), fresh.begin(),
             fresh.end(), std::back_inserter(merged));
  dst.sample_rows = std::move(merged);
  if (univariate) {
    size_t old = dst.sorted_vals.size();
    for (int r : fresh) dst.sorted_vals.push_back(flc(r, 0));
    std::sort(dst.sorted_vals.begin() + old, dst.sorted_vals.end());
    std::inplace_merge(dst.sorted_vals.begin(), dst.sorted_vals.begin() + old,
                       dst.sorted_vals.end());
  }
}

}  // namespace

MergeResult merge_states(const Eigen::MatrixXd& flc,
                         const std::vector<MergeUnit>& units, double alpha,
                         const MergeTester& tester,
                         const MergeOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("merge_states: alpha must lie in (0, 1)");
  const int U = static_cast<int>(units.size());
  if (U == 0) throw std::invalid_argument("merge_states: no units");
  const bool univariate = flc.cols() == 1;
  for (const auto& u : units) {
    if (u.sample_rows.size() < 2)
      throw std::invalid_argument(
          "merge_states: every unit needs at least 2 sample rows");
  }

  std::vector<PooledState> pools(U);
  for (int u = 0; u < U; ++u) {
    pools[u].units.push_back(u);
    pool_rows(pools[u], units[u].sample_rows, flc, univariate);
  }

  std::vector<int> root_of(U);
  std::iota(root_of.begin(), root_of.end(), 0);
  std::vector<char> absorbed(U, 0);

  MergeResult res;
  int pass = 0;
  while (true) {
    ++pass;
    int64_t merges = 0;
    for (int k = 0; k < U; ++k) {
      if (absorbed[k]) continue;
      for (int j = k + 1; j < U; ++j) {
        if (absorbed[j]) continue;
        MergeSample sk{&flc, &pools[k].sample_rows,
                       univariate ? &pools[k].sorted_vals : nullptr};
        MergeSample sj{&flc, &pools[j].sample_rows,
                       univariate ? &pools[j].sorted_vals : nullptr};
        TestOutcome out = tester(sk, sj);
        ++res.tests_run;
        if (out.p_value >= alpha) {
          // Fail to reject: j's past cones predict the same future as k's.
          // Pool j's whole accumulated sample into k before the next test.
          for (int uid : pools[j].units) root_of[uid] = k;
          pools[k].units.insert(pools[k].units.end(), pools[j].units.begin(),
                                pools[j].units.end());
          pool_rows(pools[k], pools[j].sample_rows, flc, univariate);
          absorbed[j] = 1;
          ++merges;
        }
      }
    }
    if (merges == 0) break;
    if (options.max_passes > 0 && pass >= options.max_passes) break;
  }
  res.passes = pass;

  // Dense state ids in order of first appearance (ascending root unit index).
  std::vector<int> state_of_unit(U, -1);
  int m = 0;
  for (int u = 0; u < U; ++u)
    if (!absorbed[u]) state_of_unit[u] = m++;
  res.n_states = m;
  res.unit_to_state.resize(U);
  for (int u = 0; u < U; ++u) res.unit_to_state[u] = state_of_unit[root_of[u]];

  res.row_states.assign(flc.rows(), -1);
  std::vector<std::vector<int>> summary_rows(m);
  for (int u = 0; u < U; ++u) {
    int s = res.unit_to_state[u];
    for (int r : units[u].member_rows) res.row_states[r] = s;
    const std::vector<int>& sr =
        units[u].summary_rows.empty() ? units[u].member_rows
                                      : units[u].summary_rows;
    summary_rows[s].insert(summary_rows[s].end(), sr.begin(), sr.end());
  }

  res.state_means = Eigen::MatrixXd::Zero(m, flc.cols());
  res.state_sample_counts.assign(m, 0);
  for (int s = 0; s < m; ++s) {
    for (int r : summary_rows[s]) res.state_means.row(s) += flc.row(r);
    res.state_sample_counts[s] = static_cast<int64_t>(summary_rows[s].size());
    if (!summary_rows[s].empty())
      res.state_means.row(s) /= static_cast<double>(summary_rows[s].size());
  }
  return res;
}

MergeResult merge_states(const Eigen::MatrixXd& flc,
                         const ClusterAssignment& clusters, double alpha,
                         const MergeTester& tester,
                         const MergeOptions& options) {
  const int K = clusters.K;
  std::vector<std::vector<int>> members(K);
  for (size_t i = 0; i < clusters.labels.size(); ++i)
    members[clusters.labels[i]].push_back(static_cast<int>(i));

  // Singleton clusters cannot be tested; fold each into the nearest cluster
  // (by centroid distance) that has at least two rows.
  std::vector<int> redirect(K);
  std::iota(redirect.begin(), redirect.end(), 0);
  for (int c = 0; c < K; ++c) {
    if (members[c].size() >= 2 || members[c].empty()) continue;
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int o = 0; o < K; ++o) {
      if (o == c || members[o].size() < 2) continue;
      double sq = (clusters.centroids.row(c) - clusters.centroids.row(o))
                      .squaredNorm();
      if (sq < best_sq) { best_sq = sq; best = o; }
    }
    if (best < 0)
      throw std::invalid_argument(
          "merge_states: all clusters are singletons; reduce K");
    members[best].push_back(members[c][0]);
    members[c].clear();
    redirect[c] = best;
  }

  std::vector<MergeUnit> units;
  std::vector<int> unit_of_cluster(K, -1);
  for (int c = 0; c < K; ++c) {
    if (members[c].empty()) continue;
    std::sort(members[c].begin(), members[c].end());
    MergeUnit u;
    u.member_rows = members[c];
    u.sample_rows = members[c];
    unit_of_cluster[c] = static_cast<int>(units.size());
    units.push_back(std::move(u));
  }

  MergeResult res = merge_states(flc, units, alpha, tester, options);

  // Re-express the unit partition over the original cluster ids, following
  // singleton redirects (which may chain).
  std::vector<int> cluster_to_state(K);
  for (int c = 0; c < K; ++c) {
    int t = c;
    while (unit_of_cluster[t] < 0) t = redirect[t];
    cluster_to_state[c] = res.unit_to_state[unit_of_cluster[t]];
  }
  res.unit_to_state = std::move(cluster_to_state);
  return res;
}

MergeResult merge_states(const Eigen::MatrixXd& flc,
                         const std::vector<NeighborhoodIndex>& neighborhoods,
                         double alpha, const MergeTester& tester,
                         const MergeOptions& options) {
  std::vector<MergeUnit> units(neighborhoods.size());
  for (size_t i = 0; i < neighborhoods.size(); ++i) {
    units[i].member_rows = {neighborhoods[i].anchor};
    units[i].sample_rows = neighborhoods[i].members;
  }
  return merge_states(flc, units, alpha, tester, options);
}

MergeTester make_default_tester(const TestSettings& settings) {
  auto counter = std::make_shared<uint64_t>(0);
  return [settings, counter](const MergeSample& a,
                             const MergeSample& b) -> TestOutcome {
    if (a.sorted_values && b.sorted_values) {
      return ks_two_sample_sorted(*a.sorted_values, *b.sorted_values);
    }
    auto gather = [](const MergeSample& s) {
      Eigen::MatrixXd M(static_cast<int64_t>(s.rows->size()), s.flc->cols());
      for (size_t i = 0; i < s.rows->size(); ++i)
        M.row(static_cast<int64_t>(i)) = s.flc->row((*s.rows)[i]);
      return M;
    };
    Eigen::MatrixXd Fa = gather(a);
    Eigen::MatrixXd Fb = gather(b);
    TestSettings st = settings;
    st.seed = mix_seed(settings.seed, (*counter)++);
    const int64_t need = Fa.cols() + 2;
    if (Fa.rows() < need || Fb.rows() < need) {
      // Too small for the mean pretest; go straight to projections.
      return random_projection_test(Fa, Fb, st.n_proj, st.alpha, st.seed);
    }
    return test_equal_distributions(Fa, Fb, st);
  };
}

// ---------------------------------------------------------------------------
// Overlap exclusion
// ---------------------------------------------------------------------------

std::vector<int> exclude_overlaps(const std::vector<Coord>& coords,
                                  const ConeGeometry& g,
                                  const std::vector<int>& spatial_extent,
                                  Boundary boundary,
                                  const std::vector<int>& member_rows) {
  // Single-cell future stencils at distinct coordinates never overlap.
  if (g.h_f == 0) return member_rows;

  // Two future stencils rooted dt apart share a cell iff dt is small enough
  // for their time ranges to meet and every spatial axis distance is within
  // the combined cone radius c*(2 h_f - dt).
  const int max_dt = g.present_in == PresentIn::Future ? g.h_f : g.h_f - 1;
  const size_t dims = spatial_extent.size();

  auto axis_dist = [&](int a, int b, int extent) {
    int d = std::abs(a - b);
    if (boundary == Boundary::Wrap) d = std::min(d, extent - d);
    return d;
  };

  auto unravel = [&](int r) {
    std::vector<int> c(dims);
    for (int d = static_cast<int>(dims) - 1; d >= 0; --d) {
      c[d] = r % spatial_extent[d];
      r /= spatial_extent[d];
    }
    return c;
  };

  auto overlaps = [&](const Coord& p, const Coord& q) {
    int dt = std::abs(p.t - q.t);
    if (dt > max_dt) return false;
    int reach = g.c * (2 * g.h_f - dt);
    std::vector<int> cp = unravel(p.r), cq = unravel(q.r);
    for (size_t d = 0; d < dims; ++d)
      if (axis_dist(cp[d], cq[d], spatial_extent[d]) > reach) return false;
    return true;
  };

  std::vector<int> kept;
  std::map<int, std::vector<int>> kept_by_t;  // t -> kept rows at that t
  for (int row : member_rows) {
    const Coord& p = coords[row];
    bool clashes = false;
    auto lo = kept_by_t.lower_bound(p.t - max_dt);
    for (auto it = lo; !clashes && it != kept_by_t.end() && it->first <= p.t + max_dt;
         ++it) {
      for (int other : it->second) {
        if (overlaps(p, coords[other])) { clashes = true; break; }
      }
    }
    if (!clashes) {
      kept.push_back(row);
      kept_by_t[p.t].push_back(row);
    }
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Summaries and the equivalence matrix
// ---------------------------------------------------------------------------

StateSummary state_summary(const Eigen::MatrixXd& flc,
                           const std::vector<int>& state_labels,
                           int hist_bins) {
  if (static_cast<int64_t>(state_labels.size()) != flc.rows())
    throw std::invalid_argument("state_summary: label count mismatch");
  int m = 0;
  for (int s : state_labels) m = std::max(m, s + 1);
  if (m == 0) throw std::invalid_argument("state_summary: no states");

  StateSummary out;
  out.means = Eigen::MatrixXd::Zero(m, flc.cols());
  out.counts.assign(m, 0);
  for (int64_t i = 0; i < flc.rows(); ++i) {
    int s = state_labels[i];
    if (s < 0) throw std::invalid_argument("state_summary: negative label");
    out.means.row(s) += flc.row(i);
    ++out.counts[s];
  }
  for (int s = 0; s < m; ++s) {
    if (out.counts[s] == 0)
      throw std::invalid_argument("state_summary: empty state " + std::to_string(s));
    out.means.row(s) /= static_cast<double>(out.counts[s]);
  }

  if (flc.cols() == 1 && hist_bins > 0) {
    double lo = flc.minCoeff(), hi = flc.maxCoeff();
    if (hi <= lo) hi = lo + 1.0;
    out.hist_edges.resize(hist_bins + 1);
    for (int b = 0; b <= hist_bins; ++b)
      out.hist_edges[b] = lo + (hi - lo) * b / hist_bins;
    out.hist_counts = Eigen::MatrixXd::Zero(m, hist_bins);
    for (int64_t i = 0; i < flc.rows(); ++i) {
      double x = flc(i, 0);
      int b = static_cast<int>((x - lo) / (hi - lo) * hist_bins);
      b = std::clamp(b, 0, hist_bins - 1);
      out.hist_counts(state_labels[i], b) += 1.0;
    }
  }
  return out;
}

EquivalenceMatrix equivalence_matrix(const std::vector<int>& state_labels,
                                     int cap) {
  const int n = static_cast<int>(state_labels.size());
  if (n > cap)
    throw std::invalid_argument(
        "equivalence_matrix: N exceeds the quadratic-memory cap; compare "
        "sampled row pairs instead");
  EquivalenceMatrix m;
  m.n = n;
  m.a.assign(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m.a[static_cast<size_t>(i) * n + j] = state_labels[i] == state_labels[j];
  return m;
}

// ---------------------------------------------------------------------------
// Model serialization
// ---------------------------------------------------------------------------

namespace {

constexpr char kModelMagic[8] = {'L', 'S', 'M', '1', 0, 0, 0, 0};

enum FieldType : uint8_t { kF64 = 0, kI64 = 1, kString = 2, kF64Array = 3, kI64Array = 4 };

void put_field_header(std::ostream& os, const std::string& name, uint8_t type,
                      uint64_t count) {
  write_u32le(os, static_cast<uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  os.put(static_cast<char>(type));
  write_u64le(os, count);
}

void put_f64(std::ostream& os, const std::string& name, double v) {
  put_field_header(os, name, kF64, 1);
  write_f64le(os, v);
}

void put_i64(std::ostream& os, const std::string& name, int64_t v) {
  put_field_header(os, name, kI64, 1);
  write_u64le(os, static_cast<uint64_t>(v));
}

void put_string(std::ostream& os, const std::string& name, const std::string& v) {
  put_field_header(os, name, kString, v.size());
  os.write(v.data(), static_cast<std::streamsize>(v.size()));
}

void put_f64_array(std::ostream& os, const std::string& name,
                   const double* data, uint64_t count) {
  put_field_header(os, name, kF64Array, count);
  for (uint64_t i = 0; i < count; ++i) write_f64le(os, data[i]);
}

void put_i64_array(std::ostream& os, const std::string& name,
                   const int64_t* data, uint64_t count) {
  put_field_header(os, name, kI64Array, count);
  for (uint64_t i = 0; i < count; ++i)
    write_u64le(os, static_cast<uint64_t>(data[i]));
}

struct RawField {
  uint8_t type = 0;
  std::vector<double> f64s;
  std::vector<int64_t> i64s;
  std::string str;
};

std::map<std::string, RawField> read_fields(std::istream& is) {
  std::map<std::string, RawField> fields;
  while (true) {
    uint32_t name_len = read_u32le(is);
    if (!is) break;
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    int type = is.get();
    uint64_t count = read_u64le(is);
    if (!is) throw std::runtime_error("model file: truncated field " + name);
    RawField f;
    f.type = static_cast<uint8_t>(type);
    switch (type) {
      case kF64:
      case kF64Array:
        f.f64s.resize(count);
        for (uint64_t i = 0; i < count; ++i) f.f64s[i] = read_f64le(is);
        break;
      case kI64:
      case kI64Array:
        f.i64s.resize(count);
        for (uint64_t i = 0; i < count; ++i)
          f.i64s[i] = static_cast<int64_t>(read_u64le(is));
        break;
      case kString:
        f.str.resize(count);
        is.read(f.str.data(), static_cast<std::streamsize>(count));
        break;
      default:
        throw std::runtime_error("model file: unknown field type");
    }
    if (!is) throw std::runtime_error("model file: truncated payload of " + name);
    fields[name] = std::move(f);
  }
  return fields;
}

std::string mode_name(FitMode m) {
  switch (m) {
    case FitMode::PreClustered: return "cluster";
    case FitMode::DirectKnn: return "knn";
    case FitMode::DirectDelta: return "delta";
  }
  return "knn";
}

FitMode mode_from_name(const std::string& s) {
  if (s == "cluster") return FitMode::PreClustered;
  if (s == "knn") return FitMode::DirectKnn;
  if (s == "delta") return FitMode::DirectDelta;
  throw std::runtime_error("model file: unknown mode " + s);
}

}  // namespace

std::vector<uint8_t> StateModel::serialize() const {
  std::ostringstream os(std::ios::binary);
  os.write(kModelMagic, 8);
  write_u32le(os, 1);  // version
  put_i64(os, "spatial_dims", spatial_dims);
  put_i64(os, "cone_c", geometry.c);
  put_i64(os, "cone_hp", geometry.h_p);
  put_i64(os, "cone_hf", geometry.h_f);
  put_i64(os, "present_in", geometry.present_in == PresentIn::Future ? 1 : 0);
  put_f64_array(os, "std_mean", standardization.mean.data(),
                standardization.mean.size());
  put_f64_array(os, "std_sd", standardization.sd.data(),
                standardization.sd.size());
  put_i64(os, "centroid_rows", cluster_centroids.rows());
  // Row-major so the file reads row by row regardless of in-memory layout.
  {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
        cluster_centroids;
    put_f64_array(os, "centroids", rm.data(),
                  static_cast<uint64_t>(rm.size()));
  }
  {
    std::vector<int64_t> c2s(cluster_to_state.begin(), cluster_to_state.end());
    put_i64_array(os, "cluster_to_state", c2s.data(), c2s.size());
  }
  put_i64(os, "n_states", state_means.rows());
  {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
        state_means;
    put_f64_array(os, "state_means", rm.data(), static_cast<uint64_t>(rm.size()));
  }
  put_i64_array(os, "state_counts", state_sample_counts.data(),
                state_sample_counts.size());
  put_f64(os, "alpha", alpha);
  put_string(os, "mode", mode_name(mode));
  put_f64(os, "mode_param", mode_param);
  std::string s = os.str();
  return std::vector<uint8_t>(s.begin(), s.end());
}

StateModel StateModel::deserialize(const std::vector<uint8_t>& bytes) {
  std::istringstream is(std::string(bytes.begin(), bytes.end()),
                        std::ios::binary);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kModelMagic, 8) != 0)
    throw std::runtime_error("model file: bad magic");
  uint32_t version = read_u32le(is);
  if (version != 1) throw std::runtime_error("model file: unsupported version");
  auto fields = read_fields(is);
  auto need = [&](const char* name) -> RawField& {
    auto it = fields.find(name);
    if (it == fields.end())
      throw std::runtime_error(std::string("model file: missing field ") + name);
    return it->second;
  };

  StateModel m;
  m.spatial_dims = static_cast<int>(need("spatial_dims").i64s.at(0));
  m.geometry.c = static_cast<int>(need("cone_c").i64s.at(0));
  m.geometry.h_p = static_cast<int>(need("cone_hp").i64s.at(0));
  m.geometry.h_f = static_cast<int>(need("cone_hf").i64s.at(0));
  m.geometry.present_in = need("present_in").i64s.at(0) == 1
                              ? PresentIn::Future
                              : PresentIn::Past;
  const auto& mean = need("std_mean").f64s;
  const auto& sd = need("std_sd").f64s;
  m.standardization.mean =
      Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
  m.standardization.sd = Eigen::Map<const Eigen::VectorXd>(sd.data(), sd.size());
  int64_t K = need("centroid_rows").i64s.at(0);
  const auto& cen = need("centroids").f64s;
  int64_t n_p = K > 0 ? static_cast<int64_t>(cen.size()) / K : 0;
  m.cluster_centroids =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(cen.data(), K, n_p);
  const auto& c2s = need("cluster_to_state").i64s;
  m.cluster_to_state.assign(c2s.begin(), c2s.end());
  int64_t n_states = need("n_states").i64s.at(0);
  const auto& sm = need("state_means").f64s;
  int64_t n_f = n_states > 0 ? static_cast<int64_t>(sm.size()) / n_states : 0;
  m.state_means =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(sm.data(), n_states, n_f);
  const auto& counts = need("state_counts").i64s;
  m.state_sample_counts.assign(counts.begin(), counts.end());
  m.alpha = need("alpha").f64s.at(0);
  m.mode = mode_from_name(need("mode").str);
  m.mode_param = need("mode_param").f64s.at(0);
  return m;
}

void StateModel::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  auto bytes = serialize();
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

StateModel StateModel::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                             std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::string StateModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "licors-state-model";
  j["version"] = 1;
  j["spatial_dims"] = spatial_dims;
  j["cone"] = {{"c", geometry.c},
               {"h_p", geometry.h_p},
               {"h_f", geometry.h_f},
               {"present_in",
                geometry.present_in == PresentIn::Future ? "future" : "past"}};
  j["standardization"] = {
      {"mean", std::vector<double>(standardization.mean.data(),
                                   standardization.mean.data() +
                                       standardization.mean.size())},
      {"sd", std::vector<double>(standardization.sd.data(),
                                 standardization.sd.data() +
                                     standardization.sd.size())}};
  std::vector<std::vector<double>> cents(cluster_centroids.rows());
  for (int64_t i = 0; i < cluster_centroids.rows(); ++i)
    cents[i] = std::vector<double>(cluster_centroids.row(i).begin(),
                                   cluster_centroids.row(i).end());
  j["cluster_centroids"] = cents;
  j["cluster_to_state"] = cluster_to_state;
  std::vector<std::vector<double>> means(state_means.rows());
  for (int64_t i = 0; i < state_means.rows(); ++i)
    means[i] = std::vector<double>(state_means.row(i).begin(),
                                   state_means.row(i).end());
  j["state_means"] = means;
  j["state_sample_counts"] = state_sample_counts;
  j["alpha"] = alpha;
  j["mode"] = mode_name(mode);
  j["mode_param"] = mode_param;
  return j.dump(2) + "\n";
}

void StateModel::save_text(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << to_json();
}

}  // namespace licors
