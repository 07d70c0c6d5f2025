#include "licors/two_sample.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "licors/util.hpp"

namespace licors {

double kolmogorov_sf(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  // Below 0.2 the survival function is 1 to well past the series tolerance.
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100000; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-10) break;
    sign = -sign;
  }
  double p = 2.0 * sum;
  return std::clamp(p, 0.0, 1.0);
}

namespace {

void check_sample(std::span<const double> s, const char* name) {
  if (s.empty()) throw std::invalid_argument(std::string("ks_two_sample: empty sample ") + name);
  for (double v : s)
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string("ks_two_sample: non-finite value in ") + name);
}

double ks_statistic_sweep(std::span<const double> a, std::span<const double> b) {
  const size_t n = a.size(), m = b.size();
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    double x = std::min(a[i], b[j]);
    while (i < n && a[i] <= x) ++i;
    while (j < m && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n -
                             static_cast<double>(j) / m));
  }
  return d;
}

// D via the smaller sample's jump points only: within a window where the
// smaller ECDF is constant, |F_a - F_b| is extremal at the window ends. A
// run of tied values is one jump, from run_begin/n just left of x to
// run_end/n at x.
double ks_statistic_search(std::span<const double> small_s,
                           std::span<const double> large_s) {
  const double n = static_cast<double>(small_s.size());
  const double m = static_cast<double>(large_s.size());
  double d = 0.0;
  size_t j = 0;
  while (j < small_s.size()) {
    double x = small_s[j];
    size_t run_end = j + 1;
    while (run_end < small_s.size() && small_s[run_end] == x) ++run_end;
    double below = static_cast<double>(
        std::lower_bound(large_s.begin(), large_s.end(), x) - large_s.begin());
    double at_or_below = static_cast<double>(
        std::upper_bound(large_s.begin(), large_s.end(), x) - large_s.begin());
    d = std::max(d, std::abs(static_cast<double>(j) / n - below / m));
    d = std::max(d, std::abs(static_cast<double>(run_end) / n - at_or_below / m));
    j = run_end;
  }
  return d;
}

TestOutcome ks_from_statistic(double d, size_t n, size_t m) {
  double ne = static_cast<double>(n) * static_cast<double>(m) /
              (static_cast<double>(n) + static_cast<double>(m));
  TestOutcome out;
  out.method = TestMethod::KS1D;
  out.statistic = d;
  out.p_value = kolmogorov_sf(std::sqrt(ne) * d);
  return out;
}

}  // namespace

TestOutcome ks_two_sample(std::span<const double> a, std::span<const double> b) {
  check_sample(a, "a");
  check_sample(b, "b");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return ks_from_statistic(ks_statistic_sweep(sa, sb), sa.size(), sb.size());
}

TestOutcome ks_two_sample_sorted(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample_sorted: empty sample");
  double d = (a.size() <= b.size()) ? ks_statistic_search(a, b)
                                    : ks_statistic_search(b, a);
  return ks_from_statistic(d, a.size(), b.size());
}

TestOutcome mean_pretest(const Eigen::MatrixXd& Fa, const Eigen::MatrixXd& Fb) {
  if (Fa.cols() != Fb.cols())
    throw std::invalid_argument("mean_pretest: column mismatch");
  const int d = static_cast<int>(Fa.cols());
  const int na = static_cast<int>(Fa.rows());
  const int nb = static_cast<int>(Fb.rows());

  TestOutcome out;
  out.method = TestMethod::MeanPretest;

  if (d == 1) {
    if (na < 2 || nb < 2)
      throw std::invalid_argument("mean_pretest: need >= 2 rows per sample");
    double ma = Fa.col(0).mean(), mb = Fb.col(0).mean();
    double va = (Fa.col(0).array() - ma).square().sum() / (na - 1);
    double vb = (Fb.col(0).array() - mb).square().sum() / (nb - 1);
    double se2 = va / na + vb / nb;
    if (se2 <= 0.0) {
      // Both samples constant: equal constants match exactly, different
      // constants are separated with certainty.
      out.statistic = 0.0;
      out.p_value = (ma == mb) ? 1.0 : 0.0;
      return out;
    }
    double t = (ma - mb) / std::sqrt(se2);
    double df = se2 * se2 /
                ((va / na) * (va / na) / (na - 1) + (vb / nb) * (vb / nb) / (nb - 1));
    boost::math::students_t dist(df);
    out.statistic = std::abs(t);
    out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return out;
  }

  if (na < d + 2 || nb < d + 2)
    throw std::invalid_argument("mean_pretest: need >= dim+2 rows per sample");

  Eigen::RowVectorXd ma = Fa.colwise().mean();
  Eigen::RowVectorXd mb = Fb.colwise().mean();
  Eigen::MatrixXd Ca = Fa.rowwise() - ma;
  Eigen::MatrixXd Cb = Fb.rowwise() - mb;
  Eigen::MatrixXd pooled =
      (Ca.transpose() * Ca + Cb.transpose() * Cb) / (na + nb - 2);
  Eigen::VectorXd diff = (ma - mb).transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled);
  Eigen::VectorXd solved;
  bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive();
  if (!singular) {
    // Rank check through the pivots; a rank-deficient pooled covariance can
    // still "solve" an in-range right-hand side without complaint.
    Eigen::VectorXd piv = ldlt.vectorD();
    double dmax = piv.cwiseAbs().maxCoeff();
    if (!(dmax > 0.0) || piv.minCoeff() < 1e-12 * dmax) singular = true;
  }
  if (!singular) {
    solved = ldlt.solve(diff);
    if (!solved.allFinite()) singular = true;
  }
  if (singular) {
    Eigen::VectorXd var = pooled.diagonal().cwiseMax(1e-300);
    solved = diff.cwiseQuotient(var);
    out.degenerate_fallback = true;
  }

  double scale = static_cast<double>(na) * nb / (na + nb);
  double t2 = scale * diff.dot(solved);
  t2 = std::max(t2, 0.0);
  double f_df2 = static_cast<double>(na + nb - 1 - d);
  double f_stat = f_df2 / (d * static_cast<double>(na + nb - 2)) * t2;
  boost::math::fisher_f fdist(d, f_df2);
  out.statistic = t2;
  out.p_value = boost::math::cdf(boost::math::complement(fdist, f_stat));
  return out;
}

TestOutcome random_projection_test(const Eigen::MatrixXd& Fa,
                                   const Eigen::MatrixXd& Fb, int n_proj,
                                   double alpha, uint64_t seed) {
  (void)alpha;  // level is applied by the caller; kept for interface symmetry
  if (n_proj < 1) throw std::invalid_argument("random_projection_test: n_proj must be positive");
  if (Fa.cols() != Fb.cols() || Fa.cols() < 2)
    throw std::invalid_argument("random_projection_test: need matching n_f >= 2");
  if (Fa.rows() < 1 || Fb.rows() < 1)
    throw std::invalid_argument("random_projection_test: empty sample");

  const int d = static_cast<int>(Fa.cols());
  SplitMix64 rng(mix_seed(seed, 0x70726f6a));
  TestOutcome best;
  best.p_value = 1.0;
  best.statistic = 0.0;
  double min_p = 1.0;
  for (int p = 0; p < n_proj; ++p) {
    Eigen::VectorXd dir(d);
    for (int j = 0; j < d; ++j) dir[j] = rng.gaussian();
    double norm = dir.norm();
    if (norm == 0.0) dir[0] = 1.0; else dir /= norm;

    Eigen::VectorXd pa = Fa * dir;
    Eigen::VectorXd pb = Fb * dir;
    TestOutcome o = ks_two_sample({pa.data(), static_cast<size_t>(pa.size())},
                                  {pb.data(), static_cast<size_t>(pb.size())});
    if (o.p_value < min_p) {
      min_p = o.p_value;
      best.statistic = o.statistic;
    }
  }
  best.method = TestMethod::RandomProjKS;
  best.p_value = std::min(1.0, n_proj * min_p);
  return best;
}

TestOutcome test_equal_distributions(const Eigen::MatrixXd& Fa,
                                     const Eigen::MatrixXd& Fb,
                                     const TestSettings& settings) {
  if (Fa.cols() != Fb.cols())
    throw std::invalid_argument("test_equal_distributions: column mismatch");
  if (Fa.cols() == 1) {
    return ks_two_sample({Fa.data(), static_cast<size_t>(Fa.rows())},
                         {Fb.data(), static_cast<size_t>(Fb.rows())});
  }
  TestOutcome pre = mean_pretest(Fa, Fb);
  if (pre.p_value < settings.alpha) return pre;
  TestOutcome proj = random_projection_test(Fa, Fb, settings.n_proj,
                                            settings.alpha, settings.seed);
  proj.p_value = std::min(pre.p_value, proj.p_value);
  proj.degenerate_fallback = proj.degenerate_fallback || pre.degenerate_fallback;
  return proj;
}

}  // namespace licors
