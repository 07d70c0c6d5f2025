// Non-parametric two-sample tests for equality of conditional distributions.
//
// Univariate samples are compared with a Kolmogorov-Smirnov test whose
// p-value comes from the asymptotic Kolmogorov distribution at effective
// sample size ne = |a||b| / (|a|+|b|). Multivariate samples go through a
// staged procedure: a cheap mean test first (Welch in one dimension,
// Hotelling's T^2 with pooled covariance otherwise), and only when that
// cannot reject, a battery of random one-dimensional projections each
// followed by a KS test, combined by Bonferroni.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

namespace licors {

enum class TestMethod { KS1D, MeanPretest, RandomProjKS };

struct TestOutcome {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::KS1D;
  // Set when a degenerate input forced a fallback (e.g. singular pooled
  // covariance handled with its diagonal).
  bool degenerate_fallback = false;
};

// Survival function of the Kolmogorov distribution,
// Q(lambda) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2),
// with the series truncated once terms drop below 1e-10.
double kolmogorov_sf(double lambda);

TestOutcome ks_two_sample(std::span<const double> a, std::span<const double> b);

// Same test on pre-sorted inputs; the statistic is evaluated by walking the
// smaller sample with binary searches into the larger one, which keeps the
// recursive merge loop cheap when one side has pooled thousands of values.
TestOutcome ks_two_sample_sorted(std::span<const double> a_sorted,
                                 std::span<const double> b_sorted);

// Equality-of-means pretest. One column: Welch's t. Several columns:
// two-sample Hotelling T^2 with pooled covariance and an F p-value; a
// singular pooled covariance falls back to its diagonal and flags the
// outcome. Requires at least dim+2 rows per sample (2 when univariate).
TestOutcome mean_pretest(const Eigen::MatrixXd& Fa, const Eigen::MatrixXd& Fb);

// Projects both samples onto n_proj unit-norm Gaussian directions, runs a KS
// test per projection and Bonferroni-combines: p = min(1, n_proj * min p_i).
// Deterministic given the seed.
TestOutcome random_projection_test(const Eigen::MatrixXd& Fa,
                                   const Eigen::MatrixXd& Fb, int n_proj,
                                   double alpha, uint64_t seed);

struct TestSettings {
  double alpha = 0.05;
  int n_proj = 10;
  uint64_t seed = 0;
};

// Staged dispatch: KS directly when n_f = 1; otherwise the mean pretest,
// escalating to random projections only when the means cannot be told apart.
// The reported p-value is the minimum over the stages that ran.
TestOutcome test_equal_distributions(const Eigen::MatrixXd& Fa,
                                     const Eigen::MatrixXd& Fb,
                                     const TestSettings& settings);

}  // namespace licors
