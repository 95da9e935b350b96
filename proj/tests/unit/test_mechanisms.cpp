#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpsize/mechanisms.hpp"

using namespace dpsize;

TEST(ClampNormalize, Examples) {
  EXPECT_DOUBLE_EQ(clamp_normalize(0.0, -5.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(clamp_normalize(7.0, -5.0, 5.0), 1.0);
  EXPECT_NEAR(clamp_normalize(0.5, -5.0, 5.0), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(clamp_normalize(-9.0, -5.0, 5.0), -1.0);
}

TEST(ClampNormalize, InvalidBounds) {
  try {
    clamp_normalize(0.0, 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidBounds);
  }
}

TEST(ClampNormalize, MonotoneAndLipschitz) {
  double prev = clamp_normalize(-8.0, -5.0, 5.0);
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double f = clamp_normalize(x, -5.0, 5.0);
    EXPECT_GE(f, prev);
    EXPECT_LE(std::abs(f - prev), 2.0 / 10.0 * 0.01 + 1e-12);
    // Idempotent after the first application on the normalized scale.
    EXPECT_DOUBLE_EQ(clamp_normalize(f, -1.0, 1.0), f);
    prev = f;
  }
}

TEST(RegressionSensitivity, ClosedFormAndCount) {
  EXPECT_DOUBLE_EQ(regression_sensitivity(2), 9.0);
  EXPECT_DOUBLE_EQ(regression_sensitivity(1), 5.0);
  EXPECT_DOUBLE_EQ(regression_sensitivity(3), 14.0);
  for (int p = 1; p <= 10; ++p) {
    // Every entry is bounded by 1 in absolute value, so Delta equals the
    // number of unique entries: p + p + C(p,2) + p + 1 + 1.
    const double by_category = p + p + p * (p - 1) / 2.0 + p + 1 + 1;
    EXPECT_DOUBLE_EQ(regression_sensitivity(p), by_category);
    EXPECT_EQ(regression_summary_dim(p), static_cast<int>(by_category));
  }
  EXPECT_THROW(regression_sensitivity(0), Error);
}

TEST(Laplace, LogDensity) {
  EXPECT_NEAR(laplace_log_density(0.0, 0.5), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(laplace_log_density(1.3, 2.0), laplace_log_density(-1.3, 2.0));
  // Trapezoid normalization on a wide grid.
  double total = 0.0;
  const double h = 1e-3;
  for (double z = -60.0; z <= 60.0; z += h) total += std::exp(laplace_log_density(z, 1.5)) * h;
  EXPECT_NEAR(total, 1.0, 1e-5);
}

TEST(DiscreteLaplace, PmfExamplesAndNormalization) {
  EXPECT_NEAR(std::exp(discrete_laplace_log_pmf(0, 1.0)), 0.46212, 1e-4);
  for (double eps : {0.05, 0.5, 1.0, 3.0}) {
    const auto w = truncation_half_width(eps);
    double total = 0.0;
    for (std::int64_t k = -w; k <= w; ++k) {
      EXPECT_DOUBLE_EQ(discrete_laplace_log_pmf(k, eps), discrete_laplace_log_pmf(-k, eps));
      total += std::exp(discrete_laplace_log_pmf(k, eps));
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
  EXPECT_NEAR(std::exp(discrete_laplace_log_pmf(0, 50.0)), 1.0, 1e-15);
}

TEST(DiscreteGaussian, WeightAndNormalization) {
  EXPECT_DOUBLE_EQ(discrete_gaussian_log_weight(0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(discrete_gaussian_log_weight(1, 1.0), -0.5);
  EXPECT_DOUBLE_EQ(discrete_gaussian_log_weight(-1, 1.0), -0.5);
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    const auto w = truncation_half_width(eps);
    double total = 0.0;
    for (std::int64_t k = -w; k <= w; ++k) total += std::exp(discrete_gaussian_log_pmf(k, eps));
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(DiscreteSamplers, MomentsAndDeterminism) {
  Rng a(7);
  Rng b(7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_discrete_laplace(0.7, a), sample_discrete_laplace(0.7, b));
    EXPECT_EQ(sample_discrete_gaussian(0.7, a), sample_discrete_gaussian(0.7, b));
  }
  Rng rng(11);
  const double eps = 1.0;
  const double q = std::exp(-eps);
  const int draws = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  double g2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double k = static_cast<double>(sample_discrete_laplace(eps, rng));
    s1 += k;
    s2 += k * k;
    const double g = static_cast<double>(sample_discrete_gaussian(eps, rng));
    g2 += g * g;
  }
  const double var_dl = 2.0 * q / ((1.0 - q) * (1.0 - q));
  EXPECT_NEAR(s1 / draws, 0.0, 5.0 * std::sqrt(var_dl / draws));
  EXPECT_NEAR(s2 / draws, var_dl, 0.03 * var_dl);
  // Discrete Gaussian with sigma = 1/eps = 1 has variance slightly below 1.
  double z = 0.0;
  double m2 = 0.0;
  for (std::int64_t k = -40; k <= 40; ++k) {
    const double w = std::exp(-0.5 * k * k);
    z += w;
    m2 += w * k * k;
  }
  EXPECT_NEAR(g2 / draws, m2 / z, 0.02);
}

TEST(NoiseSpec, ScaleFromEpsilon) {
  const auto s = NoiseSpec::from_epsilon(NoiseFamily::kContinuousLaplace, 9.0, 1.0);
  EXPECT_DOUBLE_EQ(s.scale(), 9.0);
  EXPECT_TRUE(s.pure_dp());
  const auto e = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, kInf);
  EXPECT_TRUE(e.exact());
  EXPECT_EQ(e.log_density(0.0), 0.0);
  EXPECT_EQ(e.log_density(1.0), kNegInf);
  const auto dg = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteGaussian, 1.0, 1.0);
  EXPECT_FALSE(dg.pure_dp());
  EXPECT_EQ(dg.log_density(0.5), kNegInf);
}

TEST(Kng, SamplerRangeConcentrationAndInverse) {
  Rng rng(3);
  const std::int64_t n = 10000;
  const double eps = 1.0;
  std::vector<double> v;
  for (int i = 0; i < 20000; ++i) {
    const double s = kng_mean_sample(0.3, n, eps, rng);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
    v.push_back(s);
  }
  std::sort(v.begin(), v.end());
  const double width = v[static_cast<std::size_t>(0.975 * v.size())] -
                       v[static_cast<std::size_t>(0.025 * v.size())];
  // 95% of a Laplace lies within +-ln(20) scales, scale = 2 / (n eps).
  EXPECT_LE(width, 14.0 / (n * eps));
  for (double u : {0.01, 0.3, 0.5, 0.9}) {
    const double x = truncated_laplace_quantile(u, 0.4, 0.2, 0.0, 1.0);
    EXPECT_NEAR(truncated_laplace_cdf(x, 0.4, 0.2, 0.0, 1.0), u, 1e-10);
  }
  // Flat limit: nearly uniform.
  double m = 0.0;
  for (int i = 0; i < 20000; ++i) m += kng_mean_sample(0.5, 1, 1e-6, rng);
  EXPECT_NEAR(m / 20000, 0.5, 0.01);
  try {
    kng_mean_sample(1.5, 10, 1.0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidStatistic);
  }
}

TEST(Privatize, RegressionSummaryShapeAndDegenerateRow) {
  Eigen::MatrixXd x(1, 2);
  x << 9.0, 9.0;
  Eigen::VectorXd y(1);
  y << 9.0;
  Rng rng(1);
  const auto out = privatize_regression_summaries(x, y, -5, 5, PrivacyBudget::make(kInf, kInf), rng);
  ASSERT_EQ(out.s.size(), 9u);
  for (double v : out.s) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(out.n_dp, 1.0);
  Eigen::MatrixXd empty(0, 2);
  Eigen::VectorXd ey(0);
  EXPECT_THROW(privatize_regression_summaries(empty, ey, -5, 5, PrivacyBudget::make(1, 1), rng),
               Error);
}

TEST(Privatize, RegressionNoiseScale) {
  // Empirical mean absolute noise equals Delta / eps_s = 9 / 2.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
  Rng rng(5);
  double mad = 0.0;
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    const auto out = privatize_regression_summaries(x, y, -5, 5, PrivacyBudget::make(2.0, kInf), rng);
    mad += std::abs(out.s[0]);
  }
  EXPECT_NEAR(mad / reps, 4.5, 0.1);
}

TEST(Privatize, Dirichlet) {
  Eigen::MatrixXd x(1, 3);
  x << 1.0 / 3, 1.0 / 3, 1.0 / 3;
  Rng rng(2);
  const auto s = privatize_dirichlet_summaries(x, 0.0006, kInf, rng);
  for (double v : s) EXPECT_NEAR(v, std::log(1.0 / 3), 1e-15);
  Eigen::MatrixXd low(1, 3);
  low << 0.0001, 0.4999, 0.5;
  const auto t = privatize_dirichlet_summaries(low, 0.0006, kInf, rng);
  EXPECT_NEAR(t[0], std::log(0.0006), 1e-15);
  EXPECT_THROW(privatize_dirichlet_summaries(x, 1.0, 1.0, rng), Error);
  Eigen::MatrixXd bad(1, 3);
  bad << 0.5, 0.5, 0.5;
  EXPECT_THROW(privatize_dirichlet_summaries(bad, 0.0006, 1.0, rng), Error);
  // Noise scale -3 log(a) / eps_s = 22.26 / eps_s; check E|noise|.
  Rng r2(9);
  double mad = 0.0;
  for (int i = 0; i < 20000; ++i) mad += std::abs(privatize_dirichlet_summaries(x, 0.0006, 2.0, r2)[1] - std::log(1.0 / 3));
  EXPECT_NEAR(mad / 20000, -3.0 * std::log(0.0006) / 2.0, 0.25);
  // Sensitivity of the 3-vector is 3 |log a|.
  std::vector<double> out(3);
  dirichlet_record_statistic(std::vector<double>{1e-9, 1e-9, 1.0}, 0.0006, out);
  double l1 = 0.0;
  for (double v : out) l1 += std::abs(v);
  EXPECT_LE(l1, -3.0 * std::log(0.0006) + 1e-12);
}

TEST(Privatize, Count) {
  Rng rng(4);
  EXPECT_DOUBLE_EQ(privatize_count(17, kInf, NoiseFamily::kContinuousLaplace, rng), 17.0);
  std::vector<double> v;
  for (int i = 0; i < 20001; ++i) v.push_back(privatize_count(100, 1.0, NoiseFamily::kContinuousLaplace, rng));
  std::nth_element(v.begin(), v.begin() + 10000, v.end());
  EXPECT_NEAR(v[10000], 100.0, 0.1);
  const double d = privatize_count(100, 1.0, NoiseFamily::kDiscreteLaplace, rng);
  EXPECT_EQ(d, std::nearbyint(d));
}

TEST(DpRatio, DiscreteLaplaceAdjacentInputs) {
  const double eps = 0.8;
  const CountMechanism m(NoiseFamily::kDiscreteLaplace, eps);
  const auto w = truncation_half_width(eps);
  double worst = 0.0;
  for (std::int64_t k = 50 - w; k <= 51 + w; ++k) {
    worst = std::max(worst, std::abs(m.log_density(k, 50) - m.log_density(k, 51)));
  }
  EXPECT_NEAR(worst, eps, 1e-9);
}

TEST(DpToTv, Conversions) {
  EXPECT_DOUBLE_EQ(dp_to_tv_delta(DpFramework::kPureEps, 0.0), 0.0);
  EXPECT_NEAR(dp_to_tv_delta(DpFramework::kPureEps, std::log(3.0)), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(dp_to_tv_delta(DpFramework::kGdp, 0.0), 0.0);
  EXPECT_NEAR(dp_to_tv_delta(DpFramework::kApproxEpsDelta, 1.0, 0.01),
              (0.02 + std::exp(1.0) - 1) / (std::exp(1.0) + 1), 1e-15);
  EXPECT_NEAR(dp_to_tv_delta(DpFramework::kZcdp, 0.02), 0.1, 1e-15);
  for (auto fw : {DpFramework::kPureEps, DpFramework::kApproxEpsDelta, DpFramework::kGdp,
                  DpFramework::kZcdp, DpFramework::kRenyi}) {
    double prev = 0.0;
    for (double p = 0.0; p <= 10.0; p += 0.05) {
      const double d = dp_to_tv_delta(fw, p, 0.001);
      EXPECT_GE(d, prev - 1e-15);
      EXPECT_LE(d, 1.0);
      prev = d;
    }
  }
  try {
    dp_to_tv_delta(DpFramework::kPureEps, -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidBudget);
  }
}

TEST(PrivacyBudget, Validation) {
  EXPECT_TRUE(PrivacyBudget::make(1.0, kInf).bounded());
  EXPECT_FALSE(PrivacyBudget::make(1.0, 1.0).bounded());
  EXPECT_THROW(PrivacyBudget::make(0.0, 1.0), Error);
  EXPECT_THROW(PrivacyBudget::make(1.0, -1.0), Error);
  EXPECT_EQ(parse_noise_family("discrete_gaussian"), NoiseFamily::kDiscreteGaussian);
  EXPECT_THROW(parse_noise_family("gauss"), Error);
}
