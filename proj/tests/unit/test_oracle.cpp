#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "dpsize/oracle.hpp"

using namespace dpsize;

namespace {

double max_abs_diff(const EnumeratedPosterior& p, const EnumeratedPosterior& q) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.grid.size(); ++i) {
    worst = std::max(worst, std::abs(p.probabilities[i] - q.prob_of(p.grid[i])));
  }
  for (std::size_t i = 0; i < q.grid.size(); ++i) {
    worst = std::max(worst, std::abs(q.probabilities[i] - p.prob_of(q.grid[i])));
  }
  return worst;
}

}  // namespace

TEST(BernoulliEnumeration, MatchesBruteForce) {
  for (auto fam : {NoiseFamily::kDiscreteLaplace, NoiseFamily::kContinuousLaplace}) {
    const auto noise = NoiseSpec::from_epsilon(fam, 1.0, 0.7);
    const CountMechanism count(fam, 1.3);
    const double s = fam == NoiseFamily::kDiscreteLaplace ? 4.0 : 3.6;
    const double n_dp = fam == NoiseFamily::kDiscreteLaplace ? 7.0 : 6.8;
    const auto fast = enumerate_bernoulli_posterior(s, n_dp, 1.5, 2.0, 1, 10, noise, count);
    const auto slow = enumerate_bernoulli_posterior_bruteforce(s, n_dp, 1.5, 2.0, 1, 10, noise, count);
    EXPECT_LT(max_abs_diff(fast, slow), 1e-9);
    double t = 0.0;
    for (double p : fast.probabilities) t += p;
    EXPECT_NEAR(t, 1.0, 1e-12);
  }
}

TEST(BernoulliEnumeration, ExactReleasesGivePointMass) {
  const auto noise = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, kInf);
  const CountMechanism count(NoiseFamily::kDiscreteLaplace, kInf);
  const auto p = enumerate_bernoulli_posterior(3.0, 5.0, 1.0, 1.0, 1, 8, noise, count);
  ASSERT_EQ(p.grid.size(), 1u);
  EXPECT_EQ(p.grid[0], (std::vector<std::int64_t>{5, 3}));
  EXPECT_DOUBLE_EQ(p.probabilities[0], 1.0);
}

TEST(BernoulliEnumeration, SymmetricPriorReflects) {
  // With a = b and s reflected about n/2 at fixed n the posterior reflects.
  const auto noise = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0);
  const CountMechanism count(NoiseFamily::kDiscreteLaplace, kInf);
  const auto p = enumerate_bernoulli_posterior(2.0, 8.0, 2.0, 2.0, 1, 8, noise, count);
  const auto q = enumerate_bernoulli_posterior(6.0, 8.0, 2.0, 2.0, 1, 8, noise, count);
  for (std::int64_t k = 0; k <= 8; ++k) {
    EXPECT_NEAR(p.prob_of({8, k}), q.prob_of({8, 8 - k}), 1e-14);
  }
}

TEST(BernoulliEnumeration, BruteForceCap) {
  const auto noise = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0);
  const CountMechanism count(NoiseFamily::kDiscreteLaplace, 1.0);
  try {
    enumerate_bernoulli_posterior_bruteforce(3.0, 5.0, 1, 1, 1, 17, noise, count);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapExceeded);
  }
  EXPECT_THROW(enumerate_bernoulli_posterior(3.0, 5.0, 1, 1, 4, 2, noise, count), Error);
}

TEST(PoissonEnumeration, FactorizedMatchesNaive) {
  const PoissonMultinomialModel m({{2.0, 0.7, 1.5}, 0.5},
                                  NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0));
  const std::vector<double> s{3.0, 0.0, 5.0};
  const auto a = enumerate_poisson_multinomial_posterior(m, s, 20);
  const auto b = enumerate_poisson_multinomial_naive(m, s, 20);
  EXPECT_LT(max_abs_diff(a, b), 1e-9);
  EXPECT_GT(a.tail_mass, 0.0);
  EXPECT_LT(a.tail_mass, 1e-3);
  try {
    enumerate_poisson_multinomial_posterior(m, s, 60);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapExceeded);
  }
  EXPECT_THROW(enumerate_poisson_multinomial_posterior(m, {1.0}, 5), Error);
}

TEST(Distances, KolmogorovSmirnov) {
  EXPECT_DOUBLE_EQ(ks_distance_1d({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance_1d({0, 0}, {1, 1}), 1.0);
  // Ties at the same value are stepped together.
  EXPECT_DOUBLE_EQ(ks_distance_1d({1, 1, 2, 2}, {1, 2}), 0.0);
  const std::vector<double> x{0.3, 1.2, -0.4, 2.2};
  const std::vector<double> y{0.1, 0.9, 1.7};
  EXPECT_DOUBLE_EQ(ks_distance_1d(x, y), ks_distance_1d(y, x));
  Rng rng(1);
  std::vector<double> a(5000);
  std::vector<double> b(5000);
  for (double& v : a) v = standard_normal(rng);
  for (double& v : b) v = standard_normal(rng);
  EXPECT_LT(ks_distance_1d(a, b), 0.03);
  EXPECT_THROW(ks_distance_1d({}, {1.0}), Error);
  // Two-dimensional: first coordinate equal, second shifted.
  const std::vector<double> p{0, 0, 1, 0, 2, 0};
  const std::vector<double> q{0, 5, 1, 5, 2, 5};
  EXPECT_DOUBLE_EQ(ks_distance_max_coordinate(p, q, 2), 1.0);
  EXPECT_THROW(ks_distance_max_coordinate({1, 2, 3}, q, 2), Error);
}

TEST(Distances, TotalVariation) {
  std::map<std::vector<std::int64_t>, std::int64_t> c1{{{1}, 1}, {{2}, 3}};
  std::map<std::vector<std::int64_t>, std::int64_t> c2{{{2}, 1}, {{3}, 1}};
  std::map<std::vector<std::int64_t>, std::int64_t> c3{{{1}, 1}};
  const auto p = empirical_distribution(c1);
  const auto q = empirical_distribution(c2);
  const auto r = empirical_distribution(c3);
  EXPECT_DOUBLE_EQ(tv_distance_discrete(p, p), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance_discrete(p, q), tv_distance_discrete(q, p));
  // p = (1/4, 3/4, 0), q = (0, 1/2, 1/2): TV = 1/2.
  EXPECT_NEAR(tv_distance_discrete(p, q), 0.5, 1e-15);
  EXPECT_LE(tv_distance_discrete(p, r), tv_distance_discrete(p, q) + tv_distance_discrete(q, r) + 1e-15);
  EXPECT_NEAR(tv_distance_discrete(q, r), 1.0, 1e-15);
}

TEST(Distances, KendallTau) {
  EXPECT_DOUBLE_EQ(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(kendall_tau({1, 2, 3}, {1, 5, 9}), 1.0);
  EXPECT_THROW(kendall_tau({1, 2}, {1}), Error);
}

TEST(NPosteriorSampling, MatchesProbabilities) {
  const auto post = build_n_posterior(30.0, 0.5, NoiseFamily::kDiscreteLaplace);
  const auto cdf = n_posterior_cdf(post);
  EXPECT_NEAR(cdf.back(), 1.0, 1e-12);
  Rng rng(5);
  int hits = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) hits += sample_n(post, cdf, rng) == 30;
  const double p = post.prob(30);
  EXPECT_NEAR(static_cast<double>(hits) / draws, p, 5 * std::sqrt(p * (1 - p) / draws));
}

TEST(TheoryChecks, CouplingBoundHoldsAndValue) {
  const auto c = prop41_coupling_check(10, 40, 0.4, 1.0, 1.0, NoiseFamily::kDiscreteLaplace);
  EXPECT_NEAR(c.bound, 1.0 - std::exp(discrete_laplace_log_pmf(0, 1.0)), 1e-12);
  EXPECT_NEAR(c.bound, 0.5379, 1e-4);
  EXPECT_LE(c.tv, c.bound + 1e-10);
  EXPECT_GT(c.tv, 0.0);
  const auto g = prop41_coupling_check(5, 20, 0.7, 0.5, 2.0, NoiseFamily::kDiscreteGaussian);
  EXPECT_LE(g.tv, g.bound + 1e-10);
  EXPECT_THROW(prop41_coupling_check(5, 20, 0.7, 0.5, 2.0, NoiseFamily::kContinuousLaplace), Error);
}

TEST(TheoryChecks, TvPrivacyBound) {
  for (std::int64_t n0 : {20, 50}) {
    const auto t = theorem42_check(n0, 0.3, 1.0, 1.0, NoiseFamily::kDiscreteLaplace);
    EXPECT_NEAR(t.delta, std::tanh(0.5), 1e-15);
    EXPECT_LE(t.tv, t.bound + 1e-10);
    EXPECT_GT(t.tv, 0.0);
  }
}

TEST(TheoryChecks, ConvergenceSmallRun) {
  const auto rep = theorem31_convergence_check(SumMechanism::kLaplaceSum, 0.5, 1.0, 1.0,
                                               NoiseFamily::kDiscreteLaplace, {50, 800}, 2,
                                               20000, 3);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rep.a, 1.0);
  EXPECT_DOUBLE_EQ(rep.b, 0.5);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.ks.size(), 2u);
    EXPECT_GE(r.ks_mean, 0.0);
    EXPECT_LE(r.ks_mean, 1.0);
  }
  const auto kng = theorem31_convergence_check(SumMechanism::kKng, 0.5, 1.0, 1.0,
                                               NoiseFamily::kDiscreteLaplace, {50}, 1, 5000, 3);
  EXPECT_DOUBLE_EQ(kng.a, 0.0);
  EXPECT_THROW(theorem31_convergence_check(SumMechanism::kKng, 1.5, 1.0, 1.0,
                                           NoiseFamily::kDiscreteLaplace, {50}, 1, 10, 3),
               Error);
}

TEST(TheoryChecks, AbcBoundedLimitAndTinyRectangle) {
  const auto rep = abc_posterior_check(1.0, 1.0, 1.0, NoiseFamily::kDiscreteLaplace, 50, {kInf},
                                       1.0, 1, 20000, 20, 11);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_LT(rep.rows[0].tv_mean, 0.03);
  EXPECT_LT(rep.rect_lo, rep.rect_hi);
  try {
    abc_posterior_check(1.0, 1.0, 1.0, NoiseFamily::kDiscreteLaplace, 50, {1.0}, 1e-9, 1, 100, 20, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRectangleTooSmall);
  }
}
