#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dpsize/models/bernoulli.hpp"
#include "dpsize/models/dirichlet.hpp"
#include "dpsize/models/poisson_multinomial.hpp"
#include "dpsize/models/regression.hpp"

using namespace dpsize;

namespace {

// Central differences of log p(rec | from_unconstrained(u)) against the
// analytic gradient, relative tolerance 1e-5.
template <class M>
void check_gradient(const M& model, const typename M::Params& th, std::span<const double> rec) {
  const Eigen::VectorXd u = model.to_unconstrained(th);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
  model.add_grad_log_datum_density(rec, model.from_unconstrained(u), g);
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(u[j]));
    Eigen::VectorXd up = u;
    Eigen::VectorXd dn = u;
    up[j] += h;
    dn[j] -= h;
    const double fd = (model.log_datum_density(rec, model.from_unconstrained(up)) -
                       model.log_datum_density(rec, model.from_unconstrained(dn))) /
                      (2.0 * h);
    EXPECT_NEAR(g[j], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "coordinate " << j;
  }
}

}  // namespace

TEST(Bernoulli, GradientAndRoundTrip) {
  const BernoulliToy m(1.0, 1.0, NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0));
  for (double theta : {0.1, 0.5, 0.83}) {
    for (double x : {0.0, 1.0}) {
      const std::vector<double> rec{x};
      check_gradient(m, BernoulliToy::Params{theta}, rec);
    }
    EXPECT_NEAR(m.from_unconstrained(m.to_unconstrained({theta})).theta, theta, 1e-14);
  }
}

TEST(Bernoulli, ExactConditionalMoments) {
  const BernoulliToy m(2.0, 3.0, NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0));
  const std::vector<double> data{1, 1, 0, 1, 0, 1, 1};
  const RecordView view{data.data(), 1, data.size()};
  Rng rng(1);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += m.update_theta(view, {0.5}, rng).theta;
  // Beta(2 + 5, 3 + 2).
  EXPECT_NEAR(sum / draws, 7.0 / 12.0, 0.002);
  BernoulliToy::Suff suff = m.empty_suff();
  for (double x : data) m.accumulate(suff, std::span<const double>(&x, 1));
  EXPECT_NEAR(m.closed_form_mstep(suff).theta, 5.0 / 7.0, 1e-15);
  EXPECT_NEAR(m.suff_loglik(suff, {0.4}), log_data_density(m, view, {0.4}), 1e-12);
}

TEST(Regression, GradientMatchesFiniteDifferences) {
  const RegressionModel m(RegressionHyper::defaults(2), 1.0);
  auto th = regression_truth();
  th.Phi << 1.5, 0.3, 0.3, 0.8;
  th.tau = 0.7;
  m.prepare(th);
  const std::vector<double> rec{0.4, -1.2, 0.9};
  check_gradient(m, th, rec);
  Rng rng(3);
  for (int i = 0; i < 3; ++i) {
    auto t = m.sample_prior(rng);
    std::vector<double> r(3);
    m.sample_datum(t, rng, r);
    check_gradient(m, t, r);
  }
}

TEST(Regression, SummaryDimensionAndStatistic) {
  const RegressionModel m(RegressionHyper::defaults(2), 1.0);
  EXPECT_EQ(m.summary_dim(), 9u);
  EXPECT_DOUBLE_EQ(m.summary_noise().scale(), 9.0);
  std::vector<double> out(9);
  m.record_statistic(std::vector<double>{0.0, 7.0, 0.5}, out);
  // x = (0, 1), y = 0.1 on the normalized scale.
  const std::vector<double> want{0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.1, 0.1, 0.01};
  for (std::size_t j = 0; j < 9; ++j) EXPECT_NEAR(out[j], want[j], 1e-15) << j;
}

TEST(Regression, ConditionalBetaMeanMatchesConjugateForm) {
  const auto hyper = RegressionHyper::defaults(2);
  const RegressionModel m(hyper, 1.0);
  Rng rng(8);
  const auto data = generate_regression_data(m, regression_truth(), 50, rng);
  std::vector<double> flat;
  for (Eigen::Index i = 0; i < 50; ++i) {
    flat.push_back(data.x(i, 0));
    flat.push_back(data.x(i, 1));
    flat.push_back(data.y[i]);
  }
  const RecordView view{flat.data(), 3, 50};
  Eigen::MatrixXd z(50, 3);
  z.col(0).setOnes();
  z.rightCols(2) = data.x;
  // Marginal posterior mean of beta under the normal-inverse-gamma prior.
  const Eigen::MatrixXd vn = hyper.V + z.transpose() * z;
  const Eigen::VectorXd mn = vn.ldlt().solve(hyper.V * hyper.m + z.transpose() * data.y);
  auto th = regression_truth();
  m.prepare(th);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(3);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    th = m.update_theta(view, th, rng);
    acc += th.beta;
  }
  acc /= draws;
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(acc[j], mn[j], 0.01) << j;
}

TEST(Regression, ClosedFormMstepIsOls) {
  const RegressionModel m(RegressionHyper::defaults(2), 1.0);
  Rng rng(2);
  const auto data = generate_regression_data(m, regression_truth(), 200, rng);
  auto suff = m.empty_suff();
  for (Eigen::Index i = 0; i < 200; ++i) {
    const std::vector<double> rec{data.x(i, 0), data.x(i, 1), data.y[i]};
    m.accumulate(suff, rec);
  }
  const auto est = m.closed_form_mstep(suff);
  Eigen::MatrixXd z(200, 3);
  z.col(0).setOnes();
  z.rightCols(2) = data.x;
  const Eigen::VectorXd ols = (z.transpose() * z).ldlt().solve(z.transpose() * data.y);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(est.beta[j], ols[j], 1e-10);
  const double rss = (data.y - z * ols).squaredNorm();
  EXPECT_NEAR(est.tau, 200.0 / rss, 1e-9);
  EXPECT_NEAR(est.mu[0], data.x.col(0).mean(), 1e-12);
}

TEST(Regression, MomentEstimateInvertsExactSummary) {
  auto hyper = RegressionHyper::defaults(2);
  hyper.L = -50.0;  // wide bounds: nothing is clamped
  hyper.U = 50.0;
  const RegressionModel m(hyper, kInf);
  Rng rng(6);
  const auto data = generate_regression_data(m, regression_truth(), 300, rng);
  auto suff = m.empty_suff();
  std::vector<double> s(9, 0.0), t(9);
  for (Eigen::Index i = 0; i < 300; ++i) {
    const std::vector<double> rec{data.x(i, 0), data.x(i, 1), data.y[i]};
    m.accumulate(suff, rec);
    m.record_statistic(rec, t);
    for (int c = 0; c < 9; ++c) s[c] += t[c];
  }
  const auto mle = m.closed_form_mstep(suff);
  const auto est = m.moment_estimate(s, 300.0);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(est.beta[j], mle.beta[j], 1e-8);
  EXPECT_NEAR(est.tau, mle.tau, 1e-8);
  for (int j = 0; j < 2; ++j) EXPECT_NEAR(est.mu[j], mle.mu[j], 1e-10);
  EXPECT_TRUE(est.Phi.isApprox(mle.Phi, 1e-8));
}

TEST(Regression, MomentEstimateFloorsDegenerateSummary) {
  const RegressionModel m(RegressionHyper::defaults(2), 1.0);
  const auto est = m.moment_estimate(std::vector<double>(9, 0.0), 0.3);
  EXPECT_TRUE(std::isfinite(est.tau));
  EXPECT_GT(est.tau, 0.0);
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(est.Phi).info(), Eigen::Success);
  EXPECT_THROW(m.moment_estimate(std::vector<double>(4, 0.0), 10.0), Error);
  // With eps_s = 1 and n = 1000 the floor is sqrt(2) * 9 / 1000 * 25 in raw units.
  const auto noisy = m.moment_estimate(std::vector<double>(9, 0.0), 1000.0);
  EXPECT_NEAR(noisy.tau, 1.0 / (std::sqrt(2.0) * 9.0 / 1000.0 * 25.0), 1e-9);
}

TEST(Regression, WishartMean) {
  Rng rng(4);
  Eigen::MatrixXd scale(2, 2);
  scale << 1.0, 0.2, 0.2, 0.5;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) acc += sample_wishart(5.0, scale, rng);
  acc /= draws;
  EXPECT_LT((acc - 5.0 * scale).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Dirichlet, GradientAndNoiseScale) {
  const DirichletModel m(DirichletHyper{}, 2.0);
  EXPECT_NEAR(m.summary_noise().scale(), -3.0 * std::log(0.0006) / 2.0, 1e-12);
  Rng rng(5);
  DirichletParams th;
  th.alpha = {4.0, 0.5, 5.5};
  for (int i = 0; i < 4; ++i) {
    std::vector<double> rec(3);
    m.sample_datum(th, rng, rec);
    check_gradient(m, th, rec);
  }
}

TEST(Dirichlet, RecordsAreLogProportions) {
  const DirichletModel m(DirichletHyper{}, 1.0);
  Rng rng(6);
  DirichletParams th;
  th.alpha = {0.05, 0.05, 0.05};
  std::vector<double> rec(3);
  std::vector<double> t(3);
  for (int i = 0; i < 1000; ++i) {
    m.sample_datum(th, rng, rec);
    double total = 0.0;
    for (double v : rec) total += std::exp(v);
    ASSERT_NEAR(total, 1.0, 1e-10);
    m.record_statistic(rec, t);
    for (double v : t) {
      ASSERT_GE(v, std::log(0.0006) - 1e-15);
      ASSERT_LE(v, 0.0);
    }
  }
  // Sample means of proportions match alpha / sum(alpha).
  th.alpha = {4.0, 0.5, 5.5};
  const auto x = generate_dirichlet_data(th, 20000, rng);
  EXPECT_NEAR(x.col(0).mean(), 0.4, 0.005);
  EXPECT_NEAR(x.col(1).mean(), 0.05, 0.003);
}

TEST(Dirichlet, MetropolisSweepTargetsPriorWithoutRecords) {
  DirichletHyper h;
  h.prior_shape = 3.0;
  h.prior_rate = 2.0;
  const DirichletModel m(h, 1.0);
  const std::vector<double> none;
  const RecordView view{none.data(), 3, 0};
  Rng rng(7);
  DirichletParams th;
  double m1 = 0.0;
  double m2 = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    th = m.update_theta(view, th, rng);
    m1 += th.alpha[0];
    m2 += th.alpha[0] * th.alpha[0];
  }
  // Gamma(3, 2): mean 1.5, variance 0.75.
  EXPECT_NEAR(m1 / draws, 1.5, 0.04);
  EXPECT_NEAR(m2 / draws - (m1 / draws) * (m1 / draws), 0.75, 0.06);
}

TEST(PoissonMultinomial, MarginalIsNegativeBinomial) {
  const PoissonMultinomialModel m({{2.0, 0.5, 3.0}, 0.4},
                                  NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0));
  for (std::size_t i = 0; i < 3; ++i) {
    double total = 0.0;
    double mean = 0.0;
    for (std::int64_t x = 0; x < 2000; ++x) {
      const double p = std::exp(m.log_marginal_count(i, x));
      total += p;
      mean += p * static_cast<double>(x);
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
    EXPECT_NEAR(mean, m.hyper().alpha[i] / 0.4, 1e-8);
  }
}

TEST(PoissonMultinomial, CountMoveProposalRatio) {
  const PoissonMultinomialModel m({{1.0, 1.0}, 1.0},
                                  NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0));
  Rng rng(1);
  const std::vector<double> s{0.0, 3.0};
  const std::vector<double> lambda{1.0, 1.0};
  // From 0 the move is always up; the reverse proposes down with probability 1/2.
  const auto mv = m.count_move({0, 3}, lambda, s, 0, rng);
  EXPECT_EQ(mv.direction, 1);
  EXPECT_NEAR(mv.log_proposal_ratio, std::log(0.5), 1e-15);
  EXPECT_NEAR(mv.log_data_ratio, std::log(1.0 / 1.0), 1e-15);
  EXPECT_NEAR(mv.log_ratio, mv.log_proposal_ratio + mv.log_data_ratio - 1.0, 1e-12);
}
