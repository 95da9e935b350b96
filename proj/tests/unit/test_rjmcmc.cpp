#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

#include "dpsize/models/bernoulli.hpp"
#include "dpsize/models/regression.hpp"
#include "dpsize/oracle.hpp"
#include "dpsize/rjmcmc.hpp"

using namespace dpsize;

TEST(LogAcceptRatio, EdgeCases) {
  EXPECT_DOUBLE_EQ(log_accept_ratio(-1.0, -3.0), 2.0);
  EXPECT_EQ(log_accept_ratio(kNegInf, -3.0), kNegInf);
  EXPECT_EQ(log_accept_ratio(kNegInf, kNegInf), kNegInf);
  EXPECT_EQ(log_accept_ratio(-2.0, kNegInf), kInf);
  EXPECT_THROW(log_accept_ratio(std::nan(""), 0.0), Error);
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  c.burn_in = c.iterations;
  EXPECT_THROW(c.validate(), Error);
  SamplerConfig d;
  d.t_refresh_period = 0;
  EXPECT_THROW(d.validate(), Error);
}

TEST(EffectiveSampleSize, IidAndCorrelated) {
  Rng rng(1);
  std::vector<double> iid(20000);
  for (double& v : iid) v = standard_normal(rng);
  const double ess = effective_sample_size(iid);
  EXPECT_GT(ess, 15000.0);
  EXPECT_LT(ess, 25000.0);
  // AR(1) with rho = 0.9 has ESS about n (1 - rho) / (1 + rho).
  std::vector<double> ar(20000);
  double z = 0.0;
  for (double& v : ar) {
    z = 0.9 * z + std::sqrt(1 - 0.81) * standard_normal(rng);
    v = z;
  }
  EXPECT_NEAR(effective_sample_size(ar), 20000.0 * 0.1 / 1.9, 300.0);
}

namespace {

// Exact one-iteration kernel of the sampler for the Bernoulli toy with theta
// fixed and n <= 3, on the discrete state (n, x_1..x_n).
struct SmallKernel {
  double theta = 0.3;
  double s = 1.0;
  double n_dp = 2.0;
  std::int64_t n_max = 3;
  NoiseSpec noise = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0);
  CountMechanism count{NoiseFamily::kDiscreteLaplace, 1.0};

  // States are (n, bits) with bit i holding x_{i+1}.
  std::vector<std::pair<int, unsigned>> states;
  std::map<std::pair<int, unsigned>, int> index;

  SmallKernel() {
    for (int n = 1; n <= n_max; ++n) {
      for (unsigned b = 0; b < (1u << n); ++b) {
        index[{n, b}] = static_cast<int>(states.size());
        states.push_back({n, b});
      }
    }
  }
  std::size_t size() const { return states.size(); }
  static int ones(unsigned b) { return __builtin_popcount(b); }
  double log_g(unsigned b) const { return noise.log_density(s - ones(b)); }
  double log_target(int n, unsigned b) const {
    const int k = ones(b);
    return k * std::log(theta) + (n - k) * std::log1p(-theta) + log_g(b) +
           count.log_density(n_dp, n);
  }
  using Matrix = std::vector<std::vector<double>>;
  Matrix zero() const { return Matrix(size(), std::vector<double>(size(), 0.0)); }
  static Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix c(a.size(), std::vector<double>(a.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t j = 0; j < a.size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
  }
  double accept(double la) const { return la >= 0.0 ? 1.0 : std::exp(la); }

  // Independence proposal for record i scored by the summary likelihood.
  Matrix site(int i) const {
    Matrix m = zero();
    for (std::size_t r = 0; r < size(); ++r) {
      const auto [n, b] = states[r];
      if (i >= n) {
        m[r][r] = 1.0;
        continue;
      }
      const unsigned flipped = b ^ (1u << i);
      const bool cur = (b >> i) & 1u;
      const double p_flip = cur ? 1.0 - theta : theta;
      const double a = accept(log_accept_ratio(log_g(flipped), log_g(b)));
      m[r][index.at({n, flipped})] += p_flip * a;
      m[r][r] += 1.0 - p_flip * a;
    }
    return m;
  }

  Matrix between() const {
    Matrix m = zero();
    for (std::size_t r = 0; r < size(); ++r) {
      const auto [n, b] = states[r];
      auto birth = [&](double p_dir, double log_q) {
        if (n + 1 > n_max) {
          m[r][r] += p_dir;
          return;
        }
        for (unsigned x : {0u, 1u}) {
          const double px = x ? theta : 1.0 - theta;
          const unsigned nb = b | (x << n);
          const double la = log_g(nb) + count.log_density(n_dp, n + 1) -
                            log_g(b) - count.log_density(n_dp, n) + log_q;
          const double a = accept(la);
          m[r][index.at({n + 1, nb})] += p_dir * px * a;
          m[r][r] += p_dir * px * (1.0 - a);
        }
      };
      if (n == 1) {
        birth(1.0, -std::log(2.0));
        continue;
      }
      birth(0.5, 0.0);
      const unsigned nb = b & ~(1u << (n - 1));
      const double log_q = n == 2 ? std::log(2.0) : 0.0;
      const double la = log_g(nb) + count.log_density(n_dp, n - 1) - log_g(b) -
                        count.log_density(n_dp, n) + log_q;
      const double a = accept(la);
      m[r][index.at({n - 1, nb})] += 0.5 * a;
      m[r][r] += 0.5 * (1.0 - a);
    }
    return m;
  }

  Matrix full() const {
    Matrix k = site(0);
    for (int i = 1; i < n_max; ++i) k = multiply(k, site(i));
    return multiply(k, between());
  }

  std::vector<double> target() const {
    std::vector<double> lw(size());
    for (std::size_t r = 0; r < size(); ++r) lw[r] = log_target(states[r].first, states[r].second);
    const double z = log_sum_exp(lw);
    for (double& v : lw) v = std::exp(v - z);
    return lw;
  }
};

}  // namespace

TEST(RjmcmcKernel, ExactKernelIsStochasticAndStationary) {
  const SmallKernel sk;
  const auto k = sk.full();
  const auto pi = sk.target();
  for (const auto& row : k) {
    double t = 0.0;
    for (double v : row) {
      EXPECT_GE(v, 0.0);
      t += v;
    }
    EXPECT_NEAR(t, 1.0, 1e-13);
  }
  for (std::size_t j = 0; j < sk.size(); ++j) {
    double pk = 0.0;
    for (std::size_t i = 0; i < sk.size(); ++i) pk += pi[i] * k[i][j];
    EXPECT_NEAR(pk, pi[j], 1e-12);
  }
  // The between move alone satisfies detailed balance.
  const auto b = sk.between();
  for (std::size_t i = 0; i < sk.size(); ++i)
    for (std::size_t j = 0; j < sk.size(); ++j)
      EXPECT_NEAR(pi[i] * b[i][j], pi[j] * b[j][i], 1e-14);
}

TEST(RjmcmcKernel, SamplerTransitionsMatchExactKernel) {
  const SmallKernel sk;
  const auto k = sk.full();
  const BernoulliToy model(1.0, 1.0, sk.noise);
  SamplerConfig cfg;
  cfg.iterations = 1;
  cfg.burn_in = 0;
  cfg.n_max = sk.n_max;
  cfg.update_theta = false;
  RjmcmcSampler<BernoulliToy> sampler(model, {sk.s}, sk.n_dp, sk.count, cfg);
  Rng rng(12345);
  const int reps = 20000;
  for (std::size_t r = 0; r < sk.size(); ++r) {
    const auto [n, b] = sk.states[r];
    std::vector<int> hits(sk.size(), 0);
    for (int rep = 0; rep < reps; ++rep) {
      LatentState<BernoulliToy::Params> st;
      st.theta = {sk.theta};
      st.width = 1;
      st.n = n;
      st.x.assign(static_cast<std::size_t>(sk.n_max), 0.0);
      for (int i = 0; i < n; ++i) st.x[static_cast<std::size_t>(i)] = (b >> i) & 1u;
      sampler.set_state(std::move(st));
      sampler.within_model_sweep(rng);
      sampler.between_model_move(rng);
      const auto& out = sampler.state();
      unsigned nb = 0;
      for (std::int64_t i = 0; i < out.n; ++i) {
        if (out.x[static_cast<std::size_t>(i)] > 0.5) nb |= 1u << i;
      }
      ++hits[static_cast<std::size_t>(sk.index.at({static_cast<int>(out.n), nb}))];
    }
    for (std::size_t j = 0; j < sk.size(); ++j) {
      const double p = k[r][j];
      const double f = static_cast<double>(hits[j]) / reps;
      if (p == 0.0) {
        EXPECT_EQ(hits[j], 0) << "row " << r << " col " << j;
      } else {
        EXPECT_NEAR(f, p, 5.0 * std::sqrt(p * (1 - p) / reps) + 1e-4)
            << "row " << r << " col " << j;
      }
    }
  }
}

TEST(Rjmcmc, BernoulliChainMatchesEnumeration) {
  const auto noise = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0);
  const CountMechanism count(NoiseFamily::kDiscreteLaplace, 1.0);
  const BernoulliToy model(1.0, 1.0, noise);
  const double s = 3.0;
  const double n_dp = 5.0;
  SamplerConfig cfg;
  cfg.iterations = 60000;
  cfg.burn_in = 2000;
  cfg.n_max = 8;
  cfg.seed = 99;
  std::map<std::vector<std::int64_t>, std::int64_t> counts;
  run_chain(model, {s}, n_dp, count, cfg, std::nullopt,
            ChainObserver<BernoulliToy>([&](std::int64_t it, const auto& st) {
              if (it >= cfg.burn_in) ++counts[{st.n, std::llround(st.t[0])}];
            }));
  const auto exact = enumerate_bernoulli_posterior(s, n_dp, 1.0, 1.0, 1, 8, noise, count);
  EXPECT_LT(tv_distance_discrete(empirical_distribution(counts), exact), 0.03);
}

TEST(Rjmcmc, DeterministicGivenSeed) {
  const RegressionModel model(RegressionHyper::defaults(2), 1.0);
  const CountMechanism count(NoiseFamily::kContinuousLaplace, 1.0);
  const std::vector<double> s{-40, 40, 20, 20, 0, -3, 0, 0, 10};
  SamplerConfig cfg;
  cfg.iterations = 300;
  cfg.burn_in = 100;
  cfg.seed = 7;
  const auto a = run_chain(model, s, 100.4, count, cfg);
  const auto b = run_chain(model, s, 100.4, count, cfg);
  EXPECT_EQ(a.n, b.n);
  EXPECT_EQ(a.theta, b.theta);
  cfg.seed = 8;
  const auto c = run_chain(model, s, 100.4, count, cfg);
  EXPECT_NE(a.theta, c.theta);
  for (double d : a.refresh_drift) EXPECT_LT(d, 1e-8);
}

TEST(Rjmcmc, ExactCountKeepsNFixed) {
  const BernoulliToy model(1.0, 1.0, NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0));
  const CountMechanism count(NoiseFamily::kDiscreteLaplace, kInf);
  SamplerConfig cfg;
  cfg.iterations = 2000;
  cfg.burn_in = 0;
  const auto tr = run_chain(model, {4.0}, 10.0, count, cfg);
  for (auto n : tr.n) EXPECT_EQ(n, 10);
}

TEST(Rjmcmc, InvalidInputs) {
  const BernoulliToy model(1.0, 1.0, NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, 1.0));
  const CountMechanism count(NoiseFamily::kDiscreteLaplace, 1.0);
  SamplerConfig cfg;
  EXPECT_THROW(RjmcmcSampler<BernoulliToy>(model, {1.0, 2.0}, 3.0, count, cfg), Error);
  EXPECT_THROW(RjmcmcSampler<BernoulliToy>(model, {1.0}, kInf, count, cfg), Error);
  cfg.n_max = 4;
  RjmcmcSampler<BernoulliToy> sampler(model, {1.0}, 3.0, count, cfg);
  LatentState<BernoulliToy::Params> st;
  st.width = 1;
  st.n = 5;
  st.x.assign(5, 0.0);
  try {
    sampler.set_state(st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInit);
  }
}

TEST(AcceptanceAudit, FloorsHoldAndApplicability) {
  const RegressionModel model(RegressionHyper::defaults(2), 1.0);
  const CountMechanism count(NoiseFamily::kContinuousLaplace, 1.0);
  const std::vector<double> s{-40, 40, 20, 20, 0, -3, 0, 0, 10};
  SamplerConfig cfg;
  cfg.iterations = 500;
  cfg.burn_in = 100;
  const auto tr = run_chain(model, s, 100.4, count, cfg);
  const auto rep = acceptance_audit(tr, PrivacyBudget::make(1.0, 1.0), true, true);
  EXPECT_TRUE(rep.ok());
  EXPECT_NEAR(rep.within_floor, std::exp(-2.0), 1e-15);
  EXPECT_NEAR(rep.between_floor, std::exp(-2.0), 1e-15);
  EXPECT_GT(rep.within_checked, 0);
  EXPECT_GT(rep.between_checked, 0);
  const auto na = acceptance_audit(tr, PrivacyBudget::make(1.0, 1.0), true, false);
  EXPECT_FALSE(na.between_applicable);
  EXPECT_FALSE(na.note.empty());
}
