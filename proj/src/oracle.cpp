#include "dpsize/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>

namespace dpsize {

namespace {

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_choose(std::int64_t n, std::int64_t k) {
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

double beta_binomial_log_pmf(std::int64_t k, std::int64_t n, double a, double b) {
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  return log_choose(n, k) + log_beta(a + kd, b + nd - kd) - log_beta(a, b);
}

double binomial_log_pmf(std::int64_t k, std::int64_t n, double theta) {
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  return log_choose(n, k) + kd * std::log(theta) + (nd - kd) * std::log1p(-theta);
}

// Drops -inf states and normalizes the rest.
EnumeratedPosterior normalize(std::vector<std::vector<std::int64_t>> grid,
                              const std::vector<double>& logw) {
  const double z = log_sum_exp(logw);
  if (!std::isfinite(z)) {
    throw Error(ErrorKind::kDegenerateLikelihood,
                "every enumerated state has zero posterior weight");
  }
  EnumeratedPosterior out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (logw[i] == kNegInf) continue;
    out.grid.push_back(std::move(grid[i]));
    out.probabilities.push_back(std::exp(logw[i] - z));
  }
  return out;
}

void check_n_range(std::int64_t n_lo, std::int64_t n_hi) {
  if (n_lo < 1 || n_hi < n_lo) {
    throw Error(ErrorKind::kInvalidInput, "n range must satisfy 1 <= n_lo <= n_hi");
  }
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) /
                   static_cast<double>(v.size()));
}

// Draws Binomial(n, theta) with one cached distribution per n.
class BinomialCache {
 public:
  explicit BinomialCache(double theta) : theta_(theta) {}
  std::int64_t operator()(std::int64_t n, Rng& rng) {
    auto it = cache_.find(n);
    if (it == cache_.end()) {
      it = cache_.emplace(n, std::binomial_distribution<std::int64_t>(n, theta_)).first;
    }
    return it->second(rng);
  }

 private:
  double theta_;
  std::map<std::int64_t, std::binomial_distribution<std::int64_t>> cache_;
};

// p(s | theta, n) for integer s over [s_lo, s_hi], s = Binomial(n, theta) +
// integer noise.
std::vector<double> summary_pmf(std::int64_t n, double theta,
                                const NoiseSpec& noise, std::int64_t s_lo,
                                std::int64_t s_hi) {
  std::vector<double> binom(static_cast<std::size_t>(n + 1));
  for (std::int64_t k = 0; k <= n; ++k) {
    binom[static_cast<std::size_t>(k)] = std::exp(binomial_log_pmf(k, n, theta));
  }
  std::vector<double> out(static_cast<std::size_t>(s_hi - s_lo + 1), 0.0);
  const std::int64_t w = truncation_half_width(noise.epsilon());
  for (std::int64_t s = s_lo; s <= s_hi; ++s) {
    double acc = 0.0;
    const std::int64_t k_lo = std::max<std::int64_t>(0, s - w);
    const std::int64_t k_hi = std::min<std::int64_t>(n, s + w);
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      acc += binom[static_cast<std::size_t>(k)] *
             std::exp(noise.log_density(static_cast<double>(s - k)));
    }
    out[static_cast<std::size_t>(s - s_lo)] = acc;
  }
  return out;
}

}  // namespace

double EnumeratedPosterior::prob_of(const std::vector<std::int64_t>& state) const {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == state) return probabilities[i];
  }
  return 0.0;
}

EnumeratedPosterior empirical_distribution(
    const std::map<std::vector<std::int64_t>, std::int64_t>& counts) {
  EnumeratedPosterior out;
  double total = 0.0;
  for (const auto& [state, c] : counts) total += static_cast<double>(c);
  if (total <= 0.0) throw Error(ErrorKind::kInvalidInput, "no observations");
  for (const auto& [state, c] : counts) {
    out.grid.push_back(state);
    out.probabilities.push_back(static_cast<double>(c) / total);
  }
  return out;
}

EnumeratedPosterior enumerate_bernoulli_posterior(
    double s, double n_dp, double a, double b, std::int64_t n_lo,
    std::int64_t n_hi, const NoiseSpec& summary, const CountMechanism& count) {
  check_n_range(n_lo, n_hi);
  std::vector<std::vector<std::int64_t>> grid;
  std::vector<double> logw;
  for (std::int64_t n = n_lo; n <= n_hi; ++n) {
    const double ln = count.log_density(n_dp, n);
    for (std::int64_t k = 0; k <= n; ++k) {
      grid.push_back({n, k});
      logw.push_back(ln == kNegInf ? kNegInf
                                   : ln + beta_binomial_log_pmf(k, n, a, b) +
                                         summary.log_density(s - static_cast<double>(k)));
    }
  }
  return normalize(std::move(grid), logw);
}

EnumeratedPosterior enumerate_bernoulli_posterior_bruteforce(
    double s, double n_dp, double a, double b, std::int64_t n_lo,
    std::int64_t n_hi, const NoiseSpec& summary, const CountMechanism& count) {
  check_n_range(n_lo, n_hi);
  if (n_hi > 16) {
    throw Error(ErrorKind::kCapExceeded, "brute-force enumeration needs n <= 16");
  }
  // Sums the Polya-urn probability of every binary sequence: the marginal
  // of a dataset is the product of its sequential predictive probabilities.
  std::vector<std::vector<std::int64_t>> grid;
  std::vector<double> w;
  for (std::int64_t n = n_lo; n <= n_hi; ++n) {
    std::vector<double> by_k(static_cast<std::size_t>(n + 1), 0.0);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double p = 1.0;
      std::int64_t ones = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        const bool bit = (mask >> i) & 1u;
        const double denom = a + b + static_cast<double>(i);
        p *= bit ? (a + static_cast<double>(ones)) / denom
                 : (b + static_cast<double>(i - ones)) / denom;
        ones += bit ? 1 : 0;
      }
      by_k[static_cast<std::size_t>(ones)] += p;
    }
    const double pn = std::exp(count.log_density(n_dp, n));
    for (std::int64_t k = 0; k <= n; ++k) {
      grid.push_back({n, k});
      w.push_back(pn * by_k[static_cast<std::size_t>(k)] *
                  std::exp(summary.log_density(s - static_cast<double>(k))));
    }
  }
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(z > 0.0)) {
    throw Error(ErrorKind::kDegenerateLikelihood,
                "every enumerated state has zero posterior weight");
  }
  EnumeratedPosterior out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (w[i] == 0.0) continue;
    out.grid.push_back(grid[i]);
    out.probabilities.push_back(w[i] / z);
  }
  return out;
}

namespace {

void check_poisson_grid(const PoissonMultinomialModel& model,
                        const std::vector<double>& s, std::int64_t cap) {
  if (s.size() != model.k()) {
    throw Error(ErrorKind::kInvalidInput, "summary length must equal k");
  }
  if (cap < 0) throw Error(ErrorKind::kInvalidInput, "count cap must be >= 0");
  const double states = std::pow(static_cast<double>(cap + 1),
                                 static_cast<double>(model.k()));
  if (states > 1e5) {
    throw Error(ErrorKind::kCapExceeded,
                "enumeration grid has " + std::to_string(states) +
                    " states, above 1e5");
  }
}

double cell_log_weight(const PoissonMultinomialModel& model,
                       const std::vector<double>& s, std::size_t i,
                       std::int64_t x) {
  return model.log_marginal_count(i, x) +
         model.cell_noise().log_density(s[i] - static_cast<double>(x));
}

// Fraction of one cell's posterior mass above the cap, from extending the sum
// until the terms fall 50 nats below the running total.
double cell_tail(const PoissonMultinomialModel& model,
                 const std::vector<double>& s, std::size_t i, std::int64_t cap) {
  std::vector<double> inside;
  for (std::int64_t x = 0; x <= cap; ++x) inside.push_back(cell_log_weight(model, s, i, x));
  const double z_in = log_sum_exp(inside);
  std::vector<double> outside;
  double z_all = z_in;
  const double floor_x = std::max(0.0, s[i]) + 10.0;
  for (std::int64_t x = cap + 1; x < cap + 10'000'000; ++x) {
    const double lw = cell_log_weight(model, s, i, x);
    outside.push_back(lw);
    if (static_cast<double>(x) > floor_x && lw < z_all - 50.0) break;
    if (lw > z_all) z_all = lw;
  }
  if (outside.empty()) return 0.0;
  const double z_out = log_sum_exp(outside);
  if (z_out == kNegInf) return 0.0;
  if (z_in == kNegInf) return 1.0;
  const double both[2] = {z_in, z_out};
  return std::exp(z_out - log_sum_exp(both));
}

double poisson_tail_mass(const PoissonMultinomialModel& model,
                         const std::vector<double>& s, std::int64_t cap) {
  double keep = 1.0;
  for (std::size_t i = 0; i < model.k(); ++i) keep *= 1.0 - cell_tail(model, s, i, cap);
  return 1.0 - keep;
}

// Odometer over {0..cap}^k.
bool next_state(std::vector<std::int64_t>& x, std::int64_t cap) {
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] < cap) {
      ++x[i];
      return true;
    }
    x[i] = 0;
  }
  return false;
}

}  // namespace

EnumeratedPosterior enumerate_poisson_multinomial_posterior(
    const PoissonMultinomialModel& model, const std::vector<double>& s,
    std::int64_t count_cap) {
  check_poisson_grid(model, s, count_cap);
  const std::size_t k = model.k();
  // The posterior factorizes over cells; precompute each cell's table.
  std::vector<std::vector<double>> cell(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::int64_t x = 0; x <= count_cap; ++x) {
      cell[i].push_back(cell_log_weight(model, s, i, x));
    }
  }
  std::vector<std::vector<std::int64_t>> grid;
  std::vector<double> logw;
  std::vector<std::int64_t> x(k, 0);
  do {
    double lw = 0.0;
    for (std::size_t i = 0; i < k; ++i) lw += cell[i][static_cast<std::size_t>(x[i])];
    grid.push_back(x);
    logw.push_back(lw);
  } while (next_state(x, count_cap));
  auto out = normalize(std::move(grid), logw);
  out.tail_mass = poisson_tail_mass(model, s, count_cap);
  return out;
}

EnumeratedPosterior enumerate_poisson_multinomial_naive(
    const PoissonMultinomialModel& model, const std::vector<double>& s,
    std::int64_t count_cap) {
  check_poisson_grid(model, s, count_cap);
  const std::size_t k = model.k();
  const auto& hy = model.hyper();
  // Joint weight written out directly: prod_i Gamma(a_i + x_i) / (Gamma(a_i)
  // x_i!) theta^a_i / (theta + 1)^(a_i + x_i) * eta(s_i - x_i).
  std::vector<std::vector<std::int64_t>> grid;
  std::vector<double> w;
  std::vector<std::int64_t> x(k, 0);
  do {
    double p = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double a = hy.alpha[i];
      double term = std::pow(hy.theta / (hy.theta + 1.0), a);
      for (std::int64_t j = 0; j < x[i]; ++j) {
        term *= (a + static_cast<double>(j)) / (static_cast<double>(j + 1) * (hy.theta + 1.0));
      }
      p *= term * std::exp(model.cell_noise().log_density(s[i] - static_cast<double>(x[i])));
    }
    grid.push_back(x);
    w.push_back(p);
  } while (next_state(x, count_cap));
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(z > 0.0)) {
    throw Error(ErrorKind::kDegenerateLikelihood,
                "every enumerated state has zero posterior weight");
  }
  EnumeratedPosterior out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (w[i] == 0.0) continue;
    out.grid.push_back(grid[i]);
    out.probabilities.push_back(w[i] / z);
  }
  out.tail_mass = poisson_tail_mass(model, s, count_cap);
  return out;
}

double ks_distance_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::kInvalidInput, "KS distance needs non-empty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_distance_max_coordinate(const std::vector<double>& a,
                                  const std::vector<double>& b, std::size_t dim) {
  if (dim == 0 || a.size() % dim != 0 || b.size() % dim != 0) {
    throw Error(ErrorKind::kInvalidInput, "sample size must be a multiple of dim");
  }
  double d = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    std::vector<double> ca;
    std::vector<double> cb;
    for (std::size_t i = c; i < a.size(); i += dim) ca.push_back(a[i]);
    for (std::size_t i = c; i < b.size(); i += dim) cb.push_back(b[i]);
    d = std::max(d, ks_distance_1d(std::move(ca), std::move(cb)));
  }
  return d;
}

double tv_distance_discrete(const EnumeratedPosterior& p,
                            const EnumeratedPosterior& q) {
  std::map<std::vector<std::int64_t>, std::pair<double, double>> joint;
  for (std::size_t i = 0; i < p.grid.size(); ++i) joint[p.grid[i]].first += p.probabilities[i];
  for (std::size_t i = 0; i < q.grid.size(); ++i) joint[q.grid[i]].second += q.probabilities[i];
  double tv = 0.0;
  for (const auto& [state, pq] : joint) tv += std::abs(pq.first - pq.second);
  return std::min(1.0, 0.5 * tv);
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::kInvalidInput, "Kendall tau needs two equal-length series");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[j] - x[i];
      const double dy = y[j] - y[i];
      s += static_cast<double>((dx > 0) - (dx < 0)) * static_cast<double>((dy > 0) - (dy < 0));
    }
  }
  const double pairs = static_cast<double>(x.size() * (x.size() - 1) / 2);
  return s / pairs;
}

std::vector<double> n_posterior_cdf(const NPosterior& post) {
  std::vector<double> cdf(post.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    acc += std::exp(post.log_weights[i]);
    cdf[i] = acc;
  }
  for (double& c : cdf) c /= acc;
  return cdf;
}

std::int64_t sample_n(const NPosterior& post, const std::vector<double>& cdf,
                      Rng& rng) {
  const double u = uniform_open(rng);
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
  const auto idx = std::min<std::ptrdiff_t>(it - cdf.begin(),
                                            static_cast<std::ptrdiff_t>(cdf.size()) - 1);
  return post.n_lo + idx;
}

ConvergenceReport theorem31_convergence_check(
    SumMechanism mechanism, double theta, double epsilon_s, double epsilon_n,
    NoiseFamily count_family, const std::vector<std::int64_t>& n0_grid,
    int replicates, std::int64_t samples, std::uint64_t seed) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "theta must lie in (0, 1)");
  }
  if (n0_grid.empty() || replicates < 1 || samples < 1) {
    throw Error(ErrorKind::kInvalidConfig, "empty grid, replicates or samples");
  }
  ConvergenceReport rep;
  rep.mechanism = mechanism;
  rep.a = mechanism == SumMechanism::kLaplaceSum ? 1.0 : 0.0;
  rep.b = 0.5;
  BinomialCache binom(theta);
  for (std::size_t g = 0; g < n0_grid.size(); ++g) {
    const std::int64_t n0 = n0_grid[g];
    if (n0 < 1) throw Error(ErrorKind::kInvalidInput, "n0 must be >= 1");
    const auto post = build_n_posterior(static_cast<double>(n0), epsilon_n, count_family);
    const auto cdf = n_posterior_cdf(post);
    const double n0d = static_cast<double>(n0);
    const double scale = std::pow(n0d, rep.b);
    const double shrink = std::pow(n0d, -rep.a);
    auto draw_s = [&](std::int64_t n, Rng& rng) {
      const std::int64_t k = binom(n, rng);
      if (mechanism == SumMechanism::kLaplaceSum) {
        return static_cast<double>(k) + sample_laplace(1.0 / epsilon_s, rng);
      }
      return kng_mean_sample(static_cast<double>(k) / static_cast<double>(n), n,
                             epsilon_s, rng);
    };
    ConvergenceRow row;
    row.n0 = n0;
    for (int r = 0; r < replicates; ++r) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r), g));
      std::vector<double> za(static_cast<std::size_t>(samples));
      std::vector<double> zb(static_cast<std::size_t>(samples));
      for (auto& z : za) z = scale * (shrink * draw_s(n0, rng) - theta);
      for (auto& z : zb) z = scale * (shrink * draw_s(sample_n(post, cdf, rng), rng) - theta);
      row.ks.push_back(ks_distance_1d(std::move(za), std::move(zb)));
    }
    row.ks_mean = mean(row.ks);
    row.ks_se = std_error(row.ks);
    rep.rows.push_back(std::move(row));
  }
  if (rep.rows.size() >= 2) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : rep.rows) {
      xs.push_back(static_cast<double>(r.n0));
      ys.push_back(r.ks_mean);
    }
    rep.kendall_tau = kendall_tau(xs, ys);
  }
  return rep;
}

CouplingCheck prop41_coupling_check(std::int64_t n_lo, std::int64_t n_hi,
                                    double theta, double epsilon_s,
                                    double epsilon_n, NoiseFamily family) {
  check_n_range(n_lo, n_hi);
  if (family != NoiseFamily::kDiscreteLaplace && family != NoiseFamily::kDiscreteGaussian) {
    throw Error(ErrorKind::kUnsupported, "coupling check needs a discrete family");
  }
  const auto s_noise = NoiseSpec::from_epsilon(family, 1.0, epsilon_s);
  const CountMechanism count(family, epsilon_n);
  const std::int64_t ws = truncation_half_width(epsilon_s);
  const std::int64_t wn = truncation_half_width(epsilon_n);
  const std::int64_t s_lo = -ws;
  const std::int64_t s_hi = n_hi + ws;
  const std::int64_t v_lo = n_lo - wn;
  const std::int64_t v_hi = n_hi + wn;
  const auto ns = static_cast<std::size_t>(s_hi - s_lo + 1);
  const double prior = 1.0 / static_cast<double>(n_hi - n_lo + 1);

  std::vector<std::vector<double>> ps;
  for (std::int64_t n = n_lo; n <= n_hi; ++n) ps.push_back(summary_pmf(n, theta, s_noise, s_lo, s_hi));

  double tv = 0.0;
  for (std::int64_t v = v_lo; v <= v_hi; ++v) {
    for (std::size_t si = 0; si < ns; ++si) {
      double p_true = 0.0;
      if (v >= n_lo && v <= n_hi) p_true = prior * ps[static_cast<std::size_t>(v - n_lo)][si];
      double p_dp = 0.0;
      for (std::int64_t n = n_lo; n <= n_hi; ++n) {
        p_dp += prior * std::exp(count.log_density(static_cast<double>(v), n)) *
                ps[static_cast<std::size_t>(n - n_lo)][si];
      }
      tv += std::abs(p_true - p_dp);
    }
  }
  CouplingCheck out;
  out.tv = 0.5 * tv;
  out.bound = count.exact() ? 0.0 : 1.0 - std::exp(count.log_density(0.0, 0));
  double mad = 0.0;
  for (std::int64_t d = -wn; d <= wn; ++d) {
    mad += static_cast<double>(std::abs(d)) * std::exp(count.log_density(static_cast<double>(d), 0));
  }
  out.markov_bound = mad;
  return out;
}

TvPrivacyCheck theorem42_check(std::int64_t n0, double theta, double epsilon_s,
                               double epsilon_n, NoiseFamily count_family) {
  if (n0 < 1) throw Error(ErrorKind::kInvalidInput, "n0 must be >= 1");
  const auto s_noise = NoiseSpec::from_epsilon(NoiseFamily::kDiscreteLaplace, 1.0, epsilon_s);
  const auto post = build_n_posterior(static_cast<double>(n0), epsilon_n, count_family);
  const std::int64_t ws = truncation_half_width(epsilon_s);
  const std::int64_t s_lo = -ws;
  const std::int64_t s_hi = post.n_hi + ws;
  const auto base = summary_pmf(n0, theta, s_noise, s_lo, s_hi);
  std::vector<double> mix(base.size(), 0.0);
  for (std::int64_t n = post.n_lo; n <= post.n_hi; ++n) {
    const double pn = post.prob(n);
    if (pn == 0.0) continue;
    const auto ps = summary_pmf(n, theta, s_noise, s_lo, s_hi);
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += pn * ps[i];
  }
  TvPrivacyCheck out;
  for (std::size_t i = 0; i < mix.size(); ++i) out.tv += std::abs(base[i] - mix[i]);
  out.tv *= 0.5;
  out.delta = dp_to_tv_delta(DpFramework::kPureEps, epsilon_s);
  out.expected_abs_dev = expected_abs_deviation(post, n0);
  out.bound = out.delta * out.expected_abs_dev;
  return out;
}

AbcReport abc_posterior_check(double a, double b, double epsilon_s,
                              NoiseFamily count_family, std::int64_t n0,
                              const std::vector<double>& epsilon_n_grid,
                              double half_width_scale, int replicates,
                              std::int64_t accepted_target, int bins,
                              std::uint64_t seed) {
  if (n0 < 1 || replicates < 1 || accepted_target < 1 || bins < 1 ||
      epsilon_n_grid.empty() || !(half_width_scale > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "invalid ABC check settings");
  }
  AbcReport rep;
  rep.n0 = n0;
  const double s_scale = 1.0 / epsilon_s;
  auto draw = [&](std::int64_t n, Rng& rng, double& th) {
    th = sample_beta(a, b, rng);
    std::binomial_distribution<std::int64_t> bin(n, th);
    return static_cast<double>(bin(rng)) + sample_laplace(s_scale, rng);
  };
  {
    Rng pilot(derive_seed(seed, 0xab0, 0));
    std::vector<double> s(20000);
    double th = 0.0;
    for (auto& v : s) v = draw(n0, pilot, th);
    std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2), s.end());
    const double med = s[s.size() / 2];
    const double h = half_width_scale * std::sqrt(static_cast<double>(n0));
    rep.rect_lo = med - h;
    rep.rect_hi = med + h;
  }
  // Rejection-samples theta until `accepted_target` draws land in R.
  auto conditional = [&](const std::function<std::int64_t(Rng&)>& n_draw, Rng& rng,
                         double& rate) {
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    std::int64_t accepted = 0;
    std::int64_t tries = 0;
    const std::int64_t max_tries = accepted_target * 1000;
    while (accepted < accepted_target) {
      double th = 0.0;
      const double s = draw(n_draw(rng), rng, th);
      ++tries;
      if (s >= rep.rect_lo && s <= rep.rect_hi) {
        const auto bin = std::min<std::int64_t>(bins - 1, static_cast<std::int64_t>(th * bins));
        hist[static_cast<std::size_t>(bin)] += 1.0;
        ++accepted;
      }
      if (tries >= max_tries || (tries >= 10000 && accepted < tries / 1000)) {
        throw Error(ErrorKind::kRectangleTooSmall,
                    "acceptance rate below 1e-3 for the ABC rectangle");
      }
    }
    rate = static_cast<double>(accepted) / static_cast<double>(tries);
    for (double& v : hist) v /= static_cast<double>(accepted);
    return hist;
  };
  for (std::size_t g = 0; g < epsilon_n_grid.size(); ++g) {
    const double eps_n = epsilon_n_grid[g];
    const auto post = build_n_posterior(static_cast<double>(n0), eps_n, count_family);
    const auto cdf = n_posterior_cdf(post);
    AbcRow row;
    row.epsilon_n = eps_n;
    std::vector<double> tvs;
    for (int r = 0; r < replicates; ++r) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r), g + 1));
      double rate_b = 0.0;
      double rate_u = 0.0;
      const auto hb = conditional([&](Rng&) { return n0; }, rng, rate_b);
      const auto hu = conditional([&](Rng& rr) { return sample_n(post, cdf, rr); }, rng, rate_u);
      double tv = 0.0;
      for (std::size_t i = 0; i < hb.size(); ++i) tv += std::abs(hb[i] - hu[i]);
      tvs.push_back(0.5 * tv);
      row.accept_rate_bounded += rate_b / replicates;
      row.accept_rate_unbounded += rate_u / replicates;
    }
    row.tv_mean = mean(tvs);
    row.tv_se = std_error(tvs);
    rep.rows.push_back(row);
  }
  if (rep.rows.size() >= 2) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : rep.rows) {
      xs.push_back(r.epsilon_n);
      ys.push_back(r.tv_mean);
    }
    rep.kendall_tau = kendall_tau(xs, ys);
  }
  return rep;
}

}  // namespace dpsize
