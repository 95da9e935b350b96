#pragma once

// Ground truth for small instances and distribution distances: exact
// posterior enumerations for the Bernoulli toy and the Poisson-multinomial
// model, KS/TV estimators, and Monte Carlo or exact checks of the convergence
// results for unbounded DP.

#include <cstdint>
#include <map>
#include <vector>

#include "dpsize/mechanisms.hpp"
#include "dpsize/models/poisson_multinomial.hpp"
#include "dpsize/n_posterior.hpp"

namespace dpsize {

struct EnumeratedPosterior {
  std::vector<std::vector<std::int64_t>> grid;
  std::vector<double> probabilities;
  // Mass outside the grid (estimated when the grid is a truncation).
  double tail_mass = 0.0;

  double prob_of(const std::vector<std::int64_t>& state) const;
};

// Normalized histogram of observed discrete states.
EnumeratedPosterior empirical_distribution(
    const std::map<std::vector<std::int64_t>, std::int64_t>& counts);

// p(n, k | s, n_dp) over n in [n_lo, n_hi], k = sum x in [0, n]:
//   eta_s(s - k) BetaBinomial(k | n, a, b) eta_n(n_dp | n), flat on n.
EnumeratedPosterior enumerate_bernoulli_posterior(
    double s, double n_dp, double a, double b, std::int64_t n_lo,
    std::int64_t n_hi, const NoiseSpec& summary, const CountMechanism& count);

// Independent path for the same posterior: sums over every binary dataset of
// every length and integrates theta by Gauss-Legendre quadrature. n_hi <= 16.
EnumeratedPosterior enumerate_bernoulli_posterior_bruteforce(
    double s, double n_dp, double a, double b, std::int64_t n_lo,
    std::int64_t n_hi, const NoiseSpec& summary, const CountMechanism& count);

// Exact p(x | s) over {0..cap}^k with lambda integrated out, using the
// per-cell factorization. Throws cap-exceeded when (cap+1)^k > 1e5.
EnumeratedPosterior enumerate_poisson_multinomial_posterior(
    const PoissonMultinomialModel& model, const std::vector<double>& s,
    std::int64_t count_cap);

// Same posterior by naive nested-loop evaluation of the joint weight.
EnumeratedPosterior enumerate_poisson_multinomial_naive(
    const PoissonMultinomialModel& model, const std::vector<double>& s,
    std::int64_t count_cap);

// Two-sample KS statistic. Inputs are copied and sorted.
double ks_distance_1d(std::vector<double> a, std::vector<double> b);
// Max over coordinates of the per-coordinate KS (a lower bound on the
// rectangle KS distance). Samples are row-major with `dim` columns.
double ks_distance_max_coordinate(const std::vector<double>& a,
                                  const std::vector<double>& b, std::size_t dim);

// (1/2) sum |p - q| over the union of the grids.
double tv_distance_discrete(const EnumeratedPosterior& p,
                            const EnumeratedPosterior& q);

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

// Draws n from the posterior by inverse CDF.
std::int64_t sample_n(const NPosterior& post, const std::vector<double>& cdf,
                      Rng& rng);
std::vector<double> n_posterior_cdf(const NPosterior& post);

enum class SumMechanism { kLaplaceSum, kKng };

struct ConvergenceRow {
  std::int64_t n0 = 0;
  double ks_mean = 0.0;
  double ks_se = 0.0;
  std::vector<double> ks;
};

struct ConvergenceReport {
  SumMechanism mechanism = SumMechanism::kLaplaceSum;
  // Standardization exponents declared by the mechanism.
  double a = 1.0;
  double b = 0.5;
  std::vector<ConvergenceRow> rows;
  double kendall_tau = 0.0;
};

// Bernoulli(theta) data in [0, 1]. For each n0, draws `samples` values of
// the standardized summary n0^b (n0^-a s - theta) under n = n0 and under
// n ~ p(n | n_dp = n0), and records the two-sample KS per replicate.
// epsilon_n = inf makes both laws identical.
ConvergenceReport theorem31_convergence_check(
    SumMechanism mechanism, double theta, double epsilon_s, double epsilon_n,
    NoiseFamily count_family, const std::vector<std::int64_t>& n0_grid,
    int replicates, std::int64_t samples, std::uint64_t seed);

struct CouplingCheck {
  double tv = 0.0;
  double bound = 0.0;  // P(n_dp != n)
  double markov_bound = 0.0;  // E|n_dp - n|
};

// Exact TV(p(s, n | theta), p(s, n_dp | theta)) for the Bernoulli toy with
// s = sum x + discrete noise, n uniform on [n_lo, n_hi].
CouplingCheck prop41_coupling_check(std::int64_t n_lo, std::int64_t n_hi,
                                    double theta, double epsilon_s,
                                    double epsilon_n, NoiseFamily family);

struct TvPrivacyCheck {
  double tv = 0.0;
  double delta = 0.0;
  double expected_abs_dev = 0.0;
  double bound = 0.0;  // delta * E|n - n0|
};

// Exact TV(p(s | theta, n = n0), p(s | theta, n_dp = n0)) against
// delta E|n - n0| for the Bernoulli toy with discrete-Laplace s noise.
TvPrivacyCheck theorem42_check(std::int64_t n0, double theta, double epsilon_s,
                               double epsilon_n, NoiseFamily count_family);

struct AbcRow {
  double epsilon_n = 0.0;
  double tv_mean = 0.0;
  double tv_se = 0.0;
  double accept_rate_bounded = 0.0;
  double accept_rate_unbounded = 0.0;
};

struct AbcReport {
  std::int64_t n0 = 0;
  double rect_lo = 0.0;
  double rect_hi = 0.0;
  std::vector<AbcRow> rows;
  double kendall_tau = 0.0;
};

// Rejection-sampled p(theta | s in R, n = n0) vs p(theta | s in R,
// n_dp = n0) for the Bernoulli toy with a Beta(a, b) prior and Laplace-sum s.
// R is centered at the empirical median of s | n = n0 with half-width
// `half_width_scale * sqrt(n0)`. TV is estimated on `bins` equal bins of
// theta. Throws rectangle-too-small below a 1e-3 acceptance rate.
AbcReport abc_posterior_check(double a, double b, double epsilon_s,
                              NoiseFamily count_family, std::int64_t n0,
                              const std::vector<double>& epsilon_n_grid,
                              double half_width_scale, int replicates,
                              std::int64_t accepted_target, int bins,
                              std::uint64_t seed);

}  // namespace dpsize
