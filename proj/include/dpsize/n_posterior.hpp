#pragma once

// Posterior over the true sample size n given a privatized n_dp under a flat
// prior, and the quantities built on it.

#include <cstdint>
#include <functional>
#include <vector>

#include "dpsize/mechanisms.hpp"

namespace dpsize {

enum class NPriorKind { kFlatUnbounded, kFlatRange };

struct NPrior {
  NPriorKind kind = NPriorKind::kFlatRange;
  // Upper end of the flat range; 0 selects default_n_max(n_dp, epsilon_n).
  std::int64_t n_max = 0;
};

// max(2 ceil(max(n_dp, 1)), ceil(n_dp) + ceil(40 / eps_n)).
std::int64_t default_n_max(double n_dp, double epsilon_n);

struct NPosterior {
  std::int64_t n_lo = 1;
  std::int64_t n_hi = 1;
  // log p(n | n_dp) for n = n_lo..n_hi, normalized.
  std::vector<double> log_weights;

  std::size_t size() const { return log_weights.size(); }
  double log_prob(std::int64_t n) const;
  double prob(std::int64_t n) const;
  std::int64_t mode() const;
  double mean() const;
  double variance() const;
};

// Weights proportional to p(n_dp | n) over the window n_dp +- ceil(40/eps_n),
// clipped to [1, N_max]. eps_n = inf gives a point mass at n_dp.
NPosterior build_n_posterior(double n_dp, double epsilon_n, NoiseFamily family,
                             NPrior prior = {},
                             std::int64_t window_cap = 50'000'000);

// E|n - n0| under the posterior (exact sum over the support).
double expected_abs_deviation(const NPosterior& post, std::int64_t n0);

// 2/(e^eps - 1) for the discrete Laplace, 2/eps for the discrete Gaussian.
double lemma_a12_bound(NoiseFamily family, double epsilon);

// log sum_k p(n = k | n_dp) exp(per_n_loglik(k)).
double mixture_loglik(const NPosterior& post,
                      const std::function<double(std::int64_t)>& per_n_loglik);

}  // namespace dpsize
