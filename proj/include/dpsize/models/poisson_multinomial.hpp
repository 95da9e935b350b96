#pragma once

// Poissonized multinomial: lambda_i ~ Gamma(alpha_i, theta) (rate),
// x_i ~ Poisson(lambda_i) independently, s_i = x_i + noise_i. The total
// n = sum x_i never appears in the state, so a sampler cycle costs O(k).

#include <cstdint>
#include <functional>
#include <vector>

#include "dpsize/mechanisms.hpp"

namespace dpsize {

struct PoissonMultinomialHyper {
  std::vector<double> alpha{1.0, 1.0, 1.0};
  double theta = 1.0;  // Gamma rate
};

struct PoissonMultinomialState {
  std::vector<std::int64_t> x;
  std::vector<double> lambda;
};

struct CountMove {
  int direction = 0;       // +1 or -1
  double log_ratio = 0.0;  // log acceptance ratio (before min with 0)
  double log_data_ratio = 0.0;
  double log_proposal_ratio = 0.0;
};

class PoissonMultinomialModel {
 public:
  // `cell_noise` is the additive mechanism applied to every cell count.
  PoissonMultinomialModel(PoissonMultinomialHyper hyper, NoiseSpec cell_noise);

  std::size_t k() const { return hyper_.alpha.size(); }
  const PoissonMultinomialHyper& hyper() const { return hyper_; }
  const NoiseSpec& cell_noise() const { return noise_; }

  std::vector<double> sample_prior(Rng& rng) const;
  std::vector<std::int64_t> sample_counts(const std::vector<double>& lambda,
                                          Rng& rng) const;
  std::vector<double> privatize(const std::vector<std::int64_t>& x, Rng& rng) const;

  // Exact draw lambda_i | x_i ~ Gamma(alpha_i + x_i, theta + 1).
  std::vector<double> update_theta(const std::vector<std::int64_t>& x,
                                   Rng& rng) const;

  // Proposes x_i -> x_i +- 1 (up with probability 1 from 0) and returns the
  // log acceptance ratio: mechanism ratio + Poisson ratio + proposal ratio.
  CountMove count_move(const std::vector<std::int64_t>& x,
                       const std::vector<double>& lambda,
                       std::span<const double> s, std::size_t i, Rng& rng) const;

  // One cycle: lambda update, then one count move per cell.
  // Returns the number of accepted count moves.
  int cycle(PoissonMultinomialState& state, std::span<const double> s,
            Rng& rng) const;

  // log of the negative-binomial marginal p(x_i) with lambda_i integrated out.
  double log_marginal_count(std::size_t i, std::int64_t x) const;

 private:
  PoissonMultinomialHyper hyper_;
  NoiseSpec noise_;
};

struct PoissonChainConfig {
  std::int64_t iterations = 100000;
  std::int64_t burn_in = 10000;
  std::uint64_t seed = 1;
};

// Runs the chain from x = max(0, round(s)) and reports each post-burn-in
// state to `observer`. Returns the overall count-move acceptance rate.
double run_poisson_multinomial(
    const PoissonMultinomialModel& model, std::span<const double> s,
    const PoissonChainConfig& config,
    const std::function<void(const PoissonMultinomialState&)>& observer);

}  // namespace dpsize
