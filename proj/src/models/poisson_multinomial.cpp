#include "dpsize/models/poisson_multinomial.hpp"

#include <cmath>
#include <random>

namespace dpsize {

PoissonMultinomialModel::PoissonMultinomialModel(PoissonMultinomialHyper hyper,
                                                 NoiseSpec cell_noise)
    : hyper_(std::move(hyper)), noise_(cell_noise) {
  if (hyper_.alpha.empty() || !(hyper_.theta > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "need k >= 1 cells and theta > 0");
  }
  for (double a : hyper_.alpha) {
    if (!(a > 0.0)) throw Error(ErrorKind::kInvalidConfig, "alpha must be > 0");
  }
}

std::vector<double> PoissonMultinomialModel::sample_prior(Rng& rng) const {
  std::vector<double> lambda(k());
  for (std::size_t i = 0; i < k(); ++i) {
    lambda[i] = sample_gamma(hyper_.alpha[i], hyper_.theta, rng);
  }
  return lambda;
}

std::vector<std::int64_t> PoissonMultinomialModel::sample_counts(
    const std::vector<double>& lambda, Rng& rng) const {
  std::vector<std::int64_t> x(k());
  for (std::size_t i = 0; i < k(); ++i) {
    std::poisson_distribution<std::int64_t> dist(lambda[i]);
    x[i] = dist(rng);
  }
  return x;
}

std::vector<double> PoissonMultinomialModel::privatize(
    const std::vector<std::int64_t>& x, Rng& rng) const {
  std::vector<double> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i] = static_cast<double>(x[i]) + noise_.sample_noise(rng);
  }
  return s;
}

std::vector<double> PoissonMultinomialModel::update_theta(
    const std::vector<std::int64_t>& x, Rng& rng) const {
  std::vector<double> lambda(k());
  for (std::size_t i = 0; i < k(); ++i) {
    lambda[i] = sample_gamma(hyper_.alpha[i] + static_cast<double>(x[i]),
                             hyper_.theta + 1.0, rng);
  }
  return lambda;
}

CountMove PoissonMultinomialModel::count_move(const std::vector<std::int64_t>& x,
                                              const std::vector<double>& lambda,
                                              std::span<const double> s,
                                              std::size_t i, Rng& rng) const {
  CountMove mv;
  const std::int64_t xi = x[i];
  const double u = uniform_open(rng);
  mv.direction = (xi == 0 || u < 0.5) ? 1 : -1;
  const std::int64_t xn = xi + mv.direction;
  if (mv.direction > 0) {
    mv.log_data_ratio = std::log(lambda[i]) - std::log(static_cast<double>(xi + 1));
    mv.log_proposal_ratio = xi == 0 ? -std::log(2.0) : 0.0;
  } else {
    mv.log_data_ratio = std::log(static_cast<double>(xi)) - std::log(lambda[i]);
    mv.log_proposal_ratio = xi == 1 ? std::log(2.0) : 0.0;
  }
  const double log_mech = noise_.log_density(s[i] - static_cast<double>(xn)) -
                          noise_.log_density(s[i] - static_cast<double>(xi));
  mv.log_ratio = log_mech + mv.log_data_ratio + mv.log_proposal_ratio;
  if (std::isnan(mv.log_ratio)) {
    throw Error(ErrorKind::kNumericBreakdown, "count move ratio is NaN");
  }
  return mv;
}

int PoissonMultinomialModel::cycle(PoissonMultinomialState& state,
                                   std::span<const double> s, Rng& rng) const {
  state.lambda = update_theta(state.x, rng);
  int accepted = 0;
  for (std::size_t i = 0; i < k(); ++i) {
    const CountMove mv = count_move(state.x, state.lambda, s, i, rng);
    if (std::log(uniform_open(rng)) < mv.log_ratio) {
      state.x[i] += mv.direction;
      ++accepted;
    }
  }
  return accepted;
}

double PoissonMultinomialModel::log_marginal_count(std::size_t i,
                                                   std::int64_t x) const {
  const double a = hyper_.alpha[i];
  const double th = hyper_.theta;
  const double xd = static_cast<double>(x);
  return std::lgamma(a + xd) - std::lgamma(a) - std::lgamma(xd + 1.0) +
         a * std::log(th / (th + 1.0)) - xd * std::log(th + 1.0);
}

double run_poisson_multinomial(
    const PoissonMultinomialModel& model, std::span<const double> s,
    const PoissonChainConfig& config,
    const std::function<void(const PoissonMultinomialState&)>& observer) {
  if (s.size() != model.k()) {
    throw Error(ErrorKind::kInvalidInput, "summary length must equal k");
  }
  Rng rng(config.seed);
  PoissonMultinomialState state;
  state.x.resize(model.k());
  for (std::size_t i = 0; i < model.k(); ++i) {
    state.x[i] = std::max<std::int64_t>(0, std::llround(s[i]));
  }
  std::int64_t accepted = 0;
  for (std::int64_t it = 0; it < config.iterations; ++it) {
    accepted += model.cycle(state, s, rng);
    if (it >= config.burn_in && observer) observer(state);
  }
  return static_cast<double>(accepted) /
         static_cast<double>(config.iterations * static_cast<std::int64_t>(model.k()));
}

}  // namespace dpsize
