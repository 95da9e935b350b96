#include "dpsize/models/bernoulli.hpp"

#include <algorithm>
#include <cmath>

namespace dpsize {

BernoulliToy::BernoulliToy(double a, double b, NoiseSpec summary_noise)
    : a_(a), b_(b), noise_(summary_noise) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "Beta hyperparameters must be > 0");
  }
}

BernoulliToy::Params BernoulliToy::sample_prior(Rng& rng) const {
  return {sample_beta(a_, b_, rng)};
}

void BernoulliToy::sample_datum(const Params& th, Rng& rng,
                                std::span<double> out) const {
  out[0] = uniform_open(rng) < th.theta ? 1.0 : 0.0;
}

double BernoulliToy::log_datum_density(std::span<const double> rec,
                                       const Params& th) const {
  return rec[0] > 0.5 ? std::log(th.theta) : std::log1p(-th.theta);
}

BernoulliToy::Params BernoulliToy::update_theta(RecordView x, const Params&,
                                                Rng& rng) const {
  double ones = 0.0;
  for (std::size_t i = 0; i < x.n; ++i) ones += x[i][0];
  const double zeros = static_cast<double>(x.n) - ones;
  return {sample_beta(a_ + ones, b_ + zeros, rng)};
}

Eigen::VectorXd BernoulliToy::to_unconstrained(const Params& th) const {
  Eigen::VectorXd u(1);
  u(0) = std::log(th.theta) - std::log1p(-th.theta);
  return u;
}

BernoulliToy::Params BernoulliToy::from_unconstrained(
    const Eigen::VectorXd& u) const {
  return {1.0 / (1.0 + std::exp(-u(0)))};
}

void BernoulliToy::add_grad_log_datum_density(std::span<const double> rec,
                                              const Params& th,
                                              Eigen::VectorXd& g) const {
  g(0) += rec[0] - th.theta;
}

void BernoulliToy::accumulate(Suff& suff, std::span<const double> rec) const {
  suff.ones += rec[0];
  suff.count += 1.0;
}

BernoulliToy::Params BernoulliToy::closed_form_mstep(const Suff& suff) const {
  if (suff.count <= 0.0) {
    throw Error(ErrorKind::kNumericBreakdown, "no records in the E-step sample");
  }
  return {std::clamp(suff.ones / suff.count, 1e-12, 1.0 - 1e-12)};
}

double BernoulliToy::suff_loglik(const Suff& suff, const Params& th) const {
  return suff.ones * std::log(th.theta) +
         (suff.count - suff.ones) * std::log1p(-th.theta);
}

}  // namespace dpsize
