#include "dpsize/n_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dpsize {

std::int64_t default_n_max(double n_dp, double epsilon_n) {
  const auto up = static_cast<std::int64_t>(std::ceil(std::max(n_dp, 1.0)));
  const auto c = static_cast<std::int64_t>(std::ceil(n_dp));
  return std::max(2 * up, c + truncation_half_width(epsilon_n));
}

double NPosterior::log_prob(std::int64_t n) const {
  if (n < n_lo || n > n_hi) return kNegInf;
  return log_weights[static_cast<std::size_t>(n - n_lo)];
}

double NPosterior::prob(std::int64_t n) const { return std::exp(log_prob(n)); }

std::int64_t NPosterior::mode() const {
  const auto it = std::max_element(log_weights.begin(), log_weights.end());
  return n_lo + (it - log_weights.begin());
}

double NPosterior::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    m += std::exp(log_weights[i]) * static_cast<double>(n_lo + static_cast<std::int64_t>(i));
  }
  return m;
}

double NPosterior::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double d = static_cast<double>(n_lo + static_cast<std::int64_t>(i)) - m;
    v += std::exp(log_weights[i]) * d * d;
  }
  return v;
}

NPosterior build_n_posterior(double n_dp, double epsilon_n, NoiseFamily family,
                             NPrior prior, std::int64_t window_cap) {
  if (!(epsilon_n > 0.0)) {
    throw Error(ErrorKind::kInvalidBudget, "epsilon_n must be positive");
  }
  if (!std::isfinite(n_dp)) {
    throw Error(ErrorKind::kInvalidInput, "n_dp must be finite");
  }
  const CountMechanism mech(family, epsilon_n);
  NPosterior post;
  if (mech.exact()) {
    const double r = std::nearbyint(n_dp);
    if (r != n_dp || r < 1.0) {
      throw Error(ErrorKind::kDegenerateLikelihood,
                  "exact release needs a positive integer n_dp");
    }
    post.n_lo = post.n_hi = static_cast<std::int64_t>(r);
    post.log_weights = {0.0};
    return post;
  }
  const std::int64_t w = truncation_half_width(epsilon_n);
  if (2 * w + 1 > window_cap) {
    throw Error(ErrorKind::kWindowOverflow,
                "n-posterior window of " + std::to_string(2 * w + 1) +
                    " states exceeds the cap " + std::to_string(window_cap));
  }
  std::int64_t lo = static_cast<std::int64_t>(std::floor(n_dp)) - w;
  std::int64_t hi = static_cast<std::int64_t>(std::ceil(n_dp)) + w;
  lo = std::max<std::int64_t>(lo, 1);
  if (prior.kind == NPriorKind::kFlatRange) {
    const std::int64_t n_max =
        prior.n_max > 0 ? prior.n_max : default_n_max(n_dp, epsilon_n);
    hi = std::min(hi, n_max);
  }
  if (hi < lo) {
    throw Error(ErrorKind::kDegenerateLikelihood,
                "n_dp is incompatible with the prior range");
  }
  std::vector<double> lw;
  lw.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t n = lo; n <= hi; ++n) lw.push_back(mech.log_density(n_dp, n));
  const double z = log_sum_exp(lw);
  if (!std::isfinite(z)) {
    throw Error(ErrorKind::kDegenerateLikelihood,
                "no n in the window has positive likelihood");
  }
  for (double& v : lw) v -= z;
  post.n_lo = lo;
  post.n_hi = hi;
  post.log_weights = std::move(lw);
  return post;
}

double expected_abs_deviation(const NPosterior& post, std::int64_t n0) {
  double e = 0.0;
  for (std::size_t i = 0; i < post.size(); ++i) {
    const std::int64_t n = post.n_lo + static_cast<std::int64_t>(i);
    e += std::exp(post.log_weights[i]) * static_cast<double>(n > n0 ? n - n0 : n0 - n);
  }
  return e;
}

double lemma_a12_bound(NoiseFamily family, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidBudget, "epsilon <= 0");
  switch (family) {
    case NoiseFamily::kDiscreteLaplace: return 2.0 / std::expm1(epsilon);
    case NoiseFamily::kDiscreteGaussian: return 2.0 / epsilon;
    default: break;
  }
  throw Error(ErrorKind::kUnsupported,
              "bound is stated for the discrete Laplace and Gaussian only");
}

double mixture_loglik(const NPosterior& post,
                      const std::function<double(std::int64_t)>& per_n_loglik) {
  std::vector<double> terms(post.size());
  for (std::size_t i = 0; i < post.size(); ++i) {
    terms[i] = post.log_weights[i] +
               per_n_loglik(post.n_lo + static_cast<std::int64_t>(i));
  }
  const double out = log_sum_exp(terms);
  if (out == kNegInf) {
    throw Error(ErrorKind::kDegenerateLikelihood,
                "every supported n has zero likelihood");
  }
  return out;
}

}  // namespace dpsize
