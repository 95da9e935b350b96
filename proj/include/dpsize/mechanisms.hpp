#pragma once

// Privacy mechanisms: noise samplers and their log-densities, clamping and
// sensitivity helpers, the privatizers for the shipped models, and the
// conversions from mainline DP guarantees to (0, delta)-DP.
//
// Densities are only exposed in log form. A mechanism with epsilon = +inf is
// the exact (noise-free) release: its log-density is 0 at a zero residual and
// -inf elsewhere.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dpsize/common.hpp"

namespace dpsize {

enum class NoiseFamily {
  kContinuousLaplace,
  kDiscreteLaplace,
  kDiscreteGaussian,
  kKng,
};

// Config-file names: "continuous_laplace", "discrete_laplace",
// "discrete_gaussian", "kng".
std::string_view to_string(NoiseFamily family);
NoiseFamily parse_noise_family(std::string_view name);

struct PrivacyBudget {
  double epsilon_s = 1.0;
  // +inf means n is released exactly (bounded DP).
  double epsilon_n = kInf;

  static PrivacyBudget make(double epsilon_s, double epsilon_n);
  bool bounded() const;
};

struct DpSummary {
  std::vector<double> s;
  // Integer-valued for the discrete count mechanisms.
  double n_dp = 0.0;
};

// Half-width of the truncation window for the discrete samplers and the
// n-posterior: ceil(40 / epsilon). The excluded geometric tail is < e^-40.
std::int64_t truncation_half_width(double epsilon);

double laplace_log_density(double z, double scale);

// log of (1-q)/(1+q) q^|k| with q = exp(-epsilon).
double discrete_laplace_log_pmf(std::int64_t k, double epsilon);

// Unnormalized -(epsilon^2 / 2) k^2.
double discrete_gaussian_log_weight(std::int64_t k, double epsilon);
// log of the sum of exp(weight) over the truncation window.
double discrete_gaussian_log_normalizer(double epsilon);
double discrete_gaussian_log_pmf(std::int64_t k, double epsilon);

// Inverse-CDF samplers, clipped to the +-ceil(40/eps) window.
std::int64_t sample_discrete_laplace(double epsilon, Rng& rng);
std::int64_t sample_discrete_gaussian(double epsilon, Rng& rng);

// Additive noise on a statistic with the given l1 sensitivity. For the
// Laplace families scale = sensitivity / epsilon; for the discrete Gaussian
// the scale is sigma = sensitivity / epsilon.
class NoiseSpec {
 public:
  static NoiseSpec from_epsilon(NoiseFamily family, double sensitivity,
                                double epsilon);

  NoiseFamily family() const { return family_; }
  double scale() const { return scale_; }
  double sensitivity() const { return sensitivity_; }
  double epsilon() const { return epsilon_; }
  bool exact() const { return scale_ == 0.0; }
  // True when the mechanism satisfies pure epsilon-DP (Laplace families).
  bool pure_dp() const;

  // log p(output | statistic) as a function of residual = output - statistic.
  double log_density(double residual) const;
  double sample_noise(Rng& rng) const;

 private:
  NoiseSpec(NoiseFamily family, double sensitivity, double epsilon);

  NoiseFamily family_;
  double sensitivity_;
  double epsilon_;
  double scale_;
  double log_norm_ = 0.0;  // discrete Gaussian only
};

// The mechanism releasing n_dp = n + noise (sensitivity 1).
class CountMechanism {
 public:
  CountMechanism(NoiseFamily family, double epsilon);

  NoiseFamily family() const { return spec_.family(); }
  double epsilon() const { return spec_.epsilon(); }
  bool exact() const { return spec_.exact(); }
  bool pure_dp() const { return spec_.pure_dp(); }
  const NoiseSpec& spec() const { return spec_; }

  double log_density(double n_dp, std::int64_t n) const {
    return spec_.log_density(n_dp - static_cast<double>(n));
  }
  double sample(std::int64_t n, Rng& rng) const;

 private:
  NoiseSpec spec_;
};

// f(x; L, U) = 2([x]_L^U - L) / (U - L) - 1, in [-1, 1].
double clamp_normalize(double x, double lo, double hi);

// l1 sensitivity of the unique clamped cross-product entries under
// add/delete adjacency: p^2/2 + 5p/2 + 2.
double regression_sensitivity(int p);
// Number of summary components, p + p + C(p,2) + p + 1 + 1.
int regression_summary_dim(int p);

// Per-record contribution to the regression summary, in the order
// [x_j], [x_j^2], [x_j x_k, j<k], [x_j y], y, y^2 on the clamped-normalized
// values. `out` must have regression_summary_dim(p) entries.
void regression_record_statistic(std::span<const double> x, double y,
                                 double lo, double hi, std::span<double> out);

// Clamped log-proportions [log max(x_j, a)] for a 3-part composition.
void dirichlet_record_statistic(std::span<const double> x, double floor_a,
                                std::span<double> out);

// Truncated Laplace on [lo, hi] centered at `center`.
double truncated_laplace_cdf(double x, double center, double scale, double lo,
                             double hi);
double truncated_laplace_quantile(double u, double center, double scale,
                                  double lo, double hi);

// KNG mean release: s ~ Laplace_[0,1](xbar, 2 / (n epsilon)).
double kng_mean_sample(double xbar, std::int64_t n, double epsilon, Rng& rng);
double kng_log_density(double s, double xbar, std::int64_t n, double epsilon);

// Laplace(0, Delta/eps_s) on every summary cell; n_dp = n + count noise.
// X holds the p covariates (no intercept column).
DpSummary privatize_regression_summaries(
    const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lo, double hi,
    const PrivacyBudget& budget, Rng& rng,
    NoiseFamily count_family = NoiseFamily::kContinuousLaplace);

// s = sum_i [log [x_ij]_a^1]_j + Laplace(0, -3 log(a) / eps_s) per coordinate.
std::vector<double> privatize_dirichlet_summaries(const Eigen::MatrixXd& x,
                                                  double floor_a,
                                                  double epsilon_s, Rng& rng);

double privatize_count(std::int64_t n, double epsilon_n, NoiseFamily family,
                       Rng& rng);

enum class DpFramework { kPureEps, kApproxEpsDelta, kGdp, kZcdp, kRenyi };

// (0, delta)-DP implied by a guarantee in another framework.
//   kPureEps(eps), kApproxEpsDelta(eps, delta), kGdp(mu), kZcdp(rho),
//   kRenyi(eps) with eps read as a KL bound.
double dp_to_tv_delta(DpFramework framework, double param, double delta = 0.0);

}  // namespace dpsize
