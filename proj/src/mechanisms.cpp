#include "dpsize/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dpsize {

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kContinuousLaplace: return "continuous_laplace";
    case NoiseFamily::kDiscreteLaplace: return "discrete_laplace";
    case NoiseFamily::kDiscreteGaussian: return "discrete_gaussian";
    case NoiseFamily::kKng: return "kng";
  }
  return "unknown";
}

NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "continuous_laplace") return NoiseFamily::kContinuousLaplace;
  if (name == "discrete_laplace") return NoiseFamily::kDiscreteLaplace;
  if (name == "discrete_gaussian") return NoiseFamily::kDiscreteGaussian;
  if (name == "kng") return NoiseFamily::kKng;
  throw Error(ErrorKind::kInvalidConfig,
              "unknown noise family '" + std::string(name) + "'");
}

PrivacyBudget PrivacyBudget::make(double epsilon_s, double epsilon_n) {
  if (!(epsilon_s > 0.0) || !(epsilon_n > 0.0)) {
    throw Error(ErrorKind::kInvalidBudget, "budgets must be positive");
  }
  return PrivacyBudget{epsilon_s, epsilon_n};
}

bool PrivacyBudget::bounded() const { return std::isinf(epsilon_n); }

std::int64_t truncation_half_width(double epsilon) {
  if (std::isinf(epsilon)) return 0;
  return static_cast<std::int64_t>(std::ceil(40.0 / epsilon));
}

double laplace_log_density(double z, double scale) {
  return -std::log(2.0 * scale) - std::fabs(z) / scale;
}

double discrete_laplace_log_pmf(std::int64_t k, double epsilon) {
  if (std::isinf(epsilon)) return k == 0 ? 0.0 : kNegInf;
  const double q = std::exp(-epsilon);
  return std::log(-std::expm1(-epsilon)) - std::log1p(q) -
         epsilon * static_cast<double>(k < 0 ? -k : k);
}

double discrete_gaussian_log_weight(std::int64_t k, double epsilon) {
  const double kd = static_cast<double>(k);
  return -0.5 * epsilon * epsilon * kd * kd;
}

double discrete_gaussian_log_normalizer(double epsilon) {
  const std::int64_t w = truncation_half_width(epsilon);
  // Symmetric sum, accumulated from the tails inward.
  double acc = 0.0;
  for (std::int64_t k = w; k >= 1; --k) {
    acc += 2.0 * std::exp(discrete_gaussian_log_weight(k, epsilon));
  }
  return std::log1p(acc);
}

double discrete_gaussian_log_pmf(std::int64_t k, double epsilon) {
  if (std::isinf(epsilon)) return k == 0 ? 0.0 : kNegInf;
  const std::int64_t w = truncation_half_width(epsilon);
  if (k < -w || k > w) return kNegInf;
  return discrete_gaussian_log_weight(k, epsilon) -
         discrete_gaussian_log_normalizer(epsilon);
}

std::int64_t sample_discrete_laplace(double epsilon, Rng& rng) {
  if (std::isinf(epsilon)) return 0;
  const double u = uniform_open(rng);
  const double q = std::exp(-epsilon);
  const double log_q = -epsilon;
  std::int64_t k;
  // F(k) = q^-k/(1+q) for k < 0 and 1 - q^(k+1)/(1+q) for k >= 0.
  if (u <= q / (1.0 + q)) {
    k = -static_cast<std::int64_t>(std::floor(std::log(u * (1.0 + q)) / log_q));
  } else {
    k = static_cast<std::int64_t>(
            std::ceil(std::log((1.0 - u) * (1.0 + q)) / log_q)) - 1;
  }
  const std::int64_t w = truncation_half_width(epsilon);
  return std::clamp<std::int64_t>(k, -w, w);
}

std::int64_t sample_discrete_gaussian(double epsilon, Rng& rng) {
  if (std::isinf(epsilon)) return 0;
  const std::int64_t w = truncation_half_width(epsilon);
  const double log_z = discrete_gaussian_log_normalizer(epsilon);
  const double u = uniform_open(rng);
  double cdf = 0.0;
  for (std::int64_t k = -w; k < w; ++k) {
    cdf += std::exp(discrete_gaussian_log_weight(k, epsilon) - log_z);
    if (u <= cdf) return k;
  }
  return w;
}

NoiseSpec::NoiseSpec(NoiseFamily family, double sensitivity, double epsilon)
    : family_(family),
      sensitivity_(sensitivity),
      epsilon_(epsilon),
      scale_(std::isinf(epsilon) ? 0.0 : sensitivity / epsilon) {
  if (family_ == NoiseFamily::kDiscreteGaussian && !exact()) {
    log_norm_ = discrete_gaussian_log_normalizer(1.0 / scale_);
  }
}

NoiseSpec NoiseSpec::from_epsilon(NoiseFamily family, double sensitivity,
                                  double epsilon) {
  if (!(sensitivity > 0.0) || !std::isfinite(sensitivity)) {
    throw Error(ErrorKind::kInvalidInput, "sensitivity must be positive");
  }
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::kInvalidBudget, "epsilon must be positive");
  }
  return NoiseSpec(family, sensitivity, epsilon);
}

bool NoiseSpec::pure_dp() const {
  return family_ == NoiseFamily::kContinuousLaplace ||
         family_ == NoiseFamily::kDiscreteLaplace || exact();
}

namespace {

// Integer residual for the discrete families; nullopt-like flag when the
// residual is not an integer (probability zero under the mechanism).
bool integer_residual(double r, std::int64_t& k) {
  const double rounded = std::nearbyint(r);
  if (std::fabs(r - rounded) > 1e-9) return false;
  k = static_cast<std::int64_t>(rounded);
  return true;
}

}  // namespace

double NoiseSpec::log_density(double residual) const {
  if (exact()) return residual == 0.0 ? 0.0 : kNegInf;
  std::int64_t k = 0;
  switch (family_) {
    case NoiseFamily::kContinuousLaplace:
      return laplace_log_density(residual, scale_);
    case NoiseFamily::kDiscreteLaplace:
      if (!integer_residual(residual, k)) return kNegInf;
      return discrete_laplace_log_pmf(k, 1.0 / scale_);
    case NoiseFamily::kDiscreteGaussian: {
      if (!integer_residual(residual, k)) return kNegInf;
      const std::int64_t w = truncation_half_width(1.0 / scale_);
      if (k < -w || k > w) return kNegInf;
      return discrete_gaussian_log_weight(k, 1.0 / scale_) - log_norm_;
    }
    case NoiseFamily::kKng:
      break;
  }
  throw Error(ErrorKind::kUnsupported,
              "kng is not an additive mechanism; use kng_log_density");
}

double NoiseSpec::sample_noise(Rng& rng) const {
  if (exact()) return 0.0;
  switch (family_) {
    case NoiseFamily::kContinuousLaplace:
      return sample_laplace(scale_, rng);
    case NoiseFamily::kDiscreteLaplace:
      return static_cast<double>(sample_discrete_laplace(1.0 / scale_, rng));
    case NoiseFamily::kDiscreteGaussian:
      return static_cast<double>(sample_discrete_gaussian(1.0 / scale_, rng));
    case NoiseFamily::kKng:
      break;
  }
  throw Error(ErrorKind::kUnsupported,
              "kng is not an additive mechanism; use kng_mean_sample");
}

CountMechanism::CountMechanism(NoiseFamily family, double epsilon)
    : spec_(NoiseSpec::from_epsilon(family, 1.0, epsilon)) {
  if (family == NoiseFamily::kKng) {
    throw Error(ErrorKind::kUnsupported, "kng cannot privatize a count");
  }
}

double CountMechanism::sample(std::int64_t n, Rng& rng) const {
  return static_cast<double>(n) + spec_.sample_noise(rng);
}

double clamp_normalize(double x, double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorKind::kInvalidBounds, "need L < U");
  const double c = std::clamp(x, lo, hi);
  return 2.0 * (c - lo) / (hi - lo) - 1.0;
}

double regression_sensitivity(int p) {
  if (p <= 0) throw Error(ErrorKind::kUnsupported, "need at least one covariate");
  const double pd = p;
  return pd * pd / 2.0 + 2.5 * pd + 2.0;
}

int regression_summary_dim(int p) {
  if (p <= 0) throw Error(ErrorKind::kUnsupported, "need at least one covariate");
  return p + p + p * (p - 1) / 2 + p + 1 + 1;
}

void regression_record_statistic(std::span<const double> x, double y,
                                 double lo, double hi, std::span<double> out) {
  const int p = static_cast<int>(x.size());
  // Small fixed buffer; p is the covariate count of a record.
  double xt[64];
  if (p > 64) throw Error(ErrorKind::kUnsupported, "too many covariates");
  for (int j = 0; j < p; ++j) xt[j] = clamp_normalize(x[j], lo, hi);
  const double yt = clamp_normalize(y, lo, hi);
  std::size_t c = 0;
  for (int j = 0; j < p; ++j) out[c++] = xt[j];
  for (int j = 0; j < p; ++j) out[c++] = xt[j] * xt[j];
  for (int j = 0; j < p; ++j) {
    for (int k = j + 1; k < p; ++k) out[c++] = xt[j] * xt[k];
  }
  for (int j = 0; j < p; ++j) out[c++] = xt[j] * yt;
  out[c++] = yt;
  out[c++] = yt * yt;
}

void dirichlet_record_statistic(std::span<const double> x, double floor_a,
                                std::span<double> out) {
  const double log_a = std::log(floor_a);
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = x[j] > floor_a ? std::log(std::min(x[j], 1.0)) : log_a;
  }
}

namespace {

double laplace_cdf(double x, double center, double scale) {
  const double z = (x - center) / scale;
  return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

double laplace_quantile(double p, double center, double scale) {
  return p < 0.5 ? center + scale * std::log(2.0 * p)
                 : center - scale * std::log(2.0 * (1.0 - p));
}

}  // namespace

double truncated_laplace_cdf(double x, double center, double scale, double lo,
                             double hi) {
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  const double f_lo = laplace_cdf(lo, center, scale);
  const double f_hi = laplace_cdf(hi, center, scale);
  return (laplace_cdf(x, center, scale) - f_lo) / (f_hi - f_lo);
}

double truncated_laplace_quantile(double u, double center, double scale,
                                  double lo, double hi) {
  const double f_lo = laplace_cdf(lo, center, scale);
  const double f_hi = laplace_cdf(hi, center, scale);
  const double x = laplace_quantile(f_lo + u * (f_hi - f_lo), center, scale);
  return std::clamp(x, lo, hi);
}

namespace {

void check_kng_args(double xbar, std::int64_t n, double epsilon) {
  if (!(xbar >= 0.0 && xbar <= 1.0)) {
    throw Error(ErrorKind::kInvalidStatistic, "xbar must lie in [0, 1]");
  }
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "n must be >= 1");
  if (!(epsilon > 0.0)) throw Error(ErrorKind::kInvalidBudget, "epsilon <= 0");
}

}  // namespace

double kng_mean_sample(double xbar, std::int64_t n, double epsilon, Rng& rng) {
  check_kng_args(xbar, n, epsilon);
  const double scale = 2.0 / (static_cast<double>(n) * epsilon);
  return truncated_laplace_quantile(uniform_open(rng), xbar, scale, 0.0, 1.0);
}

double kng_log_density(double s, double xbar, std::int64_t n, double epsilon) {
  check_kng_args(xbar, n, epsilon);
  if (s < 0.0 || s > 1.0) return kNegInf;
  const double scale = 2.0 / (static_cast<double>(n) * epsilon);
  const double mass =
      laplace_cdf(1.0, xbar, scale) - laplace_cdf(0.0, xbar, scale);
  return laplace_log_density(s - xbar, scale) - std::log(mass);
}

DpSummary privatize_regression_summaries(const Eigen::MatrixXd& x,
                                         const Eigen::VectorXd& y, double lo,
                                         double hi, const PrivacyBudget& budget,
                                         Rng& rng, NoiseFamily count_family) {
  if (x.rows() == 0 || x.cols() == 0 || x.rows() != y.size()) {
    throw Error(ErrorKind::kInvalidInput,
                "need a non-empty design with matching response length");
  }
  if (!(lo < hi)) throw Error(ErrorKind::kInvalidBounds, "need L < U");
  const int p = static_cast<int>(x.cols());
  const int d = regression_summary_dim(p);
  DpSummary out;
  out.s.assign(d, 0.0);
  std::vector<double> row(p), t(d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < p; ++j) row[j] = x(i, j);
    regression_record_statistic(row, y(i), lo, hi, t);
    for (int c = 0; c < d; ++c) out.s[c] += t[c];
  }
  const NoiseSpec noise = NoiseSpec::from_epsilon(
      NoiseFamily::kContinuousLaplace, regression_sensitivity(p),
      budget.epsilon_s);
  for (double& v : out.s) v += noise.sample_noise(rng);
  out.n_dp = privatize_count(x.rows(), budget.epsilon_n, count_family, rng);
  return out;
}

std::vector<double> privatize_dirichlet_summaries(const Eigen::MatrixXd& x,
                                                  double floor_a,
                                                  double epsilon_s, Rng& rng) {
  if (!(floor_a > 0.0 && floor_a < 1.0)) {
    throw Error(ErrorKind::kInvalidFloor, "floor a must lie in (0, 1)");
  }
  if (x.rows() == 0 || x.cols() != 3) {
    throw Error(ErrorKind::kInvalidInput, "need a non-empty n x 3 matrix");
  }
  std::vector<double> s(3, 0.0), t(3), row(3);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double total = 0.0;
    for (int j = 0; j < 3; ++j) {
      row[j] = x(i, j);
      total += row[j];
    }
    if (std::fabs(total - 1.0) > 1e-9 ||
        std::any_of(row.begin(), row.end(), [](double v) { return v < 0.0; })) {
      throw Error(ErrorKind::kInvalidInput, "rows must lie on the simplex");
    }
    dirichlet_record_statistic(row, floor_a, t);
    for (int j = 0; j < 3; ++j) s[j] += t[j];
  }
  const NoiseSpec noise = NoiseSpec::from_epsilon(
      NoiseFamily::kContinuousLaplace, -3.0 * std::log(floor_a), epsilon_s);
  for (double& v : s) v += noise.sample_noise(rng);
  return s;
}

double privatize_count(std::int64_t n, double epsilon_n, NoiseFamily family,
                       Rng& rng) {
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "n must be >= 1");
  return CountMechanism(family, epsilon_n).sample(n, rng);
}

double dp_to_tv_delta(DpFramework framework, double param, double delta) {
  if (!(param >= 0.0) || !(delta >= 0.0) || delta > 1.0) {
    throw Error(ErrorKind::kInvalidBudget, "budget parameters must be >= 0");
  }
  double out = 0.0;
  switch (framework) {
    case DpFramework::kPureEps:
      out = std::isinf(param) ? 1.0 : std::tanh(param / 2.0);
      break;
    case DpFramework::kApproxEpsDelta:
      out = std::isinf(param)
                ? 1.0
                : (2.0 * delta + std::expm1(param)) / (std::exp(param) + 1.0);
      break;
    case DpFramework::kGdp:
      out = 2.0 * normal_cdf(param / 2.0) - 1.0;
      break;
    case DpFramework::kZcdp:
    case DpFramework::kRenyi:
      out = std::min(std::sqrt(param / 2.0), std::sqrt(-std::expm1(-param)));
      break;
  }
  return std::clamp(out, 0.0, 1.0);
}

}  // namespace dpsize
