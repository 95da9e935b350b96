#include "dpsize/rjmcmc.hpp"

#include <numeric>

namespace dpsize {

void SamplerConfig::validate() const {
  if (iterations < 1) throw Error(ErrorKind::kInvalidConfig, "iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations) {
    throw Error(ErrorKind::kInvalidConfig, "need 0 <= burn_in < iterations");
  }
  if (t_refresh_period < 1) {
    throw Error(ErrorKind::kInvalidConfig, "t_refresh_period must be >= 1");
  }
  if (n_max < 0) throw Error(ErrorKind::kInvalidConfig, "n_max must be >= 0");
}

double log_accept_ratio(double log_num, double log_den) {
  if (std::isnan(log_num) || std::isnan(log_den)) {
    throw Error(ErrorKind::kNumericBreakdown, "NaN in an acceptance ratio");
  }
  if (log_num == kNegInf) return kNegInf;
  if (log_den == kNegInf) return kInf;
  return log_num - log_den;
}

std::vector<double> Trace::theta_mean() const {
  const std::size_t d = param_dim();
  std::vector<double> m(d, 0.0);
  const std::int64_t b = config.burn_in;
  const std::int64_t cnt = iterations() - b;
  if (theta.empty() || cnt <= 0) return m;
  for (std::int64_t it = b; it < iterations(); ++it) {
    for (std::size_t j = 0; j < d; ++j) m[j] += theta_at(it, j);
  }
  for (double& v : m) v /= static_cast<double>(cnt);
  return m;
}

std::vector<double> Trace::theta_variance() const {
  const std::size_t d = param_dim();
  const auto m = theta_mean();
  std::vector<double> v(d, 0.0);
  const std::int64_t b = config.burn_in;
  const std::int64_t cnt = iterations() - b;
  if (theta.empty() || cnt <= 1) return v;
  for (std::int64_t it = b; it < iterations(); ++it) {
    for (std::size_t j = 0; j < d; ++j) {
      const double e = theta_at(it, j) - m[j];
      v[j] += e * e;
    }
  }
  for (double& x : v) x /= static_cast<double>(cnt - 1);
  return v;
}

double Trace::n_mean() const {
  const std::int64_t b = config.burn_in;
  const std::int64_t cnt = iterations() - b;
  if (cnt <= 0) return 0.0;
  double acc = 0.0;
  for (std::int64_t it = b; it < iterations(); ++it) acc += static_cast<double>(n[it]);
  return acc / static_cast<double>(cnt);
}

double Trace::n_variance() const {
  const std::int64_t b = config.burn_in;
  const std::int64_t cnt = iterations() - b;
  if (cnt <= 1) return 0.0;
  const double m = n_mean();
  double acc = 0.0;
  for (std::int64_t it = b; it < iterations(); ++it) {
    const double e = static_cast<double>(n[it]) - m;
    acc += e * e;
  }
  return acc / static_cast<double>(cnt - 1);
}

double Trace::max_refresh_drift() const {
  double m = 0.0;
  for (double d : refresh_drift) m = std::max(m, d);
  return m;
}

AuditReport acceptance_audit(const Trace& trace, const PrivacyBudget& budget,
                             bool summary_pure_dp, bool count_pure_dp) {
  AuditReport rep;
  constexpr double kTol = 1e-12;
  rep.within_applicable = summary_pure_dp && std::isfinite(budget.epsilon_s);
  rep.between_applicable = rep.within_applicable && count_pure_dp &&
                           std::isfinite(budget.epsilon_n);
  rep.within_floor = std::exp(-2.0 * budget.epsilon_s);
  rep.between_floor = std::exp(-(budget.epsilon_s + budget.epsilon_n));
  rep.between_floor_from_one = 0.5 * rep.between_floor;
  if (!rep.within_applicable) {
    rep.note = "floor not applicable: summary mechanism is not pure eps-DP";
    return rep;
  }
  if (!rep.between_applicable) {
    rep.note = "floor not applicable to between moves: n mechanism is not pure eps-DP";
  }
  for (std::int64_t it = 0; it < trace.iterations(); ++it) {
    const double w = trace.within_min_prob[it];
    if (!std::isnan(w)) {
      ++rep.within_checked;
      if (w < rep.within_floor - kTol) {
        rep.violations.push_back({it, true, w, rep.within_floor});
      }
    }
    if (!rep.between_applicable || !trace.between_in_support[it]) continue;
    const double b = trace.between_prob[it];
    if (std::isnan(b)) continue;
    ++rep.between_checked;
    const double floor =
        trace.between_from[it] == 1 ? rep.between_floor_from_one : rep.between_floor;
    if (b < floor - kTol) rep.violations.push_back({it, false, b, floor});
  }
  return rep;
}

double effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / n;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = chain[i] - mean;
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += c[i] * c[i + lag];
    return acc / static_cast<double>(n);
  };
  const double g0 = autocov(0);
  if (g0 <= 0.0) return static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = autocov(2 * k) + autocov(2 * k + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = std::max(1.0, (2.0 * sum - g0) / g0);
  return static_cast<double>(n) / tau;
}

}  // namespace dpsize
