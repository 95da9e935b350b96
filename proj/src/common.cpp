#include "dpsize/common.hpp"

#include <algorithm>
#include <cmath>

namespace dpsize {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidBounds: return "invalid-bounds";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidStatistic: return "invalid-statistic";
    case ErrorKind::kInvalidFloor: return "invalid-floor";
    case ErrorKind::kInvalidBudget: return "invalid-budget";
    case ErrorKind::kInvalidInit: return "invalid-init";
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kNumericBreakdown: return "numeric-breakdown";
    case ErrorKind::kWindowOverflow: return "window-overflow";
    case ErrorKind::kDegenerateLikelihood: return "degenerate-likelihood";
    case ErrorKind::kCapExceeded: return "cap-exceeded";
    case ErrorKind::kRectangleTooSmall: return "rectangle-too-small";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

double uniform_open(Rng& rng) {
  // 53 random bits, shifted by half an ulp so 0 and 1 are excluded.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(Rng& rng) { return rng.normal(); }

double sample_laplace(double scale, Rng& rng) {
  const double u = uniform_open(rng) - 0.5;
  return -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::fabs(u));
}

double sample_gamma(double shape, double rate, Rng& rng) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(rng);
}

double sample_beta(double a, double b, Rng& rng) {
  const double x = sample_gamma(a, 1.0, rng);
  const double y = sample_gamma(b, 1.0, rng);
  return x / (x + y);
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace dpsize
