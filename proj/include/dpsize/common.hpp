#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dpsize {

enum class ErrorKind {
  kInvalidBounds,
  kInvalidInput,
  kInvalidStatistic,
  kInvalidFloor,
  kInvalidBudget,
  kInvalidInit,
  kInvalidConfig,
  kUnsupported,
  kNumericBreakdown,
  kWindowOverflow,
  kDegenerateLikelihood,
  kCapExceeded,
  kRectangleTooSmall,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// All library failures are reported as this exception; `kind()` identifies
// the failure class so callers can react without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// RNG handle: a 64-bit Mersenne Twister plus a persistent standard-normal
// distribution (so the polar method's spare variate is not discarded).
// A handle is owned by one chain or replicate and never shared across threads.
// Satisfies UniformRandomBitGenerator, so std distributions accept it.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed = 5489u) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Seed for an independent stream, derived by splitmix64 mixing of
// (master, a, b). Used as seed = derive_seed(master_seed, replicate, grid).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0);

// Uniform on the open interval (0, 1); never returns 0 so log(u) is finite.
double uniform_open(Rng& rng);
double standard_normal(Rng& rng);
// Laplace(0, scale) by inverse CDF.
double sample_laplace(double scale, Rng& rng);
double sample_gamma(double shape, double rate, Rng& rng);
double sample_beta(double a, double b, Rng& rng);

// log(sum(exp(v))) with the max factored out; -inf for an all -inf input.
double log_sum_exp(std::span<const double> v);

double normal_cdf(double z);

}  // namespace dpsize
