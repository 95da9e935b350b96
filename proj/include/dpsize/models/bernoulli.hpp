#pragma once

// Bernoulli toy: x_i ~ Bernoulli(theta), theta ~ Beta(a, b), s = sum x_i +
// additive noise. Small enough for exact enumeration.

#include <cstdint>

#include "dpsize/mechanisms.hpp"
#include "dpsize/models/model.hpp"

namespace dpsize {

class BernoulliToy {
 public:
  struct Params {
    double theta = 0.5;
  };
  struct Suff {
    double ones = 0.0;
    double count = 0.0;
  };
  static constexpr bool kExactThetaUpdate = true;

  BernoulliToy(double a, double b, NoiseSpec summary_noise);

  std::string_view name() const { return "bernoulli"; }
  std::size_t record_width() const { return 1; }
  std::size_t summary_dim() const { return 1; }
  double a() const { return a_; }
  double b() const { return b_; }
  const NoiseSpec& summary_noise() const { return noise_; }
  double summary_epsilon() const { return noise_.epsilon(); }
  bool summary_pure_dp() const { return noise_.pure_dp(); }

  Params sample_prior(Rng& rng) const;
  void sample_datum(const Params& th, Rng& rng, std::span<double> out) const;
  double log_datum_density(std::span<const double> rec, const Params& th) const;
  void record_statistic(std::span<const double> rec, std::span<double> out) const {
    out[0] = rec[0];
  }
  double summary_loglik(std::span<const double> s, std::span<const double> t) const {
    return noise_.log_density(s[0] - t[0]);
  }
  // Exact Beta(a + sum x, b + n - sum x) draw.
  Params update_theta(RecordView x, const Params& current, Rng& rng) const;
  std::vector<double> flatten(const Params& th) const { return {th.theta}; }
  std::vector<std::string> param_names() const { return {"theta"}; }

  // Unconstrained coordinate: logit(theta).
  Eigen::VectorXd to_unconstrained(const Params& th) const;
  Params from_unconstrained(const Eigen::VectorXd& u) const;
  void add_grad_log_datum_density(std::span<const double> rec, const Params& th,
                                  Eigen::VectorXd& g) const;

  Suff empty_suff() const { return {}; }
  void accumulate(Suff& suff, std::span<const double> rec) const;
  Params closed_form_mstep(const Suff& suff) const;
  double suff_loglik(const Suff& suff, const Params& th) const;

 private:
  double a_;
  double b_;
  NoiseSpec noise_;
};

}  // namespace dpsize
