#pragma once

// Dirichlet model for 3-part compositions: x_i ~ Dirichlet(alpha),
// alpha_j ~ Gamma(shape, rate) with defaults (1, 0.1). The summary is the sum
// of clamped log-proportions plus Laplace(-3 log(a) / eps_s) noise per cell.
//
// Records store log-proportions [log x_1, log x_2, log x_3], which keeps tiny
// proportions representable.

#include <array>
#include <cstdint>

#include "dpsize/mechanisms.hpp"
#include "dpsize/models/model.hpp"

namespace dpsize {

struct DirichletHyper {
  double prior_shape = 1.0;
  double prior_rate = 0.1;
  double floor_a = 0.0006;
  double step = 0.15;  // random-walk scale on log alpha
};

struct DirichletParams {
  std::array<double, 3> alpha{1.0, 1.0, 1.0};
};

class DirichletModel {
 public:
  using Params = DirichletParams;
  static constexpr bool kExactThetaUpdate = false;

  DirichletModel(DirichletHyper hyper, double epsilon_s);

  std::string_view name() const { return "dirichlet"; }
  const DirichletHyper& hyper() const { return hyper_; }
  std::size_t record_width() const { return 3; }
  std::size_t summary_dim() const { return 3; }
  const NoiseSpec& summary_noise() const { return noise_; }
  double summary_epsilon() const { return noise_.epsilon(); }
  bool summary_pure_dp() const { return noise_.pure_dp(); }

  Params sample_prior(Rng& rng) const;
  void sample_datum(const Params& th, Rng& rng, std::span<double> out) const;
  double log_datum_density(std::span<const double> rec, const Params& th) const;
  void record_statistic(std::span<const double> rec, std::span<double> out) const;
  double summary_loglik(std::span<const double> s, std::span<const double> t) const;
  // One componentwise random-walk Metropolis sweep on log alpha, invariant
  // for p(alpha | x).
  Params update_theta(RecordView x, const Params& current, Rng& rng) const;
  std::vector<double> flatten(const Params& th) const {
    return {th.alpha[0], th.alpha[1], th.alpha[2]};
  }
  std::vector<std::string> param_names() const {
    return {"alpha1", "alpha2", "alpha3"};
  }

  // log p(alpha | sum log x, n) up to a constant, as a function of log alpha.
  double log_target(const std::array<double, 3>& log_alpha,
                    const std::array<double, 3>& sum_log_x, double n) const;

  // Unconstrained coordinate: log alpha.
  Eigen::VectorXd to_unconstrained(const Params& th) const;
  Params from_unconstrained(const Eigen::VectorXd& u) const;
  void add_grad_log_datum_density(std::span<const double> rec, const Params& th,
                                  Eigen::VectorXd& g) const;

 private:
  DirichletHyper hyper_;
  double log_floor_;
  NoiseSpec noise_;
};

// n x 3 matrix of proportions drawn from Dirichlet(alpha).
Eigen::MatrixXd generate_dirichlet_data(const DirichletParams& th,
                                        std::int64_t n, Rng& rng);

}  // namespace dpsize
