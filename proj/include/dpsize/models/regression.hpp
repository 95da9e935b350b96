#pragma once

// Bayesian linear regression with random Gaussian covariates:
//   y | x ~ N((1, x) beta, 1/tau),  x ~ N_p(mu, Phi^{-1}),
//   beta | tau ~ N(m, (tau V)^{-1}), tau ~ Gamma(a/2, b/2) (rate),
//   Phi ~ Wishart_p(d, W), mu ~ N(theta0, Sigma).
// Records are [x_1, ..., x_p, y]. Summaries are computed on clamped data while
// the data model is the unclamped Gaussian.

#include <cstdint>

#include "dpsize/mechanisms.hpp"
#include "dpsize/models/model.hpp"

namespace dpsize {

struct RegressionHyper {
  int p = 2;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(3, 3);
  double a = 2.0;
  double b = 2.0;
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd Sigma = Eigen::MatrixXd::Identity(2, 2);
  double d = 2.0;
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(2, 2);
  double L = -5.0;
  double U = 5.0;

  // Defaults above with every vector and matrix resized to p.
  static RegressionHyper defaults(int p);
  void validate() const;
};

struct RegressionParams {
  Eigen::VectorXd beta;
  double tau = 1.0;
  Eigen::VectorXd mu;
  Eigen::MatrixXd Phi;
  // Optional cache of Phi^{-1/2} (upper factor) used by sample_datum; filled
  // by the model for every Params it produces. Empty means "recompute".
  Eigen::MatrixXd cov_factor;
};

// Truth used for simulated data: beta = (0, -1, 1), tau = 1, mu = (-1, 1),
// Phi = I.
RegressionParams regression_truth();

// Bartlett-decomposition draw from Wishart_p(df, scale); mean df * scale.
Eigen::MatrixXd sample_wishart(double df, const Eigen::MatrixXd& scale, Rng& rng);

class RegressionModel {
 public:
  using Params = RegressionParams;
  struct Suff {
    double count = 0.0;
    Eigen::MatrixXd ztz;  // sum z z^T with z = (1, x)
    Eigen::VectorXd zty;
    double yy = 0.0;
    Eigen::VectorXd sx;
    Eigen::MatrixXd sxx;
  };
  static constexpr bool kExactThetaUpdate = true;

  RegressionModel(RegressionHyper hyper, double epsilon_s);

  std::string_view name() const { return "regression"; }
  int p() const { return hyper_.p; }
  const RegressionHyper& hyper() const { return hyper_; }
  std::size_t record_width() const { return static_cast<std::size_t>(hyper_.p) + 1; }
  std::size_t summary_dim() const { return static_cast<std::size_t>(dim_); }
  const NoiseSpec& summary_noise() const { return noise_; }
  double summary_epsilon() const { return noise_.epsilon(); }
  bool summary_pure_dp() const { return noise_.pure_dp(); }

  Params sample_prior(Rng& rng) const;
  void sample_datum(const Params& th, Rng& rng, std::span<double> out) const;
  double log_datum_density(std::span<const double> rec, const Params& th) const;
  void record_statistic(std::span<const double> rec, std::span<double> out) const;
  double summary_loglik(std::span<const double> s, std::span<const double> t) const;
  // Blocked exact conditional draws: (mu | Phi), (Phi | mu), then (beta, tau).
  Params update_theta(RecordView x, const Params& current, Rng& rng) const;
  std::vector<double> flatten(const Params& th) const;
  std::vector<std::string> param_names() const;

  // Fills th.cov_factor; call after editing Phi by hand.
  void prepare(Params& th) const;

  // Unconstrained: [beta, log tau, mu, vech(L)] with Phi = L L^T and the
  // diagonal of L stored on the log scale.
  Eigen::VectorXd to_unconstrained(const Params& th) const;
  Params from_unconstrained(const Eigen::VectorXd& u) const;
  void add_grad_log_datum_density(std::span<const double> rec, const Params& th,
                                  Eigen::VectorXd& g) const;

  Suff empty_suff() const;
  void accumulate(Suff& suff, std::span<const double> rec) const;
  // Non-private MLE: pooled OLS, tau = N / RSS, Gaussian covariate MLE.
  Params closed_form_mstep(const Suff& suff) const;
  // Plug-in start for MCEM: reads the noisy summary as exact clamped sums over
  // n records and solves the moment equations. Covariance eigenvalues and the
  // residual variance are floored at one summary-noise standard deviation, so
  // the result is always a valid Params.
  Params moment_estimate(std::span<const double> s, double n) const;
  double suff_loglik(const Suff& suff, const Params& th) const;

 private:
  RegressionHyper hyper_;
  int dim_;
  NoiseSpec noise_;
  Eigen::MatrixXd sigma_inv_;
  Eigen::VectorXd sigma_inv_theta0_;
  Eigen::MatrixXd w_inv_;
  Eigen::VectorXd vm_;
  double mvm_;
};

struct RegressionData {
  Eigen::MatrixXd x;  // n x p
  Eigen::VectorXd y;
};

RegressionData generate_regression_data(const RegressionModel& model,
                                        const RegressionParams& truth,
                                        std::int64_t n, Rng& rng);

}  // namespace dpsize
