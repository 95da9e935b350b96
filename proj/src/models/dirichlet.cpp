#include "dpsize/models/dirichlet.hpp"

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

namespace dpsize {

namespace {

// log of a Gamma(shape, 1) draw; stable for small shapes.
double log_gamma_draw(double shape, Rng& rng) {
  if (shape >= 1.0) return std::log(sample_gamma(shape, 1.0, rng));
  return std::log(sample_gamma(shape + 1.0, 1.0, rng)) +
         std::log(uniform_open(rng)) / shape;
}

void sample_log_dirichlet(const std::array<double, 3>& alpha, Rng& rng,
                          std::span<double> out) {
  double lg[3];
  for (int j = 0; j < 3; ++j) lg[j] = log_gamma_draw(alpha[j], rng);
  const double z = log_sum_exp(std::span<const double>(lg, 3));
  for (int j = 0; j < 3; ++j) out[j] = lg[j] - z;
}

}  // namespace

DirichletModel::DirichletModel(DirichletHyper hyper, double epsilon_s)
    : hyper_(hyper),
      log_floor_(0.0),
      noise_(NoiseSpec::from_epsilon(
          NoiseFamily::kContinuousLaplace,
          hyper.floor_a > 0.0 && hyper.floor_a < 1.0 ? -3.0 * std::log(hyper.floor_a)
                                                     : 1.0,
          epsilon_s)) {
  if (!(hyper_.floor_a > 0.0 && hyper_.floor_a < 1.0)) {
    throw Error(ErrorKind::kInvalidFloor, "floor a must lie in (0, 1)");
  }
  if (!(hyper_.prior_shape > 0.0) || !(hyper_.prior_rate > 0.0) ||
      !(hyper_.step >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "invalid Dirichlet hyperparameters");
  }
  log_floor_ = std::log(hyper_.floor_a);
}

DirichletModel::Params DirichletModel::sample_prior(Rng& rng) const {
  Params th;
  for (double& a : th.alpha) a = sample_gamma(hyper_.prior_shape, hyper_.prior_rate, rng);
  return th;
}

void DirichletModel::sample_datum(const Params& th, Rng& rng,
                                  std::span<double> out) const {
  sample_log_dirichlet(th.alpha, rng, out);
}

double DirichletModel::log_datum_density(std::span<const double> rec,
                                         const Params& th) const {
  double total = 0.0, out = 0.0;
  for (int j = 0; j < 3; ++j) {
    total += th.alpha[j];
    out += (th.alpha[j] - 1.0) * rec[j] - std::lgamma(th.alpha[j]);
  }
  return out + std::lgamma(total);
}

void DirichletModel::record_statistic(std::span<const double> rec,
                                      std::span<double> out) const {
  for (int j = 0; j < 3; ++j) out[j] = std::max(rec[j], log_floor_);
}

double DirichletModel::summary_loglik(std::span<const double> s,
                                      std::span<const double> t) const {
  double out = 0.0;
  for (int j = 0; j < 3; ++j) out += noise_.log_density(s[j] - t[j]);
  return out;
}

double DirichletModel::log_target(const std::array<double, 3>& log_alpha,
                                  const std::array<double, 3>& sum_log_x,
                                  double n) const {
  double total = 0.0, out = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double a = std::exp(log_alpha[j]);
    total += a;
    out += (a - 1.0) * sum_log_x[j] - n * std::lgamma(a) +
           hyper_.prior_shape * log_alpha[j] - hyper_.prior_rate * a;
  }
  return out + n * std::lgamma(total);
}

DirichletModel::Params DirichletModel::update_theta(RecordView x,
                                                    const Params& current,
                                                    Rng& rng) const {
  std::array<double, 3> sum_log_x{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < x.n; ++i) {
    for (int j = 0; j < 3; ++j) sum_log_x[j] += x[i][j];
  }
  const double n = static_cast<double>(x.n);
  std::array<double, 3> la;
  for (int j = 0; j < 3; ++j) la[j] = std::log(current.alpha[j]);
  double cur = log_target(la, sum_log_x, n);
  for (int j = 0; j < 3; ++j) {
    const double z = standard_normal(rng);
    const double u = uniform_open(rng);
    std::array<double, 3> prop = la;
    prop[j] += hyper_.step * z;
    const double next = log_target(prop, sum_log_x, n);
    if (std::log(u) < next - cur) {
      la = prop;
      cur = next;
    }
  }
  Params out;
  for (int j = 0; j < 3; ++j) out.alpha[j] = std::exp(la[j]);
  return out;
}

Eigen::VectorXd DirichletModel::to_unconstrained(const Params& th) const {
  return Eigen::Vector3d(std::log(th.alpha[0]), std::log(th.alpha[1]),
                         std::log(th.alpha[2]));
}

DirichletModel::Params DirichletModel::from_unconstrained(
    const Eigen::VectorXd& u) const {
  Params th;
  for (int j = 0; j < 3; ++j) th.alpha[j] = std::exp(u(j));
  return th;
}

void DirichletModel::add_grad_log_datum_density(std::span<const double> rec,
                                                const Params& th,
                                                Eigen::VectorXd& g) const {
  const double psi_total =
      boost::math::digamma(th.alpha[0] + th.alpha[1] + th.alpha[2]);
  for (int j = 0; j < 3; ++j) {
    g(j) += th.alpha[j] *
            (psi_total - boost::math::digamma(th.alpha[j]) + rec[j]);
  }
}

Eigen::MatrixXd generate_dirichlet_data(const DirichletParams& th,
                                        std::int64_t n, Rng& rng) {
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "n must be >= 1");
  Eigen::MatrixXd out(n, 3);
  double lx[3];
  for (std::int64_t i = 0; i < n; ++i) {
    sample_log_dirichlet(th.alpha, rng, std::span<double>(lx, 3));
    // Normalize in probability space so the row sums to 1 to rounding.
    double total = 0.0;
    for (int j = 0; j < 3; ++j) total += std::exp(lx[j]);
    for (int j = 0; j < 3; ++j) out(i, j) = std::exp(lx[j]) / total;
  }
  return out;
}

}  // namespace dpsize
