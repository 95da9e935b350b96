#include "dpsize/models/regression.hpp"

#include <algorithm>
#include <cmath>

namespace dpsize {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& a,
                                        const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumericBreakdown,
                std::string(what) + " is not positive definite");
  }
  return llt;
}

bool spd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || !a.isApprox(a.transpose(), 1e-10)) return false;
  return Eigen::LLT<Eigen::MatrixXd>(a).info() == Eigen::Success;
}

Eigen::VectorXd standard_normal_vector(Eigen::Index k, Rng& rng) {
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z(i) = standard_normal(rng);
  return z;
}

// Draw from N(P^{-1} b, P^{-1}) given the precision P.
Eigen::VectorXd sample_from_precision(const Eigen::MatrixXd& precision,
                                      const Eigen::VectorXd& b, Rng& rng,
                                      const char* what) {
  const auto llt = checked_llt(precision, what);
  const Eigen::VectorXd mean = llt.solve(b);
  const Eigen::VectorXd z = standard_normal_vector(b.size(), rng);
  const Eigen::MatrixXd lt = llt.matrixL().transpose();
  return mean + lt.triangularView<Eigen::Upper>().solve(z);
}

}  // namespace

RegressionHyper RegressionHyper::defaults(int p) {
  RegressionHyper h;
  h.p = p;
  h.m = Eigen::VectorXd::Zero(p + 1);
  h.V = Eigen::MatrixXd::Identity(p + 1, p + 1);
  h.theta0 = Eigen::VectorXd::Zero(p);
  h.Sigma = Eigen::MatrixXd::Identity(p, p);
  h.d = std::max(2.0, static_cast<double>(p));
  h.W = Eigen::MatrixXd::Identity(p, p);
  return h;
}

void RegressionHyper::validate() const {
  if (p < 1) throw Error(ErrorKind::kUnsupported, "need at least one covariate");
  if (!(L < U)) throw Error(ErrorKind::kInvalidBounds, "need L < U");
  if (m.size() != p + 1 || theta0.size() != p) {
    throw Error(ErrorKind::kInvalidConfig, "hyperparameter vector size mismatch");
  }
  if (V.rows() != p + 1 || Sigma.rows() != p || W.rows() != p) {
    throw Error(ErrorKind::kInvalidConfig, "hyperparameter matrix size mismatch");
  }
  if (!spd(V) || !spd(Sigma) || !spd(W)) {
    throw Error(ErrorKind::kInvalidConfig, "V, Sigma and W must be SPD");
  }
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "a and b must be positive");
  }
  if (!(d > p - 1)) throw Error(ErrorKind::kInvalidConfig, "need d > p - 1");
}

RegressionParams regression_truth() {
  RegressionParams t;
  t.beta = Eigen::Vector3d(0.0, -1.0, 1.0);
  t.tau = 1.0;
  t.mu = Eigen::Vector2d(-1.0, 1.0);
  t.Phi = Eigen::MatrixXd::Identity(2, 2);
  return t;
}

Eigen::MatrixXd sample_wishart(double df, const Eigen::MatrixXd& scale,
                               Rng& rng) {
  const Eigen::Index p = scale.rows();
  const auto llt = checked_llt(scale, "Wishart scale");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(sample_gamma((df - static_cast<double>(i)) / 2.0, 0.5, rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = standard_normal(rng);
  }
  const Eigen::MatrixXd la = llt.matrixL() * a;
  Eigen::MatrixXd out = la * la.transpose();
  return 0.5 * (out + out.transpose());
}

RegressionModel::RegressionModel(RegressionHyper hyper, double epsilon_s)
    : hyper_(std::move(hyper)),
      dim_(regression_summary_dim(hyper_.p)),
      noise_(NoiseSpec::from_epsilon(NoiseFamily::kContinuousLaplace,
                                     regression_sensitivity(hyper_.p),
                                     epsilon_s)) {
  hyper_.validate();
  sigma_inv_ = checked_llt(hyper_.Sigma, "Sigma")
                   .solve(Eigen::MatrixXd::Identity(hyper_.p, hyper_.p));
  sigma_inv_theta0_ = sigma_inv_ * hyper_.theta0;
  w_inv_ = checked_llt(hyper_.W, "W")
               .solve(Eigen::MatrixXd::Identity(hyper_.p, hyper_.p));
  vm_ = hyper_.V * hyper_.m;
  mvm_ = hyper_.m.dot(vm_);
}

void RegressionModel::prepare(Params& th) const {
  const auto llt = checked_llt(th.Phi, "Phi");
  const Eigen::MatrixXd lt = llt.matrixL().transpose();
  th.cov_factor = lt.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(hyper_.p, hyper_.p));
}

RegressionModel::Params RegressionModel::sample_prior(Rng& rng) const {
  Params th;
  th.tau = sample_gamma(hyper_.a / 2.0, hyper_.b / 2.0, rng);
  th.beta = sample_from_precision(th.tau * hyper_.V, th.tau * vm_, rng, "tau V");
  th.Phi = sample_wishart(hyper_.d, hyper_.W, rng);
  th.mu = sample_from_precision(sigma_inv_, sigma_inv_theta0_, rng, "Sigma^-1");
  prepare(th);
  return th;
}

void RegressionModel::sample_datum(const Params& th, Rng& rng,
                                   std::span<double> out) const {
  const int p = hyper_.p;
  Eigen::MatrixXd local;
  const Eigen::MatrixXd* f = &th.cov_factor;
  if (th.cov_factor.size() == 0) {
    Params tmp = th;
    prepare(tmp);
    local = tmp.cov_factor;
    f = &local;
  }
  // Small stack buffer; p is bounded by regression_record_statistic.
  double z[64];
  for (int j = 0; j < p; ++j) z[j] = standard_normal(rng);
  double mean_y = th.beta(0);
  for (int j = 0; j < p; ++j) {
    double v = th.mu(j);
    for (int k = j; k < p; ++k) v += (*f)(j, k) * z[k];
    out[j] = v;
    mean_y += th.beta(j + 1) * v;
  }
  out[p] = mean_y + standard_normal(rng) / std::sqrt(th.tau);
}

double RegressionModel::log_datum_density(std::span<const double> rec,
                                          const Params& th) const {
  const int p = hyper_.p;
  const Eigen::Map<const Eigen::VectorXd> x(rec.data(), p);
  const double y = rec[p];
  const auto llt = checked_llt(th.Phi, "Phi");
  const Eigen::VectorXd e = x - th.mu;
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::VectorXd u = l.transpose() * e;
  double log_det = 0.0;
  for (int j = 0; j < p; ++j) log_det += 2.0 * std::log(l(j, j));
  const double lx = 0.5 * log_det - 0.5 * p * kLog2Pi - 0.5 * u.squaredNorm();
  const double r = y - th.beta(0) - th.beta.tail(p).dot(x);
  const double ly = 0.5 * std::log(th.tau) - 0.5 * kLog2Pi - 0.5 * th.tau * r * r;
  return lx + ly;
}

void RegressionModel::record_statistic(std::span<const double> rec,
                                       std::span<double> out) const {
  const int p = hyper_.p;
  regression_record_statistic(rec.first(p), rec[p], hyper_.L, hyper_.U, out);
}

double RegressionModel::summary_loglik(std::span<const double> s,
                                       std::span<const double> t) const {
  const double b = noise_.scale();
  if (b == 0.0) {
    for (int c = 0; c < dim_; ++c) {
      if (s[c] != t[c]) return kNegInf;
    }
    return 0.0;
  }
  double abs_sum = 0.0;
  for (int c = 0; c < dim_; ++c) abs_sum += std::fabs(s[c] - t[c]);
  return -dim_ * std::log(2.0 * b) - abs_sum / b;
}

RegressionModel::Params RegressionModel::update_theta(RecordView x,
                                                      const Params& current,
                                                      Rng& rng) const {
  Suff suff = empty_suff();
  for (std::size_t i = 0; i < x.n; ++i) accumulate(suff, x[i]);
  const int p = hyper_.p;
  const double n = suff.count;
  Params th;

  // mu | Phi, x
  const Eigen::MatrixXd prec_mu = sigma_inv_ + n * current.Phi;
  th.mu = sample_from_precision(prec_mu, sigma_inv_theta0_ + current.Phi * suff.sx,
                                rng, "mu precision");

  // Phi | mu, x
  const Eigen::MatrixXd s_mu = suff.sxx - th.mu * suff.sx.transpose() -
                               suff.sx * th.mu.transpose() +
                               n * th.mu * th.mu.transpose();
  const Eigen::MatrixXd scale_inv = w_inv_ + 0.5 * (s_mu + s_mu.transpose());
  const Eigen::MatrixXd scale =
      checked_llt(scale_inv, "Wishart posterior scale")
          .solve(Eigen::MatrixXd::Identity(p, p));
  th.Phi = sample_wishart(hyper_.d + n, 0.5 * (scale + scale.transpose()), rng);

  // (beta, tau) | x, y
  const Eigen::MatrixXd vn = hyper_.V + suff.ztz;
  const auto vn_llt = checked_llt(vn, "V + Z^T Z");
  const Eigen::VectorXd mn = vn_llt.solve(vm_ + suff.zty);
  const double an = hyper_.a + n;
  const double bn = std::max(hyper_.b + suff.yy + mvm_ - mn.dot(vn * mn), 1e-300);
  th.tau = sample_gamma(an / 2.0, bn / 2.0, rng);
  const Eigen::VectorXd z = standard_normal_vector(p + 1, rng);
  const Eigen::MatrixXd lt = vn_llt.matrixL().transpose();
  th.beta = mn + lt.triangularView<Eigen::Upper>().solve(z) / std::sqrt(th.tau);

  prepare(th);
  return th;
}

std::vector<double> RegressionModel::flatten(const Params& th) const {
  std::vector<double> out(th.beta.data(), th.beta.data() + th.beta.size());
  out.push_back(th.tau);
  for (int j = 0; j < hyper_.p; ++j) out.push_back(th.mu(j));
  for (int j = 0; j < hyper_.p; ++j) {
    for (int k = j; k < hyper_.p; ++k) out.push_back(th.Phi(j, k));
  }
  return out;
}

std::vector<std::string> RegressionModel::param_names() const {
  std::vector<std::string> out;
  for (int j = 0; j <= hyper_.p; ++j) out.push_back("beta" + std::to_string(j));
  out.push_back("tau");
  for (int j = 1; j <= hyper_.p; ++j) out.push_back("mu" + std::to_string(j));
  for (int j = 1; j <= hyper_.p; ++j) {
    for (int k = j; k <= hyper_.p; ++k) {
      out.push_back("Phi" + std::to_string(j) + std::to_string(k));
    }
  }
  return out;
}

Eigen::VectorXd RegressionModel::to_unconstrained(const Params& th) const {
  const int p = hyper_.p;
  const int nl = p * (p + 1) / 2;
  Eigen::VectorXd u(p + 1 + 1 + p + nl);
  u.head(p + 1) = th.beta;
  u(p + 1) = std::log(th.tau);
  u.segment(p + 2, p) = th.mu;
  const Eigen::MatrixXd l = checked_llt(th.Phi, "Phi").matrixL();
  int c = 2 * p + 2;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) u(c++) = i == j ? std::log(l(i, i)) : l(i, j);
  }
  return u;
}

RegressionModel::Params RegressionModel::from_unconstrained(
    const Eigen::VectorXd& u) const {
  const int p = hyper_.p;
  Params th;
  th.beta = u.head(p + 1);
  th.tau = std::exp(u(p + 1));
  th.mu = u.segment(p + 2, p);
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
  int c = 2 * p + 2;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) l(i, j) = i == j ? std::exp(u(c++)) : u(c++);
  }
  th.Phi = l * l.transpose();
  prepare(th);
  return th;
}

void RegressionModel::add_grad_log_datum_density(std::span<const double> rec,
                                                 const Params& th,
                                                 Eigen::VectorXd& g) const {
  const int p = hyper_.p;
  const Eigen::Map<const Eigen::VectorXd> x(rec.data(), p);
  const double y = rec[p];
  const double r = y - th.beta(0) - th.beta.tail(p).dot(x);
  g(0) += th.tau * r;
  g.segment(1, p) += th.tau * r * x;
  g(p + 1) += 0.5 - 0.5 * th.tau * r * r;
  const Eigen::VectorXd e = x - th.mu;
  g.segment(p + 2, p) += th.Phi * e;
  const Eigen::MatrixXd l = checked_llt(th.Phi, "Phi").matrixL();
  const Eigen::VectorXd u = l.transpose() * e;
  int c = 2 * p + 2;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double d = -e(i) * u(j);
      g(c++) += i == j ? l(i, i) * d + 1.0 : d;
    }
  }
}

RegressionModel::Suff RegressionModel::empty_suff() const {
  const int p = hyper_.p;
  Suff s;
  s.ztz = Eigen::MatrixXd::Zero(p + 1, p + 1);
  s.zty = Eigen::VectorXd::Zero(p + 1);
  s.sx = Eigen::VectorXd::Zero(p);
  s.sxx = Eigen::MatrixXd::Zero(p, p);
  return s;
}

void RegressionModel::accumulate(Suff& suff, std::span<const double> rec) const {
  const int p = hyper_.p;
  const double y = rec[p];
  suff.count += 1.0;
  suff.ztz(0, 0) += 1.0;
  suff.zty(0) += y;
  suff.yy += y * y;
  for (int j = 0; j < p; ++j) {
    const double xj = rec[j];
    suff.ztz(0, j + 1) += xj;
    suff.ztz(j + 1, 0) += xj;
    suff.zty(j + 1) += xj * y;
    suff.sx(j) += xj;
    for (int k = 0; k < p; ++k) {
      suff.ztz(j + 1, k + 1) += xj * rec[k];
      suff.sxx(j, k) += xj * rec[k];
    }
  }
}

RegressionModel::Params RegressionModel::closed_form_mstep(const Suff& suff) const {
  const int p = hyper_.p;
  if (suff.count < p + 2) {
    throw Error(ErrorKind::kNumericBreakdown, "too few pooled records for the MLE");
  }
  Params th;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(suff.ztz);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.rcond() < 1e-14) {
    throw Error(ErrorKind::kNumericBreakdown, "pooled design is singular");
  }
  th.beta = ldlt.solve(suff.zty);
  const double rss = suff.yy - 2.0 * th.beta.dot(suff.zty) +
                     th.beta.dot(suff.ztz * th.beta);
  if (!(rss > 0.0)) throw Error(ErrorKind::kNumericBreakdown, "zero residual");
  th.tau = suff.count / rss;
  th.mu = suff.sx / suff.count;
  const Eigen::MatrixXd cov = suff.sxx / suff.count - th.mu * th.mu.transpose();
  th.Phi = checked_llt(cov, "pooled covariate covariance")
               .solve(Eigen::MatrixXd::Identity(p, p));
  th.Phi = 0.5 * (th.Phi + th.Phi.transpose()).eval();
  prepare(th);
  return th;
}

RegressionModel::Params RegressionModel::moment_estimate(std::span<const double> s,
                                                        double n) const {
  const int p = hyper_.p;
  if (static_cast<int>(s.size()) != dim_ || !std::isfinite(n)) {
    throw Error(ErrorKind::kInvalidInput, "moment_estimate needs a full summary and finite n");
  }
  const double nn = std::max(n, static_cast<double>(p + 2));
  // Raw value = c + h * normalized value.
  const double h = 0.5 * (hyper_.U - hyper_.L);
  const double c = 0.5 * (hyper_.U + hyper_.L);
  Eigen::VectorXd mx(p);
  Eigen::MatrixXd mxx(p, p);
  Eigen::VectorXd mxy(p);
  std::size_t k = 0;
  for (int j = 0; j < p; ++j) mx(j) = s[k++] / nn;
  for (int j = 0; j < p; ++j) mxx(j, j) = s[k++] / nn;
  for (int j = 0; j < p; ++j) {
    for (int l = j + 1; l < p; ++l) mxx(j, l) = mxx(l, j) = s[k++] / nn;
  }
  for (int j = 0; j < p; ++j) mxy(j) = s[k++] / nn;
  const double my = s[k++] / nn;
  const double myy = s[k++] / nn;

  Params th;
  th.mu = Eigen::VectorXd::Constant(p, c) + h * mx;
  // Centered moments are invariant to the shift c.
  Eigen::MatrixXd cov = h * h * (mxx - mx * mx.transpose());
  const Eigen::VectorXd cxy = h * h * (mxy - my * mx);
  const double vy = h * h * (myy - my * my);
  // One noise standard deviation of a normalized second-moment average, in raw
  // units. Smaller variances cannot be told apart from the summary noise.
  const double noise_sd = std::sqrt(2.0) * noise_.scale() / nn * h * h;
  const double tiny = std::max(noise_sd, 1e-9 * h * h);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  const Eigen::VectorXd ev =
      eig.eigenvalues().cwiseMax(std::max(1e-3 * eig.eigenvalues().maxCoeff(), tiny));
  cov = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::VectorXd slope = cov.ldlt().solve(cxy);
  th.beta.resize(p + 1);
  th.beta(0) = c + h * my - slope.dot(th.mu);
  th.beta.tail(p) = slope;
  th.tau = 1.0 / std::max(vy - slope.dot(cxy), std::max(1e-3 * vy, tiny));
  th.Phi = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  th.Phi = 0.5 * (th.Phi + th.Phi.transpose()).eval();
  prepare(th);
  return th;
}

double RegressionModel::suff_loglik(const Suff& suff, const Params& th) const {
  const int p = hyper_.p;
  const double n = suff.count;
  const double rss = suff.yy - 2.0 * th.beta.dot(suff.zty) +
                     th.beta.dot(suff.ztz * th.beta);
  const double ly = 0.5 * n * std::log(th.tau) - 0.5 * n * kLog2Pi - 0.5 * th.tau * rss;
  const auto llt = checked_llt(th.Phi, "Phi");
  double log_det = 0.0;
  const Eigen::MatrixXd l = llt.matrixL();
  for (int j = 0; j < p; ++j) log_det += 2.0 * std::log(l(j, j));
  const Eigen::MatrixXd s_mu = suff.sxx - th.mu * suff.sx.transpose() -
                               suff.sx * th.mu.transpose() +
                               n * th.mu * th.mu.transpose();
  const double lx = 0.5 * n * log_det - 0.5 * n * p * kLog2Pi -
                    0.5 * (th.Phi.cwiseProduct(s_mu)).sum();
  return lx + ly;
}

RegressionData generate_regression_data(const RegressionModel& model,
                                        const RegressionParams& truth,
                                        std::int64_t n, Rng& rng) {
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "n must be >= 1");
  RegressionParams th = truth;
  model.prepare(th);
  const int p = model.p();
  RegressionData data{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  std::vector<double> rec(p + 1);
  for (std::int64_t i = 0; i < n; ++i) {
    model.sample_datum(th, rng, rec);
    for (int j = 0; j < p; ++j) data.x(i, j) = rec[j];
    data.y(i) = rec[p];
  }
  return data;
}

}  // namespace dpsize
