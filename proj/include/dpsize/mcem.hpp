#pragma once

// Monte Carlo EM for the private MLE. The E-step is the reversible-jump
// sampler with theta held fixed; the M-step is either the model's closed-form
// complete-data MLE on the pooled draws or a gradient ascent step in the
// model's unconstrained parameterization.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dpsize/rjmcmc.hpp"

namespace dpsize {

enum class MStepMode { kClosedForm, kGradient };

struct LearningRate {
  enum class Kind { kConstant, kDecay };
  Kind kind = Kind::kConstant;
  double tau0 = 1e-3;
  double kappa = 0.0;

  // tau_t = tau0 / (1 + kappa t) for the decay schedule.
  double at(std::int64_t t) const {
    return kind == Kind::kConstant ? tau0 : tau0 / (1.0 + kappa * static_cast<double>(t));
  }
};

struct EmConfig {
  std::int64_t outer_iterations = 50;
  // Post-burn-in draws per E-step and the chain iterations between them.
  std::int64_t m = 200;
  std::int64_t thinning = 10;
  std::int64_t e_burn_in = 200;
  LearningRate schedule;
  MStepMode mode = MStepMode::kClosedForm;
  double tol = 1e-6;
  bool warm_start = true;
  // Leading fraction of outer iterates discarded before averaging theta.
  double burn_in_fraction = 0.3;
  std::uint64_t seed = 1;
  std::int64_t n_max = 0;
  std::int64_t t_refresh_period = 1000;

  // One chain iteration per outer iteration (m = 1, no thinning, warm-started
  // chain), 10,000 outer iterations.
  static EmConfig stochastic(std::int64_t outer_iterations = 10000);
  void validate() const;
};

struct EStepSample {
  std::size_t width = 0;
  std::vector<double> records;          // pooled rows of every draw
  std::vector<std::int64_t> n_per_draw;

  std::size_t draws() const { return n_per_draw.size(); }
  std::size_t total_records() const { return width == 0 ? 0 : records.size() / width; }
  RecordView view() const { return {records.data(), width, total_records()}; }
};

struct EmIteration {
  std::vector<double> theta;  // flattened theta^(t+1)
  double q_before = 0.0;      // Q_m(theta^(t)) on this E-step sample
  double q_after = 0.0;       // Q_m(theta^(t+1))
  double step_norm = 0.0;
  double mean_n = 0.0;
};

template <class Params>
struct EmResult {
  std::vector<std::string> param_names;
  std::vector<EmIteration> trace;
  std::vector<double> theta_hat;  // average of the retained iterates
  Params final_theta{};
  bool converged = false;
};

// Q_m(theta) = (1/m) sum_j sum_i log p(x_i^(j) | theta).
template <DataModel M>
double q_value(const M& model, const EStepSample& sample,
               const typename M::Params& theta) {
  if (sample.draws() == 0) return 0.0;
  return log_data_density(model, sample.view(), theta) /
         static_cast<double>(sample.draws());
}

// Runs `burn_in` iterations and then collects m draws spaced `thinning`
// apart, with theta held at the sampler's current value.
template <DataModel M>
EStepSample e_step(RjmcmcSampler<M>& sampler, std::int64_t m,
                   std::int64_t thinning, std::int64_t burn_in, Rng& rng) {
  EStepSample out;
  out.width = sampler.model().record_width();
  auto advance = [&] {
    sampler.within_model_sweep(rng);
    sampler.between_model_move(rng);
  };
  for (std::int64_t it = 0; it < burn_in; ++it) advance();
  for (std::int64_t j = 0; j < m; ++j) {
    for (std::int64_t k = 0; k < thinning; ++k) advance();
    sampler.check_log_g(j);
    const auto& st = sampler.state();
    out.records.insert(out.records.end(), st.x.begin(),
                       st.x.begin() + static_cast<std::ptrdiff_t>(st.n * st.width));
    out.n_per_draw.push_back(st.n);
  }
  return out;
}

template <ClosedFormModel M>
typename M::Params m_step_closed_form(const M& model, const EStepSample& sample) {
  auto suff = model.empty_suff();
  const auto view = sample.view();
  for (std::size_t i = 0; i < view.n; ++i) model.accumulate(suff, view[i]);
  return model.closed_form_mstep(suff);
}

// theta + tau * sum_j sum_i grad log p(x_i^(j) | theta), in unconstrained
// coordinates.
template <GradientModel M>
typename M::Params m_step_gradient(const M& model,
                                   const typename M::Params& theta,
                                   const EStepSample& sample, double tau) {
  Eigen::VectorXd u = model.to_unconstrained(theta);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(u.size());
  const auto view = sample.view();
  for (std::size_t i = 0; i < view.n; ++i) {
    model.add_grad_log_datum_density(view[i], theta, g);
  }
  if (!g.allFinite()) {
    throw Error(ErrorKind::kNumericBreakdown, "non-finite gradient in the M-step");
  }
  return model.from_unconstrained(u + tau * g);
}

template <DataModel M>
EmResult<typename M::Params> run_mcem(
    const M& model, std::vector<double> s, double n_dp,
    const CountMechanism& count, const EmConfig& config,
    std::optional<typename M::Params> theta0 = std::nullopt) {
  using Params = typename M::Params;
  config.validate();
  SamplerConfig sc;
  sc.iterations = 1;
  sc.burn_in = 0;
  sc.seed = config.seed;
  sc.n_max = config.n_max;
  sc.t_refresh_period = config.t_refresh_period;
  sc.record_acceptance = false;
  sc.update_theta = false;
  RjmcmcSampler<M> sampler(model, std::move(s), n_dp, count, sc);
  Rng rng(config.seed);
  sampler.initialize(rng);
  if (theta0) sampler.set_theta(*theta0);

  EmResult<Params> res;
  res.param_names = model.param_names();
  Params theta = sampler.state().theta;
  int small_steps = 0;
  std::int64_t since_refresh = 0;
  for (std::int64_t t = 0; t < config.outer_iterations; ++t) {
    if (!config.warm_start && t > 0) {
      Rng init_rng(derive_seed(config.seed, static_cast<std::uint64_t>(t), 1));
      sampler.initialize(init_rng);
    }
    sampler.set_theta(theta);
    const std::int64_t burn = (t == 0 || !config.warm_start) ? config.e_burn_in : 0;
    EStepSample sample;
    try {
      sample = e_step(sampler, config.m, config.thinning, burn, rng);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " (outer iteration " +
                                std::to_string(t) + ")");
    }
    since_refresh += burn + config.m * config.thinning;
    if (since_refresh >= config.t_refresh_period) {
      sampler.refresh();
      since_refresh = 0;
    }
    Params next;
    EmIteration rec;
    if (config.mode == MStepMode::kClosedForm) {
      if constexpr (ClosedFormModel<M>) {
        auto suff = model.empty_suff();
        const auto view = sample.view();
        for (std::size_t i = 0; i < view.n; ++i) model.accumulate(suff, view[i]);
        next = model.closed_form_mstep(suff);
        const double m = static_cast<double>(sample.draws());
        rec.q_before = model.suff_loglik(suff, theta) / m;
        rec.q_after = model.suff_loglik(suff, next) / m;
      } else {
        throw Error(ErrorKind::kUnsupported, "model has no closed-form M-step");
      }
    } else {
      if constexpr (GradientModel<M>) {
        next = m_step_gradient(model, theta, sample, config.schedule.at(t));
        rec.q_before = q_value(model, sample, theta);
        rec.q_after = q_value(model, sample, next);
      } else {
        throw Error(ErrorKind::kUnsupported, "model has no gradient");
      }
    }
    const auto a = model.flatten(theta);
    rec.theta = model.flatten(next);
    double sq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      sq += (rec.theta[j] - a[j]) * (rec.theta[j] - a[j]);
    }
    rec.step_norm = std::sqrt(sq);
    double nsum = 0.0;
    for (auto n : sample.n_per_draw) nsum += static_cast<double>(n);
    rec.mean_n = nsum / static_cast<double>(sample.draws());
    res.trace.push_back(std::move(rec));
    theta = next;
    small_steps = res.trace.back().step_norm < config.tol ? small_steps + 1 : 0;
    if (small_steps >= 3) {
      res.converged = true;
      break;
    }
  }
  res.final_theta = theta;
  const std::size_t total = res.trace.size();
  const auto skip = static_cast<std::size_t>(
      std::floor(config.burn_in_fraction * static_cast<double>(total)));
  const std::size_t start = std::min(skip, total - 1);
  res.theta_hat.assign(res.trace.front().theta.size(), 0.0);
  for (std::size_t i = start; i < total; ++i) {
    for (std::size_t j = 0; j < res.theta_hat.size(); ++j) {
      res.theta_hat[j] += res.trace[i].theta[j];
    }
  }
  for (double& v : res.theta_hat) v /= static_cast<double>(total - start);
  return res;
}

}  // namespace dpsize
