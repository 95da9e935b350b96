#pragma once

// Reversible-jump sampler for p(theta, x_{1:n}, n | s, n_dp).
//
// One iteration is a within-model sweep (theta update, then one
// independence proposal per record scored through the summary likelihood
// g(s, t_x)) followed by one birth/death move on n. The running statistic t_x
// makes each record update O(1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dpsize/mechanisms.hpp"
#include "dpsize/models/model.hpp"
#include "dpsize/n_posterior.hpp"

namespace dpsize {

struct SamplerConfig {
  std::int64_t iterations = 10000;
  std::int64_t burn_in = 5000;
  std::uint64_t seed = 1;
  std::int64_t t_refresh_period = 1000;
  // Upper end of the flat prior on n; 0 selects default_n_max(n_dp, eps_n).
  std::int64_t n_max = 0;
  bool record_acceptance = true;
  bool record_theta = true;
  // false holds theta fixed (the MCEM E-step).
  bool update_theta = true;

  void validate() const;
};

template <class Params>
struct LatentState {
  Params theta{};
  // Row-major record storage; rows [0, n) are live, the rest is spare
  // capacity left behind by deaths or reserved for births.
  std::vector<double> x;
  std::size_t width = 0;
  std::int64_t n = 0;
  std::vector<double> t;

  std::int64_t capacity() const {
    return width == 0 ? 0 : static_cast<std::int64_t>(x.size() / width);
  }
  RecordView view() const { return {x.data(), width, static_cast<std::size_t>(n)}; }
  std::span<double> record(std::int64_t i) {
    return {x.data() + static_cast<std::size_t>(i) * width, width};
  }
  std::span<const double> record(std::int64_t i) const {
    return {x.data() + static_cast<std::size_t>(i) * width, width};
  }
};

struct Trace {
  std::string model_name;
  std::vector<std::string> param_names;
  SamplerConfig config;
  double n_dp = 0.0;
  double epsilon_s = 0.0;
  double epsilon_n = 0.0;
  std::string count_family;
  std::int64_t n_max = 0;

  // iterations x param_dim, row-major (empty when record_theta is false).
  std::vector<double> theta;
  std::vector<std::int64_t> n;
  std::vector<std::int32_t> within_accepts;
  std::vector<std::int32_t> within_proposals;
  // Smallest within-move acceptance probability of the sweep (NaN if none).
  std::vector<double> within_min_prob;
  std::vector<std::int8_t> between_direction;
  std::vector<std::int64_t> between_from;
  std::vector<std::uint8_t> between_accepted;
  std::vector<std::uint8_t> between_in_support;
  // Acceptance probability of the between move (NaN when auto-rejected).
  std::vector<double> between_prob;
  std::vector<double> refresh_drift;
  std::int64_t capacity_growths = 0;

  std::size_t param_dim() const { return param_names.size(); }
  std::int64_t iterations() const { return static_cast<std::int64_t>(n.size()); }
  double theta_at(std::int64_t it, std::size_t j) const {
    return theta[static_cast<std::size_t>(it) * param_dim() + j];
  }
  // Post-burn-in summaries.
  std::vector<double> theta_mean() const;
  std::vector<double> theta_variance() const;
  double n_mean() const;
  double n_variance() const;
  double max_refresh_drift() const;
};

struct AuditViolation {
  std::int64_t iteration = 0;
  bool within = true;
  double prob = 0.0;
  double floor = 0.0;
};

struct AuditReport {
  bool within_applicable = false;
  bool between_applicable = false;
  double within_floor = 0.0;
  double between_floor = 0.0;       // n >= 2
  double between_floor_from_one = 0.0;
  std::int64_t within_checked = 0;
  std::int64_t between_checked = 0;
  std::vector<AuditViolation> violations;
  std::string note;

  bool ok() const { return violations.empty(); }
};

// Checks every recorded acceptance probability against the floors
// exp(-2 eps_s) (within) and exp(-(eps_s + eps_n)) (between; half of that for
// the 1 -> 2 move). A floor whose mechanism is not pure eps-DP is reported as
// "floor not applicable" and skipped.
AuditReport acceptance_audit(const Trace& trace, const PrivacyBudget& budget,
                             bool summary_pure_dp, bool count_pure_dp);

// Effective sample size by Geyer's initial positive sequence.
double effective_sample_size(std::span<const double> chain);

// log(num / den) for log-probabilities with a zero-probability current state
// treated as always improvable.
double log_accept_ratio(double log_num, double log_den);

template <DataModel M>
class RjmcmcSampler {
 public:
  using Params = typename M::Params;
  using State = LatentState<Params>;

  struct WithinStats {
    std::int32_t accepts = 0;
    std::int32_t proposals = 0;
    double min_prob = std::numeric_limits<double>::quiet_NaN();
  };
  struct BetweenStats {
    std::int8_t direction = 0;
    std::int64_t from = 0;
    bool in_support = true;
    bool accepted = false;
    double prob = std::numeric_limits<double>::quiet_NaN();
  };

  RjmcmcSampler(const M& model, std::vector<double> s, double n_dp,
                CountMechanism count, SamplerConfig config)
      : model_(model),
        s_(std::move(s)),
        n_dp_(n_dp),
        count_(count),
        config_(config) {
    config_.validate();
    if (s_.size() != model_.summary_dim()) {
      throw Error(ErrorKind::kInvalidInput, "summary dimension mismatch");
    }
    if (!std::isfinite(n_dp_)) {
      throw Error(ErrorKind::kInvalidInput, "n_dp must be finite");
    }
    n_max_ = config_.n_max > 0 ? config_.n_max
                               : default_n_max(n_dp_, count_.epsilon());
    width_ = model_.record_width();
    buf_.resize(width_);
    t_old_.resize(model_.summary_dim());
    t_new_.resize(model_.summary_dim());
    t_star_.resize(model_.summary_dim());
  }

  const M& model() const { return model_; }
  const std::vector<double>& summary() const { return s_; }
  double n_dp() const { return n_dp_; }
  const CountMechanism& count_mechanism() const { return count_; }
  const SamplerConfig& config() const { return config_; }
  std::int64_t n_max() const { return n_max_; }
  const State& state() const { return state_; }
  double log_g() const { return log_g_; }
  std::int64_t capacity_growths() const { return growths_; }

  // theta from the prior, n = clip(max(1, round(n_dp))), x iid from p(x|theta).
  void initialize(Rng& rng) {
    State st;
    st.theta = model_.sample_prior(rng);
    st.width = width_;
    const auto rounded = static_cast<std::int64_t>(std::llround(n_dp_));
    st.n = std::clamp<std::int64_t>(std::max<std::int64_t>(1, rounded), 1, n_max_);
    st.x.resize(static_cast<std::size_t>(initial_capacity(st.n)) * width_);
    for (std::int64_t i = 0; i < st.n; ++i) {
      model_.sample_datum(st.theta, rng, st.record(i));
    }
    adopt(std::move(st));
  }

  // Starts from a caller-provided state; t_x is recomputed from the records.
  void set_state(State st) {
    if (st.n < 1 || st.n > n_max_) {
      throw Error(ErrorKind::kInvalidInit,
                  "initial n = " + std::to_string(st.n) + " outside [1, " +
                      std::to_string(n_max_) + "]");
    }
    if (st.width != width_ || st.capacity() < st.n) {
      throw Error(ErrorKind::kInvalidInit, "record storage does not match n");
    }
    adopt(std::move(st));
  }

  void set_theta(const Params& theta) { state_.theta = theta; }

  WithinStats within_model_sweep(Rng& rng) {
    WithinStats out;
    if (config_.update_theta) {
      state_.theta = model_.update_theta(state_.view(), state_.theta, rng);
    }
    const std::size_t d = s_.size();
    for (std::int64_t i = 0; i < state_.n; ++i) {
      model_.sample_datum(state_.theta, rng, buf_);
      auto rec = state_.record(i);
      model_.record_statistic(rec, t_old_);
      model_.record_statistic(buf_, t_new_);
      for (std::size_t c = 0; c < d; ++c) {
        t_star_[c] = state_.t[c] - t_old_[c] + t_new_[c];
      }
      const double lg_star = model_.summary_loglik(s_, t_star_);
      const double la = log_accept_ratio(lg_star, log_g_);
      const double u = uniform_open(rng);
      ++out.proposals;
      if (config_.record_acceptance) {
        const double prob = la >= 0.0 ? 1.0 : std::exp(la);
        if (!(prob >= out.min_prob)) out.min_prob = prob;
      }
      if (std::log(u) < la) {
        std::copy(buf_.begin(), buf_.end(), rec.begin());
        state_.t.swap(t_star_);
        log_g_ = lg_star;
        ++out.accepts;
      }
    }
    return out;
  }

  BetweenStats between_model_move(Rng& rng) {
    BetweenStats out;
    const std::int64_t n = state_.n;
    out.from = n;
    const double u_dir = uniform_open(rng);
    std::int64_t to;
    double log_q = 0.0;  // log q(n | n*) - log q(n* | n)
    if (n == 1) {
      to = 2;
      log_q = -std::log(2.0);
    } else {
      to = u_dir < 0.5 ? n - 1 : n + 1;
      if (n == 2 && to == 1) log_q = std::log(2.0);
    }
    out.direction = static_cast<std::int8_t>(to > n ? 1 : -1);
    const std::size_t d = s_.size();
    if (to > n) {
      // The birth datum is drawn even when n* is out of support so the
      // stream of uniforms stays aligned across budgets.
      model_.sample_datum(state_.theta, rng, buf_);
      model_.record_statistic(buf_, t_new_);
      for (std::size_t c = 0; c < d; ++c) t_star_[c] = state_.t[c] + t_new_[c];
    } else {
      model_.record_statistic(state_.record(n - 1), t_old_);
      for (std::size_t c = 0; c < d; ++c) t_star_[c] = state_.t[c] - t_old_[c];
    }
    const double u_acc = uniform_open(rng);
    if (to < 1 || to > n_max_) {
      out.in_support = false;
      return out;
    }
    const double lg_star = model_.summary_loglik(s_, t_star_);
    const double num = lg_star + count_.log_density(n_dp_, to);
    const double den = log_g_ + count_.log_density(n_dp_, n);
    const double la = log_accept_ratio(num, den) + log_q;
    out.prob = la >= 0.0 ? 1.0 : std::exp(la);
    if (std::log(u_acc) < la) {
      if (to > n) {
        if (n + 1 > state_.capacity()) grow();
        auto rec = state_.record(n);
        std::copy(buf_.begin(), buf_.end(), rec.begin());
      }
      state_.n = to;
      state_.t.swap(t_star_);
      log_g_ = lg_star;
      out.accepted = true;
    }
    return out;
  }

  // Recomputes t_x from scratch and returns the l-inf drift of the running sum.
  double refresh() {
    std::vector<double> fresh = fresh_statistic(state_);
    double drift = 0.0;
    for (std::size_t c = 0; c < fresh.size(); ++c) {
      drift = std::max(drift, std::fabs(fresh[c] - state_.t[c]));
    }
    state_.t = std::move(fresh);
    log_g_ = model_.summary_loglik(s_, state_.t);
    check_log_g(-1);
    return drift;
  }

  void check_log_g(std::int64_t iteration) const {
    if (std::isnan(log_g_) || log_g_ == kInf) {
      throw Error(ErrorKind::kNumericBreakdown,
                  "summary log-likelihood is not finite at iteration " +
                      std::to_string(iteration));
    }
  }

 private:
  std::int64_t initial_capacity(std::int64_t n) const {
    const auto c = static_cast<std::int64_t>(std::ceil(std::max(n_dp_, 1.0)));
    return std::max<std::int64_t>(2 * std::max<std::int64_t>(1, c), n);
  }

  void grow() {
    state_.x.resize(state_.x.size() * 2);
    ++growths_;
  }

  std::vector<double> fresh_statistic(const State& st) const {
    std::vector<double> t(s_.size(), 0.0), ti(s_.size());
    for (std::int64_t i = 0; i < st.n; ++i) {
      model_.record_statistic(st.record(i), ti);
      for (std::size_t c = 0; c < t.size(); ++c) t[c] += ti[c];
    }
    return t;
  }

  void adopt(State st) {
    st.t = fresh_statistic(st);
    state_ = std::move(st);
    log_g_ = model_.summary_loglik(s_, state_.t);
    check_log_g(0);
  }

  const M& model_;
  std::vector<double> s_;
  double n_dp_;
  CountMechanism count_;
  SamplerConfig config_;
  std::int64_t n_max_ = 0;
  std::size_t width_ = 0;
  State state_;
  double log_g_ = 0.0;
  std::int64_t growths_ = 0;
  std::vector<double> buf_, t_old_, t_new_, t_star_;
};

template <DataModel M>
using ChainObserver =
    std::function<void(std::int64_t, const LatentState<typename M::Params>&)>;

// Runs one chain. The observer (optional) sees the state after every
// iteration. Deterministic given config.seed.
template <DataModel M>
Trace run_chain(const M& model, std::vector<double> s, double n_dp,
                const CountMechanism& count, const SamplerConfig& config,
                std::optional<LatentState<typename M::Params>> initial = std::nullopt,
                const ChainObserver<M>& observer = {}) {
  RjmcmcSampler<M> sampler(model, std::move(s), n_dp, count, config);
  Rng rng(config.seed);
  if (initial) {
    sampler.set_state(std::move(*initial));
  } else {
    sampler.initialize(rng);
  }
  Trace tr;
  tr.model_name = std::string(model.name());
  tr.param_names = model.param_names();
  tr.config = config;
  tr.n_dp = n_dp;
  tr.epsilon_s = model.summary_epsilon();
  tr.epsilon_n = count.epsilon();
  tr.count_family = std::string(to_string(count.family()));
  tr.n_max = sampler.n_max();
  const auto iters = static_cast<std::size_t>(config.iterations);
  if (config.record_theta) tr.theta.reserve(iters * tr.param_dim());
  tr.n.reserve(iters);
  tr.within_accepts.reserve(iters);
  tr.within_proposals.reserve(iters);
  tr.within_min_prob.reserve(iters);
  tr.between_direction.reserve(iters);
  tr.between_from.reserve(iters);
  tr.between_accepted.reserve(iters);
  tr.between_in_support.reserve(iters);
  tr.between_prob.reserve(iters);
  for (std::int64_t it = 0; it < config.iterations; ++it) {
    const auto w = sampler.within_model_sweep(rng);
    const auto b = sampler.between_model_move(rng);
    if ((it + 1) % config.t_refresh_period == 0) {
      tr.refresh_drift.push_back(sampler.refresh());
    }
    sampler.check_log_g(it);
    const auto& st = sampler.state();
    if (config.record_theta) {
      const auto flat = model.flatten(st.theta);
      tr.theta.insert(tr.theta.end(), flat.begin(), flat.end());
    }
    tr.n.push_back(st.n);
    tr.within_accepts.push_back(w.accepts);
    tr.within_proposals.push_back(w.proposals);
    tr.within_min_prob.push_back(w.min_prob);
    tr.between_direction.push_back(b.direction);
    tr.between_from.push_back(b.from);
    tr.between_accepted.push_back(b.accepted ? 1 : 0);
    tr.between_in_support.push_back(b.in_support ? 1 : 0);
    tr.between_prob.push_back(b.prob);
    if (observer) observer(it, st);
  }
  tr.capacity_growths = sampler.capacity_growths();
  return tr;
}

}  // namespace dpsize
