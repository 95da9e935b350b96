#pragma once

// The contract a data model satisfies to plug into the sampler and MCEM.
//
// Records are fixed-width rows of doubles stored contiguously. The summary
// mechanism is owned by the model: summary_loglik(s, t) is log g(s, t) where
// t is the running sum of record_statistic over the records.

#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dpsize/common.hpp"

namespace dpsize {

struct RecordView {
  const double* data = nullptr;
  std::size_t width = 0;
  std::size_t n = 0;

  std::span<const double> operator[](std::size_t i) const {
    return {data + i * width, width};
  }
};

template <class M>
concept DataModel = requires(const M& m, const typename M::Params& th,
                             Rng& rng, std::span<double> out,
                             std::span<const double> rec, RecordView view) {
  typename M::Params;
  { M::kExactThetaUpdate } -> std::convertible_to<bool>;
  { m.name() } -> std::convertible_to<std::string_view>;
  { m.record_width() } -> std::convertible_to<std::size_t>;
  { m.summary_dim() } -> std::convertible_to<std::size_t>;
  { m.sample_prior(rng) } -> std::same_as<typename M::Params>;
  m.sample_datum(th, rng, out);
  { m.log_datum_density(rec, th) } -> std::convertible_to<double>;
  m.record_statistic(rec, out);
  { m.summary_loglik(rec, rec) } -> std::convertible_to<double>;
  { m.update_theta(view, th, rng) } -> std::same_as<typename M::Params>;
  { m.flatten(th) } -> std::same_as<std::vector<double>>;
  { m.param_names() } -> std::same_as<std::vector<std::string>>;
  // Privacy of the summary mechanism, for the acceptance-floor audit.
  { m.summary_epsilon() } -> std::convertible_to<double>;
  { m.summary_pure_dp() } -> std::convertible_to<bool>;
};

// Gradient of log p(x | theta) in an unconstrained parameterization.
template <class M>
concept GradientModel =
    DataModel<M> && requires(const M& m, const typename M::Params& th,
                             std::span<const double> rec, Eigen::VectorXd& g,
                             const Eigen::VectorXd& u) {
      { m.to_unconstrained(th) } -> std::same_as<Eigen::VectorXd>;
      { m.from_unconstrained(u) } -> std::same_as<typename M::Params>;
      // Adds the gradient at `rec` to g.
      m.add_grad_log_datum_density(rec, th, g);
    };

// Sufficient statistics with a closed-form complete-data MLE.
template <class M>
concept ClosedFormModel =
    DataModel<M> && requires(const M& m, const typename M::Params& th,
                             typename M::Suff& suff,
                             const typename M::Suff& csuff,
                             std::span<const double> rec) {
      typename M::Suff;
      { m.empty_suff() } -> std::same_as<typename M::Suff>;
      m.accumulate(suff, rec);
      { m.closed_form_mstep(csuff) } -> std::same_as<typename M::Params>;
      // sum_i log p(x_i | theta) over the records folded into csuff.
      { m.suff_loglik(csuff, th) } -> std::convertible_to<double>;
    };

// log p(x | theta) summed over a record view.
template <DataModel M>
double log_data_density(const M& model, RecordView view,
                        const typename M::Params& theta) {
  double acc = 0.0;
  for (std::size_t i = 0; i < view.n; ++i) {
    acc += model.log_datum_density(view[i], theta);
  }
  return acc;
}

}  // namespace dpsize
