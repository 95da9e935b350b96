#pragma once

// Config-driven experiment runners. Replicate r at grid point g is seeded
// with derive_seed(master_seed, r, g), so every result is a pure function of
// the config. Grid points are enumerated epsilon_s-major.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dpsize/experiments/config.hpp"
#include "dpsize/models/regression.hpp"

namespace dpsize {

// Runs task(0..count-1) on up to `workers` threads. The first exception
// thrown by a task is rethrown after all workers stop.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& task);

struct SummaryRow {
  double epsilon_s = 0.0;
  double epsilon_n = 0.0;
  int replicates_ok = 0;
  int replicates_failed = 0;
  std::vector<std::string> failures;
  // One value and one Monte Carlo standard error per table column.
  std::vector<double> value;
  std::vector<double> se;
};

struct SummaryTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<SummaryRow> rows;

  const SummaryRow& row(double epsilon_s, double epsilon_n) const;
  double value(double epsilon_s, double epsilon_n, const std::string& column) const;
  double se(double epsilon_s, double epsilon_n, const std::string& column) const;
};

// Columns: epsilon_s, epsilon_n, replicates_ok, replicates_failed, then each
// table column followed by its "_se".
void write_summary_csv(const SummaryTable& table, const std::string& path);

RegressionParams regression_params_from(const RegressionSettings& settings);
RegressionHyper regression_hyper_from(const RegressionSettings& settings);
RegressionData generate_regression_data(const RegressionSettings& settings,
                                        std::int64_t n, std::uint64_t seed);

// Posterior means and variances of every parameter and of n:
// columns "E(name)" and "Var(name)", averaged over replicates. One fixed
// dataset; fresh privacy noise and a fresh chain per replicate.
SummaryTable run_table1(const ExperimentConfig& config);

// Mean and SD across replicates of the MCEM estimate: columns "name" and
// "sd(name)".
SummaryTable run_mcem_table2(const ExperimentConfig& config);

struct NDraw {
  double epsilon_s = 0.0;
  double epsilon_n = 0.0;
  int realization = 0;
  std::int64_t n = 0;
};

struct DirichletStudy {
  // Columns "sd(alpha_j)", "E(alpha_j)", "E(n)", "sd(n)"; epsilon_n = inf rows
  // are the bounded-DP reference chains.
  SummaryTable table;
  std::vector<NDraw> n_draws;  // post-burn-in draws, every 10th iteration
};

// One s per epsilon_s; n_dp_realizations draws of n_dp per (epsilon_s,
// epsilon_n), each with its own chain.
DirichletStudy run_dirichlet_study(const ExperimentConfig& config);

struct CheckRow {
  std::string check;
  std::string setting;
  double observed = 0.0;
  double target = 0.0;
  std::string verdict;  // "pass", "fail" or "info"
};

struct CheckReport {
  std::vector<CheckRow> rows;
  bool all_pass() const;
};

void write_check_csv(const CheckReport& report, const std::string& path);

// Checks: abs_deviation_bound, coupling_bound, tv_privacy_bound,
// convergence (Laplace-sum and KNG) and abc_trend.
CheckReport run_theory_checks(const ExperimentConfig& config);

}  // namespace dpsize
