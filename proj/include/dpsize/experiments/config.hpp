#pragma once

// Experiment configuration. Files are JSON; every key is optional and falls
// back to the per-kind default, and unknown keys are rejected.
// Infinite budgets are written as the string "inf".

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dpsize/mechanisms.hpp"

namespace dpsize {

enum class ExperimentKind { kTable1, kMcemTable2, kDirichlet, kTheoryCheck, kCustom };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

struct RegressionSettings {
  double lo = -5.0;
  double hi = 5.0;
  std::vector<double> beta{0.0, -1.0, 1.0};
  double tau = 1.0;
  std::vector<double> mu{-1.0, 1.0};
  // Row-major p x p precision of the covariates.
  std::vector<double> phi{1.0, 0.0, 0.0, 1.0};

  bool operator==(const RegressionSettings&) const = default;
};

struct DirichletSettings {
  std::vector<double> alpha_true{4.0, 0.5, 5.5};
  double floor_a = 0.0006;
  double prior_shape = 1.0;
  double prior_rate = 0.1;
  double step = 0.15;
  int n_dp_realizations = 10;

  bool operator==(const DirichletSettings&) const = default;
};

struct SamplerSettings {
  std::int64_t iterations = 10000;
  std::int64_t burn_in = 5000;
  std::int64_t t_refresh_period = 1000;
  std::int64_t n_max = 0;
  // Write one trace CSV (plus JSON sidecar) per chain.
  bool write_traces = false;

  bool operator==(const SamplerSettings&) const = default;
};

struct EmSettings {
  std::int64_t outer_iterations = 50;
  std::int64_t m = 200;
  std::int64_t thinning = 10;
  std::int64_t e_burn_in = 200;
  std::string mode = "closed_form";  // or "gradient"
  double tau0 = 1e-3;
  double kappa = 0.0;
  double tol = 0.0;
  double burn_in_fraction = 0.3;
  bool warm_start = true;

  bool operator==(const EmSettings&) const = default;
};

struct TheorySettings {
  std::vector<double> lemma_epsilons{0.5, 1.0, 2.0};
  std::vector<std::int64_t> lemma_n0{50,  60,  70,  80,  90,  100, 150,
                                     200, 250, 300, 400, 500, 600, 700,
                                     800, 900, 1000, 2000, 5000, 10000};
  int prop41_configs = 20;
  std::vector<std::int64_t> convergence_n0{100, 400, 1600};
  int convergence_replicates = 10;
  std::int64_t convergence_samples = 1000000;
  double convergence_theta = 0.9;
  std::vector<std::int64_t> theorem42_n0{20, 50, 200};
  std::vector<double> abc_epsilon_n{0.5, 1.0, 2.0, 4.0};
  std::int64_t abc_n0 = 50;
  // Rectangle half-width in units of sqrt(n0).
  double abc_half_width = 1.0;
  int abc_replicates = 5;
  std::int64_t abc_accepted = 20000;

  bool operator==(const TheorySettings&) const = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kTable1;
  std::string model = "regression";
  RegressionSettings regression;
  DirichletSettings dirichlet;
  std::int64_t n_true = 1000;
  std::vector<double> epsilon_s{0.1, 1.0};
  std::vector<double> epsilon_n{0.001, 0.01, 0.1, 1.0, 10.0, kInf};
  NoiseFamily count_family = NoiseFamily::kContinuousLaplace;
  int replicates = 20;
  SamplerSettings sampler;
  EmSettings em;
  TheorySettings theory;
  std::uint64_t master_seed = 20240601;
  std::string output_dir = "results";
  int workers = 1;

  static ExperimentConfig defaults(ExperimentKind kind);
  void validate() const;
  // n = 200, 3 replicates and shorter chains.
  void apply_smoke();

  bool operator==(const ExperimentConfig&) const = default;
};

// `kind` must be present in the text; other keys default per kind.
ExperimentConfig parse_config(std::string_view json_text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

}  // namespace dpsize
