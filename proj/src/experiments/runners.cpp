#include "dpsize/experiments/runners.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "dpsize/experiments/csv.hpp"
#include "dpsize/mcem.hpp"
#include "dpsize/models/dirichlet.hpp"
#include "dpsize/oracle.hpp"
#include "dpsize/rjmcmc.hpp"

namespace dpsize {

namespace {

constexpr std::uint64_t kDataStream = ~std::uint64_t{0};

struct Cell {
  double epsilon_s;
  double epsilon_n;
};

std::vector<Cell> grid_of(const ExperimentConfig& c) {
  std::vector<Cell> g;
  for (double es : c.epsilon_s) {
    for (double en : c.epsilon_n) g.push_back({es, en});
  }
  return g;
}

struct RepResult {
  bool ok = false;
  std::string error;
  std::vector<double> values;
};

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Mean and standard error of each column over the successful replicates.
SummaryRow aggregate(const Cell& cell, const std::vector<RepResult>& reps,
                     std::size_t columns) {
  SummaryRow row;
  row.epsilon_s = cell.epsilon_s;
  row.epsilon_n = cell.epsilon_n;
  row.value.assign(columns, 0.0);
  row.se.assign(columns, 0.0);
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (reps[r].ok) {
      ++row.replicates_ok;
    } else {
      ++row.replicates_failed;
      row.failures.push_back("replicate " + std::to_string(r) + ": " + reps[r].error);
    }
  }
  if (row.replicates_ok == 0) {
    row.value.assign(columns, std::nan(""));
    row.se.assign(columns, std::nan(""));
    return row;
  }
  const double k = row.replicates_ok;
  for (std::size_t j = 0; j < columns; ++j) {
    double m = 0.0;
    for (const auto& rr : reps) {
      if (rr.ok) m += rr.values[j];
    }
    m /= k;
    double ss = 0.0;
    for (const auto& rr : reps) {
      if (rr.ok) ss += (rr.values[j] - m) * (rr.values[j] - m);
    }
    row.value[j] = m;
    row.se[j] = k > 1 ? std::sqrt(ss / (k - 1) / k) : 0.0;
  }
  return row;
}

std::string trace_stem(const std::string& dir, const std::string& name,
                       std::size_t g, std::size_t r) {
  return (std::filesystem::path(dir) / "traces" /
          (name + "_g" + std::to_string(g) + "_r" + std::to_string(r)))
      .string();
}

void maybe_write_trace(const ExperimentConfig& c, const Trace& tr,
                       const std::string& name, std::size_t g, std::size_t r) {
  if (!c.sampler.write_traces || c.output_dir.empty()) return;
  const auto stem = trace_stem(c.output_dir, name, g, r);
  write_trace_csv(tr, stem + ".csv");
  write_text(stem + ".json", trace_sidecar_json(tr));
}

void prepare_output(const ExperimentConfig& c) {
  if (c.output_dir.empty()) return;
  ensure_output_dir(c.output_dir);
  if (c.sampler.write_traces) {
    ensure_output_dir((std::filesystem::path(c.output_dir) / "traces").string());
  }
}

void write_outputs(const ExperimentConfig& c, const SummaryTable& t) {
  if (c.output_dir.empty()) return;
  const auto base = std::filesystem::path(c.output_dir) / t.name;
  write_summary_csv(t, base.string() + ".csv");
  write_text(base.string() + ".config.json", serialize_config(c));
}

SamplerConfig sampler_config(const ExperimentConfig& c, std::uint64_t seed) {
  SamplerConfig sc;
  sc.iterations = c.sampler.iterations;
  sc.burn_in = c.sampler.burn_in;
  sc.t_refresh_period = c.sampler.t_refresh_period;
  sc.n_max = c.sampler.n_max;
  sc.seed = seed;
  sc.record_acceptance = c.sampler.write_traces;
  return sc;
}

void require_model(const ExperimentConfig& c, const char* model) {
  if (c.model != model) {
    throw Error(ErrorKind::kInvalidConfig,
                std::string(to_string(c.kind)) + " runs need model \"" + model + "\"");
  }
}

}  // namespace

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& task) {
  const auto nthreads = static_cast<std::size_t>(std::max(1, workers));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  if (nthreads == 1 || count <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(nthreads, count); ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first) std::rethrow_exception(first);
}

const SummaryRow& SummaryTable::row(double epsilon_s, double epsilon_n) const {
  for (const auto& r : rows) {
    if (r.epsilon_s == epsilon_s && r.epsilon_n == epsilon_n) return r;
  }
  throw Error(ErrorKind::kInvalidInput, "no row for the requested budget");
}

double SummaryTable::value(double epsilon_s, double epsilon_n,
                           const std::string& column) const {
  const auto& r = row(epsilon_s, epsilon_n);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == column) return r.value[j];
  }
  throw Error(ErrorKind::kInvalidInput, "no column " + column);
}

double SummaryTable::se(double epsilon_s, double epsilon_n,
                        const std::string& column) const {
  const auto& r = row(epsilon_s, epsilon_n);
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == column) return r.se[j];
  }
  throw Error(ErrorKind::kInvalidInput, "no column " + column);
}

void write_summary_csv(const SummaryTable& table, const std::string& path) {
  std::vector<std::string> header{"epsilon_s", "epsilon_n", "replicates_ok",
                                  "replicates_failed"};
  for (const auto& c : table.columns) {
    header.push_back(c);
    header.push_back(c + "_se");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& r : table.rows) {
    std::vector<double> v{r.epsilon_s, r.epsilon_n, static_cast<double>(r.replicates_ok),
                          static_cast<double>(r.replicates_failed)};
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      v.push_back(r.value[j]);
      v.push_back(r.se[j]);
    }
    rows.push_back(std::move(v));
  }
  write_csv(path, header, rows);
}

RegressionParams regression_params_from(const RegressionSettings& s) {
  const auto p = static_cast<Eigen::Index>(s.mu.size());
  RegressionParams th;
  th.beta = Eigen::Map<const Eigen::VectorXd>(s.beta.data(), p + 1);
  th.tau = s.tau;
  th.mu = Eigen::Map<const Eigen::VectorXd>(s.mu.data(), p);
  th.Phi = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(s.phi.data(), p, p);
  return th;
}

RegressionHyper regression_hyper_from(const RegressionSettings& s) {
  auto h = RegressionHyper::defaults(static_cast<int>(s.mu.size()));
  h.L = s.lo;
  h.U = s.hi;
  return h;
}

RegressionData generate_regression_data(const RegressionSettings& settings,
                                        std::int64_t n, std::uint64_t seed) {
  const RegressionModel model(regression_hyper_from(settings), 1.0);
  auto truth = regression_params_from(settings);
  model.prepare(truth);
  Rng rng(seed);
  return generate_regression_data(model, truth, n, rng);
}

SummaryTable run_table1(const ExperimentConfig& c) {
  c.validate();
  require_model(c, "regression");
  prepare_output(c);
  const auto data = generate_regression_data(c.regression, c.n_true,
                                             derive_seed(c.master_seed, kDataStream));
  const auto hyper = regression_hyper_from(c.regression);
  const auto grid = grid_of(c);
  const auto R = static_cast<std::size_t>(c.replicates);

  SummaryTable table;
  table.name = "table1";
  {
    const RegressionModel probe(hyper, 1.0);
    auto names = probe.param_names();
    names.emplace_back("n");
    for (const auto& nm : names) table.columns.push_back("E(" + nm + ")");
    for (const auto& nm : names) table.columns.push_back("Var(" + nm + ")");
  }
  std::vector<RepResult> results(grid.size() * R);
  parallel_for(results.size(), c.workers, [&](std::size_t task) {
    const std::size_t g = task / R;
    const std::size_t r = task % R;
    auto& out = results[task];
    try {
      const auto seed = derive_seed(c.master_seed, r, g);
      Rng rng(seed);
      const auto budget = PrivacyBudget::make(grid[g].epsilon_s, grid[g].epsilon_n);
      const auto summary = privatize_regression_summaries(
          data.x, data.y, hyper.L, hyper.U, budget, rng, c.count_family);
      const RegressionModel model(hyper, grid[g].epsilon_s);
      const CountMechanism count(c.count_family, grid[g].epsilon_n);
      const auto tr = run_chain(model, summary.s, summary.n_dp, count,
                                sampler_config(c, derive_seed(seed, 1)));
      maybe_write_trace(c, tr, "table1", g, r);
      auto mean = tr.theta_mean();
      auto var = tr.theta_variance();
      mean.push_back(tr.n_mean());
      var.push_back(tr.n_variance());
      out.values = mean;
      out.values.insert(out.values.end(), var.begin(), var.end());
      out.ok = all_finite(out.values);
      if (!out.ok) out.error = "non-finite chain summary";
    } catch (const Error& e) {
      out.error = e.what();
    }
  });
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::vector<RepResult> reps(results.begin() + static_cast<std::ptrdiff_t>(g * R),
                                      results.begin() + static_cast<std::ptrdiff_t>((g + 1) * R));
    table.rows.push_back(aggregate(grid[g], reps, table.columns.size()));
  }
  write_outputs(c, table);
  return table;
}

SummaryTable run_mcem_table2(const ExperimentConfig& c) {
  c.validate();
  require_model(c, "regression");
  prepare_output(c);
  const auto data = generate_regression_data(c.regression, c.n_true,
                                             derive_seed(c.master_seed, kDataStream));
  const auto hyper = regression_hyper_from(c.regression);
  const auto grid = grid_of(c);
  const auto R = static_cast<std::size_t>(c.replicates);

  std::vector<std::string> names;
  {
    const RegressionModel probe(hyper, 1.0);
    names = probe.param_names();
  }
  std::vector<RepResult> results(grid.size() * R);
  parallel_for(results.size(), c.workers, [&](std::size_t task) {
    const std::size_t g = task / R;
    const std::size_t r = task % R;
    auto& out = results[task];
    try {
      const auto seed = derive_seed(c.master_seed, r, g);
      Rng rng(seed);
      const auto budget = PrivacyBudget::make(grid[g].epsilon_s, grid[g].epsilon_n);
      const auto summary = privatize_regression_summaries(
          data.x, data.y, hyper.L, hyper.U, budget, rng, c.count_family);
      const RegressionModel model(hyper, grid[g].epsilon_s);
      const CountMechanism count(c.count_family, grid[g].epsilon_n);
      EmConfig em;
      em.outer_iterations = c.em.outer_iterations;
      em.m = c.em.m;
      em.thinning = c.em.thinning;
      em.e_burn_in = c.em.e_burn_in;
      em.mode = c.em.mode == "gradient" ? MStepMode::kGradient : MStepMode::kClosedForm;
      em.schedule.tau0 = c.em.tau0;
      em.schedule.kappa = c.em.kappa;
      em.schedule.kind = c.em.kappa > 0.0 ? LearningRate::Kind::kDecay
                                          : LearningRate::Kind::kConstant;
      em.tol = c.em.tol;
      em.burn_in_fraction = c.em.burn_in_fraction;
      em.warm_start = c.em.warm_start;
      em.seed = derive_seed(seed, 1);
      em.n_max = c.sampler.n_max;
      em.t_refresh_period = c.sampler.t_refresh_period;
      const auto res = run_mcem(model, summary.s, summary.n_dp, count, em,
                                model.moment_estimate(summary.s, summary.n_dp));
      out.values = res.theta_hat;
      out.ok = all_finite(out.values);
      if (!out.ok) out.error = "non-finite estimate";
    } catch (const Error& e) {
      out.error = e.what();
    }
  });

  SummaryTable table;
  table.name = "mcem_table2";
  for (const auto& nm : names) table.columns.push_back(nm);
  for (const auto& nm : names) table.columns.push_back("sd(" + nm + ")");
  const std::size_t d = names.size();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<RepResult> reps(results.begin() + static_cast<std::ptrdiff_t>(g * R),
                                results.begin() + static_cast<std::ptrdiff_t>((g + 1) * R));
    SummaryRow row = aggregate(grid[g], reps, d);
    // SD across replicates, with the normal-theory standard error of an SD.
    const double k = row.replicates_ok;
    for (std::size_t j = 0; j < d; ++j) {
      const double sd = row.se[j] * std::sqrt(k);
      row.value.push_back(sd);
      row.se.push_back(k > 1 ? sd / std::sqrt(2.0 * (k - 1)) : 0.0);
    }
    table.rows.push_back(std::move(row));
  }
  write_outputs(c, table);
  return table;
}

DirichletStudy run_dirichlet_study(const ExperimentConfig& c) {
  c.validate();
  require_model(c, "dirichlet");
  prepare_output(c);
  DirichletParams truth;
  for (int j = 0; j < 3; ++j) truth.alpha[static_cast<std::size_t>(j)] = c.dirichlet.alpha_true[static_cast<std::size_t>(j)];
  Rng data_rng(derive_seed(c.master_seed, kDataStream));
  const Eigen::MatrixXd data = generate_dirichlet_data(truth, c.n_true, data_rng);
  DirichletHyper hyper;
  hyper.prior_shape = c.dirichlet.prior_shape;
  hyper.prior_rate = c.dirichlet.prior_rate;
  hyper.floor_a = c.dirichlet.floor_a;
  hyper.step = c.dirichlet.step;

  // One fixed s per epsilon_s.
  std::vector<std::vector<double>> s_of;
  for (std::size_t i = 0; i < c.epsilon_s.size(); ++i) {
    Rng rng(derive_seed(c.master_seed, kDataStream, i + 1));
    s_of.push_back(privatize_dirichlet_summaries(data, hyper.floor_a, c.epsilon_s[i], rng));
  }
  std::vector<double> eps_n = c.epsilon_n;
  if (std::none_of(eps_n.begin(), eps_n.end(), [](double e) { return std::isinf(e); })) {
    eps_n.push_back(kInf);
  }
  struct Task {
    std::size_t i;  // epsilon_s index
    std::size_t g;  // grid index
    int realization;
    double epsilon_n;
  };
  std::vector<Task> tasks;
  std::vector<Cell> grid;
  for (std::size_t i = 0; i < c.epsilon_s.size(); ++i) {
    for (double en : eps_n) {
      const std::size_t g = grid.size();
      grid.push_back({c.epsilon_s[i], en});
      const int reps = std::isinf(en) ? 1 : c.dirichlet.n_dp_realizations;
      for (int r = 0; r < reps; ++r) tasks.push_back({i, g, r, en});
    }
  }
  std::vector<RepResult> results(tasks.size());
  std::vector<std::vector<std::int64_t>> draws(tasks.size());
  parallel_for(tasks.size(), c.workers, [&](std::size_t t) {
    const auto& task = tasks[t];
    auto& out = results[t];
    try {
      const auto seed = derive_seed(c.master_seed, static_cast<std::uint64_t>(task.realization), task.g);
      Rng rng(seed);
      const double n_dp = privatize_count(c.n_true, task.epsilon_n, c.count_family, rng);
      const DirichletModel model(hyper, c.epsilon_s[task.i]);
      const CountMechanism count(c.count_family, task.epsilon_n);
      const auto tr = run_chain(model, s_of[task.i], n_dp, count,
                                sampler_config(c, derive_seed(seed, 1)));
      maybe_write_trace(c, tr, "dirichlet", task.g, static_cast<std::size_t>(task.realization));
      const auto mean = tr.theta_mean();
      const auto var = tr.theta_variance();
      for (double v : var) out.values.push_back(std::sqrt(v));
      out.values.insert(out.values.end(), mean.begin(), mean.end());
      out.values.push_back(tr.n_mean());
      out.values.push_back(std::sqrt(tr.n_variance()));
      for (std::int64_t it = c.sampler.burn_in; it < tr.iterations(); it += 10) {
        draws[t].push_back(tr.n[static_cast<std::size_t>(it)]);
      }
      out.ok = all_finite(out.values);
      if (!out.ok) out.error = "non-finite chain summary";
    } catch (const Error& e) {
      out.error = e.what();
    }
  });

  DirichletStudy study;
  study.table.name = "dirichlet";
  study.table.columns = {"sd(alpha1)", "sd(alpha2)", "sd(alpha3)", "E(alpha1)",
                         "E(alpha2)",  "E(alpha3)",  "E(n)",       "sd(n)"};
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<RepResult> reps;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].g != g) continue;
      reps.push_back(results[t]);
      if (!results[t].ok) continue;
      for (auto n : draws[t]) {
        study.n_draws.push_back({grid[g].epsilon_s, grid[g].epsilon_n, tasks[t].realization, n});
      }
    }
    study.table.rows.push_back(aggregate(grid[g], reps, study.table.columns.size()));
  }
  write_outputs(c, study.table);
  if (!c.output_dir.empty()) {
    std::vector<std::vector<double>> rows;
    for (const auto& d : study.n_draws) {
      rows.push_back({d.epsilon_s, d.epsilon_n, static_cast<double>(d.realization),
                      static_cast<double>(d.n)});
    }
    write_csv((std::filesystem::path(c.output_dir) / "dirichlet_n_draws.csv").string(),
              {"epsilon_s", "epsilon_n", "realization", "n"}, rows);
  }
  return study;
}

bool CheckReport::all_pass() const {
  for (const auto& r : rows) {
    if (r.verdict == "fail") return false;
  }
  return true;
}

void write_check_csv(const CheckReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << "check,setting,observed,target,verdict\n";
  for (const auto& r : report.rows) {
    out << r.check << ",\"" << r.setting << "\"," << format_double(r.observed) << ','
        << format_double(r.target) << ',' << r.verdict << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

CheckReport run_theory_checks(const ExperimentConfig& c) {
  c.validate();
  prepare_output(c);
  const auto& th = c.theory;
  CheckReport rep;
  auto add = [&](std::string check, std::string setting, double observed, double target,
                 bool pass) {
    rep.rows.push_back({std::move(check), std::move(setting), observed, target,
                        pass ? "pass" : "fail"});
  };
  auto fmt = [](double v) { return format_double(v); };

  for (auto family : {NoiseFamily::kDiscreteLaplace, NoiseFamily::kDiscreteGaussian}) {
    for (double eps : th.lemma_epsilons) {
      const double bound = lemma_a12_bound(family, eps);
      for (auto n0 : th.lemma_n0) {
        const auto post = build_n_posterior(static_cast<double>(n0), eps, family);
        const double dev = expected_abs_deviation(post, n0);
        add("abs_deviation_bound",
            std::string(to_string(family)) + " eps=" + fmt(eps) + " n0=" + std::to_string(n0),
            dev, bound, dev <= bound + 1e-9);
      }
    }
  }

  {
    const auto one = prop41_coupling_check(1, 4, 0.5, 1.0, 1.0, NoiseFamily::kDiscreteLaplace);
    const double expected = 1.0 - (1.0 - std::exp(-1.0)) / (1.0 + std::exp(-1.0));
    add("coupling_bound_value", "discrete_laplace eps=1", one.bound, expected,
        std::abs(one.bound - expected) < 1e-12);
    Rng rng(derive_seed(c.master_seed, 41));
    std::uniform_int_distribution<int> lo_d(1, 4);
    std::uniform_int_distribution<int> span_d(0, 6);
    std::uniform_real_distribution<double> theta_d(0.05, 0.95);
    std::uniform_real_distribution<double> eps_d(0.3, 3.0);
    for (int k = 0; k < th.prop41_configs; ++k) {
      const std::int64_t lo = lo_d(rng);
      const std::int64_t hi = lo + span_d(rng);
      const double theta = theta_d(rng);
      const double es = eps_d(rng);
      const double en = eps_d(rng);
      const auto family = k % 2 == 0 ? NoiseFamily::kDiscreteLaplace
                                     : NoiseFamily::kDiscreteGaussian;
      const auto r = prop41_coupling_check(lo, hi, theta, es, en, family);
      add("coupling_bound",
          std::string(to_string(family)) + " n=[" + std::to_string(lo) + "," +
              std::to_string(hi) + "] theta=" + fmt(theta) + " eps_s=" + fmt(es) +
              " eps_n=" + fmt(en),
          r.tv, r.bound, r.tv <= r.bound + 1e-10);
    }
  }

  for (double es : c.epsilon_s) {
    for (double en : c.epsilon_n) {
      for (auto n0 : th.theorem42_n0) {
        const auto r = theorem42_check(n0, 0.3, es, en, c.count_family);
        add("tv_privacy_bound",
            "eps_s=" + fmt(es) + " eps_n=" + fmt(en) + " n0=" + std::to_string(n0), r.tv,
            r.bound, r.tv <= r.bound + 1e-10);
      }
    }
  }

  if (!th.convergence_n0.empty() && !c.epsilon_n.empty()) {
    const double en = c.epsilon_n.front();
    const double es = c.epsilon_s.empty() ? 1.0 : c.epsilon_s.front();
    for (auto mech : {SumMechanism::kLaplaceSum, SumMechanism::kKng}) {
      const std::string name = mech == SumMechanism::kLaplaceSum ? "laplace_sum" : "kng";
      const auto r = theorem31_convergence_check(
          mech, th.convergence_theta, es, en, c.count_family, th.convergence_n0,
          th.convergence_replicates, th.convergence_samples,
          derive_seed(c.master_seed, 31, mech == SumMechanism::kKng));
      for (const auto& row : r.rows) {
        rep.rows.push_back({"convergence_ks_" + name, "n0=" + std::to_string(row.n0),
                            row.ks_mean, row.ks_se, "info"});
      }
      if (r.rows.size() >= 2) {
        const auto& first = r.rows.front();
        const auto& last = r.rows.back();
        const bool separated = first.ks_mean - 2 * first.ks_se > last.ks_mean + 2 * last.ks_se;
        const bool pass = r.kendall_tau == -1.0 && separated;
        // The KNG mean is centered at theta for every n, so its trend is
        // reported but not judged.
        rep.rows.push_back({"convergence_trend_" + name,
                            "eps_s=" + fmt(es) + " eps_n=" + fmt(en), r.kendall_tau, -1.0,
                            mech == SumMechanism::kLaplaceSum ? (pass ? "pass" : "fail")
                                                              : "info"});
      }
    }
  }

  if (!th.abc_epsilon_n.empty()) {
    const double es = c.epsilon_s.empty() ? 1.0 : c.epsilon_s.front();
    const auto r = abc_posterior_check(1.0, 1.0, es, c.count_family, th.abc_n0,
                                       th.abc_epsilon_n, th.abc_half_width,
                                       th.abc_replicates, th.abc_accepted, 20,
                                       derive_seed(c.master_seed, 44));
    for (const auto& row : r.rows) {
      rep.rows.push_back({"abc_tv", "eps_n=" + fmt(row.epsilon_n) + " n0=" + std::to_string(r.n0),
                          row.tv_mean, row.tv_se, "info"});
    }
    if (r.rows.size() >= 2) {
      add("abc_trend", "n0=" + std::to_string(r.n0), r.kendall_tau, 0.0, r.kendall_tau <= 0.0);
    }
  }

  if (!c.output_dir.empty()) {
    write_check_csv(rep, (std::filesystem::path(c.output_dir) / "theory_checks.csv").string());
    write_text((std::filesystem::path(c.output_dir) / "theory_checks.config.json").string(),
               serialize_config(c));
  }
  return rep;
}

}  // namespace dpsize
