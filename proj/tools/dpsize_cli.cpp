// dpsize: command-line entry point for the experiments, one-shot
// privatization of a CSV dataset, and single custom chains.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpsize/experiments/config.hpp"
#include "dpsize/experiments/csv.hpp"
#include "dpsize/experiments/runners.hpp"
#include "dpsize/models/dirichlet.hpp"
#include "dpsize/models/regression.hpp"
#include "dpsize/rjmcmc.hpp"

namespace {

using namespace dpsize;
using nlohmann::json;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool smoke = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_flag("--smoke", f.smoke, "n=200, 3 replicates, short chains");
}

ExperimentConfig resolve(const CommonFlags& f, ExperimentKind kind) {
  auto c = f.config.empty() ? ExperimentConfig::defaults(kind) : load_config(f.config);
  if (c.kind != kind) {
    throw Error(ErrorKind::kInvalidConfig,
                "config kind \"" + std::string(to_string(c.kind)) + "\" does not match the subcommand");
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.seed) c.master_seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.smoke) c.apply_smoke();
  c.validate();
  return c;
}

void print_table(const SummaryTable& t) {
  std::cout << "epsilon_s,epsilon_n,ok,failed";
  for (const auto& col : t.columns) std::cout << ',' << col << ',' << col << "_se";
  std::cout << '\n';
  for (const auto& r : t.rows) {
    std::cout << format_double(r.epsilon_s) << ',' << format_double(r.epsilon_n) << ','
              << r.replicates_ok << ',' << r.replicates_failed;
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      std::cout << ',' << format_double(r.value[j]) << ',' << format_double(r.se[j]);
    }
    std::cout << '\n';
    for (const auto& f : r.failures) std::cerr << "failed " << f << '\n';
  }
}

json num(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

int run_privatize(const std::string& input, const std::string& model, double eps_s,
                  double eps_n, const std::string& family, double lo, double hi,
                  double floor_a, std::uint64_t seed, const std::string& out) {
  const auto table = read_csv(input);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto cols = static_cast<Eigen::Index>(table.header.size());
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "dataset has no rows");
  Eigen::MatrixXd m(n, cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  Rng rng(seed);
  const auto fam = parse_noise_family(family);
  json j;
  j["model"] = model;
  j["epsilon_s"] = num(eps_s);
  j["epsilon_n"] = num(eps_n);
  j["count_family"] = family;
  if (model == "regression") {
    if (cols < 2) throw Error(ErrorKind::kInvalidInput, "regression needs covariates and y");
    const auto budget = PrivacyBudget::make(eps_s, eps_n);
    const auto s = privatize_regression_summaries(m.leftCols(cols - 1), m.col(cols - 1), lo,
                                                  hi, budget, rng, fam);
    j["s"] = s.s;
    j["n_dp"] = s.n_dp;
  } else if (model == "dirichlet") {
    j["s"] = privatize_dirichlet_summaries(m, floor_a, eps_s, rng);
    j["n_dp"] = privatize_count(n, eps_n, fam, rng);
  } else {
    throw Error(ErrorKind::kInvalidConfig, "privatize supports regression and dirichlet");
  }
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(out, j.dump(2) + "\n");
  }
  return 0;
}

// One chain for the custom config; the summary comes from --summary or is
// generated from the config's truth.
int run_sample(const ExperimentConfig& c, const std::string& summary_path) {
  if (c.epsilon_s.empty() || c.epsilon_n.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "sample needs one epsilon_s and one epsilon_n");
  }
  const double es = c.epsilon_s.front();
  const double en = c.epsilon_n.front();
  std::vector<double> s;
  double n_dp = 0.0;
  Rng rng(derive_seed(c.master_seed, 0, 0));
  if (!summary_path.empty()) {
    std::ifstream in(summary_path);
    if (!in) throw Error(ErrorKind::kIo, "cannot read " + summary_path);
    const json j = json::parse(in);
    s = j.at("s").get<std::vector<double>>();
    n_dp = j.at("n_dp").get<double>();
  }
  SamplerConfig sc;
  sc.iterations = c.sampler.iterations;
  sc.burn_in = c.sampler.burn_in;
  sc.t_refresh_period = c.sampler.t_refresh_period;
  sc.n_max = c.sampler.n_max;
  sc.seed = derive_seed(c.master_seed, 0, 1);
  const CountMechanism count(c.count_family, en);
  Trace tr;
  if (c.model == "regression") {
    const auto hyper = regression_hyper_from(c.regression);
    if (summary_path.empty()) {
      const auto data = generate_regression_data(c.regression, c.n_true,
                                                 derive_seed(c.master_seed, ~0ull));
      const auto sum = privatize_regression_summaries(
          data.x, data.y, hyper.L, hyper.U, PrivacyBudget::make(es, en), rng, c.count_family);
      s = sum.s;
      n_dp = sum.n_dp;
    }
    tr = run_chain(RegressionModel(hyper, es), s, n_dp, count, sc);
  } else if (c.model == "dirichlet") {
    DirichletHyper hyper;
    hyper.prior_shape = c.dirichlet.prior_shape;
    hyper.prior_rate = c.dirichlet.prior_rate;
    hyper.floor_a = c.dirichlet.floor_a;
    hyper.step = c.dirichlet.step;
    if (summary_path.empty()) {
      DirichletParams truth;
      for (std::size_t j = 0; j < 3; ++j) truth.alpha[j] = c.dirichlet.alpha_true[j];
      const auto data = generate_dirichlet_data(truth, c.n_true, rng);
      s = privatize_dirichlet_summaries(data, hyper.floor_a, es, rng);
      n_dp = privatize_count(c.n_true, en, c.count_family, rng);
    }
    tr = run_chain(DirichletModel(hyper, es), s, n_dp, count, sc);
  } else {
    throw Error(ErrorKind::kInvalidConfig, "sample supports regression and dirichlet");
  }
  ensure_output_dir(c.output_dir);
  const auto stem = (std::filesystem::path(c.output_dir) / "trace").string();
  write_trace_csv(tr, stem + ".csv");
  write_text(stem + ".json", trace_sidecar_json(tr));
  std::cout << trace_sidecar_json(tr) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian inference under unbounded differential privacy"};
  app.require_subcommand(1);

  CommonFlags f;
  auto* table1 = app.add_subcommand("table1", "regression posterior summaries over a budget grid");
  auto* mcem = app.add_subcommand("mcem", "MCEM estimates over a budget grid");
  auto* dirichlet = app.add_subcommand("dirichlet", "Dirichlet compositional study");
  auto* theory = app.add_subcommand("theory-check", "exact and Monte Carlo theory checks");
  auto* sample = app.add_subcommand("sample", "one chain from a custom config");
  for (auto* cmd : {table1, mcem, dirichlet, theory, sample}) add_common(cmd, f);
  std::string summary_path;
  sample->add_option("--summary", summary_path, "JSON with s and n_dp (from privatize)");

  auto* priv = app.add_subcommand("privatize", "apply the mechanisms to a CSV dataset");
  std::string input;
  std::string model = "regression";
  double eps_s = 1.0;
  std::string eps_n_text = "inf";
  std::string family = "continuous_laplace";
  double lo = -5.0;
  double hi = 5.0;
  double floor_a = 0.0006;
  std::uint64_t seed = 1;
  std::string out_file;
  priv->add_option("--input", input, "CSV with a header row")->required();
  priv->add_option("--model", model, "regression or dirichlet");
  priv->add_option("--epsilon-s", eps_s);
  priv->add_option("--epsilon-n", eps_n_text, "number or inf");
  priv->add_option("--count-family", family);
  priv->add_option("--L", lo);
  priv->add_option("--U", hi);
  priv->add_option("--floor", floor_a);
  priv->add_option("--seed", seed);
  priv->add_option("--out", out_file, "output JSON path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*priv) {
      const double eps_n = eps_n_text == "inf" ? kInf : std::stod(eps_n_text);
      return run_privatize(input, model, eps_s, eps_n, family, lo, hi, floor_a, seed, out_file);
    }
    if (*table1) {
      print_table(run_table1(resolve(f, ExperimentKind::kTable1)));
    } else if (*mcem) {
      print_table(run_mcem_table2(resolve(f, ExperimentKind::kMcemTable2)));
    } else if (*dirichlet) {
      print_table(run_dirichlet_study(resolve(f, ExperimentKind::kDirichlet)).table);
    } else if (*theory) {
      const auto rep = run_theory_checks(resolve(f, ExperimentKind::kTheoryCheck));
      std::cout << "check,setting,observed,target,verdict\n";
      for (const auto& r : rep.rows) {
        std::cout << r.check << ",\"" << r.setting << "\"," << format_double(r.observed) << ','
                  << format_double(r.target) << ',' << r.verdict << '\n';
      }
      return rep.all_pass() ? 0 : 1;
    } else if (*sample) {
      return run_sample(resolve(f, ExperimentKind::kCustom), summary_path);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
