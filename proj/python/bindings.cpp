#include <map>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpsize/experiments/config.hpp"
#include "dpsize/experiments/runners.hpp"
#include "dpsize/mechanisms.hpp"
#include "dpsize/models/bernoulli.hpp"
#include "dpsize/n_posterior.hpp"
#include "dpsize/oracle.hpp"
#include "dpsize/rjmcmc.hpp"

namespace py = pybind11;
using namespace dpsize;

namespace {

py::dict table_to_dict(const SummaryTable& t) {
  py::list rows;
  for (const auto& r : t.rows) {
    py::dict d;
    d["epsilon_s"] = r.epsilon_s;
    d["epsilon_n"] = r.epsilon_n;
    d["replicates_ok"] = r.replicates_ok;
    d["replicates_failed"] = r.replicates_failed;
    d["failures"] = r.failures;
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      d[py::str(t.columns[j])] = r.value[j];
      d[py::str(t.columns[j] + "_se")] = r.se[j];
    }
    rows.append(d);
  }
  py::dict out;
  out["name"] = t.name;
  out["columns"] = t.columns;
  out["rows"] = rows;
  return out;
}

py::dict bernoulli_chain(double s, double n_dp, double epsilon_s, double epsilon_n,
                         const std::string& family, double a, double b, std::int64_t n_max,
                         std::int64_t iterations, std::int64_t burn_in, std::uint64_t seed) {
  const auto fam = parse_noise_family(family);
  const BernoulliToy model(a, b, NoiseSpec::from_epsilon(fam, 1.0, epsilon_s));
  const CountMechanism count(fam, epsilon_n);
  SamplerConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = burn_in;
  cfg.n_max = n_max;
  cfg.seed = seed;
  std::vector<double> ones;
  ones.reserve(static_cast<std::size_t>(iterations));
  Trace tr;
  {
    py::gil_scoped_release release;
    tr = run_chain(model, {s}, n_dp, count, cfg, std::nullopt,
                   ChainObserver<BernoulliToy>(
                       [&](std::int64_t, const auto& st) { ones.push_back(st.t[0]); }));
  }
  py::dict out;
  out["theta"] = tr.theta;
  out["n"] = tr.n;
  out["sum_x"] = ones;
  out["n_max"] = tr.n_max;
  return out;
}

}  // namespace

PYBIND11_MODULE(_dpsize, m) {
  m.doc() = "Bayesian inference under unbounded differential privacy";

  static py::exception<Error> exc(m, "DpsizeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(exc.ptr())(e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(exc.ptr(), err.ptr());
    }
  });

  m.def("clamp_normalize", &clamp_normalize, py::arg("x"), py::arg("lo"), py::arg("hi"));
  m.def("regression_sensitivity", &regression_sensitivity, py::arg("p"));
  m.def("truncation_half_width", &truncation_half_width, py::arg("epsilon"));
  m.def("discrete_laplace_log_pmf", &discrete_laplace_log_pmf, py::arg("k"), py::arg("epsilon"));
  m.def("discrete_gaussian_log_pmf", &discrete_gaussian_log_pmf, py::arg("k"), py::arg("epsilon"));
  m.def(
      "privatize_count",
      [](std::int64_t n, double epsilon_n, const std::string& family, std::uint64_t seed) {
        Rng rng(seed);
        return privatize_count(n, epsilon_n, parse_noise_family(family), rng);
      },
      py::arg("n"), py::arg("epsilon_n"), py::arg("family") = "continuous_laplace",
      py::arg("seed") = 1);
  m.def(
      "dp_to_tv_delta",
      [](const std::string& framework, double param, double delta) {
        static const std::map<std::string, DpFramework> names{
            {"pure", DpFramework::kPureEps},  {"approx", DpFramework::kApproxEpsDelta},
            {"gdp", DpFramework::kGdp},       {"zcdp", DpFramework::kZcdp},
            {"renyi", DpFramework::kRenyi}};
        const auto it = names.find(framework);
        if (it == names.end()) {
          throw Error(ErrorKind::kInvalidInput, "unknown framework \"" + framework + "\"");
        }
        return dp_to_tv_delta(it->second, param, delta);
      },
      py::arg("framework"), py::arg("param"), py::arg("delta") = 0.0);

  m.def(
      "n_posterior",
      [](double n_dp, double epsilon_n, const std::string& family, std::int64_t n_max) {
        NPrior prior;
        prior.n_max = n_max;
        const auto post = build_n_posterior(n_dp, epsilon_n, parse_noise_family(family), prior);
        py::dict d;
        d["n_lo"] = post.n_lo;
        d["n_hi"] = post.n_hi;
        d["log_weights"] = post.log_weights;
        d["mean"] = post.mean();
        d["variance"] = post.variance();
        return d;
      },
      py::arg("n_dp"), py::arg("epsilon_n"), py::arg("family") = "discrete_laplace",
      py::arg("n_max") = 0);
  m.def(
      "expected_abs_deviation",
      [](double n_dp, double epsilon_n, const std::string& family, std::int64_t n0) {
        return expected_abs_deviation(
            build_n_posterior(n_dp, epsilon_n, parse_noise_family(family)), n0);
      },
      py::arg("n_dp"), py::arg("epsilon_n"), py::arg("family"), py::arg("n0"));
  m.def(
      "lemma_a12_bound",
      [](const std::string& family, double eps) {
        return lemma_a12_bound(parse_noise_family(family), eps);
      },
      py::arg("family"), py::arg("epsilon"));

  m.def("bernoulli_chain", &bernoulli_chain, py::arg("s"), py::arg("n_dp"),
        py::arg("epsilon_s") = 1.0, py::arg("epsilon_n") = 1.0,
        py::arg("family") = "discrete_laplace", py::arg("a") = 1.0, py::arg("b") = 1.0,
        py::arg("n_max") = 0, py::arg("iterations") = 10000, py::arg("burn_in") = 1000,
        py::arg("seed") = 1);
  m.def(
      "bernoulli_posterior",
      [](double s, double n_dp, double epsilon_s, double epsilon_n, const std::string& family,
         double a, double b, std::int64_t n_lo, std::int64_t n_hi) {
        const auto fam = parse_noise_family(family);
        const auto p = enumerate_bernoulli_posterior(s, n_dp, a, b, n_lo, n_hi,
                                                     NoiseSpec::from_epsilon(fam, 1.0, epsilon_s),
                                                     CountMechanism(fam, epsilon_n));
        py::dict d;
        for (std::size_t i = 0; i < p.grid.size(); ++i) {
          d[py::make_tuple(p.grid[i][0], p.grid[i][1])] = p.probabilities[i];
        }
        return d;
      },
      py::arg("s"), py::arg("n_dp"), py::arg("epsilon_s") = 1.0, py::arg("epsilon_n") = 1.0,
      py::arg("family") = "discrete_laplace", py::arg("a") = 1.0, py::arg("b") = 1.0,
      py::arg("n_lo") = 1, py::arg("n_hi") = 8);

  m.def(
      "default_config",
      [](const std::string& kind) {
        return serialize_config(ExperimentConfig::defaults(parse_experiment_kind(kind)));
      },
      py::arg("kind"));
  m.def(
      "run_experiment",
      [](const std::string& config_json, bool smoke) -> py::object {
        auto c = parse_config(config_json);
        if (smoke) c.apply_smoke();
        switch (c.kind) {
          case ExperimentKind::kTable1: {
            SummaryTable t;
            {
              py::gil_scoped_release release;
              t = run_table1(c);
            }
            return table_to_dict(t);
          }
          case ExperimentKind::kMcemTable2: {
            SummaryTable t;
            {
              py::gil_scoped_release release;
              t = run_mcem_table2(c);
            }
            return table_to_dict(t);
          }
          case ExperimentKind::kDirichlet: {
            DirichletStudy st;
            {
              py::gil_scoped_release release;
              st = run_dirichlet_study(c);
            }
            return table_to_dict(st.table);
          }
          case ExperimentKind::kTheoryCheck: {
            CheckReport rep;
            {
              py::gil_scoped_release release;
              rep = run_theory_checks(c);
            }
            py::list rows;
            for (const auto& r : rep.rows) {
              py::dict d;
              d["check"] = r.check;
              d["setting"] = r.setting;
              d["observed"] = r.observed;
              d["target"] = r.target;
              d["verdict"] = r.verdict;
              rows.append(d);
            }
            return rows;
          }
          case ExperimentKind::kCustom:
            break;
        }
        throw Error(ErrorKind::kUnsupported, "custom configs run through the CLI sample command");
      },
      py::arg("config_json"), py::arg("smoke") = false);
}
