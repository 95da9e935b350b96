#include "dpsize/experiments/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dpsize {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorKind::kInvalidConfig, what);
}

json encode_eps(double v) { return std::isinf(v) ? json("inf") : json(v); }

double decode_eps(const json& j, const std::string& key) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "Inf" || s == "infinity") return kInf;
    bad(key + ": expected a number or \"inf\", got \"" + s + "\"");
  }
  if (!j.is_number()) bad(key + ": expected a number");
  return j.get<double>();
}

// Reads the keys of one JSON object and fails on any key it never consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      bad(path_ + "." + key + ": " + e.what());
    }
  }

  void get_eps(const char* key, double& out) {
    seen_.insert(key);
    if (j_.contains(key)) out = decode_eps(j_.at(key), path_ + "." + key);
  }

  void get_eps_list(const char* key, std::vector<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const auto& arr = j_.at(key);
    if (!arr.is_array()) bad(path_ + "." + key + ": expected an array");
    out.clear();
    for (const auto& v : arr) out.push_back(decode_eps(v, path_ + "." + key));
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) bad("unknown key " + path_ + "." + k);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_regression(const json& j, RegressionSettings& r) {
  Section s(j, "regression");
  s.get("L", r.lo);
  s.get("U", r.hi);
  s.get("beta", r.beta);
  s.get("tau", r.tau);
  s.get("mu", r.mu);
  s.get("Phi", r.phi);
  s.finish();
}

void read_dirichlet(const json& j, DirichletSettings& d) {
  Section s(j, "dirichlet");
  s.get("alpha_true", d.alpha_true);
  s.get("floor_a", d.floor_a);
  s.get("prior_shape", d.prior_shape);
  s.get("prior_rate", d.prior_rate);
  s.get("step", d.step);
  s.get("n_dp_realizations", d.n_dp_realizations);
  s.finish();
}

void read_sampler(const json& j, SamplerSettings& c) {
  Section s(j, "sampler");
  s.get("iterations", c.iterations);
  s.get("burn_in", c.burn_in);
  s.get("t_refresh_period", c.t_refresh_period);
  s.get("n_max", c.n_max);
  s.get("write_traces", c.write_traces);
  s.finish();
}

void read_em(const json& j, EmSettings& c) {
  Section s(j, "em");
  s.get("outer_iterations", c.outer_iterations);
  s.get("m", c.m);
  s.get("thinning", c.thinning);
  s.get("e_burn_in", c.e_burn_in);
  s.get("mode", c.mode);
  s.get("tau0", c.tau0);
  s.get("kappa", c.kappa);
  s.get("tol", c.tol);
  s.get("burn_in_fraction", c.burn_in_fraction);
  s.get("warm_start", c.warm_start);
  s.finish();
}

void read_theory(const json& j, TheorySettings& t) {
  Section s(j, "theory");
  s.get_eps_list("lemma_epsilons", t.lemma_epsilons);
  s.get("lemma_n0", t.lemma_n0);
  s.get("prop41_configs", t.prop41_configs);
  s.get("convergence_n0", t.convergence_n0);
  s.get("convergence_replicates", t.convergence_replicates);
  s.get("convergence_samples", t.convergence_samples);
  s.get("convergence_theta", t.convergence_theta);
  s.get("theorem42_n0", t.theorem42_n0);
  s.get_eps_list("abc_epsilon_n", t.abc_epsilon_n);
  s.get("abc_n0", t.abc_n0);
  s.get("abc_half_width", t.abc_half_width);
  s.get("abc_replicates", t.abc_replicates);
  s.get("abc_accepted", t.abc_accepted);
  s.finish();
}

json eps_list(const std::vector<double>& v) {
  json a = json::array();
  for (double e : v) a.push_back(encode_eps(e));
  return a;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kTable1: return "table1";
    case ExperimentKind::kMcemTable2: return "mcem_table2";
    case ExperimentKind::kDirichlet: return "dirichlet";
    case ExperimentKind::kTheoryCheck: return "theory_check";
    case ExperimentKind::kCustom: return "custom";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::kTable1, ExperimentKind::kMcemTable2,
                 ExperimentKind::kDirichlet, ExperimentKind::kTheoryCheck,
                 ExperimentKind::kCustom}) {
    if (to_string(k) == name) return k;
  }
  bad("unknown experiment kind \"" + std::string(name) + "\"");
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kTable1:
      break;
    case ExperimentKind::kMcemTable2:
      c.epsilon_s = {1.0};
      break;
    case ExperimentKind::kDirichlet:
      c.model = "dirichlet";
      c.epsilon_s = {1.0, 10.0};
      c.epsilon_n = {0.01, 0.1, 1.0, 10.0};
      c.replicates = 1;
      break;
    case ExperimentKind::kTheoryCheck:
      c.model = "bernoulli";
      c.epsilon_s = {1.0};
      c.epsilon_n = {1.0};
      c.count_family = NoiseFamily::kDiscreteLaplace;
      c.replicates = 1;
      break;
    case ExperimentKind::kCustom:
      c.epsilon_s = {1.0};
      c.epsilon_n = {1.0};
      c.replicates = 1;
      c.sampler.write_traces = true;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> models{"regression", "dirichlet", "bernoulli",
                                            "poisson_multinomial"};
  if (!models.count(model)) bad("model \"" + model + "\" is not registered");
  if (replicates < 1) bad("replicates must be >= 1");
  if (n_true < 1) bad("n_true must be >= 1");
  if (workers < 1) bad("workers must be >= 1");
  for (double e : epsilon_s) {
    if (!(e > 0.0)) bad("epsilon_s entries must be positive");
  }
  for (double e : epsilon_n) {
    if (!(e > 0.0)) bad("epsilon_n entries must be positive");
  }
  if (sampler.iterations < 1 || sampler.burn_in < 0 ||
      sampler.burn_in >= sampler.iterations) {
    bad("sampler needs 0 <= burn_in < iterations");
  }
  if (sampler.t_refresh_period < 1) bad("t_refresh_period must be >= 1");
  if (em.mode != "closed_form" && em.mode != "gradient") {
    bad("em.mode must be \"closed_form\" or \"gradient\"");
  }
  if (em.outer_iterations < 1 || em.m < 1 || em.thinning < 1 || em.e_burn_in < 0) {
    bad("em iteration counts must be positive");
  }
  if (!(em.burn_in_fraction >= 0.0 && em.burn_in_fraction < 1.0)) {
    bad("em.burn_in_fraction must lie in [0, 1)");
  }
  const std::size_t p = regression.mu.size();
  if (p == 0 || regression.beta.size() != p + 1 || regression.phi.size() != p * p) {
    bad("regression truth dimensions are inconsistent");
  }
  if (!(regression.lo < regression.hi)) bad("regression bounds need L < U");
  if (!(regression.tau > 0.0)) bad("regression tau must be positive");
  if (dirichlet.alpha_true.size() != 3) bad("dirichlet.alpha_true needs 3 entries");
  for (double a : dirichlet.alpha_true) {
    if (!(a > 0.0)) bad("dirichlet.alpha_true entries must be positive");
  }
  if (!(dirichlet.floor_a > 0.0 && dirichlet.floor_a < 1.0)) {
    bad("dirichlet.floor_a must lie in (0, 1)");
  }
  if (dirichlet.n_dp_realizations < 1) bad("dirichlet.n_dp_realizations must be >= 1");
}

void ExperimentConfig::apply_smoke() {
  n_true = 200;
  replicates = std::min(replicates, 3);
  sampler.iterations = std::min<std::int64_t>(sampler.iterations, 2000);
  sampler.burn_in = std::min<std::int64_t>(sampler.burn_in, 1000);
  em.outer_iterations = std::min<std::int64_t>(em.outer_iterations, 20);
  em.m = std::min<std::int64_t>(em.m, 50);
  dirichlet.n_dp_realizations = std::min(dirichlet.n_dp_realizations, 3);
  theory.convergence_samples = std::min<std::int64_t>(theory.convergence_samples, 20000);
  theory.convergence_replicates = std::min(theory.convergence_replicates, 3);
  theory.abc_replicates = std::min(theory.abc_replicates, 2);
  theory.abc_accepted = std::min<std::int64_t>(theory.abc_accepted, 2000);
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    bad("config needs a string \"kind\"");
  }
  auto c = ExperimentConfig::defaults(parse_experiment_kind(j.at("kind").get<std::string>()));
  Section s(j, "config");
  std::string kind_name;
  s.get("kind", kind_name);
  s.get("model", c.model);
  s.get("n_true", c.n_true);
  s.get_eps_list("epsilon_s", c.epsilon_s);
  s.get_eps_list("epsilon_n", c.epsilon_n);
  std::string family(to_string(c.count_family));
  s.get("count_family", family);
  c.count_family = parse_noise_family(family);
  s.get("replicates", c.replicates);
  s.get("master_seed", c.master_seed);
  s.get("output_dir", c.output_dir);
  s.get("workers", c.workers);
  if (const auto* r = s.child("regression")) read_regression(*r, c.regression);
  if (const auto* d = s.child("dirichlet")) read_dirichlet(*d, c.dirichlet);
  if (const auto* m = s.child("sampler")) read_sampler(*m, c.sampler);
  if (const auto* e = s.child("em")) read_em(*e, c.em);
  if (const auto* t = s.child("theory")) read_theory(*t, c.theory);
  s.finish();
  c.validate();
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  j["model"] = c.model;
  j["n_true"] = c.n_true;
  j["epsilon_s"] = eps_list(c.epsilon_s);
  j["epsilon_n"] = eps_list(c.epsilon_n);
  j["count_family"] = std::string(to_string(c.count_family));
  j["replicates"] = c.replicates;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["regression"] = {{"L", c.regression.lo},     {"U", c.regression.hi},
                     {"beta", c.regression.beta}, {"tau", c.regression.tau},
                     {"mu", c.regression.mu},     {"Phi", c.regression.phi}};
  j["dirichlet"] = {{"alpha_true", c.dirichlet.alpha_true},
                    {"floor_a", c.dirichlet.floor_a},
                    {"prior_shape", c.dirichlet.prior_shape},
                    {"prior_rate", c.dirichlet.prior_rate},
                    {"step", c.dirichlet.step},
                    {"n_dp_realizations", c.dirichlet.n_dp_realizations}};
  j["sampler"] = {{"iterations", c.sampler.iterations},
                  {"burn_in", c.sampler.burn_in},
                  {"t_refresh_period", c.sampler.t_refresh_period},
                  {"n_max", c.sampler.n_max},
                  {"write_traces", c.sampler.write_traces}};
  j["em"] = {{"outer_iterations", c.em.outer_iterations},
             {"m", c.em.m},
             {"thinning", c.em.thinning},
             {"e_burn_in", c.em.e_burn_in},
             {"mode", c.em.mode},
             {"tau0", c.em.tau0},
             {"kappa", c.em.kappa},
             {"tol", c.em.tol},
             {"burn_in_fraction", c.em.burn_in_fraction},
             {"warm_start", c.em.warm_start}};
  const auto& t = c.theory;
  j["theory"] = {{"lemma_epsilons", eps_list(t.lemma_epsilons)},
                 {"lemma_n0", t.lemma_n0},
                 {"prop41_configs", t.prop41_configs},
                 {"convergence_n0", t.convergence_n0},
                 {"convergence_replicates", t.convergence_replicates},
                 {"convergence_samples", t.convergence_samples},
                 {"convergence_theta", t.convergence_theta},
                 {"theorem42_n0", t.theorem42_n0},
                 {"abc_epsilon_n", eps_list(t.abc_epsilon_n)},
                 {"abc_n0", t.abc_n0},
                 {"abc_half_width", t.abc_half_width},
                 {"abc_replicates", t.abc_replicates},
                 {"abc_accepted", t.abc_accepted}};
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dpsize
