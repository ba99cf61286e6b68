// binfilter: toy example, filtering experiments, oracle batteries and truth
// dumps. Exit codes: 0 ok, 1 usage, 2 check failure, 3 runtime error.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "binfilter/experiment.hpp"
#include "binfilter/oracle_suite.hpp"
#include "binfilter/toy.hpp"

namespace {

using namespace binfilter;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheck = 2;
constexpr int kExitRuntime = 3;

// Raised for bad configuration; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string out = "out";
  bool dump_value_functions = false;
  bool raw_observations = false;
};

ExperimentConfig load_config(const CommonOptions& o) {
  ExperimentConfig cfg;
  try {
    if (!o.config.empty()) cfg.load_file(o.config);
    for (const auto& s : o.sets) cfg.set(s);
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

// Optimal q factors and value along t for one step, on the breakpoints of
// E*_{k:n} and the midpoints of its pieces.
void write_q_curve(std::ostream& os, const ChainPair& chains, const OptimalCoupling& oc, std::size_t k) {
  const std::size_t n = chains.size();
  const StepInputs in = chains.step(k);
  const CplFunction& f = oc.value_functions[k];
  std::vector<double> ts;
  const auto& bp = f.breakpoints();
  for (std::size_t b = 0; b < bp.size(); ++b) {
    ts.push_back(bp[b]);
    if (b + 1 < bp.size()) ts.push_back(0.5 * (bp[b] + bp[b + 1]));
  }
  os << "t,q00,q01,q10,q11,value\n";
  for (double t : ts) {
    const PiTable pi = in.pi(t);
    StepFactor q;
    double v;
    if (k == n - 1) {
      q = final_step_factor(in, t);
      v = final_step_value(in, t);
    } else {
      const StepChoice c = solve_step_at(in, t, oc.value_functions[k + 1]);
      q = complete_factor(in, pi, c.q00, c.q10);
      v = c.value;
    }
    os << format_real(t) << ',' << format_real(q.q00) << ',' << format_real(q.q01) << ','
       << format_real(q.q10) << ',' << format_real(q.q11) << ',' << format_real(v) << '\n';
  }
}

int cmd_toy(const CommonOptions& o) {
  const toy::ToyResult r = toy::run(o.raw_observations);
  OutputDir out(o.out);
  {
    auto f = out.open("prior_chain.csv", {"k", "p0_init_or_p0g0", "p0g1"}, "toy prior chain");
    write_chain_csv(f, r.prior);
  }
  {
    auto f = out.open("posterior_chain.csv", {"k", "p0_init_or_p0g0", "p0g1"}, "toy posterior chain");
    write_chain_csv(f, r.posterior);
  }
  {
    auto f = out.open("rule.csv", {"k", "q00", "q01", "q10", "q11"},
                      "optimal transition rule; row 1 holds q_1^0, q_1^1");
    write_rule_csv(f, r.coupling.rule);
  }
  {
    auto f = out.open("t_star.csv", {"k", "t_star"}, "optimal t_k along the forward pass");
    write_t_star_csv(f, r.coupling.rule);
  }
  if (o.dump_value_functions) {
    const ChainPair chains(r.prior, r.posterior);
    for (std::size_t k = 1; k < r.prior.size(); ++k) {
      const std::string kk = std::to_string(k + 1);
      {
        auto f = out.open("value_function_k" + kk + ".csv", {"t", "value"}, "breakpoints of E*_{k:n}");
        r.coupling.value_functions[k].write_csv(f);
      }
      {
        auto f = out.open("q_curves_k" + kk + ".csv", {"t", "q00", "q01", "q10", "q11", "value"},
                          "optimal q_k factors as functions of t_k");
        write_q_curve(f, chains, r.coupling, k);
      }
    }
  }

  SuiteReport rep;
  const std::size_t n = r.prior.size();
  rep.add("posterior_vs_published", 0, n, toy::posterior_deviation(r.posterior), 1e-4);
  const double table_dev = toy::table_deviation(r.coupling.rule);
  if (o.raw_observations) rep.info("table1_vs_published", 0, n, table_dev);
  else rep.add("table1_vs_published", 0, n, table_dev, 1e-5);
  const auto pe = pushforward_errors(r.coupling.rule, r.prior, r.posterior);
  rep.add("pushforward_marginals", 0, n, pe.marginals, 1e-10);
  rep.add("pushforward_pairs", 0, n, pe.pairs, 1e-10);
  rep.info("pushforward_joint", 0, n, pe.joint);
  rep.add("realised_vs_optimal", 0, n, std::abs(r.coupling.realised_value - r.coupling.optimal_value), 1e-9);
  {
    auto f = out.open("toy_check.csv", {"check", "instance", "n", "value", "tolerance", "pass"},
                      "toy checks against published numbers and exact enumeration");
    rep.write_csv(f);
  }

  nlohmann::ordered_json cfg;
  cfg["observations"] = o.raw_observations ? "raw" : "refined";
  cfg["y"] = r.y;
  cfg["sigma"] = toy::kSigma;
  nlohmann::ordered_json extra;
  extra["expected_unchanged"] = r.coupling.optimal_value;
  out.write_manifest("toy", cfg, extra);

  std::printf("toy: expected unchanged %.10f, Table 1 deviation %.3g, posterior deviation %.3g\n",
              r.coupling.optimal_value, table_dev, toy::posterior_deviation(r.posterior));
  if (!rep.all_pass()) {
    std::fprintf(stderr, "toy: %zu check(s) failed, see toy_check.csv\n", rep.failures());
    return kExitCheck;
  }
  return kExitOk;
}

int cmd_run(const CommonOptions& o) {
  const ExperimentConfig cfg = load_config(o);
  const ExperimentResult res = run_experiment(cfg, o.jobs, o.dump_value_functions);
  OutputDir out(o.out);
  write_experiment_outputs(res, out);
  for (Method m : {Method::kProposed, Method::kAssumed})
    if (cfg.has(m))
      std::printf("run: frobenius %s = %s\n", method_name(m), format_optional(res.frobenius(m)).c_str());
  const auto d = res.diagnostics();
  std::printf("run: pieces max %zu mean %.3f\n", d.max_pieces, d.mean_pieces());
  return kExitOk;
}

int cmd_oracle(const CommonOptions& o) {
  const ExperimentConfig cfg = load_config(o);
  SuiteSettings s;
  s.seed = cfg.seed;
  s.constraint_instances = cfg.oracle_instances;
  s.grid_instances = cfg.oracle_grid_instances;
  s.grid_steps = cfg.oracle_grid_steps;
  s.identity_instances = cfg.oracle_identity_instances;
  const SuiteReport rep = run_oracle_suite(s);
  OutputDir out(o.out);
  {
    auto f = out.open("oracle_report.csv", {"check", "instance", "n", "value", "tolerance", "pass"},
                      "oracle battery results; tolerance inf marks informational rows");
    rep.write_csv(f);
  }
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["constraint_instances"] = s.constraint_instances;
  j["grid_instances"] = s.grid_instances;
  j["grid_steps"] = s.grid_steps;
  j["identity_instances"] = s.identity_instances;
  j["resolve_samples"] = s.resolve_samples;
  out.write_manifest("oracle", j);
  std::printf("oracle: %zu rows, %zu failure(s)\n", rep.rows.size(), rep.failures());
  return rep.all_pass() ? kExitOk : kExitCheck;
}

int cmd_dump_truth(const CommonOptions& o) {
  const ExperimentConfig cfg = load_config(o);
  const TrueModelTable table;
  const auto data = generate_data(cfg, table);
  OutputDir out(o.out);
  write_truth_files(out, data, table);
  if (cfg.process.n <= kMaxFilterNodes) {
    const auto states = exact_filter(table, data.obs, cfg.process.sigma, cfg.process.n, cfg.process.T);
    auto f = out.open("oracle_marginals.csv", {}, "T x n matrix of exact P(x_i^t = 1 | y^{1:t})");
    write_oracle_marginals_csv(f, states);
  }
  out.write_manifest("dump-truth", cfg.to_json());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble updating of binary state vectors"};
  app.require_subcommand(1);
  CommonOptions o;

  auto add_common = [&](CLI::App* sub, bool experiment) {
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_flag("--dump-value-functions", o.dump_value_functions, "write value functions");
    if (!experiment) return;
    sub->add_option("--config", o.config, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.sets, "override one configuration key (KEY=VAL)");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* toy_cmd = app.add_subcommand("toy", "four-node example: posterior, optimal rule, checks");
  add_common(toy_cmd, false);
  toy_cmd->add_flag("--raw-observations", o.raw_observations, "use the printed observations unrefined");
  auto* run_cmd = app.add_subcommand("run", "sequential filtering experiment");
  add_common(run_cmd, true);
  auto* oracle_cmd = app.add_subcommand("oracle", "randomised oracle batteries");
  add_common(oracle_cmd, true);
  auto* truth_cmd = app.add_subcommand("dump-truth", "simulate truth and observations");
  add_common(truth_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (toy_cmd->parsed()) return cmd_toy(o);
    if (run_cmd->parsed()) return cmd_run(o);
    if (oracle_cmd->parsed()) return cmd_oracle(o);
    if (truth_cmd->parsed()) return cmd_dump_truth(o);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
