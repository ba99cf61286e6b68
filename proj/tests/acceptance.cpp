// Acceptance battery: one PASS/FAIL line per criterion. Exit status is
// nonzero when any hard criterion fails; criterion 10 only warns.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "binfilter/experiment.hpp"
#include "binfilter/oracle_suite.hpp"
#include "binfilter/toy.hpp"

using namespace binfilter;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  int failures = 0;

  void report(int id, bool pass, const std::string& detail, bool warn_only = false) {
    const char* tag = pass ? "PASS" : (warn_only ? "WARN" : "FAIL");
    if (!pass && !warn_only) ++failures;
    std::cout << "criterion " << id << ": " << tag << " - " << detail << std::endl;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Number of differing files between two output directories (same file set required).
std::size_t compare_dirs(const fs::path& a, const fs::path& b, std::size_t& files) {
  std::size_t diff = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const auto other = b / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++diff;
  }
  for (const auto& e : fs::directory_iterator(b))
    if (!fs::exists(a / e.path().filename())) ++diff;
  return diff;
}

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("binfilter_accept_" + name);
  fs::remove_all(p);
  return p;
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void criterion_1(Outcome& out) {
  const auto start = Clock::now();
  const auto r = toy::run(true);
  const double dev = toy::posterior_deviation(r.posterior);
  const double secs = seconds_since(start);
  out.report(1, dev <= 1e-4 && secs < 1.0,
             "toy posterior from printed y: max deviation " + sci(dev) + " (tol 1e-4), " + sci(secs) + " s");
}

void criterion_2(Outcome& out) {
  const auto start = Clock::now();
  const auto r = toy::run();
  const double dev = toy::table_deviation(r.coupling.rule);
  const double secs = seconds_since(start);
  out.report(2, dev <= 1e-5 && secs < 1.0,
             "toy coupling vs published rule: max deviation " + sci(dev) + " (tol 1e-5), " + sci(secs) + " s");
}

struct CplStats {
  double resolve = 0.0;
  bool slopes = true;
  std::size_t functions = 0;

  void add(const ResolveCheck& rc) {
    resolve = std::max(resolve, rc.max_error);
    slopes = slopes && rc.final_slopes_ok;
    functions += rc.functions;
  }
};

constexpr std::uint64_t kSuiteSeed = 1;

void criterion_3(Outcome& out, CplStats& cpl) {
  const auto start = Clock::now();
  PushforwardErrors worst;
  for (std::size_t i = 0; i < 200; ++i) {
    const std::size_t n = 2 + i % 7;
    const auto inst = random_instance(kSuiteSeed, SuiteKind::kConstraint, i, n);
    const auto oc = build_optimal_q(inst.prior, inst.posterior);
    const auto e = pushforward_errors(oc.rule, inst.prior, inst.posterior);
    worst.joint = std::max(worst.joint, e.joint);
    worst.marginals = std::max(worst.marginals, e.marginals);
    worst.pairs = std::max(worst.pairs, e.pairs);
    Rng rng = make_stream(kSuiteSeed, i, static_cast<std::uint64_t>(SuiteKind::kResolve), StreamPurpose::kOracleSuite);
    cpl.add(check_value_functions(inst.prior, inst.posterior, oc, 1000, rng));
  }
  const double secs = seconds_since(start);
  out.report(3, worst.joint <= 1e-10 && secs < 60.0,
             "200 instances: max |pushforward - posterior| over full joint " + sci(worst.joint) +
                 " (tol 1e-10); node laws " + sci(worst.marginals) + ", adjacent pairs " + sci(worst.pairs) + ", " +
                 sci(secs) + " s");
}

void criterion_4(Outcome& out, CplStats& cpl) {
  const auto start = Clock::now();
  double above = -1e300, gap = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const std::size_t n = 2 + i % 3;
    const auto inst = random_instance(kSuiteSeed, SuiteKind::kGrid, i, n);
    const auto oc = build_optimal_q(inst.prior, inst.posterior);
    const double grid = grid_dp_optimum(inst.prior, inst.posterior, 2000);
    above = std::max(above, grid - oc.optimal_value);
    gap = std::max(gap, oc.optimal_value - grid);
    Rng rng = make_stream(kSuiteSeed, 1000 + i, static_cast<std::uint64_t>(SuiteKind::kResolve),
                          StreamPurpose::kOracleSuite);
    cpl.add(check_value_functions(inst.prior, inst.posterior, oc, 1000, rng));
  }
  const double secs = seconds_since(start);
  out.report(4, above <= 1e-9 && gap <= 5e-3 && secs < 600.0,
             "50 instances: max(grid - main) " + sci(above) + " (tol 1e-9), max(main - grid) " + sci(gap) +
                 " (tol 5e-3), " + sci(secs) + " s");
}

void criterion_5(Outcome& out) {
  double value_dev = 0.0, rule_dev = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t n = 1 + i % 8;
    const auto inst = random_instance(kSuiteSeed, SuiteKind::kIdentity, i, n);
    const auto oc = build_optimal_q(inst.prior, inst.prior);
    value_dev = std::max(value_dev, std::abs(oc.optimal_value - static_cast<double>(n)));
    rule_dev = std::max({rule_dev, std::abs(oc.rule.first.q0 - 1.0), std::abs(oc.rule.first.q1)});
    for (std::size_t k = 1; k < n; ++k) {
      const auto& q = oc.rule.step(k);
      rule_dev = std::max({rule_dev, std::abs(q.q00 - 1.0), std::abs(q.q01), std::abs(q.q10 - 1.0), std::abs(q.q11)});
    }
  }
  out.report(5, value_dev <= 1e-9 && rule_dev == 0.0,
             "20 chains: max |value - n| " + sci(value_dev) + ", max deviation from identity rule " + sci(rule_dev));
}

void criterion_6(Outcome& out, const CplStats& cpl) {
  out.report(6, cpl.resolve <= 1e-9 && cpl.slopes,
             std::to_string(cpl.functions) + " value functions: max |re-solve - eval| " + sci(cpl.resolve) +
                 " (tol 1e-9), final-step slopes in {-2,0,2}: " + (cpl.slopes ? "yes" : "no"));
}

void criterion_7(Outcome& out) {
  const auto start = Clock::now();
  const auto r = toy::run();
  const std::size_t N = 1'000'000;
  Rng sr = make_stream(7, 0, 0, StreamPurpose::kTest), ur = make_stream(7, 0, 1, StreamPurpose::kTest);
  std::vector<double> zeros(toy::kNodes, 0.0);
  for (std::size_t s = 0; s < N; ++s) {
    const auto x = sample_chain(r.prior, sr);
    const auto u = update_member(x, r.coupling.rule, ur);
    for (std::size_t k = 0; k < toy::kNodes; ++k) zeros[k] += u[k] == 0;
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < toy::kNodes; ++k) {
    const double p = zeros[k] / static_cast<double>(N);
    const double target = toy::kPosteriorMarg0[k];
    const double se = std::sqrt(target * (1.0 - target) / static_cast<double>(N));
    worst = std::max(worst, std::abs(p - target) / se);
  }
  const double secs = seconds_since(start);
  out.report(7, worst <= 3.0 && secs < 30.0,
             "10^6 updated toy samples: max |marginal - published| = " + sci(worst) + " SE (tol 3), " + sci(secs) +
                 " s");
}

RunDiagnostics criterion_8(Outcome& out) {
  const auto start = Clock::now();
  int wins = 0;
  std::ostringstream ratios;
  RunDiagnostics diag;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig cfg;
    cfg.set("n=12");
    cfg.set("T=40");
    cfg.set("M=20");
    cfg.set("B=50");
    cfg.set("sigma=2");
    cfg.set("methods=proposed,assumed,exact");
    cfg.seed = seed;
    const auto res = run_experiment(cfg, jobs());
    const double ratio = *res.frobenius(Method::kProposed) / *res.frobenius(Method::kAssumed);
    wins += ratio < 0.9;
    ratios << (seed > 1 ? " " : "") << sci(ratio);
    diag.add(res.diagnostics());
  }
  const double secs = seconds_since(start);
  out.report(8, wins >= 9 && secs < 1200.0,
             std::to_string(wins) + "/10 seeds with Frobenius ratio < 0.9 (need 9); ratios " + ratios.str() + ", " +
                 sci(secs) + " s");
  return diag;
}

void criterion_10(Outcome& out, const RunDiagnostics& diag) {
  out.report(10, diag.max_pieces < 64 && diag.mean_pieces() < 10.0,
             "max pieces " + std::to_string(diag.max_pieces) + " (< 64), mean pieces " + sci(diag.mean_pieces()) +
                 " over " + std::to_string(diag.value_functions) + " value functions",
             true);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BINFILTER_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_9(Outcome& out) {
  std::size_t files = 0, diff = 0;
  bool ran = true;

  // Library path: identical config and seed, different thread counts.
  ExperimentConfig cfg;
  cfg.set("n=10");
  cfg.set("T=20");
  cfg.set("B=6");
  cfg.set("M=10");
  cfg.set("methods=proposed,assumed,exact");
  cfg.set("snapshots=true");
  cfg.seed = 9;
  const auto a = fresh_dir("lib_a"), b = fresh_dir("lib_b");
  {
    OutputDir o(a);
    write_experiment_outputs(run_experiment(cfg, 1, true), o);
  }
  {
    OutputDir o(b);
    write_experiment_outputs(run_experiment(cfg, jobs() + 1, true), o);
  }
  diff += compare_dirs(a, b, files);

  // Every CLI subcommand, run twice.
  const std::vector<std::pair<std::string, std::string>> commands{
      {"toy", "toy --dump-value-functions"},
      {"run", "run --set n=8 --set T=12 --set B=4 --set M=8 --set methods=proposed,assumed,exact --seed 5"},
      {"oracle", "oracle --set oracle_instances=14 --set oracle_grid_instances=2 --set oracle_identity_instances=4"},
      {"truth", "dump-truth --set n=6 --set T=8 --seed 5"}};
  std::vector<fs::path> dirs{a, b};
  for (const auto& [name, args] : commands) {
    const auto x = fresh_dir(name + "_a"), y = fresh_dir(name + "_b");
    ran = ran && run_cli(args + " --out " + x.string()) == 0 && run_cli(args + " --out " + y.string()) == 0;
    diff += compare_dirs(x, y, files);
    dirs.push_back(x);
    dirs.push_back(y);
  }
  for (const auto& d : dirs) fs::remove_all(d);
  out.report(9, ran && diff == 0 && files > 0,
             std::to_string(files) + " output files compared across reruns, " + std::to_string(diff) + " differ");
}

}  // namespace

int main() {
  Outcome out;
  try {
    CplStats cpl;
    criterion_1(out);
    criterion_2(out);
    criterion_3(out, cpl);
    criterion_4(out, cpl);
    criterion_5(out);
    criterion_6(out, cpl);
    criterion_7(out);
    const auto diag = criterion_8(out);
    criterion_9(out);
    criterion_10(out, diag);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 3;
  }
  std::cout << (out.failures ? std::to_string(out.failures) + " hard criteria failed" : "all hard criteria passed")
            << std::endl;
  return out.failures ? 1 : 0;
}
