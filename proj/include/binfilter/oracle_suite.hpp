#pragma once
// Randomised batteries comparing the coupling solver against the oracles:
// exact pushforward, grid-DP optimum, identity degeneracy and value-function
// integrity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "binfilter/chain_model.hpp"
#include "binfilter/common.hpp"
#include "binfilter/oracle.hpp"
#include "binfilter/rng.hpp"
#include "binfilter/transition_optimizer.hpp"

namespace binfilter {

inline BinaryMarkovChain random_chain(std::size_t n, Rng& rng, double lo = 0.01, double hi = 0.99) {
  auto draw = [&] { return lo + (hi - lo) * uniform01(rng); };
  std::vector<std::array<double, 2>> tr(n, {0.0, 0.0});
  const double init0 = draw();
  for (std::size_t k = 1; k < n; ++k) tr[k] = {draw(), draw()};
  return BinaryMarkovChain(init0, std::move(tr));
}

struct ChainInstance {
  BinaryMarkovChain prior;
  BinaryMarkovChain posterior;
};

// Kinds keep the instance streams of different batteries apart.
enum class SuiteKind : std::uint64_t { kConstraint = 1, kGrid = 2, kIdentity = 3, kResolve = 4 };

inline ChainInstance random_instance(std::uint64_t seed, SuiteKind kind, std::size_t index, std::size_t n) {
  Rng rng = make_stream(seed, index, static_cast<std::uint64_t>(kind), StreamPurpose::kOracleSuite);
  BinaryMarkovChain prior = random_chain(n, rng);
  BinaryMarkovChain post = random_chain(n, rng);
  return {std::move(prior), std::move(post)};
}

struct PushforwardErrors {
  double marginals = 0.0;  // node laws of x~
  double pairs = 0.0;      // laws of adjacent pairs (x~_{k-1}, x~_k)
  double joint = 0.0;      // full law over 2^n states
};

// Compares the exact pushforward of the prior through the rule with the
// posterior chain. The factorised coupling constrains node and adjacent-pair
// laws only; the full joint need not match since x~ is not Markov in general.
inline PushforwardErrors pushforward_errors(const TransitionRule& rule, const BinaryMarkovChain& prior,
                                            const BinaryMarkovChain& posterior) {
  const std::size_t n = prior.size();
  const auto pf = enumerate_pushforward(rule, prior);
  const auto target = chain_joint(posterior);
  PushforwardErrors e;
  for (std::size_t x = 0; x < target.size(); ++x) e.joint = std::max(e.joint, std::abs(pf.dist[x] - target[x]));
  for (std::size_t k = 0; k < n; ++k) {
    double a = 0.0, b = 0.0;
    for (std::size_t x = 0; x < target.size(); ++x)
      if (!((x >> k) & 1u)) {
        a += pf.dist[x];
        b += target[x];
      }
    e.marginals = std::max(e.marginals, std::abs(a - b));
  }
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t pattern = 0; pattern < 4; ++pattern) {
      double a = 0.0, b = 0.0;
      for (std::size_t x = 0; x < target.size(); ++x)
        if (((x >> (k - 1)) & 3u) == pattern) {
          a += pf.dist[x];
          b += target[x];
        }
      e.pairs = std::max(e.pairs, std::abs(a - b));
    }
  }
  return e;
}

struct ResolveCheck {
  double max_error = 0.0;        // |re-solved value - eval()| over all samples
  bool final_slopes_ok = true;   // every slope of E*_n in {-2, 0, 2}
  std::size_t functions = 0;
};

// Re-solves the per-step program at `samples` random interior t of every
// value function and compares with the stored piecewise-linear function.
inline ResolveCheck check_value_functions(const BinaryMarkovChain& prior, const BinaryMarkovChain& posterior,
                                          const OptimalCoupling& oc, std::size_t samples, Rng& rng) {
  const ChainPair chains(prior, posterior);
  const std::size_t n = chains.size();
  ResolveCheck out;
  for (std::size_t k = 1; k < n; ++k) {
    const CplFunction& f = oc.value_functions[k];
    const StepInputs in = chains.step(k);
    ++out.functions;
    if (k == n - 1 && !f.is_point()) {
      for (std::size_t j = 0; j < f.num_pieces(); ++j) {
        const double s = f.piece_coeffs(j).slope;
        const bool ok = std::abs(s - 2.0) <= 1e-9 || std::abs(s) <= 1e-9 || std::abs(s + 2.0) <= 1e-9;
        out.final_slopes_ok = out.final_slopes_ok && ok;
      }
    }
    for (std::size_t s = 0; s < samples; ++s) {
      const double t = f.is_point() ? f.lower() : f.lower() + (f.upper() - f.lower()) * uniform01(rng);
      const double direct = k == n - 1 ? final_step_value(in, t) : solve_step_at(in, t, oc.value_functions[k + 1]).value;
      out.max_error = std::max(out.max_error, std::abs(direct - f.eval(t)));
    }
  }
  return out;
}

struct SuiteRow {
  std::string check;
  std::size_t instance;
  std::size_t n;
  double value;
  double tolerance;  // +inf marks an informational row
  bool pass;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;

  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const SuiteRow& r) { return r.pass; });
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const SuiteRow& r) { return !r.pass; }));
  }

  void add(std::string check, std::size_t instance, std::size_t n, double value, double tol) {
    rows.push_back({std::move(check), instance, n, value, tol, value <= tol});
  }

  void info(std::string check, std::size_t instance, std::size_t n, double value) {
    rows.push_back({std::move(check), instance, n, value, std::numeric_limits<double>::infinity(), true});
  }

  void write_csv(std::ostream& os) const {
    os << "check,instance,n,value,tolerance,pass\n";
    // Informational rows carry tolerance "inf".
    for (const auto& r : rows)
      os << r.check << ',' << r.instance << ',' << r.n << ',' << format_real(r.value) << ','
         << (std::isinf(r.tolerance) ? std::string("inf") : format_real(r.tolerance)) << ',' << (r.pass ? 1 : 0) << '\n';
  }
};

struct SuiteSettings {
  std::uint64_t seed = 1;
  std::size_t constraint_instances = 200;  // n cycles through 2..8
  std::size_t grid_instances = 50;         // n cycles through 2..4
  std::size_t grid_steps = 2000;
  std::size_t identity_instances = 20;     // n cycles through 1..8
  std::size_t resolve_samples = 1000;
};

inline SuiteReport run_oracle_suite(const SuiteSettings& s) {
  SuiteReport rep;
  for (std::size_t i = 0; i < s.constraint_instances; ++i) {
    const std::size_t n = 2 + i % 7;
    const auto inst = random_instance(s.seed, SuiteKind::kConstraint, i, n);
    const auto oc = build_optimal_q(inst.prior, inst.posterior);
    const auto pe = pushforward_errors(oc.rule, inst.prior, inst.posterior);
    rep.add("pushforward_marginals", i, n, pe.marginals, 1e-10);
    rep.add("pushforward_pairs", i, n, pe.pairs, 1e-10);
    rep.info("pushforward_joint", i, n, pe.joint);
    rep.add("realised_vs_optimal", i, n, std::abs(oc.realised_value - oc.optimal_value), 1e-9);
    const auto pf = enumerate_pushforward(oc.rule, inst.prior);
    rep.add("enumerated_vs_optimal", i, n, std::abs(pf.expected_unchanged - oc.optimal_value), 1e-9);
    Rng rng = make_stream(s.seed, i, static_cast<std::uint64_t>(SuiteKind::kResolve), StreamPurpose::kOracleSuite);
    const auto rc = check_value_functions(inst.prior, inst.posterior, oc, s.resolve_samples, rng);
    rep.add("resolve_vs_eval", i, n, rc.max_error, 1e-9);
    rep.add("final_slopes", i, n, rc.final_slopes_ok ? 0.0 : 1.0, 0.0);
  }
  for (std::size_t i = 0; i < s.grid_instances; ++i) {
    const std::size_t n = 2 + i % 3;
    const auto inst = random_instance(s.seed, SuiteKind::kGrid, i, n);
    const auto oc = build_optimal_q(inst.prior, inst.posterior);
    const double grid = grid_dp_optimum(inst.prior, inst.posterior, s.grid_steps);
    rep.add("grid_not_above_main", i, n, grid - oc.optimal_value, 1e-9);
    rep.add("grid_gap", i, n, oc.optimal_value - grid, 5e-3);
  }
  for (std::size_t i = 0; i < s.identity_instances; ++i) {
    const std::size_t n = 1 + i % 8;
    const auto inst = random_instance(s.seed, SuiteKind::kIdentity, i, n);
    const auto oc = build_optimal_q(inst.prior, inst.prior);
    rep.add("identity_value", i, n, std::abs(oc.optimal_value - static_cast<double>(n)), 1e-9);
    double dev = std::max(std::abs(oc.rule.first.q0 - 1.0), std::abs(oc.rule.first.q1));
    for (std::size_t k = 1; k < n; ++k) {
      const auto& q = oc.rule.step(k);
      dev = std::max({dev, std::abs(q.q00 - 1.0), std::abs(q.q01), std::abs(q.q10 - 1.0), std::abs(q.q11)});
    }
    rep.add("identity_rule", i, n, dev, 1e-12);
  }
  return rep;
}

}  // namespace binfilter
