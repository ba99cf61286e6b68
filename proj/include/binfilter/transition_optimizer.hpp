#pragma once
// Optimal coupling q*(x~ | x, y) between an assumed prior chain f(x) and an
// assumed posterior chain f(x | y): among all couplings whose pushforward of
// f(x) is f(x | y) and that factorise as
//   q(x~_1 | x_1) * prod_k q(x~_k | x~_{k-1}, x_k),
// find the one maximising the expected number of unchanged components.
//
// Backward pass: value functions E*_{k:n}(t_k) over the free parameter
// t_k = pi(x~_{k-1} = 0, x_k = 0), each a continuous piecewise-linear
// function, built by solving one two-variable LP per piece of E*_{k+1:n}
// at a precomputed superset of its breakpoints.
// Forward pass: t_1 = f(x_1 = 0), then re-solve each step at the realised
// t_k* and propagate t_{k+1}* = t_{k+1}(t_k*, q_k*).
//
// Node indices are 0-based: the first factor acts on node 0 and step k >= 1
// couples (x~_{k-1}, x_k).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "binfilter/chain_model.hpp"
#include "binfilter/common.hpp"
#include "binfilter/cpl.hpp"
#include "binfilter/two_var_lp.hpp"

namespace binfilter {

inline constexpr double kDivisionGuard = 1e-14;
inline constexpr double kChainClamp = 1e-9;

struct TBounds {
  double t_min;
  double t_max;
  bool degenerate() const { return t_max - t_min <= CplFunction::kMergeTol; }
};

// Frechet bounds of pi(x~_{k-1} = 0, x_k = 0).
inline TBounds t_bounds(double prior_marg0_k, double post_marg0_km1) {
  const double lo = std::max(0.0, prior_marg0_k + post_marg0_km1 - 1.0);
  const double hi = std::min(prior_marg0_k, post_marg0_km1);
  return {lo, std::max(lo, hi)};
}

// Joint law of (x~_{k-1}, x_k) parametrised by its (0,0) entry.
struct PiTable {
  double p00, p01, p10, p11;
  double sum() const { return p00 + p01 + p10 + p11; }
};

inline PiTable pi_from_t(double t, double prior_marg0_k, double post_marg0_km1) {
  const TBounds b = t_bounds(prior_marg0_k, post_marg0_km1);
  if (t < b.t_min - 1e-12 || t > b.t_max + 1e-12) throw InvalidInput("t outside its Frechet bounds");
  auto nonneg = [](double v) { return v < 0.0 ? 0.0 : v; };
  return {nonneg(t), nonneg(post_marg0_km1 - t), nonneg(prior_marg0_k - t),
          nonneg(1.0 - prior_marg0_k - post_marg0_km1 + t)};
}

// q(x~_1 = 0 | x_1 = i).
struct FirstFactor {
  double q0 = 1.0;
  double q1 = 0.0;
};

// q(x~_k = 0 | x~_{k-1} = i, x_k = j) stored as qij.
struct StepFactor {
  double q00 = 1.0, q01 = 0.0, q10 = 1.0, q11 = 0.0;
  double operator()(int i, int j) const {
    return i == 0 ? (j == 0 ? q00 : q01) : (j == 0 ? q10 : q11);
  }
};

// Rounding-level deviations from 0 or 1 are snapped so that deterministic
// factors come out exactly deterministic.
inline double snap01(double v) {
  v = clamp01(v);
  if (v < 1e-13) return 0.0;
  if (v > 1.0 - 1e-13) return 1.0;
  return v;
}

// t_{k+1} = pi(x~_k = 0, x_{k+1} = 0) given t_k's pair law and q_k.
inline double t_next(const StepFactor& q, double rho0g0, double rho0g1, const PiTable& pi) {
  const double v = pi.p00 * q.q00 * rho0g0 + pi.p01 * q.q01 * rho0g1 + pi.p10 * q.q10 * rho0g0 +
                   pi.p11 * q.q11 * rho0g1;
  return clamp01(v);
}

// First-step variant; equivalent to the pair law (t_1, 0, 1 - t_1, 0).
inline double t_next(double t1, const FirstFactor& q, double rho0g0, double rho0g1) {
  return clamp01(t1 * q.q0 * rho0g0 + (1.0 - t1) * q.q1 * rho0g1);
}

struct TransitionRule {
  FirstFactor first;
  std::vector<StepFactor> steps;  // steps[k-1] couples node k, k in [1, n)
  std::vector<double> t_star;     // t_star[k] for every node; t_star[0] = f(x_1 = 0)

  std::size_t size() const { return steps.size() + 1; }
  const StepFactor& step(std::size_t k) const { return steps.at(k - 1); }

  static TransitionRule identity(std::size_t n) {
    TransitionRule r;
    r.steps.assign(n - 1, StepFactor{});
    r.t_star.assign(n, 0.0);
    return r;
  }

  // Probability that node k of the update is 0 given its parents; k = 0
  // ignores prev_updated.
  double prob_zero(std::size_t k, int prev_updated, int current) const {
    if (k == 0) return current == 0 ? first.q0 : first.q1;
    return step(k)(prev_updated, current);
  }
};

// CSV "k,q00,q01,q10,q11"; row 1 holds q_1^0, q_1^1 in the first two columns.
inline void write_rule_csv(std::ostream& os, const TransitionRule& r) {
  os << "k,q00,q01,q10,q11\n";
  os << "1," << format_real(r.first.q0) << ',' << format_real(r.first.q1) << ",,\n";
  for (std::size_t k = 1; k < r.size(); ++k) {
    const auto& s = r.step(k);
    os << (k + 1) << ',' << format_real(s.q00) << ',' << format_real(s.q01) << ','
       << format_real(s.q10) << ',' << format_real(s.q11) << '\n';
  }
}

inline void write_t_star_csv(std::ostream& os, const TransitionRule& r) {
  os << "k,t_star\n";
  for (std::size_t k = 0; k < r.t_star.size(); ++k)
    os << (k + 1) << ',' << format_real(r.t_star[k]) << '\n';
}

// Everything step k >= 1 needs from the two chains.
struct StepInputs {
  double prior_marg0;      // f(x_k = 0)
  double post_marg0_prev;  // f(x_{k-1} = 0 | y)
  double f00;              // f(x_{k-1} = 0, x_k = 0 | y)
  double f10;              // f(x_{k-1} = 1, x_k = 0 | y)
  double rho0g0 = 0.0;     // f(x_{k+1} = 0 | x_k = 0); unused at the last node
  double rho0g1 = 0.0;     // f(x_{k+1} = 0 | x_k = 1)

  double post_marg0() const { return f00 + f10; }
  TBounds bounds() const { return t_bounds(prior_marg0, post_marg0_prev); }
  PiTable pi(double t) const { return pi_from_t(t, prior_marg0, post_marg0_prev); }
};

struct FirstStepInputs {
  double t1;          // f(x_1 = 0)
  double post_marg0;  // f(x_1 = 0 | y)
  double rho0g0 = 0.0;
  double rho0g1 = 0.0;
};

// Box on (q00, q10) implied by the two equality constraints and 0 <= q <= 1.
struct QBox {
  double lo00, hi00, lo10, hi10;
};

inline QBox q_box(const StepInputs& in, const PiTable& pi) {
  QBox b{0.0, 1.0, 0.0, 1.0};
  if (pi.p00 > kDivisionGuard) {
    b.lo00 = std::max(0.0, (in.f00 - pi.p01) / pi.p00);
    b.hi00 = std::min(1.0, in.f00 / pi.p00);
  }
  if (pi.p10 > kDivisionGuard) {
    b.lo10 = std::max(0.0, (in.f10 - pi.p11) / pi.p10);
    b.hi10 = std::min(1.0, in.f10 / pi.p10);
  }
  b.lo00 = std::min(b.lo00, b.hi00);
  b.lo10 = std::min(b.lo10, b.hi10);
  return b;
}

// Completes (q00, q10) with the eliminated q01, q11.
inline StepFactor complete_factor(const StepInputs& in, const PiTable& pi, double q00, double q10) {
  StepFactor q;
  q.q00 = pi.p00 > kDivisionGuard ? snap01(q00) : 1.0;
  q.q10 = pi.p10 > kDivisionGuard ? snap01(q10) : 1.0;
  q.q01 = pi.p01 > kDivisionGuard ? snap01((in.f00 - pi.p00 * q.q00) / pi.p01) : 0.0;
  q.q11 = pi.p11 > kDivisionGuard ? snap01((in.f10 - pi.p10 * q.q10) / pi.p11) : 0.0;
  return q;
}

// E_pi[1(x_k = x~_k)] for the pair law pi and factor q.
inline double expected_unchanged_step(const PiTable& pi, const StepFactor& q) {
  return pi.p00 * q.q00 + pi.p01 * (1.0 - q.q01) + pi.p10 * q.q10 + pi.p11 * (1.0 - q.q11);
}

// LP for piece `piece` of E*_{k+1:n} (on [band_lo, band_hi]) at parameter t.
// Objective value equals E_k(t, q) + E*^{(j)}_{k+1:n}(t_{k+1}(t, q)).
inline TwoVarLpProblem make_step_lp(const StepInputs& in, double t, const LinearPiece& piece,
                                    double band_lo, double band_hi) {
  const PiTable pi = in.pi(t);
  const QBox box = q_box(in, pi);
  const double drho = in.rho0g0 - in.rho0g1;
  const double gain = 2.0 + piece.slope * drho;
  const double p00 = pi.p00 > kDivisionGuard ? pi.p00 : 0.0;
  const double p10 = pi.p10 > kDivisionGuard ? pi.p10 : 0.0;
  const double big_f = in.post_marg0();

  TwoVarLpProblem lp;
  lp.c00 = gain * p00;
  lp.c10 = gain * p10;
  lp.c_const = (1.0 - in.prior_marg0) - big_f + piece.intercept + piece.slope * big_f * in.rho0g1;
  lp.lo00 = box.lo00;
  lp.hi00 = box.hi00;
  lp.lo10 = box.lo10;
  lp.hi10 = box.hi10;
  lp.w00 = drho * p00;
  lp.w10 = drho * p10;
  lp.w_const = big_f * in.rho0g1;
  lp.band_lo = band_lo;
  lp.band_hi = band_hi;
  return lp;
}

struct StepChoice {
  double value;
  double q00;
  double q10;
  std::size_t piece;
  bool edge_tie;
};

// Solves the piecewise-linear program of step k at one parameter value.
inline std::optional<StepChoice> try_solve_step_at(const StepInputs& in, double t,
                                                   const CplFunction& next) {
  std::optional<StepChoice> best;
  for (std::size_t j = 0; j < next.num_pieces(); ++j) {
    const auto [lo, hi] = next.piece_interval(j);
    const auto sol = try_solve_two_var_lp(make_step_lp(in, t, next.piece_coeffs(j), lo, hi));
    if (!sol) continue;
    if (!best) {
      best = StepChoice{sol->value, sol->q00, sol->q10, j, sol->edge_tie};
      continue;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best->value));
    const bool better = sol->value > best->value + tol;
    const bool tie = std::abs(sol->value - best->value) <= tol;
    const bool lex = sol->q00 > best->q00 + 1e-12 ||
                     (std::abs(sol->q00 - best->q00) <= 1e-12 && sol->q10 > best->q10);
    if (better || (tie && lex)) {
      const double v = better ? sol->value : std::max(sol->value, best->value);
      best = StepChoice{v, sol->q00, sol->q10, j, sol->edge_tie};
    } else if (tie) {
      best->value = std::max(best->value, sol->value);
    }
  }
  return best;
}

inline StepChoice solve_step_at(const StepInputs& in, double t, const CplFunction& next) {
  if (auto c = try_solve_step_at(in, t, next)) return *c;
  throw NumericalError("inconsistent chains: every subproblem infeasible at t = " + format_real(t));
}

// Last node: closed-form optimum q00 = min{1, f00/pi00}, q10 = min{1, f10/pi10}.
inline StepFactor final_step_factor(const StepInputs& in, double t) {
  const PiTable pi = in.pi(t);
  const QBox box = q_box(in, pi);
  return complete_factor(in, pi, box.hi00, box.hi10);
}

// E*_n(t) = 2 min{t, f00} + 2 min{f(x_n=0) - t, f10} + f(x_n=1) - f(x_n=0|y).
inline double final_step_value(const StepInputs& in, double t) {
  return 2.0 * std::min(t, in.f00) + 2.0 * std::min(in.prior_marg0 - t, in.f10) +
         (1.0 - in.prior_marg0) - in.post_marg0();
}

inline CplFunction solve_final_step(const StepInputs& in) {
  const TBounds b = in.bounds();
  if (b.degenerate()) return CplFunction::point(b.t_min, final_step_value(in, b.t_min));
  std::vector<double> ts{b.t_min, b.t_max};
  for (double c : {in.f00, in.prior_marg0 - in.f10})
    if (c > b.t_min && c < b.t_max) ts.push_back(c);
  std::sort(ts.begin(), ts.end());
  std::vector<double> vs;
  vs.reserve(ts.size());
  for (double t : ts) vs.push_back(final_step_value(in, t));
  return CplFunction::from_samples(ts, vs);
}

// Superset of the breakpoints of E*_{k:n}: domain endpoints, the branch
// points of the box-corner formulas, and every t at which a box corner sits
// on a band line t_{k+1}(t, corner) = breakpoint of E*_{k+1:n}.
inline std::vector<double> candidate_breakpoints(const StepInputs& in, const CplFunction& next) {
  const TBounds b = in.bounds();
  if (b.degenerate()) return {b.t_min};
  const double g = in.post_marg0_prev;
  const double p = in.prior_marg0;

  std::vector<double> base{b.t_min, b.t_max};
  for (double c : {in.f00, g - in.f00, p - in.f10, in.f10 - 1.0 + p + g})
    if (c > b.t_min && c < b.t_max) base.push_back(c);
  std::sort(base.begin(), base.end());

  std::vector<double> out = base;
  const double drho = in.rho0g0 - in.rho0g1;
  if (std::abs(drho) > kDivisionGuard) {
    // pi00 * corner00 and pi10 * corner10 are each piecewise linear in t
    // with kinks in `base`, so every corner's band value is linear between
    // consecutive base points.
    auto s_upper00 = [&](double t) { return std::min(t, in.f00); };
    auto s_lower00 = [&](double t) { return std::max(0.0, in.f00 - (g - t)); };
    auto s_upper10 = [&](double t) { return std::min(p - t, in.f10); };
    auto s_lower10 = [&](double t) { return std::max(0.0, in.f10 - (1.0 - p - g + t)); };
    auto corner = [&](int c, double t) {
      const double a = (c & 1) ? s_upper00(t) : s_lower00(t);
      const double d = (c & 2) ? s_upper10(t) : s_lower10(t);
      return a + d;
    };
    const double offset = in.post_marg0() * in.rho0g1;
    for (std::size_t seg = 0; seg + 1 < base.size(); ++seg) {
      const double ta = base[seg], tb = base[seg + 1];
      for (int c = 0; c < 4; ++c) {
        const double sa = corner(c, ta), sb = corner(c, tb);
        for (double bp : next.breakpoints()) {
          const double target = (bp - offset) / drho;
          const double da = sa - target, db = sb - target;
          if (da * db < 0.0) out.push_back(ta + (tb - ta) * da / (da - db));
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> dedup;
  for (double t : out)
    if (dedup.empty() || t - dedup.back() > CplFunction::kMergeTol) dedup.push_back(t);
  return dedup;
}

inline CplFunction solve_intermediate_step(const StepInputs& in, const CplFunction& next) {
  const auto ts = candidate_breakpoints(in, next);
  std::vector<double> vs;
  vs.reserve(ts.size());
  for (double t : ts) vs.push_back(solve_step_at(in, t, next).value);
  if (ts.size() == 1) return CplFunction::point(ts[0], vs[0]);
  return CplFunction::from_samples(ts, vs);
}

struct FirstStepResult {
  double value;
  FirstFactor q;
};

// First node: with t_1 fixed, eliminate q_1^1 through the equality
// f(x~_1 = 0 | y) = t_1 q_1^0 + (1 - t_1) q_1^1 and maximise over q_1^0 on
// an interval, once per piece of E*_{2:n}. `next` may be absent (n = 1).
inline FirstStepResult solve_first_step(const FirstStepInputs& in, const CplFunction* next) {
  const double t1 = in.t1;
  const double g1 = in.post_marg0;
  double lo = 0.0, hi = 1.0;
  if (t1 > kDivisionGuard) {
    lo = std::max(0.0, (g1 - (1.0 - t1)) / t1);
    hi = std::min(1.0, g1 / t1);
  }
  lo = std::min(lo, hi);
  const double w = t1 > kDivisionGuard ? t1 : 0.0;
  const double drho = in.rho0g0 - in.rho0g1;

  auto finish = [&](double q0, double value) {
    FirstFactor q;
    q.q0 = w > 0.0 ? snap01(q0) : 1.0;
    q.q1 = (1.0 - t1) > kDivisionGuard ? snap01((g1 - t1 * q.q0) / (1.0 - t1)) : 0.0;
    return FirstStepResult{value, q};
  };

  // Objective in q0: 2 w q0 + 1 - t1 - g1 + a + b (rho01 g1 + drho w q0).
  if (next == nullptr) return finish(hi, 2.0 * w * hi + 1.0 - t1 - g1);

  std::optional<FirstStepResult> best;
  for (std::size_t j = 0; j < next->num_pieces(); ++j) {
    const auto [blo, bhi] = next->piece_interval(j);
    const LinearPiece pc = next->piece_coeffs(j);
    double a = lo, b = hi;
    const double slope_t2 = drho * w;
    const double t2_at0 = in.rho0g1 * g1;
    if (std::abs(slope_t2) > kDivisionGuard) {
      // Exact band limits; the tolerance only decides emptiness, otherwise
      // the linear piece gets extrapolated past its interval.
      double r1 = (blo - t2_at0) / slope_t2;
      double r2 = (bhi - t2_at0) / slope_t2;
      if (r1 > r2) std::swap(r1, r2);
      a = std::max(a, r1);
      b = std::min(b, r2);
      if (a > b + kLpFeasTol / std::abs(slope_t2)) continue;
      if (a > b) a = b = 0.5 * (a + b);
    } else if (t2_at0 < blo - kLpFeasTol || t2_at0 > bhi + kLpFeasTol) {
      continue;
    }
    const double coef = w * (2.0 + pc.slope * drho);
    const double q0 = coef >= -1e-12 ? b : a;
    const double t2 = t2_at0 + slope_t2 * q0;
    const double value = 2.0 * w * q0 + 1.0 - t1 - g1 + pc.intercept + pc.slope * t2;
    auto cand = finish(q0, value);
    if (!best) {
      best = cand;
      continue;
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best->value));
    if (value > best->value + tol ||
        (std::abs(value - best->value) <= tol && cand.q.q0 > best->q.q0 + 1e-12))
      best = cand;
  }
  if (!best) throw NumericalError("infeasible subproblem at the first node");
  return *best;
}

struct BuildDiagnostics {
  std::size_t max_pieces = 0;
  std::size_t total_pieces = 0;
  std::size_t value_functions = 0;
  std::size_t upper_corner_agree = 0;
  std::size_t upper_corner_disagree = 0;
  std::size_t edge_ties = 0;

  double mean_pieces() const {
    return value_functions ? static_cast<double>(total_pieces) / static_cast<double>(value_functions)
                           : 0.0;
  }
};

struct OptimalCoupling {
  TransitionRule rule;
  // value_functions[k] = E*_{k:n} for k in [1, n); entry 0 is unused.
  std::vector<CplFunction> value_functions;
  double optimal_value = 0.0;   // E*_{1:n}(t_1) from the backward pass
  double realised_value = 0.0;  // sum of per-step E_k at (t_k*, q_k*)
  BuildDiagnostics diagnostics;
};

// Per-step inputs derived from clamped copies of the two chains.
class ChainPair {
 public:
  ChainPair(const BinaryMarkovChain& prior, const BinaryMarkovChain& posterior)
      : prior_(clamped(prior)), posterior_(clamped(posterior)) {
    if (prior.size() != posterior.size()) throw InvalidInput("chains differ in length");
    prior_marg_ = prior_.marginals();
    post_marg_ = posterior_.marginals();
  }

  std::size_t size() const { return prior_.size(); }
  const BinaryMarkovChain& prior() const { return prior_; }
  const BinaryMarkovChain& posterior() const { return posterior_; }

  StepInputs step(std::size_t k) const {
    StepInputs in{};
    in.prior_marg0 = prior_marg_[k];
    in.post_marg0_prev = post_marg_[k - 1];
    const PairTable f = posterior_.pair_joint(k, post_marg_[k - 1]);
    in.f00 = f[0][0];
    in.f10 = f[1][0];
    if (k + 1 < size()) {
      in.rho0g0 = prior_.p0_given(k + 1, 0);
      in.rho0g1 = prior_.p0_given(k + 1, 1);
    }
    return in;
  }

  FirstStepInputs first() const {
    FirstStepInputs in{prior_marg_[0], post_marg_[0]};
    if (size() > 1) {
      in.rho0g0 = prior_.p0_given(1, 0);
      in.rho0g1 = prior_.p0_given(1, 1);
    }
    return in;
  }

 private:
  static BinaryMarkovChain clamped(const BinaryMarkovChain& c) {
    auto cl = [](double p) { return std::clamp(p, kChainClamp, 1.0 - kChainClamp); };
    auto tr = c.transitions();
    for (std::size_t k = 1; k < tr.size(); ++k) tr[k] = {cl(tr[k][0]), cl(tr[k][1])};
    return BinaryMarkovChain(cl(c.init0()), std::move(tr));
  }

  BinaryMarkovChain prior_;
  BinaryMarkovChain posterior_;
  std::vector<double> prior_marg_;
  std::vector<double> post_marg_;
};

inline OptimalCoupling build_optimal_q(const BinaryMarkovChain& prior,
                                       const BinaryMarkovChain& posterior) {
  const ChainPair chains(prior, posterior);
  const std::size_t n = chains.size();
  OptimalCoupling out;
  auto& diag = out.diagnostics;

  // Backward pass.
  std::vector<std::optional<CplFunction>> vf(n);
  for (std::size_t k = n; k-- > 1;) {
    const StepInputs in = chains.step(k);
    vf[k] = (k == n - 1) ? solve_final_step(in) : solve_intermediate_step(in, *vf[k + 1]);
    diag.max_pieces = std::max(diag.max_pieces, vf[k]->num_pieces());
    diag.total_pieces += vf[k]->num_pieces();
    ++diag.value_functions;
  }
  const FirstStepInputs first_in = chains.first();
  const FirstStepResult first = solve_first_step(first_in, n > 1 ? &*vf[1] : nullptr);
  out.optimal_value = first.value;

  // Forward pass.
  TransitionRule& rule = out.rule;
  rule.first = first.q;
  rule.t_star.assign(n, 0.0);
  rule.steps.assign(n - 1, StepFactor{});
  rule.t_star[0] = first_in.t1;
  double realised = first_in.t1 * first.q.q0 + (1.0 - first_in.t1) * (1.0 - first.q.q1);
  if (n > 1) {
    const StepInputs in1 = chains.step(1);
    const TBounds b = in1.bounds();
    rule.t_star[1] = std::clamp(t_next(first_in.t1, first.q, first_in.rho0g0, first_in.rho0g1),
                                b.t_min, b.t_max);
  }
  for (std::size_t k = 1; k < n; ++k) {
    const StepInputs in = chains.step(k);
    const double t = rule.t_star[k];
    const PiTable pi = in.pi(t);
    StepFactor q;
    if (k == n - 1) {
      q = final_step_factor(in, t);
    } else {
      const StepChoice c = solve_step_at(in, t, *vf[k + 1]);
      q = complete_factor(in, pi, c.q00, c.q10);
      if (c.edge_tie) ++diag.edge_ties;
      const QBox box = q_box(in, pi);
      const bool agree = std::abs(c.q00 - box.hi00) <= 1e-9 && std::abs(c.q10 - box.hi10) <= 1e-9;
      ++(agree ? diag.upper_corner_agree : diag.upper_corner_disagree);
      const TBounds nb = chains.step(k + 1).bounds();
      rule.t_star[k + 1] = std::clamp(t_next(q, in.rho0g0, in.rho0g1, pi), nb.t_min, nb.t_max);
    }
    rule.steps[k - 1] = q;
    realised += expected_unchanged_step(pi, q);
  }
  out.realised_value = realised;

  out.value_functions.reserve(n);
  out.value_functions.push_back(CplFunction::point(0.0, 0.0));
  for (std::size_t k = 1; k < n; ++k) out.value_functions.push_back(*vf[k]);
  return out;
}

}  // namespace binfilter
