#pragma once
// Brute-force references used to check everything else:
//  - exact filtering of the true process over all 2^n states (small n),
//  - exact pushforward of a prior chain through a transition rule,
//  - a grid dynamic program for the optimal expected number of unchanged
//    components. The grid DP deliberately shares nothing with the
//    vertex-enumeration path in transition_optimizer.hpp.
//
// State encoding: bit i of an index is x_i (node i, 0-based).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "binfilter/chain_model.hpp"
#include "binfilter/common.hpp"
#include "binfilter/transition_optimizer.hpp"
#include "binfilter/true_process.hpp"

namespace binfilter {

inline constexpr std::size_t kMaxFilterNodes = 14;
inline constexpr std::size_t kMaxPushforwardNodes = 10;
inline constexpr std::size_t kMaxGridDpNodes = 5;

struct ExactFilterState {
  std::size_t n = 0;
  std::vector<double> probs;  // 2^n entries

  double prob_one(std::size_t i) const {
    double s = 0.0;
    for (std::size_t x = 0; x < probs.size(); ++x)
      if ((x >> i) & 1u) s += probs[x];
    return s;
  }

  std::vector<double> marginals_one() const {
    std::vector<double> m(n, 0.0);
    for (std::size_t x = 0; x < probs.size(); ++x)
      for (std::size_t i = 0; i < n; ++i)
        if ((x >> i) & 1u) m[i] += probs[x];
    return m;
  }
};

// One step of the true dynamics applied to a law over 2^n states.
// Sites are processed left to right over an (n+1)-bit working index: bit j
// holds the current x_j for j <= i and the previous x_j for j > i, the extra
// bit n holds the previous x_i (still needed by site i+1). Cost O(n 2^{n+1}).
inline std::vector<double> predict_true_process(const TrueModelTable& table, std::span<const double> law,
                                                std::size_t n) {
  const std::size_t states = std::size_t{1} << n;
  if (law.size() != states) throw InvalidInput("law has wrong size");
  const std::size_t extra = states;  // bit n
  std::vector<double> cur(2 * states, 0.0), nxt(2 * states, 0.0);
  // Before site 0 the extra bit stands for the out-of-lattice left neighbour.
  std::copy(law.begin(), law.end(), cur.begin());

  for (std::size_t i = 0; i < n; ++i) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    const std::size_t bit_i = std::size_t{1} << i;
    for (std::size_t idx = 0; idx < 2 * states; ++idx) {
      const double w = cur[idx];
      if (w == 0.0) continue;
      const int left_prev = i > 0 ? static_cast<int>((idx & extra) != 0) : kOutOfLattice;
      const int self_prev = static_cast<int>((idx & bit_i) != 0);
      const int right_prev = i + 1 < n ? static_cast<int>((idx >> (i + 1)) & 1u) : kOutOfLattice;
      const int left_curr = i > 0 ? static_cast<int>((idx >> (i - 1)) & 1u) : kOutOfLattice;
      const double p1 = cond_prob_one(table, left_prev, self_prev, right_prev, left_curr);
      // Drop previous x_{i-1} (old extra), move previous x_i to the extra bit.
      const std::size_t base = (idx & ~extra & ~bit_i) | (self_prev ? extra : 0);
      nxt[base] += w * (1.0 - p1);
      nxt[base | bit_i] += w * p1;
    }
    std::swap(cur, nxt);
  }
  std::vector<double> out(states);
  for (std::size_t x = 0; x < states; ++x) out[x] = cur[x] + cur[x | extra];
  return out;
}

// Multiplies by prod_i N(y_i; x_i, sigma^2) and renormalises.
inline void condition_on_observation(std::vector<double>& law, std::span<const double> y, double sigma) {
  const std::size_t n = y.size();
  if (law.size() != (std::size_t{1} << n)) throw InvalidInput("observation length does not match law");
  // log N(y; 1) - log N(y; 0) = (2y - 1) / (2 sigma^2)
  std::vector<double> llr(n);
  for (std::size_t i = 0; i < n; ++i) llr[i] = (2.0 * y[i] - 1.0) / (2.0 * sigma * sigma);
  std::vector<double> logw(law.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < law.size(); ++x) {
    if (law[x] <= 0.0) {
      logw[x] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double l = std::log(law[x]);
    for (std::size_t i = 0; i < n; ++i)
      if ((x >> i) & 1u) l += llr[i];
    logw[x] = l;
    mx = std::max(mx, l);
  }
  if (!std::isfinite(mx)) throw NumericalError("observation has zero likelihood under the law");
  double z = 0.0;
  for (std::size_t x = 0; x < law.size(); ++x) {
    law[x] = std::exp(logw[x] - mx);
    z += law[x];
  }
  for (auto& p : law) p /= z;
}

// Filtering laws p(x^t | y^{1:t}) for t = 1..T, starting from the all-zero
// state at t = 0.
inline std::vector<ExactFilterState> exact_filter(const TrueModelTable& table,
                                                  const std::vector<std::vector<double>>& y_all,
                                                  double sigma, std::size_t n, std::size_t T) {
  if (n < 1 || n > kMaxFilterNodes) throw InvalidInput("exact_filter supports 1 <= n <= 14");
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  if (y_all.size() < T) throw InvalidInput("fewer observation rows than T");
  std::vector<double> law(std::size_t{1} << n, 0.0);
  law[0] = 1.0;
  std::vector<ExactFilterState> out;
  out.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    if (y_all[t].size() != n) throw InvalidInput("observation row has wrong length");
    law = predict_true_process(table, law, n);
    condition_on_observation(law, y_all[t], sigma);
    out.push_back({n, law});
  }
  return out;
}

inline void write_oracle_marginals_csv(std::ostream& os, const std::vector<ExactFilterState>& states) {
  std::vector<std::vector<double>> rows;
  rows.reserve(states.size());
  for (const auto& s : states) rows.push_back(s.marginals_one());
  write_real_matrix_csv(os, rows);
}

// Joint law of a chain over all 2^n states.
inline std::vector<double> chain_joint(const BinaryMarkovChain& chain) {
  const std::size_t n = chain.size();
  if (n > kMaxFilterNodes) throw InvalidInput("chain too long to enumerate");
  std::vector<double> p(std::size_t{1} << n);
  for (std::size_t x = 0; x < p.size(); ++x) {
    double v = (x & 1u) ? 1.0 - chain.init0() : chain.init0();
    for (std::size_t k = 1; k < n && v > 0.0; ++k)
      v *= chain.transition(k, static_cast<int>((x >> k) & 1u), static_cast<int>((x >> (k - 1)) & 1u));
    p[x] = v;
  }
  return p;
}

struct Pushforward {
  std::vector<double> dist;         // law of x~ over 2^n states
  double expected_unchanged = 0.0;  // E[#{i : x_i = x~_i}]
};

// q(x~ | x) as the product of its factors.
inline double rule_prob(const TransitionRule& q, std::size_t x, std::size_t xt, std::size_t n) {
  auto bit = [](std::size_t v, std::size_t i) { return static_cast<int>((v >> i) & 1u); };
  double p = 1.0;
  for (std::size_t k = 0; k < n && p > 0.0; ++k) {
    const double p0 = q.prob_zero(k, k > 0 ? bit(xt, k - 1) : 0, bit(x, k));
    p *= bit(xt, k) ? 1.0 - p0 : p0;
  }
  return p;
}

inline Pushforward enumerate_pushforward(const TransitionRule& q, const BinaryMarkovChain& prior) {
  const std::size_t n = prior.size();
  if (n > kMaxPushforwardNodes) throw InvalidInput("enumerate_pushforward supports n <= 10");
  if (q.size() != n) throw InvalidInput("rule and chain differ in length");
  const auto f = chain_joint(prior);
  Pushforward out;
  out.dist.assign(f.size(), 0.0);
  for (std::size_t x = 0; x < f.size(); ++x) {
    if (f[x] == 0.0) continue;
    for (std::size_t xt = 0; xt < f.size(); ++xt) {
      const double w = f[x] * rule_prob(q, x, xt, n);
      out.dist[xt] += w;
      out.expected_unchanged += w * static_cast<double>(n - static_cast<std::size_t>(std::popcount(x ^ xt)));
    }
  }
  return out;
}

namespace detail {

// Value function on sorted grid nodes, linearly interpolated.
struct GridFunction {
  std::vector<double> t;
  std::vector<double> v;

  double operator()(double x) const {
    if (v.size() == 1) return v.front();
    x = std::clamp(x, t.front(), t.back());
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const auto j = std::min(static_cast<std::size_t>(it - t.begin()), t.size() - 1) - 1;
    const double w = (x - t[j]) / (t[j + 1] - t[j]);
    return v[j] + w * (v[j + 1] - v[j]);
  }
};

// Maximises a function of (a, b) over a box by repeatedly scanning a dense
// grid and zooming in on the best cell.
template <class F>
double zoom_maximise_2d(F&& f, double a_lo, double a_hi, double b_lo, double b_hi) {
  constexpr int kPts = 21;
  constexpr int kRounds = 8;
  const double A_lo = a_lo, A_hi = a_hi, B_lo = b_lo, B_hi = b_hi;
  double best = -std::numeric_limits<double>::infinity();
  for (int round = 0; round < kRounds; ++round) {
    const double da = (a_hi - a_lo) / (kPts - 1), db = (b_hi - b_lo) / (kPts - 1);
    double ba = a_lo, bb = b_lo;
    for (int i = 0; i < kPts; ++i) {
      const double a = i == kPts - 1 ? a_hi : a_lo + da * i;
      for (int j = 0; j < kPts; ++j) {
        const double b = j == kPts - 1 ? b_hi : b_lo + db * j;
        const double v = f(a, b);
        if (v > best) {
          best = v;
          ba = a;
          bb = b;
        }
      }
    }
    a_lo = std::max(A_lo, ba - 2 * da);
    a_hi = std::min(A_hi, ba + 2 * da);
    b_lo = std::max(B_lo, bb - 2 * db);
    b_hi = std::min(B_hi, bb + 2 * db);
  }
  return best;
}

// Feasible range of q_{i0} when q_{i1} = (f - p0 * q_{i0}) / p1 must lie in [0, 1].
inline void feasible_range(double p0, double p1, double f, double& lo, double& hi) {
  constexpr double kTiny = 1e-14;
  if (p0 <= kTiny) {
    lo = hi = 1.0;
    return;
  }
  hi = std::min(1.0, f / p0);
  lo = p1 <= kTiny ? hi : std::max(0.0, (f - p1) / p0);
  lo = std::min(lo, hi);
}

inline double solve_q1(double p0, double p1, double f, double q0) {
  if (p1 <= 1e-14) return 0.0;
  return std::clamp((f - p0 * q0) / p1, 0.0, 1.0);
}

}  // namespace detail

// Lower bound on the maximal expected number of unchanged components, from a
// t-grid DP with grid_steps uniform intervals per node. Uses the raw chains
// with their own clamping so that it sees the same problem as the solver.
inline double grid_dp_optimum(const BinaryMarkovChain& prior_in, const BinaryMarkovChain& post_in,
                              std::size_t grid_steps) {
  const std::size_t n = prior_in.size();
  if (n < 1 || n > kMaxGridDpNodes) throw InvalidInput("grid_dp_optimum supports 1 <= n <= 5");
  if (post_in.size() != n) throw InvalidInput("chains differ in length");
  if (grid_steps < 1000) throw InvalidInput("grid_steps must be >= 1000");

  auto clamp_chain = [](const BinaryMarkovChain& c) {
    auto cl = [](double p) { return std::clamp(p, kChainClamp, 1.0 - kChainClamp); };
    auto tr = c.transitions();
    for (std::size_t k = 1; k < tr.size(); ++k) tr[k] = {cl(tr[k][0]), cl(tr[k][1])};
    return BinaryMarkovChain(cl(c.init0()), std::move(tr));
  };
  const BinaryMarkovChain prior = clamp_chain(prior_in), post = clamp_chain(post_in);
  const auto pm = prior.marginals();
  const auto gm = post.marginals();

  // V[k] over t_k = P(x~_{k-1} = 0, x_k = 0), k >= 1.
  detail::GridFunction next;
  bool have_next = false;
  for (std::size_t k = n; k-- > 1;) {
    const double p = pm[k], g = gm[k - 1];
    const double f00 = g * post.p0_given(k, 0);
    const double f10 = (1.0 - g) * post.p0_given(k, 1);
    const double r0 = k + 1 < n ? prior.p0_given(k + 1, 0) : 0.0;
    const double r1 = k + 1 < n ? prior.p0_given(k + 1, 1) : 0.0;
    // Uniform nodes plus the two points where the step reward itself has a
    // kink (q00 or q10 reaching 1 exactly); extra nodes only tighten the bound.
    const double lo = std::max(0.0, p + g - 1.0);
    const double hi = std::max(lo, std::min(p, g));
    detail::GridFunction cur;
    if (hi - lo > 1e-12) {
      for (std::size_t s = 0; s <= grid_steps; ++s)
        cur.t.push_back(s == grid_steps ? hi : lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(grid_steps));
      for (double c : {f00, p - f10})
        if (c > lo && c < hi) cur.t.push_back(c);
      std::sort(cur.t.begin(), cur.t.end());
      cur.t.erase(std::unique(cur.t.begin(), cur.t.end(), [](double a, double b) { return b - a <= 1e-15; }),
                  cur.t.end());
    } else {
      cur.t.push_back(lo);
    }
    cur.v.resize(cur.t.size());
    for (std::size_t s = 0; s < cur.t.size(); ++s) {
      const double t = cur.t[s];
      // Pair law of (x~_{k-1}, x_k).
      const double a00 = std::max(0.0, t), a01 = std::max(0.0, g - t);
      const double a10 = std::max(0.0, p - t), a11 = std::max(0.0, 1.0 - p - g + t);
      double lo0, hi0, lo1, hi1;
      detail::feasible_range(a00, a01, f00, lo0, hi0);
      detail::feasible_range(a10, a11, f10, lo1, hi1);
      auto value = [&](double q00, double q10) {
        const double q01 = detail::solve_q1(a00, a01, f00, q00);
        const double q11 = detail::solve_q1(a10, a11, f10, q10);
        const double e = a00 * q00 + a01 * (1.0 - q01) + a10 * q10 + a11 * (1.0 - q11);
        if (!have_next) return e;
        const double t_next = r0 * (a00 * q00 + a10 * q10) + r1 * (a01 * q01 + a11 * q11);
        return e + next(t_next);
      };
      cur.v[s] = detail::zoom_maximise_2d(value, lo0, hi0, lo1, hi1);
    }
    next = std::move(cur);
    have_next = true;
  }

  // First node: t_1 = f(x_1 = 0) is fixed, q_1^1 follows from q_1^0.
  const double t1 = pm[0], g1 = gm[0];
  double lo, hi;
  detail::feasible_range(t1, 1.0 - t1, g1, lo, hi);
  const double r0 = n > 1 ? prior.p0_given(1, 0) : 0.0;
  const double r1 = n > 1 ? prior.p0_given(1, 1) : 0.0;
  auto value = [&](double q0, double /*unused*/) {
    const double q1 = detail::solve_q1(t1, 1.0 - t1, g1, q0);
    const double e = t1 * q0 + (1.0 - t1) * (1.0 - q1);
    if (!have_next) return e;
    return e + next(r0 * t1 * q0 + r1 * (1.0 - t1) * q1);
  };
  return detail::zoom_maximise_2d(value, lo, hi, 0.0, 0.0);
}

}  // namespace binfilter
