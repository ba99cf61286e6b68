#pragma once
// The four-node toy instance: stationary prior chain (0.7 / 0.8), Gaussian
// likelihood with sigma = 2 and a fixed observation vector, together with
// the published reference numbers.
//
// The published observations are rounded to three decimals, which moves the
// posterior marginals by up to ~2.5e-5. refine_toy_observations() recovers
// observations inside the rounding interval that reproduce the published
// marginals exactly; the reference coupling is computed from those.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "binfilter/chain_model.hpp"
#include "binfilter/common.hpp"
#include "binfilter/transition_optimizer.hpp"

namespace binfilter::toy {

inline constexpr std::size_t kNodes = 4;
inline constexpr double kP00 = 0.7;
inline constexpr double kP11 = 0.8;
inline constexpr double kSigma = 2.0;
inline constexpr double kRoundingHalfWidth = 5e-4;
inline constexpr std::array<double, kNodes> kObservations{-0.681, -1.585, 0.007, 3.103};

// Published posterior f(x_k = 0 | y) and transition probabilities
// {f(x_k = 0 | x_{k-1} = 0, y), f(x_k = 1 | x_{k-1} = 1, y)} for k = 2..4.
inline constexpr std::array<double, kNodes> kPosteriorMarg0{0.526779, 0.543379, 0.437279, 0.304977};
inline constexpr std::array<std::array<double, 2>, 3> kPosteriorStay{{
    {0.7821, 0.7223}, {0.6600, 0.8278}, {0.5490, 0.8846}}};

// Published optimal coupling: t*, first factor (q0, q1), then (q00, q01, q10, q11).
inline constexpr std::array<double, kNodes> kTStar{0.400000, 0.305356, 0.308676, 0.281108};
inline constexpr std::array<double, 2> kFirstFactor{1.000000, 0.211299};
inline constexpr std::array<std::array<double, 4>, 3> kSteps{{
    {1.000000, 0.481489, 1.000000, 0.097118},
    {1.000000, 0.212926, 0.860986, 0.000000},
    {0.853968, 0.000000, 0.546043, 0.000000}}};

inline BinaryMarkovChain prior() { return stationary_chain(kNodes, kP00, kP11); }

inline BinaryMarkovChain posterior(const std::vector<double>& y) {
  return posterior_chain(prior(), GaussianNodeLikelihood(kSigma), y);
}

inline std::vector<double> raw_observations() { return {kObservations.begin(), kObservations.end()}; }

namespace detail {

// Solves A x = b in place (Gaussian elimination, partial pivoting).
template <std::size_t N>
std::array<double, N> solve_linear(std::array<std::array<double, N>, N> a, std::array<double, N> b) {
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) throw NumericalError("singular Jacobian");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < N; ++r) {
      const double m = a[r][c] / a[c][c];
      for (std::size_t k = c; k < N; ++k) a[r][k] -= m * a[c][k];
      b[r] -= m * b[c];
    }
  }
  std::array<double, N> x{};
  for (std::size_t c = N; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < N; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

}  // namespace detail

// Newton iteration on y so that the posterior marginals equal the published
// values. Throws if the solution leaves the rounding interval.
inline std::vector<double> refine_toy_observations() {
  std::vector<double> y = raw_observations();
  auto residual = [](const std::vector<double>& yy) {
    const auto m = posterior(yy).marginals();
    std::array<double, kNodes> r{};
    for (std::size_t k = 0; k < kNodes; ++k) r[k] = m[k] - kPosteriorMarg0[k];
    return r;
  };
  for (int it = 0; it < 50; ++it) {
    const auto r = residual(y);
    double norm = 0.0;
    for (double v : r) norm = std::max(norm, std::abs(v));
    if (norm < 1e-14) break;
    std::array<std::array<double, kNodes>, kNodes> jac{};
    constexpr double h = 1e-6;
    for (std::size_t c = 0; c < kNodes; ++c) {
      auto yp = y, ym = y;
      yp[c] += h;
      ym[c] -= h;
      const auto rp = residual(yp), rm = residual(ym);
      for (std::size_t r_ = 0; r_ < kNodes; ++r_) jac[r_][c] = (rp[r_] - rm[r_]) / (2.0 * h);
    }
    std::array<double, kNodes> neg{};
    for (std::size_t k = 0; k < kNodes; ++k) neg[k] = -r[k];
    const auto dy = detail::solve_linear(jac, neg);
    for (std::size_t k = 0; k < kNodes; ++k) y[k] += dy[k];
  }
  for (std::size_t k = 0; k < kNodes; ++k)
    if (std::abs(y[k] - kObservations[k]) > kRoundingHalfWidth)
      throw NumericalError("refined toy observation leaves its rounding interval");
  return y;
}

struct ToyResult {
  std::vector<double> y;
  BinaryMarkovChain prior;
  BinaryMarkovChain posterior;
  OptimalCoupling coupling;
};

inline ToyResult run(bool raw_observations_only = false) {
  std::vector<double> y = raw_observations_only ? raw_observations() : refine_toy_observations();
  BinaryMarkovChain pr = prior();
  BinaryMarkovChain po = posterior(y);
  OptimalCoupling oc = build_optimal_q(pr, po);
  return {std::move(y), std::move(pr), std::move(po), std::move(oc)};
}

// Largest absolute deviation of a rule from the published table (t* and all
// fourteen q entries).
inline double table_deviation(const TransitionRule& r) {
  double d = std::abs(r.first.q0 - kFirstFactor[0]);
  d = std::max(d, std::abs(r.first.q1 - kFirstFactor[1]));
  for (std::size_t k = 0; k < kNodes; ++k) d = std::max(d, std::abs(r.t_star[k] - kTStar[k]));
  for (std::size_t k = 1; k < kNodes; ++k) {
    const auto& s = r.step(k);
    const std::array<double, 4> q{s.q00, s.q01, s.q10, s.q11};
    for (std::size_t e = 0; e < 4; ++e) d = std::max(d, std::abs(q[e] - kSteps[k - 1][e]));
  }
  return d;
}

// Largest absolute deviation of a posterior chain from the published
// transitions and marginals.
inline double posterior_deviation(const BinaryMarkovChain& post) {
  double d = 0.0;
  const auto m = post.marginals();
  for (std::size_t k = 0; k < kNodes; ++k) d = std::max(d, std::abs(m[k] - kPosteriorMarg0[k]));
  for (std::size_t k = 1; k < kNodes; ++k) {
    d = std::max(d, std::abs(post.p0_given(k, 0) - kPosteriorStay[k - 1][0]));
    d = std::max(d, std::abs(1.0 - post.p0_given(k, 1) - kPosteriorStay[k - 1][1]));
  }
  return d;
}

}  // namespace binfilter::toy
