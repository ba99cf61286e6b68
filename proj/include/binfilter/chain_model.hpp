#pragma once
// Inhomogeneous first-order Markov chains over {0,1}^n and exact HMM
// posteriors under node-wise likelihoods.
//
// Node indices are 0-based throughout: node 0 carries the initial law and
// node k >= 1 carries the transition table P(x_k = 0 | x_{k-1} = j).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "binfilter/common.hpp"
#include "binfilter/rng.hpp"

namespace binfilter {

// Entry [i][j] is a probability for the pair (x_{k-1} = i, x_k = j).
using PairTable = std::array<std::array<double, 2>, 2>;

class BinaryMarkovChain {
 public:
  // p0_given[k] = {P(x_k=0 | x_{k-1}=0), P(x_k=0 | x_{k-1}=1)} for k >= 1;
  // p0_given[0] is ignored and may hold anything.
  BinaryMarkovChain(double init0, std::vector<std::array<double, 2>> p0_given)
      : init0_(init0), p0_given_(std::move(p0_given)) {
    if (p0_given_.empty()) throw InvalidInput("chain length must be >= 1");
    p0_given_[0] = {0.0, 0.0};
    check_prob(init0_, "init0");
    for (std::size_t k = 1; k < p0_given_.size(); ++k) {
      check_prob(p0_given_[k][0], "p0given(0)");
      check_prob(p0_given_[k][1], "p0given(1)");
    }
  }

  static BinaryMarkovChain homogeneous(std::size_t n, double init0, double p00, double p11) {
    std::vector<std::array<double, 2>> tr(n, {p00, 1.0 - p11});
    return BinaryMarkovChain(init0, std::move(tr));
  }

  std::size_t size() const { return p0_given_.size(); }
  double init0() const { return init0_; }

  // P(x_k = 0 | x_{k-1} = j), k in [1, n).
  double p0_given(std::size_t k, int j) const {
    if (k == 0 || k >= size()) throw InvalidInput("transition index out of range");
    return p0_given_[k][static_cast<std::size_t>(j)];
  }

  // P(x_k = i | x_{k-1} = j).
  double transition(std::size_t k, int i, int j) const {
    const double p0 = p0_given(k, j);
    return i == 0 ? p0 : 1.0 - p0;
  }

  const std::vector<std::array<double, 2>>& transitions() const { return p0_given_; }

  // P(x_k = 0) for every node, by forward propagation.
  std::vector<double> marginals() const {
    std::vector<double> m(size());
    m[0] = init0_;
    for (std::size_t k = 1; k < size(); ++k)
      m[k] = m[k - 1] * p0_given_[k][0] + (1.0 - m[k - 1]) * p0_given_[k][1];
    return m;
  }

  // Joint law of (x_{k-1}, x_k), k in [1, n).
  PairTable pair_joint(std::size_t k) const {
    if (k == 0 || k >= size()) throw InvalidInput("pair_joint index out of range");
    const auto m = marginals();
    return pair_joint(k, m[k - 1]);
  }

  // Same, with the marginal P(x_{k-1} = 0) supplied by the caller.
  PairTable pair_joint(std::size_t k, double marg0_prev) const {
    PairTable t{};
    const double prev[2] = {marg0_prev, 1.0 - marg0_prev};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) t[i][j] = prev[i] * transition(k, j, i);
    return t;
  }

  // Log-probability of a full state vector.
  double log_prob(std::span<const std::uint8_t> x) const {
    double lp = std::log(x[0] == 0 ? init0_ : 1.0 - init0_);
    for (std::size_t k = 1; k < size(); ++k) lp += std::log(transition(k, x[k], x[k - 1]));
    return lp;
  }

  bool operator==(const BinaryMarkovChain&) const = default;

 private:
  static void check_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(std::string(what) + " outside [0,1]");
  }

  double init0_;
  std::vector<std::array<double, 2>> p0_given_;
};

// Stationary P(state 0) of the homogeneous chain with P(0|0)=p00, P(1|1)=p11.
inline double stationary_init(double p00, double p11) {
  if (!(p00 >= 0.0 && p00 <= 1.0 && p11 >= 0.0 && p11 <= 1.0))
    throw InvalidInput("transition probabilities outside [0,1]");
  const double leave0 = 1.0 - p00;
  const double leave1 = 1.0 - p11;
  if (leave0 + leave1 == 0.0) throw InvalidInput("no unique stationary law");
  return leave1 / (leave0 + leave1);
}

inline BinaryMarkovChain stationary_chain(std::size_t n, double p00, double p11) {
  return BinaryMarkovChain::homogeneous(n, stationary_init(p00, p11), p00, p11);
}

struct GaussianNodeLikelihood {
  double sigma;

  explicit GaussianNodeLikelihood(double s) : sigma(s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("sigma must be positive");
  }

  double log_density(double y, int x) const {
    const double z = (y - static_cast<double>(x)) / sigma;
    return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
};

// Per-node {log p(y_k | x_k = 0), log p(y_k | x_k = 1)}.
using LogLikelihoodTable = std::vector<std::array<double, 2>>;

inline LogLikelihoodTable log_likelihoods(const GaussianNodeLikelihood& lik,
                                          std::span<const double> y) {
  LogLikelihoodTable t(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!std::isfinite(y[k])) throw InvalidInput("observation is not finite");
    t[k] = {lik.log_density(y[k], 0), lik.log_density(y[k], 1)};
  }
  return t;
}

// Exact posterior of an HMM with Markov prior and node-wise likelihoods,
// returned as a Markov chain. Backward messages are rescaled to max 1.
inline BinaryMarkovChain posterior_chain(const BinaryMarkovChain& prior,
                                         const LogLikelihoodTable& loglik) {
  const std::size_t n = prior.size();
  if (loglik.size() != n) throw InvalidInput("likelihood length does not match chain");

  std::vector<std::array<double, 2>> lik(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& l = loglik[k];
    if (!std::isfinite(l[0]) || !std::isfinite(l[1]))
      throw InvalidInput("non-finite likelihood value");
    const double mx = std::max(l[0], l[1]);
    lik[k] = {std::exp(l[0] - mx), std::exp(l[1] - mx)};
  }

  // beta[k][x] proportional to p(y_{k+1:n} | x_k = x)
  std::vector<std::array<double, 2>> beta(n, {1.0, 1.0});
  for (std::size_t k = n - 1; k-- > 0;) {
    for (int x = 0; x < 2; ++x) {
      double s = 0.0;
      for (int z = 0; z < 2; ++z) s += prior.transition(k + 1, z, x) * lik[k + 1][z] * beta[k + 1][z];
      beta[k][x] = s;
    }
    const double mx = std::max(beta[k][0], beta[k][1]);
    if (!(mx > 0.0)) throw NumericalError("posterior has zero mass");
    beta[k][0] /= mx;
    beta[k][1] /= mx;
  }

  auto normalise0 = [](double w0, double w1) {
    const double s = w0 + w1;
    if (!(s > 0.0)) throw NumericalError("posterior has zero mass");
    return w0 / s;
  };

  const double init0 = normalise0(prior.init0() * lik[0][0] * beta[0][0],
                                  (1.0 - prior.init0()) * lik[0][1] * beta[0][1]);
  std::vector<std::array<double, 2>> tr(n, {0.0, 0.0});
  for (std::size_t k = 1; k < n; ++k) {
    for (int j = 0; j < 2; ++j) {
      const double w0 = prior.transition(k, 0, j) * lik[k][0] * beta[k][0];
      const double w1 = prior.transition(k, 1, j) * lik[k][1] * beta[k][1];
      // An unreachable conditioning state keeps the prior transition.
      tr[k][static_cast<std::size_t>(j)] = (w0 + w1 > 0.0) ? w0 / (w0 + w1) : prior.p0_given(k, j);
    }
  }
  return BinaryMarkovChain(init0, std::move(tr));
}

inline BinaryMarkovChain posterior_chain(const BinaryMarkovChain& prior,
                                         const GaussianNodeLikelihood& lik,
                                         std::span<const double> y) {
  if (y.size() != prior.size()) throw InvalidInput("observation length does not match chain");
  return posterior_chain(prior, log_likelihoods(lik, y));
}

inline BinaryVector sample_chain(const BinaryMarkovChain& chain, Rng& rng) {
  BinaryVector x(chain.size());
  x[0] = bernoulli(rng, chain.init0()) ? 0 : 1;
  for (std::size_t k = 1; k < chain.size(); ++k)
    x[k] = bernoulli(rng, chain.p0_given(k, x[k - 1])) ? 0 : 1;
  return x;
}

// CSV: header "k,p0_init_or_p0g0,p0g1", k is 1-based.
inline void write_chain_csv(std::ostream& os, const BinaryMarkovChain& chain) {
  os << "k,p0_init_or_p0g0,p0g1\n";
  os << "1," << format_real(chain.init0()) << ",\n";
  for (std::size_t k = 1; k < chain.size(); ++k)
    os << (k + 1) << ',' << format_real(chain.p0_given(k, 0)) << ','
       << format_real(chain.p0_given(k, 1)) << '\n';
}

inline BinaryMarkovChain read_chain_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "k,p0_init_or_p0g0,p0g1")
    throw InvalidInput("bad chain CSV header");
  double init0 = 0.0;
  std::vector<std::array<double, 2>> tr;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string k, a, b;
    std::getline(ss, k, ',');
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    if (std::stoul(k) != tr.size() + 1) throw InvalidInput("chain CSV rows out of order");
    if (tr.empty()) {
      init0 = std::stod(a);
      tr.push_back({0.0, 0.0});
    } else {
      tr.push_back({std::stod(a), std::stod(b)});
    }
  }
  return BinaryMarkovChain(init0, std::move(tr));
}

}  // namespace binfilter
