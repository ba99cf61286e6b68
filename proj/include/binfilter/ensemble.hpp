#pragma once
// Ensembles of binary state vectors, Bayesian estimation of the assumed
// Markov chain, and the two update schemes (optimal coupling, independent
// resampling from the assumed posterior).

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "binfilter/chain_model.hpp"
#include "binfilter/common.hpp"
#include "binfilter/rng.hpp"
#include "binfilter/transition_optimizer.hpp"

namespace binfilter {

// M members of length n, packed 64 bits per word, one row per member.
class Ensemble {
 public:
  Ensemble(std::size_t members, std::size_t n)
      : n_(n), m_(members), words_((n + 63) / 64), bits_(members * words_, 0) {}

  explicit Ensemble(const std::vector<BinaryVector>& rows)
      : Ensemble(rows.size(), rows.empty() ? 0 : rows.front().size()) {
    for (std::size_t m = 0; m < rows.size(); ++m) set_member(m, rows[m]);
  }

  std::size_t size() const { return m_; }
  std::size_t length() const { return n_; }

  int get(std::size_t member, std::size_t i) const {
    return static_cast<int>((bits_[member * words_ + i / 64] >> (i % 64)) & 1u);
  }

  void set(std::size_t member, std::size_t i, int v) {
    auto& w = bits_[member * words_ + i / 64];
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    w = v ? (w | mask) : (w & ~mask);
  }

  BinaryVector member(std::size_t m) const {
    BinaryVector x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = static_cast<std::uint8_t>(get(m, i));
    return x;
  }

  void set_member(std::size_t m, std::span<const std::uint8_t> x) {
    if (x.size() != n_) throw InvalidInput("member length does not match ensemble");
    for (std::size_t i = 0; i < n_; ++i) {
      if (x[i] > 1) throw InvalidInput("ensemble entries must be 0 or 1");
      set(m, i, x[i]);
    }
  }

  std::vector<BinaryVector> members() const {
    std::vector<BinaryVector> out;
    out.reserve(m_);
    for (std::size_t m = 0; m < m_; ++m) out.push_back(member(m));
    return out;
  }

  // Fraction of members with x_i = 1, per node.
  std::vector<double> mean_ones() const {
    std::vector<double> out(n_, 0.0);
    if (m_ == 0) return out;
    for (std::size_t m = 0; m < m_; ++m)
      for (std::size_t i = 0; i < n_; ++i) out[i] += get(m, i);
    for (auto& v : out) v /= static_cast<double>(m_);
    return out;
  }

 private:
  std::size_t n_;
  std::size_t m_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

struct EstimationPrior {
  double alpha = 2.0;
  double beta = 2.0;
};

// Posterior-mean estimate of an inhomogeneous chain under independent
// Beta(alpha, beta) priors on every parameter. "Success" is state 0.
inline BinaryMarkovChain estimate_chain(const Ensemble& e, const EstimationPrior& prior = {}) {
  if (!(prior.alpha > 0.0 && prior.beta > 0.0)) throw InvalidInput("Beta parameters must be > 0");
  if (e.size() < 1) throw InvalidInput("estimate_chain needs at least one member");
  const std::size_t n = e.length();
  const double ab = prior.alpha + prior.beta;

  std::size_t zeros0 = 0;
  for (std::size_t m = 0; m < e.size(); ++m) zeros0 += e.get(m, 0) == 0;
  const double init0 = (static_cast<double>(zeros0) + prior.alpha) / (static_cast<double>(e.size()) + ab);

  std::vector<std::array<double, 2>> tr(n, {0.0, 0.0});
  for (std::size_t k = 1; k < n; ++k) {
    std::array<std::size_t, 2> from{0, 0}, to0{0, 0};
    for (std::size_t m = 0; m < e.size(); ++m) {
      const int prev = e.get(m, k - 1);
      ++from[prev];
      to0[prev] += e.get(m, k) == 0;
    }
    for (int j = 0; j < 2; ++j)
      tr[k][j] = (static_cast<double>(to0[j]) + prior.alpha) / (static_cast<double>(from[j]) + ab);
  }
  return BinaryMarkovChain(init0, std::move(tr));
}

// Draws x~ ~ q(. | x): node 0 from q_1^{x_1}, then node k from q_k^{x~_{k-1} x_k}.
inline BinaryVector update_member(std::span<const std::uint8_t> x, const TransitionRule& q, Rng& rng) {
  if (x.size() != q.size()) throw InvalidInput("member length does not match transition rule");
  BinaryVector out(x.size());
  out[0] = bernoulli(rng, q.prob_zero(0, 0, x[0])) ? 0 : 1;
  for (std::size_t k = 1; k < x.size(); ++k)
    out[k] = bernoulli(rng, q.prob_zero(k, out[k - 1], x[k])) ? 0 : 1;
  return out;
}

inline Ensemble update_ensemble(const Ensemble& e, const TransitionRule& q, Rng& rng) {
  Ensemble out(e.size(), e.length());
  for (std::size_t m = 0; m < e.size(); ++m) out.set_member(m, update_member(e.member(m), q, rng));
  return out;
}

// The assumed-model approach: discard the prior ensemble and draw M
// independent samples from the assumed posterior chain.
inline Ensemble resample_assumed(const BinaryMarkovChain& posterior, std::size_t members, Rng& rng) {
  Ensemble out(members, posterior.size());
  for (std::size_t m = 0; m < members; ++m) out.set_member(m, sample_chain(posterior, rng));
  return out;
}

inline std::string ensemble_csv(const Ensemble& e) {
  std::string s;
  s.reserve(e.size() * (2 * e.length() + 1));
  for (std::size_t m = 0; m < e.size(); ++m) {
    for (std::size_t i = 0; i < e.length(); ++i) {
      if (i) s += ',';
      s += e.get(m, i) ? '1' : '0';
    }
    s += '\n';
  }
  return s;
}

inline void write_ensemble_csv(std::ostream& os, const Ensemble& e) { os << ensemble_csv(e); }

// gzip-compressed snapshot.
inline void write_ensemble_csv_gz(const std::string& path, const Ensemble& e) {
  gzFile f = gzopen(path.c_str(), "wb");
  if (f == nullptr) throw std::runtime_error("cannot open " + path);
  const std::string s = ensemble_csv(e);
  const int written = s.empty() ? 0 : gzwrite(f, s.data(), static_cast<unsigned>(s.size()));
  gzclose(f);
  if (!s.empty() && written != static_cast<int>(s.size()))
    throw std::runtime_error("short write to " + path);
}

}  // namespace binfilter
