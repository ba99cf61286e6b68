#pragma once
// Ground-truth spatio-temporal binary process (water front moving through a
// well) and its Gaussian observations. Sites outside the lattice, including
// the whole state at t = 0, are treated as 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "binfilter/common.hpp"
#include "binfilter/rng.hpp"

namespace binfilter {

inline constexpr int kOutOfLattice = -1;

class TrueModelTable {
 public:
  // Default table: P(x_i^t = 1 | x_{i-1}^t, x_{i-1}^{t-1}, x_i^{t-1}, x_{i+1}^{t-1}).
  TrueModelTable() {
    // rows: (left_prev, self_prev, right_prev) -> {left_curr = 1, left_curr = 0}
    constexpr std::array<std::array<double, 5>, 8> rows{{
        {0, 0, 0, 0.0100, 0.0050},
        {1, 0, 0, 0.0400, 0.0100},
        {0, 1, 0, 0.9999, 0.9800},
        {1, 1, 0, 0.9999, 0.9900},
        {0, 0, 1, 0.0400, 0.0400},
        {1, 0, 1, 0.9800, 0.0400},
        {0, 1, 1, 0.9999, 0.9800},
        {1, 1, 1, 0.9999, 0.9800},
    }};
    for (const auto& r : rows) {
      const int lp = static_cast<int>(r[0]), sp = static_cast<int>(r[1]), rp = static_cast<int>(r[2]);
      p1_[index(lp, sp, rp, 1)] = r[3];
      p1_[index(lp, sp, rp, 0)] = r[4];
    }
  }

  explicit TrueModelTable(const std::array<double, 16>& p1) : p1_(p1) {
    for (double p : p1_)
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("true-model probability outside [0,1]");
  }

  static constexpr std::size_t index(int left_prev, int self_prev, int right_prev, int left_curr) {
    return static_cast<std::size_t>(left_prev | (self_prev << 1) | (right_prev << 2) | (left_curr << 3));
  }

  double p1(int left_prev, int self_prev, int right_prev, int left_curr) const {
    return p1_[index(left_prev, self_prev, right_prev, left_curr)];
  }

  const std::array<double, 16>& entries() const { return p1_; }
  bool operator==(const TrueModelTable&) const = default;

 private:
  std::array<double, 16> p1_{};
};

// Out-of-lattice neighbours (kOutOfLattice) count as 0.
inline double cond_prob_one(const TrueModelTable& table, int left_prev, int self_prev,
                            int right_prev, int left_curr) {
  auto bit = [](int v) { return v == 1 ? 1 : 0; };
  return table.p1(bit(left_prev), bit(self_prev), bit(right_prev), bit(left_curr));
}

// P(x_i^t = 1 | ...) for site i given the previous state and the already
// decided site i-1 of the current state.
inline double site_prob_one(const TrueModelTable& table, std::span<const std::uint8_t> prev,
                            std::size_t i, int left_curr) {
  const std::size_t n = prev.size();
  const int lp = i > 0 ? prev[i - 1] : kOutOfLattice;
  const int rp = i + 1 < n ? prev[i + 1] : kOutOfLattice;
  return cond_prob_one(table, lp, prev[i], rp, i > 0 ? left_curr : kOutOfLattice);
}

inline BinaryVector simulate_step(const TrueModelTable& table, std::span<const std::uint8_t> prev, Rng& rng) {
  BinaryVector x(prev.size());
  for (std::size_t i = 0; i < prev.size(); ++i)
    x[i] = bernoulli(rng, site_prob_one(table, prev, i, i > 0 ? x[i - 1] : 0)) ? 1 : 0;
  return x;
}

// Exact p(x^t = next | x^{t-1} = prev) under the product law.
inline double transition_prob(const TrueModelTable& table, std::span<const std::uint8_t> prev,
                              std::span<const std::uint8_t> next) {
  double p = 1.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double p1 = site_prob_one(table, prev, i, i > 0 ? next[i - 1] : 0);
    p *= next[i] ? p1 : 1.0 - p1;
  }
  return p;
}

inline double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::vector<double> simulate_observation(std::span<const std::uint8_t> x, double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = static_cast<double>(x[i]) + sigma * standard_normal(rng);
  return y;
}

struct ProcessConfig {
  std::size_t n = 400;
  std::size_t T = 100;
  double sigma = 2.0;

  void validate() const {
    if (n < 1 || T < 1) throw InvalidInput("n and T must be >= 1");
    if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  }
};

struct TruthAndObservations {
  std::vector<BinaryVector> truth;        // T rows of n bits
  std::vector<std::vector<double>> obs;   // T rows of n reals
};

// Trajectory x^1..x^T started from the all-zero state at t = 0.
inline TruthAndObservations simulate_truth(const TrueModelTable& table, const ProcessConfig& cfg,
                                           Rng& truth_rng, Rng& obs_rng) {
  cfg.validate();
  TruthAndObservations out;
  BinaryVector prev(cfg.n, 0);
  for (std::size_t t = 0; t < cfg.T; ++t) {
    prev = simulate_step(table, prev, truth_rng);
    out.truth.push_back(prev);
    out.obs.push_back(simulate_observation(prev, cfg.sigma, obs_rng));
  }
  return out;
}

inline void write_table_csv(std::ostream& os, const TrueModelTable& table) {
  os << "left_prev,self_prev,right_prev,left_curr,p1\n";
  for (int lc = 1; lc >= 0; --lc)
    for (int rp = 0; rp < 2; ++rp)
      for (int sp = 0; sp < 2; ++sp)
        for (int lp = 0; lp < 2; ++lp)
          os << lp << ',' << sp << ',' << rp << ',' << lc << ',' << format_real(table.p1(lp, sp, rp, lc)) << '\n';
}

inline TrueModelTable read_table_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "left_prev,self_prev,right_prev,left_curr,p1")
    throw InvalidInput("bad true-model CSV header");
  std::array<double, 16> p{};
  std::array<bool, 16> seen{};
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[5];
    for (auto& s : f) std::getline(ss, s, ',');
    const auto idx = TrueModelTable::index(std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]));
    p[idx] = std::stod(f[4]);
    seen[idx] = true;
  }
  for (bool s : seen)
    if (!s) throw InvalidInput("true-model CSV is missing entries");
  return TrueModelTable(p);
}

inline void write_bit_matrix_csv(std::ostream& os, const std::vector<BinaryVector>& rows) {
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << static_cast<int>(r[i]);
    os << '\n';
  }
}

inline void write_real_matrix_csv(std::ostream& os, const std::vector<std::vector<double>>& rows) {
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_real(r[i]);
    os << '\n';
  }
}

}  // namespace binfilter
