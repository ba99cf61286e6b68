#pragma once
// Metrics for comparing filters: Frobenius distances between marginal
// matrices, quantile intervals, contact probabilities and contact-length
// distributions. Sample sets may carry weights so that exact laws over
// enumerated states are handled by the same code as ensembles.
// Undefined estimates (empty conditioning event) are std::nullopt and are
// written as "NA".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "binfilter/common.hpp"
#include "binfilter/oracle.hpp"

namespace binfilter {

using MarginalMatrix = std::vector<std::vector<double>>;  // [t][i] = P(x_i^t = 1)

inline double frobenius_diff(const MarginalMatrix& a, const MarginalMatrix& b) {
  if (a.size() != b.size()) throw InvalidInput("marginal matrices differ in shape");
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].size() != b[t].size()) throw InvalidInput("marginal matrices differ in shape");
    for (std::size_t i = 0; i < a[t].size(); ++i) {
      const double d = a[t][i] - b[t][i];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

// Binary vectors with optional nonnegative weights (empty = equal weights).
struct SampleSet {
  std::vector<BinaryVector> samples;
  std::vector<double> weights;

  double weight(std::size_t s) const { return weights.empty() ? 1.0 : weights[s]; }
  std::size_t length() const { return samples.empty() ? 0 : samples.front().size(); }

  void check() const {
    if (samples.empty()) throw InvalidInput("sample set is empty");
    if (!weights.empty() && weights.size() != samples.size())
      throw InvalidInput("weights and samples differ in count");
    for (const auto& x : samples)
      if (x.size() != length()) throw InvalidInput("samples differ in length");
  }
};

// Every state of an exact law as a weighted sample.
inline SampleSet sample_set_from_exact(const ExactFilterState& s) {
  SampleSet out;
  for (std::size_t x = 0; x < s.probs.size(); ++x) {
    if (s.probs[x] <= 0.0) continue;
    BinaryVector v(s.n);
    for (std::size_t i = 0; i < s.n; ++i) v[i] = static_cast<std::uint8_t>((x >> i) & 1u);
    out.samples.push_back(std::move(v));
    out.weights.push_back(s.probs[x]);
  }
  return out;
}

// Maximal run of ones containing node i, as [first, last]; requires x[i] = 1.
inline std::pair<std::size_t, std::size_t> run_containing(std::span<const std::uint8_t> x, std::size_t i) {
  std::size_t a = i, b = i;
  while (a > 0 && x[a - 1]) --a;
  while (b + 1 < x.size() && x[b + 1]) ++b;
  return {a, b};
}

// P(x_k = 1 for all k between i and j inclusive | x_i = 1), for every j.
inline std::vector<std::optional<double>> contact_profile(const SampleSet& s, std::size_t i) {
  s.check();
  const std::size_t n = s.length();
  if (i >= n) throw InvalidInput("node index out of range");
  std::vector<double> num(n, 0.0);
  double den = 0.0;
  for (std::size_t m = 0; m < s.samples.size(); ++m) {
    const auto& x = s.samples[m];
    if (!x[i]) continue;
    const double w = s.weight(m);
    den += w;
    const auto [a, b] = run_containing(x, i);
    for (std::size_t j = a; j <= b; ++j) num[j] += w;
  }
  std::vector<std::optional<double>> out(n);
  if (den > 0.0)
    for (std::size_t j = 0; j < n; ++j) out[j] = num[j] / den;
  return out;
}

inline std::optional<double> contact_probability(const SampleSet& s, std::size_t i, std::size_t j) {
  if (j >= s.length()) throw InvalidInput("node index out of range");
  return contact_profile(s, i)[j];
}

inline std::optional<double> contact_probability(const std::vector<BinaryVector>& samples, std::size_t i,
                                                 std::size_t j) {
  return contact_probability(SampleSet{samples, {}}, i, j);
}

// F(l) = P(L_i <= l | x_i = 1) for l = 1..n with i uniform over nodes: each
// run of length L contributes L node-weight at length L.
inline std::optional<std::vector<double>> contact_length_cdf(const SampleSet& s) {
  s.check();
  const std::size_t n = s.length();
  std::vector<double> mass(n + 1, 0.0);
  double total = 0.0;
  for (std::size_t m = 0; m < s.samples.size(); ++m) {
    const auto& x = s.samples[m];
    const double w = s.weight(m);
    std::size_t run = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (k < n && x[k]) {
        ++run;
        continue;
      }
      if (run > 0) {
        mass[run] += w * static_cast<double>(run);
        total += w * static_cast<double>(run);
      }
      run = 0;
    }
  }
  if (!(total > 0.0)) return std::nullopt;
  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t l = 1; l <= n; ++l) {
    acc += mass[l];
    cdf[l - 1] = l == n ? 1.0 : std::min(1.0, acc / total);
  }
  return cdf;
}

inline std::optional<std::vector<double>> contact_length_cdf(const std::vector<BinaryVector>& samples) {
  return contact_length_cdf(SampleSet{samples, {}});
}

// Empirical quantile, Hyndman-Fan type 7 (linear interpolation of order
// statistics at h = (B - 1) p).
inline double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw InvalidInput("quantile of empty set");
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Central interval holding `level` of the empirical distribution.
inline std::pair<double, double> quantile_interval(std::span<const double> values, double level) {
  if (values.size() < 2) throw InvalidInput("quantile_interval needs at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must lie in (0,1)");
  std::vector<double> v(values.begin(), values.end());
  const double a = (1.0 - level) / 2.0;
  return {quantile_type7(v, a), quantile_type7(v, 1.0 - a)};
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

}  // namespace binfilter
