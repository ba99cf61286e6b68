#pragma once
// Continuous piecewise-linear functions on a closed interval, stored as
// breakpoints and values so that continuity holds by construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "binfilter/common.hpp"

namespace binfilter {

struct LinearPiece {
  double intercept;
  double slope;
  double operator()(double t) const { return intercept + slope * t; }
};

class CplFunction {
 public:
  static constexpr double kDomainTol = 1e-12;
  static constexpr double kMergeTol = 1e-12;
  static constexpr double kDefaultPruneTol = 1e-10;

  // Builds from samples at (not necessarily distinct) parameter values.
  // Breakpoints within kMergeTol are merged keeping the larger value;
  // interior points collinear with their neighbours (relative to the value
  // range) are dropped. The domain endpoints are always kept.
  static CplFunction from_samples(std::span<const double> t, std::span<const double> v,
                                  double prune_tol = kDefaultPruneTol) {
    if (t.size() != v.size()) throw InvalidInput("breakpoints and values differ in length");
    std::vector<std::size_t> order(t.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return t[a] < t[b]; });

    std::vector<double> bt, bv;
    for (auto idx : order) {
      if (!std::isfinite(t[idx]) || !std::isfinite(v[idx])) throw InvalidInput("non-finite sample");
      if (!bt.empty() && t[idx] - bt.back() <= kMergeTol) {
        bv.back() = std::max(bv.back(), v[idx]);
      } else {
        bt.push_back(t[idx]);
        bv.push_back(v[idx]);
      }
    }
    if (bt.size() < 2) throw InvalidInput("fewer than 2 distinct breakpoints");

    const auto [mn, mx] = std::minmax_element(bv.begin(), bv.end());
    const double tol = prune_tol * (*mx - *mn);

    CplFunction f;
    f.t_.push_back(bt.front());
    f.v_.push_back(bv.front());
    std::size_t anchor = 0;
    for (std::size_t i = 1; i + 1 < bt.size(); ++i) {
      // Drop point i if every point strictly between the anchor and i+1 lies
      // on the chord from the anchor to i+1.
      bool collinear = true;
      const double t0 = bt[anchor], v0 = bv[anchor], t1 = bt[i + 1], v1 = bv[i + 1];
      for (std::size_t m = anchor + 1; m <= i && collinear; ++m) {
        const double chord = v0 + (v1 - v0) * (bt[m] - t0) / (t1 - t0);
        collinear = std::abs(chord - bv[m]) <= tol;
      }
      if (!collinear) {
        f.t_.push_back(bt[i]);
        f.v_.push_back(bv[i]);
        anchor = i;
      }
    }
    f.t_.push_back(bt.back());
    f.v_.push_back(bv.back());
    return f;
  }

  static CplFunction from_samples(const std::vector<double>& t, const std::vector<double>& v,
                                  double prune_tol = kDefaultPruneTol) {
    return from_samples(std::span<const double>(t), std::span<const double>(v), prune_tol);
  }

  // Width-0 domain {t}: one degenerate piece with slope 0.
  static CplFunction point(double t, double v) {
    CplFunction f;
    f.t_ = {t};
    f.v_ = {v};
    return f;
  }

  bool is_point() const { return t_.size() == 1; }
  double lower() const { return t_.front(); }
  double upper() const { return t_.back(); }
  std::size_t num_pieces() const { return is_point() ? 1 : t_.size() - 1; }
  const std::vector<double>& breakpoints() const { return t_; }
  const std::vector<double>& values() const { return v_; }

  double eval(double t) const {
    if (t < lower() - kDomainTol || t > upper() + kDomainTol)
      throw InvalidInput("evaluation point outside CPL domain");
    if (is_point()) return v_.front();
    t = std::clamp(t, lower(), upper());
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    if (it == t_.end()) return v_.back();
    const auto j = static_cast<std::size_t>(it - t_.begin()) - 1;
    if (t == t_[j]) return v_[j];
    const double w = (t - t_[j]) / (t_[j + 1] - t_[j]);
    return v_[j] + w * (v_[j + 1] - v_[j]);
  }

  // Piece j (0-based) spans [breakpoints()[j], breakpoints()[j+1]].
  std::pair<double, double> piece_interval(std::size_t j) const {
    if (j >= num_pieces()) throw InvalidInput("piece index out of range");
    if (is_point()) return {t_[0], t_[0]};
    return {t_[j], t_[j + 1]};
  }

  LinearPiece piece_coeffs(std::size_t j) const {
    if (j >= num_pieces()) throw InvalidInput("piece index out of range");
    if (is_point()) return {v_[0], 0.0};
    const double slope = (v_[j + 1] - v_[j]) / (t_[j + 1] - t_[j]);
    // Anchor the intercept at the endpoint nearer zero for accuracy.
    const std::size_t a = std::abs(t_[j]) <= std::abs(t_[j + 1]) ? j : j + 1;
    return {v_[a] - slope * t_[a], slope};
  }

  void write_csv(std::ostream& os) const {
    os << "t,value\n";
    for (std::size_t i = 0; i < t_.size(); ++i)
      os << format_real(t_[i]) << ',' << format_real(v_[i]) << '\n';
  }

 private:
  CplFunction() = default;

  std::vector<double> t_;
  std::vector<double> v_;
};

}  // namespace binfilter
