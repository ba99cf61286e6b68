#pragma once
// Two-variable linear program over a box intersected with a band
//   maximise  c00*q00 + c10*q10 + c_const
//   s.t.      lo00 <= q00 <= hi00,  lo10 <= q10 <= hi10,
//             band_lo <= w00*q00 + w10*q10 + w_const <= band_hi.
// The feasible region is a polygon with at most six corners; the solver
// enumerates pairwise line intersections and keeps the feasible ones.

#include <array>
#include <cmath>
#include <optional>

#include "binfilter/common.hpp"

namespace binfilter {

struct TwoVarLpProblem {
  double c00 = 0.0, c10 = 0.0, c_const = 0.0;
  double lo00 = 0.0, hi00 = 1.0, lo10 = 0.0, hi10 = 1.0;
  double w00 = 0.0, w10 = 0.0, w_const = 0.0;
  double band_lo = 0.0, band_hi = 0.0;

  double objective(double q00, double q10) const { return c00 * q00 + c10 * q10 + c_const; }
  double band_value(double q00, double q10) const { return w00 * q00 + w10 * q10 + w_const; }
};

struct TwoVarLpSolution {
  double q00;
  double q10;
  double value;
  // Optimum attained along a whole band edge; the returned point is the
  // lexicographically largest (q00, q10) on it.
  bool edge_tie;
};

inline constexpr double kLpFeasTol = 1e-10;

inline std::optional<TwoVarLpSolution> try_solve_two_var_lp(const TwoVarLpProblem& p) {
  struct Line {
    double a, b, c;  // a*q00 + b*q10 = c
  };
  std::array<Line, 6> lines{};
  int nlines = 0;
  lines[nlines++] = {1.0, 0.0, p.lo00};
  lines[nlines++] = {1.0, 0.0, p.hi00};
  lines[nlines++] = {0.0, 1.0, p.lo10};
  lines[nlines++] = {0.0, 1.0, p.hi10};
  const bool has_band = p.w00 != 0.0 || p.w10 != 0.0;
  if (has_band) {
    lines[nlines++] = {p.w00, p.w10, p.band_lo - p.w_const};
    lines[nlines++] = {p.w00, p.w10, p.band_hi - p.w_const};
  } else {
    const double v = p.w_const;
    if (v < p.band_lo - kLpFeasTol || v > p.band_hi + kLpFeasTol) return std::nullopt;
  }
  if (p.lo00 > p.hi00 + kLpFeasTol || p.lo10 > p.hi10 + kLpFeasTol) return std::nullopt;

  struct Vertex {
    double q00, q10, value;
  };
  std::array<Vertex, 15> verts{};
  int nverts = 0;
  for (int i = 0; i < nlines; ++i) {
    for (int j = i + 1; j < nlines; ++j) {
      const Line& l1 = lines[i];
      const Line& l2 = lines[j];
      const double det = l1.a * l2.b - l2.a * l1.b;
      const double scale = (std::abs(l1.a) + std::abs(l1.b)) * (std::abs(l2.a) + std::abs(l2.b));
      if (std::abs(det) <= 1e-14 * scale) continue;
      double x = (l1.c * l2.b - l2.c * l1.b) / det;
      double y = (l1.a * l2.c - l2.a * l1.c) / det;
      if (x < p.lo00 - kLpFeasTol || x > p.hi00 + kLpFeasTol) continue;
      if (y < p.lo10 - kLpFeasTol || y > p.hi10 + kLpFeasTol) continue;
      x = std::fmin(std::fmax(x, p.lo00), std::fmax(p.hi00, p.lo00));
      y = std::fmin(std::fmax(y, p.lo10), std::fmax(p.hi10, p.lo10));
      const double bv = p.band_value(x, y);
      if (bv < p.band_lo - kLpFeasTol || bv > p.band_hi + kLpFeasTol) continue;
      verts[nverts++] = {x, y, p.objective(x, y)};
    }
  }
  if (nverts == 0) return std::nullopt;

  double best = verts[0].value;
  for (int i = 1; i < nverts; ++i) best = std::fmax(best, verts[i].value);
  const double tie_tol = 1e-12 * std::fmax(1.0, std::abs(best));

  int pick = -1;
  int distinct_optimal = 0;
  bool all_on_band = has_band;
  for (int i = 0; i < nverts; ++i) {
    const Vertex& v = verts[i];
    if (v.value < best - tie_tol) continue;
    bool duplicate = false;
    for (int m = 0; m < i && !duplicate; ++m)
      duplicate = verts[m].value >= best - tie_tol && std::abs(verts[m].q00 - v.q00) <= 1e-12 &&
                  std::abs(verts[m].q10 - v.q10) <= 1e-12;
    if (!duplicate) {
      ++distinct_optimal;
      const double bv = p.band_value(v.q00, v.q10);
      const bool on_band = std::abs(bv - p.band_lo) <= kLpFeasTol ||
                           std::abs(bv - p.band_hi) <= kLpFeasTol;
      all_on_band = all_on_band && on_band;
    }
    if (pick < 0 || v.q00 > verts[pick].q00 + 1e-12 ||
        (std::abs(v.q00 - verts[pick].q00) <= 1e-12 && v.q10 > verts[pick].q10))
      pick = i;
  }
  const Vertex& v = verts[pick];
  return TwoVarLpSolution{v.q00, v.q10, v.value, distinct_optimal >= 2 && all_on_band};
}

inline TwoVarLpSolution solve_two_var_lp(const TwoVarLpProblem& p) {
  if (auto s = try_solve_two_var_lp(p)) return *s;
  throw NumericalError("infeasible subproblem");
}

}  // namespace binfilter
