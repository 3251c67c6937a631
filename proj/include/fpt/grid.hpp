#ifndef FPT_GRID_HPP
#define FPT_GRID_HPP

// Uniform time grids and the solution container shared by the solver,
// residual, transform and io layers.

#include <cmath>
#include <string>
#include <vector>

#include "fpt/error.hpp"

namespace fpt {

struct TimeGrid {
  double T = 0.0;          // horizon
  int N = 0;               // number of cells; t has N+1 points
  double h = 0.0;          // uniform step T/N
  std::vector<double> t;   // t[0] = 0 < t[1] < ... < t[N] = T

  double mid(int j) const { return 0.5 * (t[j - 1] + t[j]); }  // cell j in 1..N
};

inline TimeGrid make_grid(double T, int N) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw domain_error("make_grid: horizon must be positive and finite");
  if (N < 8) throw domain_error("make_grid: need at least 8 steps");
  TimeGrid g;
  g.T = T;
  g.N = N;
  g.h = T / N;
  g.t.resize(static_cast<size_t>(N) + 1);
  for (int i = 0; i <= N; ++i) g.t[i] = T * i / N;  // t[N] == T exactly
  return g;
}

inline bool same_points(const TimeGrid& a, const TimeGrid& b) {
  return a.t == b.t;
}

struct SolveMeta {
  double p = 0.0;               // equation member used (NaN-free tag for second kind: p = 1)
  std::string method;           // "first-kind", "second-kind", "mc", "transform", ...
  std::string boundary;         // boundary fingerprint
  bool accuracy_warning = false;
};

struct FptSolution {
  TimeGrid grid;
  std::vector<double> f;  // nodal density, f[0] = 0
  std::vector<double> F;  // cdf, F[0] = 0, nondecreasing
  SolveMeta meta;
};

// Cell-averaged densities from the cdf increments; cell j in 1..N lands at
// index j-1.  The increments are what the first-kind solvers actually
// determine, so every consumer of a density profile (residuals, transforms,
// integral checks) starts from these.
inline std::vector<double> cell_densities(const FptSolution& sol) {
  const int N = sol.grid.N;
  std::vector<double> c(static_cast<size_t>(N));
  for (int j = 1; j <= N; ++j)
    c[j - 1] = (sol.F[j] - sol.F[j - 1]) / (sol.grid.t[j] - sol.grid.t[j - 1]);
  return c;
}

// Nodal density from cell averages by adjacent-cell averaging; one-sided
// extrapolation at t = T, and f(0) = 0 (densities vanish at the origin for
// boundaries with b(0) < 0).
inline std::vector<double> nodal_from_cells(const std::vector<double>& c) {
  const int N = static_cast<int>(c.size());
  std::vector<double> f(static_cast<size_t>(N) + 1);
  f[0] = 0.0;
  for (int i = 1; i < N; ++i) f[i] = 0.5 * (c[i - 1] + c[i]);
  f[N] = N >= 2 ? 0.5 * (3.0 * c[N - 1] - c[N - 2]) : c[N - 1];
  return f;
}

// Index of grid node holding time tq, or -1.
inline int node_index(const TimeGrid& g, double tq) {
  const double tol = 1e-9 * (1.0 + g.T);
  const double pos = tq / g.h;
  const int i = static_cast<int>(std::lround(pos));
  if (i < 0 || i > g.N) return -1;
  return std::fabs(g.t[i] - tq) <= tol ? i : -1;
}

}  // namespace fpt

#endif
