#ifndef FPT_BOUNDARY_HPP
#define FPT_BOUNDARY_HPP

// Boundaries b(t) with their regularity metadata, the builtin families,
// table boundaries from samples, and the drift / scaling / Lerche transforms
// acting on boundaries and on first-passage densities.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fpt/error.hpp"
#include "fpt/grid.hpp"

namespace fpt {

// c1 means continuously differentiable with |b'(t)| = O(t^{-eps}) for some
// eps < 1/2 near 0 (bounded derivative qualifies).  The sqrt boundary has
// |b'| ~ t^{-1/2} exactly and is only "differentiable".
enum class Smoothness { continuous, differentiable, c1 };

inline const char* to_string(Smoothness s) {
  switch (s) {
    case Smoothness::continuous: return "continuous";
    case Smoothness::differentiable: return "differentiable";
    default: return "c1";
  }
}

struct Boundary {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;  // empty if unavailable
  double b0 = 0.0;                      // b(0), finite, <= 0
  std::optional<double> lower_bound;    // uniform c < 0 with b(t) >= c, if any
  bool in_class_B = false;              // b(t) + ut > c for some drift u
  Smoothness smoothness = Smoothness::continuous;
  std::string fingerprint;

  double operator()(double t) const { return eval(t); }
  bool has_deriv() const { return static_cast<bool>(deriv); }
};

namespace detail {

inline std::string fmt_params(const char* kind, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s(%g,%g)", kind, a, b);
  return buf;
}

}  // namespace detail

inline Boundary make_constant(double c) {
  if (!(c < 0.0)) throw domain_error("constant boundary: level must be negative");
  Boundary b;
  b.eval = [c](double) { return c; };
  b.deriv = [](double) { return 0.0; };
  b.b0 = c;
  b.lower_bound = c;
  b.in_class_B = true;
  b.smoothness = Smoothness::c1;
  char buf[48];
  std::snprintf(buf, sizeof buf, "constant(%g)", c);
  b.fingerprint = buf;
  return b;
}

// b(t) = -a + slope*t
inline Boundary make_linear(double a, double slope) {
  if (!(a > 0.0)) throw domain_error("linear boundary: requires a > 0");
  Boundary b;
  b.eval = [a, slope](double t) { return -a + slope * t; };
  b.deriv = [slope](double) { return slope; };
  b.b0 = -a;
  if (slope >= 0.0) b.lower_bound = -a;
  b.in_class_B = slope >= 0.0;
  b.smoothness = Smoothness::c1;
  b.fingerprint = detail::fmt_params("linear", a, slope);
  return b;
}

// b(t) = p*sqrt(t) - q
inline Boundary make_sqrt(double p, double q) {
  if (!(q > 0.0)) throw domain_error("sqrt boundary: requires q > 0 (finite b(0) < 0)");
  Boundary b;
  b.eval = [p, q](double t) { return p * std::sqrt(t) - q; };
  b.deriv = [p](double t) { return 0.5 * p / std::sqrt(t); };
  b.b0 = -q;
  if (p >= 0.0) b.lower_bound = -q;
  b.in_class_B = true;  // p*sqrt(t) >= p*(1+t)/2 for p < 0, so a drift term bounds it
  b.smoothness = Smoothness::differentiable;
  b.fingerprint = detail::fmt_params("sqrt", p, q);
  return b;
}

// b(t) = p*t^2/2 - q.  p < 0 (receding parabola) is accepted alongside the
// p > 0 default; only the up-parabola stays above a uniform level or in
// class B.
inline Boundary make_quadratic(double p, double q) {
  if (!(q > 0.0) || p == 0.0 || !std::isfinite(p))
    throw domain_error("quadratic boundary: requires q > 0 and nonzero curvature");
  Boundary b;
  b.eval = [p, q](double t) { return 0.5 * p * t * t - q; };
  b.deriv = [p](double t) { return p * t; };
  b.b0 = -q;
  if (p > 0.0) b.lower_bound = -q;
  b.in_class_B = p > 0.0;
  b.smoothness = Smoothness::c1;
  b.fingerprint = detail::fmt_params("quadratic", p, q);
  return b;
}

inline Boundary builtin(const std::string& kind, const std::vector<double>& params) {
  auto need = [&](size_t n) {
    if (params.size() != n)
      throw domain_error("boundary " + kind + ": expected " + std::to_string(n) +
                         " parameter(s)");
  };
  if (kind == "constant") { need(1); return make_constant(params[0]); }
  if (kind == "linear")   { need(2); return make_linear(params[0], params[1]); }
  if (kind == "sqrt")     { need(2); return make_sqrt(params[0], params[1]); }
  if (kind == "quadratic"){ need(2); return make_quadratic(params[0], params[1]); }
  throw domain_error("unknown boundary kind: " + kind);
}

// ---------------------------------------------------------------------------
// Table boundaries: monotone cubic (Fritsch-Carlson) interpolation of
// (t, b(t)) samples plus declared metadata.

namespace detail {

struct Pchip {
  std::vector<double> x, y, d;  // knots, values, knot slopes

  void build(const std::vector<std::pair<double, double>>& pts) {
    const size_t n = pts.size();
    x.resize(n); y.resize(n); d.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) { x[i] = pts[i].first; y[i] = pts[i].second; }
    if (n == 2) { d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]); return; }
    std::vector<double> h(n - 1), del(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      del[i] = (y[i + 1] - y[i]) / h[i];
    }
    for (size_t i = 1; i + 1 < n; ++i) {
      if (del[i - 1] * del[i] <= 0.0) { d[i] = 0.0; continue; }
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
    d[0] = edge(h[0], h[1], del[0], del[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
  }

  static double edge(double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) return 3.0 * d0;
    return s;
  }

  size_t cell(double t) const {
    const double pad = 1e-9 * (1.0 + std::fabs(x.back()));
    if (t < x.front() - pad || t > x.back() + pad)
      throw range_error("table boundary evaluated outside its sample range");
    const double tc = std::clamp(t, x.front(), x.back());
    size_t i = static_cast<size_t>(std::upper_bound(x.begin(), x.end(), tc) - x.begin());
    return std::clamp<size_t>(i, 1, x.size() - 1) - 1;
  }

  double operator()(double t) const {
    const size_t i = cell(t);
    const double hi = x[i + 1] - x[i];
    const double u = (std::clamp(t, x.front(), x.back()) - x[i]) / hi;
    const double u2 = u * u, u3 = u2 * u;
    return y[i] * (2 * u3 - 3 * u2 + 1) + hi * d[i] * (u3 - 2 * u2 + u) +
           y[i + 1] * (-2 * u3 + 3 * u2) + hi * d[i + 1] * (u3 - u2);
  }

  double slope(double t) const {
    const size_t i = cell(t);
    const double hi = x[i + 1] - x[i];
    const double u = (std::clamp(t, x.front(), x.back()) - x[i]) / hi;
    const double u2 = u * u;
    return (y[i] * (6 * u2 - 6 * u) + hi * d[i] * (3 * u2 - 4 * u + 1) +
            y[i + 1] * (6 * u - 6 * u2) + hi * d[i + 1] * (3 * u2 - 2 * u)) / hi;
  }
};

}  // namespace detail

inline Boundary make_table(const std::vector<std::pair<double, double>>& points,
                           Smoothness smoothness,
                           std::optional<double> lower_bound = std::nullopt,
                           bool in_class_B = false) {
  if (points.size() < 2) throw domain_error("table boundary: need at least 2 points");
  if (points.front().first != 0.0)
    throw domain_error("table boundary: first sample must be at t = 0");
  for (size_t i = 0; i + 1 < points.size(); ++i)
    if (!(points[i].first < points[i + 1].first))
      throw domain_error("table boundary: times must be strictly increasing");
  if (!(points.front().second <= 0.0))
    throw domain_error("table boundary: b(0) must be <= 0");
  if (lower_bound) {
    if (!(*lower_bound < 0.0)) throw domain_error("table boundary: lower_bound must be < 0");
    for (const auto& p : points)
      if (p.second < *lower_bound)
        throw domain_error("table boundary: sample below declared lower_bound");
  }
  auto pc = std::make_shared<detail::Pchip>();
  pc->build(points);
  Boundary b;
  b.eval = [pc](double t) { return (*pc)(t); };
  b.deriv = [pc](double t) { return pc->slope(t); };
  b.b0 = points.front().second;
  b.lower_bound = lower_bound;
  b.in_class_B = in_class_B;
  b.smoothness = smoothness;
  char buf[48];
  std::snprintf(buf, sizeof buf, "table(n=%zu,T=%g)", points.size(), points.back().first);
  b.fingerprint = buf;
  return b;
}

// ---------------------------------------------------------------------------
// Functional transforms: drift alpha, Brownian scaling gamma, Lerche beta.
// The combined map is (T.b)(t) = (1+beta*gamma*t)/sqrt(gamma) *
// b(gamma*t/(1+beta*gamma*t)) + alpha*t.

struct TransformParams {
  double alpha = 0.0;
  double gamma = 1.0;
  double beta = 0.0;

  bool identity() const { return alpha == 0.0 && gamma == 1.0 && beta == 0.0; }
};

inline void validate(const TransformParams& tp) {
  if (!(tp.gamma > 0.0) || !std::isfinite(tp.gamma))
    throw domain_error("transform: gamma must be positive");
  if (!(tp.beta >= 0.0) || !std::isfinite(tp.beta))
    throw domain_error("transform: beta must be nonnegative");
  if (!std::isfinite(tp.alpha)) throw domain_error("transform: alpha must be finite");
}

// Time argument seen by the base boundary.
inline double transform_time(const TransformParams& tp, double t) {
  return tp.gamma * t / (1.0 + tp.beta * tp.gamma * t);
}

inline Boundary apply_transform(const Boundary& b, const TransformParams& tp) {
  validate(tp);
  const double al = tp.alpha, ga = tp.gamma, be = tp.beta;
  const double sg = std::sqrt(ga);
  Boundary out;
  out.eval = [ev = b.eval, al, ga, be, sg](double t) {
    const double w = 1.0 + be * ga * t;
    return w / sg * ev(ga * t / w) + al * t;
  };
  if (b.deriv) {
    out.deriv = [ev = b.eval, dv = b.deriv, al, ga, be, sg](double t) {
      const double w = 1.0 + be * ga * t;
      const double u = ga * t / w;
      return be * ga / sg * ev(u) + sg / w * dv(u) + al;
    };
  }
  out.b0 = b.b0 / sg;
  out.smoothness = b.smoothness;
  // Metadata propagation is conservative: scaling and a nonnegative drift
  // keep a uniform lower bound and class-B membership; the other cases are
  // left unset rather than tracking witnesses.
  if (be == 0.0 && al >= 0.0) {
    out.in_class_B = b.in_class_B;
    if (b.lower_bound) out.lower_bound = *b.lower_bound / sg;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "transform(a=%g,g=%g,b=%g;%s)", al, ga, be,
                b.fingerprint.c_str());
  out.fingerprint = buf;
  return out;
}

// Density transport alongside apply_transform: if f solves boundary b, the
// transformed boundary's density on out_grid is
//   ft(t) = gamma * f(u) * w^{-3/2} * exp(-w*b(u)*(beta*b(u)/2 + alpha/sqrt(gamma))
//           - alpha^2 t / 2),   u = gamma*t/w,  w = 1 + beta*gamma*t.
// Works on the cell-density representation: the out-cell density is the
// formula at the out-cell midpoint, with f(u) read off the source cells by
// piecewise-linear interpolation in the midpoint coordinates.  Identity
// parameters short-circuit to the input (the formula path reproduces it only
// up to the source's own cdf/density rounding).
inline FptSolution transform_density(const FptSolution& sol, const Boundary& b,
                                     const TransformParams& tp, const TimeGrid& out_grid) {
  validate(tp);
  if (tp.identity() && same_points(out_grid, sol.grid)) {
    FptSolution out = sol;
    out.meta.method = "transform";
    return out;
  }
  const TimeGrid& src = sol.grid;
  const double tol = 1e-9 * (1.0 + src.T);
  if (transform_time(tp, out_grid.T) > src.T + tol)
    throw range_error("transform_density: target horizon maps past the solved horizon");

  const std::vector<double> c = cell_densities(sol);
  auto f_src = [&](double s) {
    // piecewise linear through (mid_j, c_j) with (0, 0) on the left and
    // one-sided extension over the last half cell
    const double m1 = src.mid(1);
    if (s <= m1) return c[0] * (s / m1);
    const double mN = src.mid(src.N);
    if (s >= mN) {
      if (src.N < 2) return c[0];
      const double mp = src.mid(src.N - 1);
      return c[src.N - 1] + (s - mN) * (c[src.N - 1] - c[src.N - 2]) / (mN - mp);
    }
    const int j = std::clamp(static_cast<int>((s - m1) / src.h) + 1, 1, src.N - 1);
    const double mj = src.mid(j);
    const double mj1 = src.mid(j + 1);
    const int jj = s < mj ? j - 1 : (s > mj1 ? j + 1 : j);  // guard rounding
    const double ma = src.mid(jj), mb = src.mid(jj + 1);
    return c[jj - 1] + (s - ma) * (c[jj] - c[jj - 1]) / (mb - ma);
  };

  const double al = tp.alpha, ga = tp.gamma, be = tp.beta;
  const double sg = std::sqrt(ga);
  FptSolution out;
  out.grid = out_grid;
  out.F.assign(static_cast<size_t>(out_grid.N) + 1, 0.0);
  std::vector<double> ct(static_cast<size_t>(out_grid.N));
  for (int i = 1; i <= out_grid.N; ++i) {
    const double t = out_grid.mid(i);
    const double w = 1.0 + be * ga * t;
    const double u = ga * t / w;
    if (u > src.T + tol)
      throw range_error("transform_density: interpolation past the solved horizon");
    const double bu = b.eval(u);
    const double expo = -w * bu * (0.5 * be * bu + al / sg) - 0.5 * al * al * t;
    ct[i - 1] = ga * f_src(std::min(u, src.T)) * std::pow(w, -1.5) * std::exp(expo);
    out.F[i] = out.F[i - 1] + out_grid.h * ct[i - 1];
  }
  out.f = nodal_from_cells(ct);
  out.meta = sol.meta;
  out.meta.method = "transform";
  out.meta.boundary = apply_transform(b, tp).fingerprint;
  return out;
}

// Default target grid: same step count, horizon trimmed so the time change
// stays inside the solved horizon (beta >= 1/T leaves it unconstrained).
inline FptSolution transform_density(const FptSolution& sol, const Boundary& b,
                                     const TransformParams& tp) {
  validate(tp);
  if (tp.identity()) return transform_density(sol, b, tp, sol.grid);
  const double T = sol.grid.T;
  double Tout = T;
  const double denom = tp.gamma * (1.0 - tp.beta * T);
  if (denom > 0.0) Tout = std::min(T, T / denom);
  return transform_density(sol, b, tp, make_grid(Tout, sol.grid.N));
}

}  // namespace fpt

#endif
