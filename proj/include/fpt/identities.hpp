#ifndef FPT_IDENTITIES_HPP
#define FPT_IDENTITIES_HPP

// Fredholm first-kind identity checks and the drift change-of-measure
// relation.  These validate a solved FptSolution from the "other side": the
// Volterra machinery never enters, so agreement is evidence rather than
// tautology.  Complex arithmetic stays inside this header.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "fpt/boundary.hpp"
#include "fpt/error.hpp"
#include "fpt/grid.hpp"
#include "fpt/volterra.hpp"

namespace fpt {

enum class TailPolicy {
  analytic_fit,  // exponential fit of the last cells, linearized boundary
  bound_only     // no tail added; a rigorous bound is reported instead
};

struct FredholmProbe {
  std::complex<double> alpha;
  double horizon = 0.0;  // 0: use the full solution grid; else a grid node
  TailPolicy tail_policy = TailPolicy::analytic_fit;
};

struct FredholmResult {
  std::complex<double> residual;
  // bound on the neglected tail integral, e^{-Re(alpha) c - Re(alpha^2) T/2}
  // (1 - F(T)); NaN when no uniform lower bound c is available or the
  // exponent estimate does not apply (Re(alpha^2) < 0)
  double tail_bound = std::numeric_limits<double>::quiet_NaN();
};

inline void validate(const FredholmProbe& probe) {
  if (!std::isfinite(probe.alpha.real()) || !std::isfinite(probe.alpha.imag()) ||
      !std::isfinite(probe.horizon))
    throw domain_error("fredholm probe: nonfinite field");
  if (probe.alpha.real() < 0.0)
    throw domain_error("fredholm probe: requires Re(alpha) >= 0");
}

namespace detail {

// Membership in A_b for real alpha: b(t) + alpha t uniformly bounded below.
// A grid can only witness the failure mode where the minimum sits at the
// right edge and is still heading down; accept everything else.
inline void check_drifted_bounded(const Boundary& b, double alpha, const TimeGrid& g) {
  int argmin = 0;
  double best = std::numeric_limits<double>::infinity();
  double last = 0.0, prev = 0.0;
  for (int i = 0; i <= g.N; ++i) {
    const double v = b(g.t[i]) + alpha * g.t[i];
    if (v < best) {
      best = v;
      argmin = i;
    }
    prev = last;
    last = v;
  }
  if (argmin == g.N && last < prev)
    throw domain_error("fredholm_residual: b(t) + alpha t decreasing at the horizon, "
                       "not bounded below on the evidence");
}

inline double boundary_slope_at(const Boundary& b, double t) {
  if (b.has_deriv()) return b.deriv(t);
  const double h = 1e-6 * (1.0 + t);
  return (b(t) - b(t - h)) / h;  // one-sided: t is the right end of the grid
}

}  // namespace detail

inline FredholmResult fredholm_residual(const Boundary& b, const FptSolution& sol,
                                        const FredholmProbe& probe) {
  validate(probe);
  const TimeGrid& g = sol.grid;
  const std::complex<double> a = probe.alpha;
  const bool complex_alpha = a.imag() != 0.0;
  if (complex_alpha && !b.in_class_B)
    throw domain_error("fredholm_residual: complex alpha requires a class-B boundary");
  if (!complex_alpha) detail::check_drifted_bounded(b, a.real(), g);

  int M = g.N;
  if (probe.horizon > 0.0) {
    M = node_index(g, probe.horizon);
    if (M < 2)
      throw domain_error("fredholm_residual: horizon must be a grid node past t_2");
  }
  const double T = g.t[M];

  const std::vector<double> c = cell_densities(sol);
  const std::complex<double> half_a2 = 0.5 * a * a;
  std::complex<double> acc = 0.0;
  for (int j = 1; j <= M; ++j) {
    const double m = g.mid(j);
    acc += std::exp(-a * b(m) - half_a2 * m) * c[j - 1] * g.h;
  }

  const double mass_left = 1.0 - sol.F[M];
  FredholmResult out;
  if (b.lower_bound && 2.0 * half_a2.real() >= 0.0)
    out.tail_bound = std::exp(-a.real() * *b.lower_bound - half_a2.real() * T) * mass_left;

  if (probe.tail_policy == TailPolicy::bound_only) {
    if (2.0 * half_a2.real() < 0.0)
      throw horizon_error("fredholm_residual: no tail bound for |arg alpha| > pi/4");
    if (!b.lower_bound)
      throw domain_error("fredholm_residual: bound-only tail needs a uniform lower bound");
    if (out.tail_bound > 0.05)
      throw horizon_error("fredholm_residual: tail mass too large for bound-only policy");
    out.residual = acc - 1.0;
    return out;
  }

  // analytic fit: f ~ f(T) e^{-mu (t-T)} with b linearized at T
  const double cM = c[M - 1], cP = c[M - 2];
  if (!(cM > 0.0) || !(cP > cM))
    throw horizon_error("fredholm_residual: density not decaying at the horizon, "
                        "cannot fit a tail");
  const double mu = std::log(cP / cM) / g.h;
  const std::complex<double> den = mu + a * detail::boundary_slope_at(b, T) + half_a2;
  if (!(den.real() > 0.0))
    throw horizon_error("fredholm_residual: integrand not decaying beyond the horizon");
  acc += sol.f[M] * std::exp(-a * b(T) - half_a2 * T) / den;
  out.residual = acc - 1.0;
  return out;
}

// Pointwise check of the drift change of measure: an independent solve of the
// drifted boundary b + alpha t against f(t) e^{-alpha b(t) - alpha^2 t/2}.
inline std::vector<double> drift_relation_check(const Boundary& b, const FptSolution& sol,
                                                double alpha) {
  if (!std::isfinite(alpha))
    throw domain_error("drift_relation_check: nonfinite alpha");
  const TimeGrid& g = sol.grid;
  if (static_cast<int>(sol.f.size()) != g.N + 1)
    throw domain_error("drift_relation_check: solution does not match its grid");
  const double p = (sol.meta.method == "first-kind") ? sol.meta.p : -1.0;
  const Boundary drifted = apply_transform(b, TransformParams{alpha, 1.0, 0.0});
  const FptSolution sol_a = solve_first_kind(p, drifted, g);
  std::vector<double> res(g.N + 1);
  for (int i = 0; i <= g.N; ++i) {
    const double t = g.t[i];
    res[i] = sol_a.f[i] - sol.f[i] * std::exp(-alpha * b(t) - 0.5 * alpha * alpha * t);
  }
  return res;
}

}  // namespace fpt

#endif
