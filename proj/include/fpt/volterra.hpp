#ifndef FPT_VOLTERRA_HPP
#define FPT_VOLTERRA_HPP

// First-passage densities to a curved boundary via Volterra integral
// equations: forward-substitution solvers for the first-kind members at
// p = -1 (bounded kernel, midpoint product integration in the cdf measure)
// and p = 0 (Abel-type (t-s)^{-1/2} kernel, exact singular moments), the
// second-kind equation, and residual evaluators for the whole kernel family
// (any order p, limit or offset level), the mixed Case-5 display, and the
// Gaussian-mixture (Widder) variant.

#include <cmath>
#include <vector>

#include "fpt/boundary.hpp"
#include "fpt/error.hpp"
#include "fpt/grid.hpp"
#include "fpt/specfun.hpp"

namespace fpt {

enum class YMode { limit, offset };

struct KernelSpec {
  double p = -1.0;
  YMode y_mode = YMode::limit;
};

namespace detail {

// Limit-mode equations need boundary regularity that grows with p: any
// continuous boundary for p <= -1, a derivative at the diagonal for
// -1 < p <= 0, and the C1-with-decay class above that.
inline void check_limit_smoothness(double p, const Boundary& b) {
  if (p <= -1.0) return;
  if (p <= 0.0) {
    if (b.smoothness == Smoothness::continuous)
      throw domain_error("kernel order in (-1,0] needs a differentiable boundary");
    return;
  }
  if (b.smoothness != Smoothness::c1)
    throw domain_error("kernel order in (0,1) needs a C1 boundary");
}

inline void check_kernel_spec(const KernelSpec& spec, const Boundary& b) {
  if (!std::isfinite(spec.p)) throw domain_error("kernel order must be finite");
  if (spec.y_mode == YMode::limit) {
    if (!(spec.p < 1.0))
      throw domain_error("limit-mode equations exist only for p < 1");
    check_limit_smoothness(spec.p, b);
  }
}

}  // namespace detail

// Kernel of the p-family equation at level y:
//   e^{-(b(s)-y)^2/(4(t-s))} D_p((b(s)-y)/sqrt(t-s)) / (t-s)^{(p+1)/2}.
// At s = 0 with the start level 0 in place of b(s) this is the equation's
// right-hand side (see kernel_free_term).
inline double kernel_value(const KernelSpec& spec, const Boundary& b, double t,
                           double s, double y) {
  detail::check_kernel_spec(spec, b);
  if (!(s >= 0.0) || !(s < t)) throw domain_error("kernel_value: requires 0 <= s < t");
  const double ye = spec.y_mode == YMode::limit ? b.eval(t) : y;
  const double d = t - s;
  const double z = (b.eval(s) - ye) / std::sqrt(d);
  return sf::pcf_d_scaled(spec.p, z) * std::pow(d, -0.5 * (spec.p + 1.0));
}

// Free term of the family equation: e^{-y^2/(4t)} D_p(-y/sqrt(t)) / t^{(p+1)/2}.
inline double kernel_free_term(double p, double t, double y) {
  if (!(t > 0.0)) throw domain_error("kernel_free_term: requires t > 0");
  return sf::pcf_d_scaled(p, -y / std::sqrt(t)) * std::pow(t, -0.5 * (p + 1.0));
}

namespace detail {

inline void check_solvable(const Boundary& b, const TimeGrid& grid) {
  if (!std::isfinite(b.b0) || !(b.b0 < 0.0))
    throw domain_error("solver: boundary must start at a finite b(0) < 0");
  if (grid.N < 8 || static_cast<int>(grid.t.size()) != grid.N + 1)
    throw domain_error("solver: malformed grid");
  if (b.lower_bound) {
    const double lb = *b.lower_bound - 1e-12;
    for (double t : grid.t)
      if (b.eval(t) < lb)
        throw domain_error("solver: boundary dips below its declared lower_bound");
  }
}

// Clip tiny negative increments from roundoff; anything worse marks the
// solution as suspect instead of silently zeroing real mass.
inline double clip_cell(double v, bool& warn) {
  if (v >= 0.0) return v;
  if (v > -1e-10) return 0.0;
  warn = true;
  return 0.0;
}

}  // namespace detail

// First-kind solve for the p = -1 and p = 0 members.  Both march forward on
// cdf increments: p = -1 uses midpoint product integration in the F measure
// against the bounded kernel Phi((b(t)-b(s))/sqrt(t-s)); p = 0 treats the
// generalized Abel equation with weights exact for (t-s)^{-1/2} against a
// piecewise-constant density.
inline FptSolution solve_first_kind(double p, const Boundary& b, const TimeGrid& grid) {
  if (p != -1.0 && p != 0.0)
    throw domain_error("solve_first_kind: only the p = -1 and p = 0 members are solvable");
  detail::check_kernel_spec({p, YMode::limit}, b);
  detail::check_solvable(b, grid);

  const int N = grid.N;
  const std::vector<double>& t = grid.t;
  std::vector<double> bt(static_cast<size_t>(N) + 1), bm(static_cast<size_t>(N) + 1);
  for (int i = 0; i <= N; ++i) bt[i] = b.eval(t[i]);
  for (int j = 1; j <= N; ++j) bm[j] = b.eval(grid.mid(j));

  FptSolution sol;
  sol.grid = grid;
  sol.F.assign(static_cast<size_t>(N) + 1, 0.0);
  std::vector<double> dF(static_cast<size_t>(N) + 1, 0.0);
  bool warn = false;

  if (p == -1.0) {
    // Phi((b(t_i)-b(s))/sqrt(t_i-s)), nonsingular; the sqrt(2*pi) of the raw
    // family kernel cancels between both sides.
    for (int i = 1; i <= N; ++i) {
      double acc = sf::norm_cdf(bt[i] / std::sqrt(t[i]));
      for (int j = 1; j < i; ++j) {
        const double d = t[i] - grid.mid(j);
        acc -= sf::norm_cdf((bt[i] - bm[j]) / std::sqrt(d)) * dF[j];
      }
      const double diag = sf::norm_cdf((bt[i] - bm[i]) / std::sqrt(t[i] - grid.mid(i)));
      dF[i] = detail::clip_cell(acc / diag, warn);
      sol.F[i] = sol.F[i - 1] + dF[i];
    }
  } else {
    // phi((b(t_i)-b(s))/sqrt(t_i-s)) / sqrt(t_i-s); piecewise-constant cell
    // densities against exact moments of the singular factor.
    std::vector<double> fbar(static_cast<size_t>(N) + 1, 0.0);
    for (int i = 1; i <= N; ++i) {
      double acc = sf::norm_pdf(bt[i] / std::sqrt(t[i])) / std::sqrt(t[i]);
      for (int j = 1; j <= i; ++j) {
        const double wij =
            2.0 * (std::sqrt(t[i] - t[j - 1]) - std::sqrt(std::max(0.0, t[i] - t[j])));
        const double q = sf::norm_pdf((bt[i] - bm[j]) / std::sqrt(t[i] - grid.mid(j)));
        if (j < i)
          acc -= q * wij * fbar[j];
        else
          fbar[i] = acc / (q * wij);
      }
      fbar[i] = detail::clip_cell(fbar[i], warn);
      dF[i] = grid.h * fbar[i];
      sol.F[i] = sol.F[i - 1] + dF[i];
    }
  }

  for (int i = 1; i <= N; ++i)
    if (dF[i] > 0.2) warn = true;  // grid too coarse for the density mode
  sol.f = nodal_from_cells(cell_densities(sol));
  sol.meta.p = p;
  sol.meta.method = "first-kind";
  sol.meta.boundary = b.fingerprint;
  sol.meta.accuracy_warning = warn;
  return sol;
}

// Second-kind equation
//   f(t) = -b(t) phi(b(t)/sqrt(t)) / t^{3/2}
//          - int_0^t phi((b(t)-b(s))/sqrt(t-s)) (b(s)-b(t)) (t-s)^{-3/2} f(s) ds.
// The (b(s)-b(t)) factor kills one power of the singularity; the remaining
// (t-s)^{-1/2} is handled with exact moments against trapezoidal nodal
// values.  corrected_sign = false keeps the uncorrected (positive) free term
// for regression purposes: it produces a sign-flipped, useless density.
inline FptSolution solve_second_kind(const Boundary& b, const TimeGrid& grid,
                                     bool corrected_sign = true) {
  if (b.smoothness != Smoothness::c1)
    throw domain_error("solve_second_kind: needs a C1 boundary");
  detail::check_solvable(b, grid);

  const int N = grid.N;
  const std::vector<double>& t = grid.t;
  FptSolution sol;
  sol.grid = grid;
  sol.f.assign(static_cast<size_t>(N) + 1, 0.0);
  sol.F.assign(static_cast<size_t>(N) + 1, 0.0);
  bool warn = false;

  auto smooth_part = [&](double ti, double bi, double s) {
    const double bs = b.eval(s);
    const double d = ti - s;
    return sf::norm_pdf((bi - bs) / std::sqrt(d)) * (bs - bi) / d;
  };

  for (int i = 1; i <= N; ++i) {
    const double bi = b.eval(t[i]);
    const double sign = corrected_sign ? -1.0 : 1.0;
    double acc = sign * bi * sf::norm_pdf(bi / std::sqrt(t[i])) / std::pow(t[i], 1.5);
    double diag = 1.0;
    for (int j = 1; j <= i; ++j) {
      const double mij =
          2.0 * (std::sqrt(t[i] - t[j - 1]) - std::sqrt(std::max(0.0, t[i] - t[j])));
      const double r = smooth_part(t[i], bi, grid.mid(j));
      if (j < i) {
        acc -= r * 0.5 * (sol.f[j - 1] + sol.f[j]) * mij;
      } else {
        acc -= r * 0.5 * sol.f[i - 1] * mij;
        diag = 1.0 + 0.5 * r * mij;
      }
    }
    double fi = acc / diag;
    if (corrected_sign) fi = detail::clip_cell(fi, warn);
    sol.f[i] = fi;
    sol.F[i] = sol.F[i - 1] + 0.5 * grid.h * (sol.f[i - 1] + sol.f[i]);
  }

  sol.meta.p = 1.0;  // the family member the equation differentiates from
  sol.meta.method = corrected_sign ? "second-kind" : "second-kind-uncorrected";
  sol.meta.boundary = b.fingerprint;
  sol.meta.accuracy_warning = warn;
  return sol;
}

namespace detail {

inline std::vector<double> checked_cells(const FptSolution& sol) {
  if (sol.grid.N < 1 || static_cast<int>(sol.F.size()) != sol.grid.N + 1)
    throw domain_error("residual: malformed solution");
  return cell_densities(sol);
}

inline int residual_node(const FptSolution& sol, double t) {
  const int i = node_index(sol.grid, t);
  if (i < 1) throw domain_error("residual: t is not a grid node of the solution");
  return i;
}

}  // namespace detail

// LHS - RHS of the selected family equation against sol's cell densities.
// Limit mode pairs the smooth kernel factor at cell midpoints with exact
// moments of (t-s)^{-(p+1)/2}; offset mode uses plain midpoint cells (the
// kernel then vanishes superexponentially at the diagonal).
inline double residual_family(const KernelSpec& spec, const Boundary& b,
                              const FptSolution& sol, double t, double y = 0.0) {
  detail::check_kernel_spec(spec, b);
  const int it = detail::residual_node(sol, t);
  const double ye = spec.y_mode == YMode::limit ? b.eval(t) : y;
  if (spec.y_mode == YMode::offset && !(ye < b.eval(t)))
    throw domain_error("residual_family: offset level must satisfy y < b(t)");

  const std::vector<double> c = detail::checked_cells(sol);
  const TimeGrid& g = sol.grid;
  double rhs = 0.0;
  if (spec.y_mode == YMode::limit) {
    const double lam = 0.5 * (spec.p + 1.0);
    const double om = 1.0 - lam;
    for (int j = 1; j <= it; ++j) {
      const double m =
          (std::pow(t - g.t[j - 1], om) - std::pow(std::max(0.0, t - g.t[j]), om)) / om;
      const double s = g.mid(j);
      const double z = (b.eval(s) - ye) / std::sqrt(t - s);
      rhs += sf::pcf_d_scaled(spec.p, z) * c[j - 1] * m;
    }
  } else {
    for (int j = 1; j <= it; ++j) {
      const double s = g.mid(j);
      rhs += kernel_value(spec, b, t, s, ye) * c[j - 1] * g.h;
    }
  }
  return kernel_free_term(spec.p, t, ye) - rhs;
}

// Mixed first-order display whose exact value is zero:
//   int_0^t [ s/sqrt(t-s) * phi((b(t)-b(s))/sqrt(t-s))
//             + b(s) * Phi((b(t)-b(s))/sqrt(t-s)) ] f(s) ds = 0.
// The first term gets exact (t-s)^{-1/2} moments, the bounded second term
// plain midpoint cells.  scale_out receives int |integrand| for relative
// comparisons.
inline double residual_case5(const Boundary& b, const FptSolution& sol, double t,
                             double* scale_out = nullptr) {
  const int it = detail::residual_node(sol, t);
  const std::vector<double> c = detail::checked_cells(sol);
  const TimeGrid& g = sol.grid;
  const double bt = b.eval(t);
  double acc = 0.0, scale = 0.0;
  for (int j = 1; j <= it; ++j) {
    const double s = g.mid(j);
    const double m =
        2.0 * (std::sqrt(t - g.t[j - 1]) - std::sqrt(std::max(0.0, t - g.t[j])));
    const double z = (bt - b.eval(s)) / std::sqrt(t - s);
    const double q1 = s * sf::norm_pdf(z) * c[j - 1];
    const double q2 = b.eval(s) * sf::norm_cdf(z) * c[j - 1];
    acc += q1 * m + q2 * g.h;
    scale += std::fabs(q1) * m + std::fabs(q2) * g.h;
  }
  if (scale_out) *scale_out = scale;
  return acc;
}

struct WidderAtom {
  double theta = 0.0;  // >= 0
  double weight = 1.0; // > 0
};

// Residual of u(t, y) = int_0^t u(t-s, y-b(s)) f(s) ds for the Gaussian
// mixture u(s, x) = sum_i w_i phi((x-theta_i)/sqrt(s))/sqrt(s); each atom is
// a level-(y - theta_i) renewal identity, so the mixture residual vanishes
// for the true density.
inline double residual_widder(const std::vector<WidderAtom>& atoms, const Boundary& b,
                              const FptSolution& sol, double t, double y) {
  if (atoms.empty()) throw domain_error("residual_widder: empty atom list");
  for (const auto& a : atoms)
    if (!(a.theta >= 0.0) || !(a.weight > 0.0))
      throw domain_error("residual_widder: atoms need theta >= 0 and weight > 0");
  if (!(y < b.eval(t)))
    throw domain_error("residual_widder: requires y < b(t)");
  const int it = detail::residual_node(sol, t);
  const std::vector<double> c = detail::checked_cells(sol);
  const TimeGrid& g = sol.grid;

  auto u = [&atoms](double s, double x) {
    const double rs = std::sqrt(s);
    double acc = 0.0;
    for (const auto& a : atoms) acc += a.weight * sf::norm_pdf((x - a.theta) / rs) / rs;
    return acc;
  };

  double rhs = 0.0;
  for (int j = 1; j <= it; ++j) {
    const double s = g.mid(j);
    rhs += u(t - s, y - b.eval(s)) * c[j - 1] * g.h;
  }
  return u(t, y) - rhs;
}

}  // namespace fpt

#endif
