#ifndef FPT_CLOSEDFORM_HPP
#define FPT_CLOSEDFORM_HPP

// Analytic and semi-analytic first-passage results used as oracles:
// reflection principle, Bachelier-Levy density/cdf for linear boundaries,
// the Airy-ratio Laplace transform for parabolic boundaries with
// Gaver-Stehfest inversion, and the Mellin identity check for square-root
// boundaries.

#include <cmath>
#include <functional>
#include <vector>

#include "fpt/error.hpp"
#include "fpt/grid.hpp"
#include "fpt/specfun.hpp"

namespace fpt {

// Constant boundary c < 0: F(t) = 2 Phi(c/sqrt(t)).
inline double reflection_cdf(double c, double t) {
  if (!(c < 0.0)) throw domain_error("reflection_cdf: requires c < 0");
  if (!(t > 0.0)) throw domain_error("reflection_cdf: requires t > 0");
  return 2.0 * sf::norm_cdf(c / std::sqrt(t));
}

inline double reflection_density(double c, double t) {
  if (!(c < 0.0)) throw domain_error("reflection_density: requires c < 0");
  if (!(t > 0.0)) throw domain_error("reflection_density: requires t > 0");
  return -c * sf::norm_pdf(c / std::sqrt(t)) / (t * std::sqrt(t));
}

// Linear boundary -a + slope*t, a > 0.
inline double bachelier_levy_density(double a, double slope, double t) {
  if (!(a > 0.0)) throw domain_error("bachelier_levy_density: requires a > 0");
  if (!(t > 0.0)) throw domain_error("bachelier_levy_density: requires t > 0");
  const double d = a - slope * t;
  return a / (sf::sqrt_2pi * t * std::sqrt(t)) * std::exp(-d * d / (2.0 * t));
}

// Companion distribution function; total mass is min(1, e^{2 a slope}).
inline double bachelier_levy_cdf(double a, double slope, double t) {
  if (!(a > 0.0)) throw domain_error("bachelier_levy_cdf: requires a > 0");
  if (!(t > 0.0)) return 0.0;
  const double rt = std::sqrt(t);
  return sf::norm_cdf((slope * t - a) / rt) +
         std::exp(2.0 * a * slope) * sf::norm_cdf(-(a + slope * t) / rt);
}

// ---------------------------------------------------------------------------
// Gaver-Stehfest inversion of a real Laplace transform.

struct LaplaceInversionConfig {
  int order = 12;       // number of terms, even
  double t_min = 0.05;  // inversion not attempted below this time
};

inline void validate(const LaplaceInversionConfig& cfg) {
  if (cfg.order != 8 && cfg.order != 10 && cfg.order != 12 && cfg.order != 14)
    throw domain_error("laplace inversion: order must be one of 8, 10, 12, 14");
  if (!(cfg.t_min > 0.0)) throw domain_error("laplace inversion: t_min must be positive");
}

namespace detail {

// Stehfest coefficients for n = 2M terms, in long double: the alternating
// sum loses ~n digits, which 80-bit arithmetic absorbs through n = 14.
inline std::vector<long double> gs_weights(int n) {
  const int M = n / 2;
  auto fact = [](int m) {
    long double r = 1.0L;
    for (int i = 2; i <= m; ++i) r *= i;
    return r;
  };
  std::vector<long double> w(static_cast<size_t>(n) + 1, 0.0L);
  for (int k = 1; k <= n; ++k) {
    long double sum = 0.0L;
    for (int j = (k + 1) / 2; j <= std::min(k, M); ++j) {
      long double term = std::pow(static_cast<long double>(j), M + 1) / fact(M);
      term *= fact(M) / (fact(j) * fact(M - j));           // C(M, j)
      term *= fact(2 * j) / (fact(j) * fact(j));           // C(2j, j)
      term *= fact(j) / (fact(k - j) * fact(2 * j - k));   // C(j, k - j)
      sum += term;
    }
    w[k] = ((M + k) % 2 == 0 ? 1.0L : -1.0L) * sum;
  }
  return w;
}

}  // namespace detail

inline double gaver_stehfest(const std::function<double(double)>& transform, double t,
                             int order) {
  if (!(t > 0.0)) throw domain_error("gaver_stehfest: requires t > 0");
  static const long double ln2 = 0.693147180559945309417L;
  const std::vector<long double> w = detail::gs_weights(order);
  long double acc = 0.0L;
  for (int k = 1; k <= order; ++k)
    acc += w[k] * static_cast<long double>(transform(static_cast<double>(k * ln2 / t)));
  return static_cast<double>(acc * ln2 / t);
}

// ---------------------------------------------------------------------------
// Parabolic boundary b(t) = -p t^2/2 - q (receding parabola), p, q > 0.
// The Laplace transform of e^{p^2 t^3/6} f(t) is the Airy ratio
//   psi(sigma) = Ai(cc (sigma + p q)) / Ai(cc sigma),  cc = 2^{1/3} p^{-2/3}.
// Note the sign of the shift: the approaching parabola +p t^2/2 - q has
// e^{p^2 t^3/6} f(t) growing superexponentially, so it has no transform on
// any half line; the receding orientation is the one with a usable identity.

namespace detail {

inline constexpr double airy_zeros[10] = {
    -2.33810741045976704, -4.08794944413097062, -5.52055982809555106,
    -6.78670809007175900, -7.94413358712085312, -9.02265085334098038,
    -10.0401743415580859, -11.0085243037332628, -11.9360155632362625,
    -12.8287767528657572};

inline void check_airy_pole(double arg) {
  if (arg < airy_zeros[9] - 0.3)
    throw domain_error("quadratic_laplace: sigma too far below the pole region");
  for (double z : airy_zeros)
    if (std::fabs(arg - z) < 1e-12)
      throw pole_error("quadratic_laplace: denominator at an Airy zero");
}

}  // namespace detail

inline double quadratic_laplace(double sigma, double p, double q) {
  if (!(p > 0.0) || !(q > 0.0))
    throw domain_error("quadratic_laplace: requires p > 0 and q > 0");
  const double cc = std::cbrt(2.0) * std::pow(p, -2.0 / 3.0);
  const double den_arg = cc * sigma;
  const double num_arg = cc * (sigma + p * q);
  detail::check_airy_pole(den_arg);
  if (den_arg >= sf::detail::airy_pos_switch) {
    // both arguments are on the decaying branch; the plain values underflow
    // long before the ratio does, so assemble it from scaled evaluations
    const double zn = 2.0 / 3.0 * std::pow(num_arg, 1.5);
    const double zd = 2.0 / 3.0 * std::pow(den_arg, 1.5);
    return sf::detail::airy_ai_scaled_pos(num_arg) /
           sf::detail::airy_ai_scaled_pos(den_arg) * std::exp(zd - zn);
  }
  return sf::airy_ai(num_arg) / sf::airy_ai(den_arg);
}

// Density of the first passage to -p t^2/2 - q by Gaver-Stehfest inversion,
// cross-checked at an escalated order; disagreement beyond 1e-2 relative
// rejects the value.
inline double quadratic_density(double t, double p, double q,
                                const LaplaceInversionConfig& cfg = {}) {
  validate(cfg);
  if (!(t >= cfg.t_min))
    throw domain_error("quadratic_density: t below the inversion floor t_min");
  const double damp = p * p * t * t * t / 6.0;
  if (damp > 700.0)
    throw range_error("quadratic_density: e^{p^2 t^3/6} overflows the inversion target");
  auto psi = [p, q](double s) { return quadratic_laplace(s, p, q); };
  const int partner = cfg.order == 8 ? 12 : cfg.order == 10 ? 14 : cfg.order == 12 ? 14 : 12;
  const double g1 = gaver_stehfest(psi, t, cfg.order);
  const double g2 = gaver_stehfest(psi, t, partner);
  const double scale = std::max({std::fabs(g1), std::fabs(g2), 1e-12});
  if (std::fabs(g1 - g2) > 1e-2 * scale)
    throw accuracy_error("quadratic_density: order escalation disagrees beyond 1e-2");
  return std::exp(-damp) * g1;
}

// ---------------------------------------------------------------------------
// Square-root boundary p*sqrt(t) - q: Mellin identity
//   int_0^infty t^{-x/2} f(t) dt = e^{-p^2/4} q^{-x} / D_{-x}(p),  x < 1.
// Returns (truncated integral + tail estimate) - RHS.  The tail uses a
// level-and-mass-matched power law: these boundaries have 1 - F(t) ~ t^{-mu}
// with mu = 1 + T f(T)/(1 - F(T)) on the fitted cell, which an exponential
// fit badly underestimates.
inline double sqrt_mellin_check(double x, double p_param, double q,
                                const FptSolution& sol) {
  if (!(x < 1.0)) throw domain_error("sqrt_mellin_check: requires x < 1");
  if (!(q > 0.0)) throw domain_error("sqrt_mellin_check: requires q > 0");
  if (p_param == 0.0 || !std::isfinite(p_param))
    throw domain_error("sqrt_mellin_check: requires nonzero p");

  // a pole of the right-hand side is a property of (x, p) alone: no solution
  // can be checked against it, so reject before looking at the grid
  const double dsc = sf::pcf_d_scaled(-x, p_param);
  if (std::fabs(dsc) < 1e-12)
    throw pole_error("sqrt_mellin_check: D_{-x}(p) vanishes");

  const TimeGrid& g = sol.grid;
  const double tail_mass = 1.0 - sol.F[g.N];
  if (tail_mass > 0.05)
    throw horizon_error("sqrt_mellin_check: tail mass above 0.05, horizon too short");

  const std::vector<double> c = cell_densities(sol);
  double lhs = 0.0;
  for (int j = 1; j <= g.N; ++j)
    lhs += std::pow(g.mid(j), -0.5 * x) * c[j - 1] * g.h;
  if (tail_mass > 0.0) {
    const double mu = 1.0 + g.T * sol.f[g.N] / tail_mass;
    if (!(mu - 1.0 + 0.5 * x > 0.0))
      throw horizon_error("sqrt_mellin_check: fitted tail moment diverges");
    lhs += tail_mass * std::pow(g.T, -0.5 * x) * (mu - 1.0) / (mu - 1.0 + 0.5 * x);
  }

  const double rhs =
      std::exp(-0.5 * p_param * p_param) * std::pow(q, -x) / dsc;
  return lhs - rhs;
}

}  // namespace fpt

#endif
