#ifndef FPT_SPECFUN_HPP
#define FPT_SPECFUN_HPP

// Special functions backing the Volterra kernels: Gamma, normal pdf/cdf and
// quantile, Hermite polynomials, parabolic cylinder D_p, Airy Ai, Bessel
// K_{1/4}.  Everything is plain double precision; the parabolic cylinder
// evaluator is the only nontrivial piece and is organized as a region switch
// (see pcf_region below).

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fpt/error.hpp"

namespace fpt {
namespace sf {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double sqrt_2pi = 2.50662827463100050242;
inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;
inline constexpr double sqrt2 = 1.41421356237309504880;

inline double gamma(double x) {
  if (x <= 0.0 && x == std::floor(x))
    throw domain_error("gamma: pole at nonpositive integer " + std::to_string(x));
  if (x < 0.5)  // reflection keeps tgamma on arguments > 0.5
    return pi / (std::sin(pi * x) * std::tgamma(1.0 - x));
  return std::tgamma(x);
}

inline double norm_pdf(double z) { return inv_sqrt_2pi * std::exp(-0.5 * z * z); }

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / sqrt2); }

// Wichura's PPND16 rational approximations; relative error below 1e-15 on
// (0,1).  Needed by the Monte Carlo driver, which draws normals by inversion
// so that path streams stay reproducible across platforms.
inline double norm_quantile(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw domain_error("norm_quantile: argument must lie strictly in (0,1)");
  const double q = u - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

// Physicists' Hermite polynomial by the three-term recurrence.
inline double hermite(int n, double z) {
  if (n < 0) throw domain_error("hermite: order must be nonnegative");
  if (n == 0) return 1.0;
  double hm = 1.0, h = 2.0 * z;
  for (int k = 1; k < n; ++k) {
    const double hp = 2.0 * z * h - 2.0 * k * hm;
    hm = h;
    h = hp;
  }
  return h;
}

enum class PcfRegion { integer_order, integral_representation, recurrence_lift, asymptotic };

namespace detail {

inline constexpr double pcf_z_switch = 6.0;  // quadrature vs asymptotics

// Asymptotic series A(p, t) = sum_k (-1)^k p(p-1)...(p-2k+1) / (k! 2^k t^{2k}),
// truncated at its smallest term.
inline double pcf_asym_series_a(double p, double t) {
  double sum = 1.0, term = 1.0;
  for (int k = 0; k < 40; ++k) {
    const double next = -term * (p - 2.0 * k) * (p - 2.0 * k - 1.0) /
                        (2.0 * (k + 1.0) * t * t);
    if (std::fabs(next) >= std::fabs(term)) break;
    sum += next;
    term = next;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return sum;
}

// Companion series B(p, t) with b_{k+1}/b_k = (p+2k+1)(p+2k+2) / (2(k+1)t^2).
inline double pcf_asym_series_b(double p, double t) {
  double sum = 1.0, term = 1.0;
  for (int k = 0; k < 40; ++k) {
    const double next = term * (p + 2.0 * k + 1.0) * (p + 2.0 * k + 2.0) /
                        (2.0 * (k + 1.0) * t * t);
    if (std::fabs(next) >= std::fabs(term)) break;
    sum += next;
    term = next;
    if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
  }
  return sum;
}

// e^{-z^2/4} D_p(z) for |z| beyond the switch point.  The z -> -inf branch is
// the real-line reading of the two-sided expansion: the e^{i pi p} factor of
// the printed form becomes cos(pi p) for real-valued D_p on the real axis
// (checked against the integral representation in the test suite).
inline double pcf_scaled_asymptotic(double p, double z) {
  if (z > 0.0) {
    return std::exp(-0.5 * z * z) * std::pow(z, p) * pcf_asym_series_a(p, z);
  }
  const double t = -z;
  const double osc = std::cos(pi * p) * std::pow(t, p) * std::exp(-0.5 * t * t) *
                     pcf_asym_series_a(p, t);
  const double grow = sqrt_2pi / std::tgamma(-p) * std::pow(t, -p - 1.0) *
                      pcf_asym_series_b(p, t);
  return osc + grow;
}

// Integral representation for p < 0:
//   e^{-z^2/4} D_p(z) = e^{-z^2/2} / Gamma(-p) * I,
//   I = int_0^inf x^{-p-1} e^{-xz - x^2/2} dx.
// For -1 < p < 0 the substitution x = u^{1/(-p)} removes the endpoint
// singularity exactly; the integral is split at the integrand's mode.
inline double pcf_scaled_integral(double p, double z) {
  using quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double inf = std::numeric_limits<double>::infinity();
  const double disc = z * z - 4.0 * (p + 1.0);
  const double xmode = (disc >= 0.0) ? 0.5 * (-z + std::sqrt(disc)) : 0.0;
  double raw;
  if (p > -1.0) {
    const double a = -p;
    auto g = [a, z](double u) {
      if (u <= 0.0) return 1.0 / a;
      const double lx = std::log(u) / a;
      if (lx > 50.0) return 0.0;  // x^2/2 term has killed the integrand long ago
      const double x = std::exp(lx);
      return std::exp(-x * (z + 0.5 * x)) / a;
    };
    const double split = (xmode > 0.0) ? std::pow(xmode, a) : 0.5;
    raw = quad::integrate(g, 0.0, split, 12, 1e-12) +
          quad::integrate(g, split, inf, 12, 1e-12);
  } else {
    auto g = [p, z](double x) {
      if (x <= 0.0) return (p == -1.0) ? 1.0 : 0.0;
      const double lg = (-p - 1.0) * std::log(x) - x * (z + 0.5 * x);
      return std::exp(lg);
    };
    const double split = (xmode > 0.0) ? xmode : 0.5;
    raw = quad::integrate(g, 0.0, split, 12, 1e-12) +
          quad::integrate(g, split, inf, 12, 1e-12);
  }
  return std::exp(-0.5 * z * z) * raw / std::tgamma(-p);
}

inline bool is_nonneg_int(double p) { return p >= 0.0 && p == std::floor(p); }

}  // namespace detail

inline PcfRegion pcf_region(double p, double z) {
  if (detail::is_nonneg_int(p)) return PcfRegion::integer_order;
  if (std::fabs(z) > detail::pcf_z_switch) return PcfRegion::asymptotic;
  if (p < 0.0) return PcfRegion::integral_representation;
  return PcfRegion::recurrence_lift;
}

// e^{-z^2/4} D_p(z).  This is the only entry point the solver modules use:
// the Volterra kernels need exactly this combination and it stays bounded for
// z < 0 where D_p itself blows up like e^{z^2/4}.
inline double pcf_d_scaled(double p, double z) {
  if (!std::isfinite(p) || !std::isfinite(z))
    throw domain_error("pcf_d_scaled: nonfinite input");
  // D_{-1} and D_{-2} reduce to the normal cdf/pdf; the Volterra kernels sit
  // on these orders inside O(N^2) loops, so skip the quadrature router.
  if (p == -1.0) return sqrt_2pi * norm_cdf(-z);
  if (p == -2.0) return sqrt_2pi * (norm_pdf(z) - z * norm_cdf(-z));
  switch (pcf_region(p, z)) {
    case PcfRegion::integer_order: {
      const int n = static_cast<int>(p);
      return std::pow(2.0, -0.5 * n) * std::exp(-0.5 * z * z) * hermite(n, z / sqrt2);
    }
    case PcfRegion::asymptotic:
      return detail::pcf_scaled_asymptotic(p, z);
    case PcfRegion::integral_representation:
      return detail::pcf_scaled_integral(p, z);
    case PcfRegion::recurrence_lift:
    default: {
      // Lift D_{q+1} = z D_q - q D_{q-1} from a base pair at orders in
      // (-2,-1) and (-1,0); at most ceil(p)+1 quadrature evaluations.
      const double q0 = p - std::ceil(p);
      double sm = detail::pcf_scaled_integral(q0 - 1.0, z);
      double s = detail::pcf_scaled_integral(q0, z);
      for (double q = q0; q < p - 0.5; q += 1.0) {
        const double sp = z * s - q * sm;
        sm = s;
        s = sp;
      }
      return s;
    }
  }
}

// Raw D_p(z); exists for tests and for consumers of the classical
// normalization.  Throws instead of overflowing for z far negative.
inline double pcf_d(double p, double z) {
  const double s = pcf_d_scaled(p, z);
  if (s == 0.0) return 0.0;
  const double log_mag = 0.25 * z * z + std::log(std::fabs(s));
  if (log_mag > 708.0)
    throw range_error("pcf_d: value overflows double; use pcf_d_scaled");
  return s * std::exp(0.25 * z * z);
}

namespace detail {

inline constexpr double airy_switch = 4.5;      // series limit on the negative side
inline constexpr double airy_pos_switch = 2.5;  // series limit on the positive side
inline constexpr double airy_c1 = 0.35502805388781723926;  // Ai(0)
inline constexpr double airy_c2 = 0.25881940379280679841;  // -Ai'(0)

inline double airy_series(double x) {
  const double x3 = x * x * x;
  double f = 1.0, tf = 1.0;
  double g = x, tg = x;
  for (int k = 0; k < 80; ++k) {
    tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
    tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
    f += tf;
    g += tg;
    if (std::fabs(tf) + std::fabs(tg) < 1e-18 * (std::fabs(f) + std::fabs(g))) break;
  }
  return airy_c1 * f - airy_c2 * g;
}

// Ai(x) e^{zeta} for x >= airy_pos_switch, zeta = (2/3) x^{3/2}.  The Laplace
// inversion downstream amplifies transform errors by ~1e8, so this branch has
// to hold ~1e-13 relative everywhere.  The power series cancels catastrophically
// past x ~ 5 and the divergent asymptotic sum only reaches ~1e-4 near its
// optimal truncation at moderate x, so the middle band goes through
// K_{1/3}(zeta) = int_0^inf e^{-zeta cosh u} cosh(u/3) du, whose integrand is
// smooth, positive, and decays superexponentially.
inline double airy_ai_scaled_pos(double x) {
  const double zeta = 2.0 / 3.0 * std::pow(x, 1.5);
  if (x >= 18.0) {  // u-series truncation error is below 1e-16 from here on
    double sum = 1.0, u = 1.0;
    for (int k = 0; k < 30; ++k) {
      u *= (6.0 * k + 1.0) * (6.0 * k + 5.0) / (72.0 * (k + 1.0));
      const double term = ((k % 2 == 0) ? -1.0 : 1.0) * u * std::pow(zeta, -(k + 1.0));
      sum += term;
      if (std::fabs(term) < 1e-17) break;
    }
    return 0.5 * sum / (std::sqrt(pi) * std::pow(x, 0.25));
  }
  // cosh(u) - 1 written as 2 sinh^2(u/2) so the exponent is exact near u = 0
  auto body = [zeta](double u) {
    const double sh = std::sinh(0.5 * u);
    return std::exp(-2.0 * zeta * sh * sh) * std::cosh(u / 3.0);
  };
  const double kq = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      body, 0.0, 8.0, 12, 1e-15);
  return std::sqrt(x / 3.0) * kq / pi;
}

inline double airy_asym_neg(double x) {
  const double t = -x;
  const double zeta = 2.0 / 3.0 * std::pow(t, 1.5);
  double even = 1.0, odd = 0.0, u = 1.0;
  double prev_even = 1.0, prev_odd = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 30; ++k) {
    u *= (6.0 * (k - 1.0) + 1.0) * (6.0 * (k - 1.0) + 5.0) / (72.0 * k);
    const double term = u * std::pow(zeta, -static_cast<double>(k));
    const double signed_term = ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    if (k % 2 == 0) {  // contributes to the even (cosine-companion) sum
      if (term > prev_even) break;
      even += signed_term;
      prev_even = term;
    } else {
      if (term > prev_odd) break;
      odd += signed_term;
      prev_odd = term;
    }
    if (term < 1e-17) break;
  }
  return (std::sin(zeta + 0.25 * pi) * even - std::cos(zeta + 0.25 * pi) * odd) /
         (std::sqrt(pi) * std::pow(t, 0.25));
}

}  // namespace detail

inline double airy_ai(double x) {
  if (!std::isfinite(x)) throw domain_error("airy_ai: nonfinite input");
  if (x >= detail::airy_pos_switch) {
    const double zeta = 2.0 / 3.0 * std::pow(x, 1.5);
    return detail::airy_ai_scaled_pos(x) * std::exp(-zeta);
  }
  if (x >= -detail::airy_switch) return detail::airy_series(x);
  return detail::airy_asym_neg(x);
}

// K_{1/4}(w) from the parabolic cylinder function at order -1/2 through
//   D_{-1/2}(z) = sqrt(z/(2 pi)) K_{1/4}(z^2/4),  z = 2 sqrt(w)
// (DLMF 12.7.10; the textbook statement with sqrt(z pi/2) misplaces a factor
// pi, which a direct quadrature of K's integral representation rules out).
inline double bessel_k_quarter(double w) {
  if (!(w > 0.0)) throw domain_error("bessel_k_quarter: requires w > 0");
  const double z = 2.0 * std::sqrt(w);
  const double scaled = pcf_d_scaled(-0.5, z);
  if (scaled <= 0.0) return 0.0;
  // D_{-1/2}(z) = e^{w} * scaled; assemble in log space so large w cannot
  // overflow the intermediate.
  return std::exp(w + std::log(scaled)) * std::sqrt(2.0 * pi / z);
}

}  // namespace sf
}  // namespace fpt

#endif
