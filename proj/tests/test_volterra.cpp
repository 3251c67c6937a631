#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fpt/volterra.hpp"

using namespace fpt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double const_cdf(double c, double t) { return t > 0.0 ? 2.0 * sf::norm_cdf(c / std::sqrt(t)) : 0.0; }
double const_pdf(double c, double t) {
  return t > 0.0 ? -c * sf::norm_pdf(c / std::sqrt(t)) / (t * std::sqrt(t)) : 0.0;
}
double bl_pdf(double a, double slope, double t) {
  const double d = a - slope * t;
  return a / (sf::sqrt_2pi * t * std::sqrt(t)) * std::exp(-d * d / (2.0 * t));
}

void check_solution_invariants(const FptSolution& sol) {
  REQUIRE(sol.F[0] == 0.0);
  REQUIRE(sol.f[0] == 0.0);
  for (int i = 1; i <= sol.grid.N; ++i) {
    REQUIRE(sol.F[i] >= sol.F[i - 1]);
    REQUIRE(sol.F[i] <= 1.0 + 1e-6);
  }
}

double sup_err_f(const FptSolution& sol, double (*ref)(double, double), double par,
                 double t_lo) {
  double worst = 0.0;
  for (int i = 0; i <= sol.grid.N; ++i) {
    const double t = sol.grid.t[i];
    if (t < t_lo) continue;
    worst = std::max(worst, std::fabs(sol.f[i] - ref(par, t)));
  }
  return worst;
}

FptSolution zero_solution(double T, int N) {
  FptSolution sol;
  sol.grid = make_grid(T, N);
  sol.f.assign(static_cast<size_t>(N) + 1, 0.0);
  sol.F.assign(static_cast<size_t>(N) + 1, 0.0);
  return sol;
}

}  // namespace

TEST_CASE("time grid: construction and lookups") {
  CHECK_THROWS_AS(make_grid(0.0, 64), domain_error);
  CHECK_THROWS_AS(make_grid(-1.0, 64), domain_error);
  CHECK_THROWS_AS(make_grid(2.0, 7), domain_error);
  const TimeGrid g = make_grid(2.0, 256);
  CHECK(g.t.front() == 0.0);
  CHECK(g.t.back() == 2.0);
  CHECK(g.h == 2.0 / 256);
  for (int i = 1; i <= g.N; ++i) REQUIRE(g.t[i] > g.t[i - 1]);
  CHECK(node_index(g, 1.0) == 128);
  CHECK(node_index(g, 2.0) == 256);
  CHECK(node_index(g, 0.7777) == -1);
  CHECK(node_index(g, 2.5) == -1);
}

TEST_CASE("cell densities and nodal reconstruction") {
  FptSolution sol = zero_solution(2.0, 256);
  for (int i = 0; i <= 256; ++i) sol.F[i] = const_cdf(-1.0, sol.grid.t[i]);
  const std::vector<double> c = cell_densities(sol);
  REQUIRE(static_cast<int>(c.size()) == 256);
  for (double v : c) REQUIRE(v >= 0.0);
  const std::vector<double> f = nodal_from_cells(c);
  CHECK(f[0] == 0.0);
  // cell averages straddle the nodal value of a smooth density
  for (int i = 16; i < 256; ++i)
    REQUIRE_THAT(f[i], WithinAbs(const_pdf(-1.0, sol.grid.t[i]), 5e-4));
}

TEST_CASE("kernel_value: normalized forms and errors") {
  const Boundary cst = make_constant(-1.0);
  const KernelSpec k0{0.0, YMode::limit};
  // p = 0 on a constant boundary: raw kernel / sqrt(2 pi) = phi(0)/sqrt(t-s)
  for (double d : {0.1, 0.5, 1.5}) {
    const double v = kernel_value(k0, cst, 2.0, 2.0 - d, cst(2.0)) / sf::sqrt_2pi;
    REQUIRE_THAT(v, WithinRel(sf::norm_pdf(0.0) / std::sqrt(d), 1e-12));
  }
  // p = -1 diagonal limit for a differentiable boundary: -> Phi(0) = 1/2
  const Boundary lin = make_linear(1.0, 0.5);
  const KernelSpec km1{-1.0, YMode::limit};
  const double diag = kernel_value(km1, lin, 1.0, 1.0 - 1e-10, lin(1.0)) / sf::sqrt_2pi;
  REQUIRE_THAT(diag, WithinAbs(0.5, 1e-4));
  // p = -2 against the closed form written out independently
  const KernelSpec km2{-2.0, YMode::offset};
  for (double s : {0.2, 0.9}) {
    const double y = -1.7;
    const double d = 1.3 - s;
    const double z = (cst(s) - y) / std::sqrt(d);
    const double expect =
        (std::exp(-0.5 * z * z) - z * sf::sqrt_2pi * sf::norm_cdf(-z)) * std::sqrt(d);
    REQUIRE_THAT(kernel_value(km2, cst, 1.3, s, y), WithinAbs(expect, 1e-10));
  }
  CHECK_THROWS_AS(kernel_value(km1, cst, 1.0, 1.0, -1.0), domain_error);
  CHECK_THROWS_AS(kernel_value(km1, cst, 1.0, 1.2, -1.0), domain_error);
  CHECK_THROWS_AS(kernel_value(km1, cst, 1.0, -0.1, -1.0), domain_error);
  CHECK_THROWS_AS(kernel_value(KernelSpec{1.0, YMode::limit}, cst, 1.0, 0.5, -1.0),
                  domain_error);
  // offset mode carries the pre-limit equation to any real order
  CHECK_NOTHROW(kernel_value(KernelSpec{1.0, YMode::offset}, cst, 1.0, 0.5, -2.0));
}

TEST_CASE("kernel_free_term: family right-hand side") {
  for (double p : {-2.0, -1.0, -0.5, 0.0}) {
    const double t = 1.7, y = -1.2;
    const double expect =
        sf::pcf_d_scaled(p, -y / std::sqrt(t)) * std::pow(t, -0.5 * (p + 1.0));
    REQUIRE_THAT(kernel_free_term(p, t, y), WithinRel(expect, 1e-14));
  }
  CHECK_THROWS_AS(kernel_free_term(0.0, 0.0, -1.0), domain_error);
}

TEST_CASE("solve_first_kind p=-1: constant boundary is reproduced exactly") {
  const Boundary cst = make_constant(-1.0);
  const FptSolution sol = solve_first_kind(-1.0, cst, make_grid(2.0, 256));
  check_solution_invariants(sol);
  CHECK_FALSE(sol.meta.accuracy_warning);
  CHECK(sol.meta.method == "first-kind");
  CHECK(sol.meta.p == -1.0);
  const int i1 = node_index(sol.grid, 1.0);
  REQUIRE_THAT(sol.F[i1], WithinAbs(0.3173105, 1e-3));
  // the kernel is constant in s, so product integration telescopes exactly
  for (int i = 1; i <= 256; ++i)
    REQUIRE_THAT(sol.F[i], WithinAbs(const_cdf(-1.0, sol.grid.t[i]), 1e-13));
}

TEST_CASE("solve_first_kind: far boundary has no mass") {
  const FptSolution sol = solve_first_kind(-1.0, make_constant(-10.0), make_grid(1.0, 128));
  REQUIRE(sol.F[128] <= 1e-20);
  check_solution_invariants(sol);
}

TEST_CASE("solve_first_kind p=0: linear boundary matches the closed-form density") {
  const Boundary lin = make_linear(1.0, 0.5);
  const FptSolution sol = solve_first_kind(0.0, lin, make_grid(2.0, 256));
  check_solution_invariants(sol);
  const int i1 = node_index(sol.grid, 1.0);
  REQUIRE_THAT(sol.f[i1], WithinAbs(0.3520653, 1e-3));
  REQUIRE_THAT(sol.f[i1], WithinAbs(bl_pdf(1.0, 0.5, 1.0), 1e-3));
}

TEST_CASE("solve_first_kind p=0: grid refinement is at least first order") {
  const Boundary cst = make_constant(-1.0);
  double prev = -1.0;
  for (int N : {64, 128, 256, 512}) {
    const FptSolution sol = solve_first_kind(0.0, cst, make_grid(2.0, N));
    const double err = sup_err_f(sol, const_pdf, -1.0, 0.1);
    if (prev > 0.0) REQUIRE(prev / err >= 1.8);
    prev = err;
  }
}

TEST_CASE("cross-order uniqueness: p=-1 and p=0 solves agree") {
  const Boundary bs[] = {make_constant(-1.0), make_linear(1.0, 0.5),
                         make_linear(1.0, -0.7), make_quadratic(1.0, 1.0),
                         make_quadratic(-1.0, 1.0)};
  const TimeGrid g = make_grid(2.0, 256);
  for (const Boundary& b : bs) {
    const FptSolution a = solve_first_kind(-1.0, b, g);
    const FptSolution c = solve_first_kind(0.0, b, g);
    check_solution_invariants(a);
    check_solution_invariants(c);
    double worst = 0.0;
    for (int i = 0; i <= g.N; ++i) {
      if (g.t[i] < 0.1) continue;
      worst = std::max(worst, std::fabs(a.f[i] - c.f[i]));
    }
    INFO("boundary " << b.fingerprint);
    REQUIRE(worst <= 5e-3);
  }
}

TEST_CASE("solve_first_kind: coarse grid with fast mass raises the accuracy flag") {
  const FptSolution sol = solve_first_kind(-1.0, make_constant(-0.05), make_grid(2.0, 8));
  CHECK(sol.meta.accuracy_warning);
}

TEST_CASE("solve_first_kind: input validation") {
  const TimeGrid g = make_grid(2.0, 64);
  CHECK_THROWS_AS(solve_first_kind(0.5, make_constant(-1.0), g), domain_error);
  CHECK_THROWS_AS(solve_first_kind(-2.0, make_constant(-1.0), g), domain_error);

  // merely-continuous table boundary: p=0 needs a derivative at the diagonal
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= 8; ++k) pts.push_back({0.25 * k, -1.0 + 0.1 * (k % 3)});
  const Boundary tab = make_table(pts, Smoothness::continuous);
  CHECK_THROWS_AS(solve_first_kind(0.0, tab, g), domain_error);
  CHECK_NOTHROW(solve_first_kind(-1.0, tab, g));

  Boundary start0;
  start0.eval = [](double t) { return 0.0 * t; };
  start0.b0 = 0.0;
  start0.smoothness = Smoothness::c1;
  start0.deriv = [](double) { return 0.0; };
  CHECK_THROWS_AS(solve_first_kind(-1.0, start0, g), domain_error);

  Boundary lying;
  lying.eval = [](double t) { return -1.0 - std::sin(3.0 * t); };  // dips to -2
  lying.b0 = -1.0;
  lying.smoothness = Smoothness::c1;
  lying.deriv = [](double t) { return -3.0 * std::cos(3.0 * t); };
  lying.lower_bound = -1.5;
  CHECK_THROWS_AS(solve_first_kind(-1.0, lying, g), domain_error);
}

TEST_CASE("solve_second_kind: constant boundary collapses to the free term") {
  const Boundary cst = make_constant(-1.0);
  const FptSolution sol = solve_second_kind(cst, make_grid(2.0, 256));
  check_solution_invariants(sol);
  CHECK(sol.meta.method == "second-kind");
  const int i1 = node_index(sol.grid, 1.0);
  REQUIRE_THAT(sol.f[i1], WithinAbs(0.2419707, 1e-6));
  for (int i = 1; i <= 256; ++i)
    REQUIRE_THAT(sol.f[i], WithinAbs(const_pdf(-1.0, sol.grid.t[i]), 1e-12));
}

TEST_CASE("solve_second_kind: agrees with the first-kind solve") {
  const Boundary lin = make_linear(1.0, 0.5);
  const TimeGrid g = make_grid(2.0, 256);
  const FptSolution a = solve_second_kind(lin, g);
  const FptSolution c = solve_first_kind(-1.0, lin, g);
  check_solution_invariants(a);
  double worst = 0.0;
  for (int i = 0; i <= g.N; ++i) {
    if (g.t[i] < 0.1) continue;
    worst = std::max(worst, std::fabs(a.f[i] - c.f[i]));
  }
  REQUIRE(worst <= 5e-3);
}

TEST_CASE("solve_second_kind: printed free-term sign fails at order one") {
  const Boundary cst = make_constant(-1.0);
  const TimeGrid g = make_grid(2.0, 256);
  const FptSolution bad = solve_second_kind(cst, g, false);
  CHECK(bad.meta.method == "second-kind-uncorrected");
  double worst = 0.0;
  for (int i = 0; i <= g.N; ++i) {
    if (g.t[i] < 0.1) continue;
    worst = std::max(worst, std::fabs(bad.f[i] - const_pdf(-1.0, g.t[i])));
  }
  REQUIRE(worst > 0.1);  // regression: the uncorrected equation is unusable
}

TEST_CASE("solve_second_kind: requires a C1 boundary") {
  CHECK_THROWS_AS(solve_second_kind(make_sqrt(1.0, 2.0), make_grid(2.0, 64)),
                  domain_error);
}

TEST_CASE("residual_family: defining equations close to roundoff") {
  const TimeGrid g = make_grid(2.0, 256);
  const Boundary cst = make_constant(-1.0);
  const FptSolution s1 = solve_first_kind(-1.0, cst, g);
  REQUIRE(std::fabs(residual_family({-1.0, YMode::limit}, cst, s1, 1.0)) <= 1e-6);
  const Boundary lin = make_linear(1.0, 0.5);
  const FptSolution s0 = solve_first_kind(0.0, lin, g);
  REQUIRE(std::fabs(residual_family({0.0, YMode::limit}, lin, s0, 1.0)) <= 1e-6);
}

TEST_CASE("residual_family: cross-equation closure on solved boundaries") {
  const TimeGrid g = make_grid(2.0, 256);
  struct Case { Boundary b; double p_solve; };
  const Case cases[] = {{make_constant(-1.0), -1.0},
                        {make_linear(1.0, 0.5), 0.0},
                        {make_quadratic(1.0, 1.0), -1.0}};
  for (const Case& cs : cases) {
    const FptSolution sol = solve_first_kind(cs.p_solve, cs.b, g);
    for (double t : {0.5, 1.0, 2.0}) {
      for (double p : {-1.0, -0.5, 0.0}) {
        const double lhs = kernel_free_term(p, t, cs.b(t));
        const double res = residual_family({p, YMode::limit}, cs.b, sol, t);
        INFO(cs.b.fingerprint << " limit p=" << p << " t=" << t);
        REQUIRE(std::fabs(res) <= 5e-3 * std::fabs(lhs));
      }
      for (double p : {-2.0, 0.5}) {
        const double y = cs.b(t) - 1.0;
        const double lhs = kernel_free_term(p, t, y);
        const double res = residual_family({p, YMode::offset}, cs.b, sol, t, y);
        INFO(cs.b.fingerprint << " offset p=" << p << " t=" << t);
        REQUIRE(std::fabs(res) <= 5e-3 * std::fabs(lhs));
      }
    }
  }
}

TEST_CASE("residual_family: pre-limit equation holds at the Hermite order") {
  const TimeGrid g = make_grid(2.0, 256);
  const Boundary lin = make_linear(1.0, 0.5);
  const FptSolution sol = solve_first_kind(0.0, lin, g);
  for (double t : {0.5, 1.0, 2.0}) {
    const double y = lin(t) - 1.0;
    const double lhs = kernel_free_term(1.0, t, y);
    const double res = residual_family({1.0, YMode::offset}, lin, sol, t, y);
    REQUIRE(std::fabs(res) <= 5e-3 * std::fabs(lhs));
  }
}

TEST_CASE("residual_family: validation") {
  const TimeGrid g = make_grid(2.0, 64);
  const Boundary cst = make_constant(-1.0);
  const FptSolution sol = solve_first_kind(-1.0, cst, g);
  CHECK_THROWS_AS(residual_family({-1.0, YMode::limit}, cst, sol, 0.777), domain_error);
  CHECK_THROWS_AS(residual_family({-2.0, YMode::offset}, cst, sol, 1.0, -0.5),
                  domain_error);
  CHECK_THROWS_AS(residual_family({1.0, YMode::limit}, cst, sol, 1.0), domain_error);
  // limit mode above p = 0 needs a C1 boundary
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; k <= 8; ++k) pts.push_back({0.25 * k, -1.0});
  const Boundary tab = make_table(pts, Smoothness::differentiable);
  const FptSolution ts = solve_first_kind(-1.0, tab, g);
  CHECK_THROWS_AS(residual_family({0.5, YMode::limit}, tab, ts, 1.0), domain_error);
}

TEST_CASE("residual_case5: vanishes on solved boundaries") {
  const TimeGrid g = make_grid(2.0, 256);
  const Boundary bs[] = {make_constant(-1.0), make_linear(1.0, 0.5)};
  for (const Boundary& b : bs) {
    const FptSolution sol = solve_first_kind(-1.0, b, g);
    for (double t : {0.5, 1.0, 2.0}) {
      double scale = 0.0;
      const double res = residual_case5(b, sol, t, &scale);
      REQUIRE(scale > 0.0);
      INFO(b.fingerprint << " t=" << t);
      REQUIRE(std::fabs(res) <= 5e-3 * scale);
    }
  }
}

TEST_CASE("residual_widder: renewal identities and superposition") {
  const TimeGrid g = make_grid(2.0, 256);
  const Boundary cst = make_constant(-1.0);
  const FptSolution sol = solve_first_kind(-1.0, cst, g);

  const double r1 = residual_widder({{0.0, 1.0}}, cst, sol, 1.0, -2.0);
  REQUIRE(std::fabs(r1) <= 1e-5);

  const std::vector<WidderAtom> two = {{0.0, 0.5}, {1.0, 0.5}};
  const double u = 0.5 * sf::norm_pdf(-2.0) + 0.5 * sf::norm_pdf(-3.0);
  const double r2 = residual_widder(two, cst, sol, 1.0, -2.0);
  REQUIRE(std::fabs(r2) <= 1e-4 * u);

  const FptSolution zero = zero_solution(2.0, 256);
  const double r0 = residual_widder(two, cst, zero, 1.0, -2.0);
  REQUIRE(r0 > 0.0);
  REQUIRE_THAT(r0, WithinRel(u, 1e-12));

  CHECK_THROWS_AS(residual_widder({}, cst, sol, 1.0, -2.0), domain_error);
  CHECK_THROWS_AS(residual_widder({{0.0, 1.0}}, cst, sol, 1.0, -0.5), domain_error);
  CHECK_THROWS_AS(residual_widder({{-0.5, 1.0}}, cst, sol, 1.0, -2.0), domain_error);
  CHECK_THROWS_AS(residual_widder({{0.0, 0.0}}, cst, sol, 1.0, -2.0), domain_error);
}
