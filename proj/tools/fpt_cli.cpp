// Command-line front end: boundary specs and solutions travel as JSON/CSV,
// diagnostics go to stderr as single-line JSON records, and exit codes
// separate bad inputs (2) from results the self-checks rejected (3).

#include <complex>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fpt/closedform.hpp"
#include "fpt/identities.hpp"
#include "fpt/io.hpp"
#include "fpt/montecarlo.hpp"
#include "fpt/specfun.hpp"
#include "fpt/volterra.hpp"

namespace {

using nlohmann::json;

struct Diag {
  bool quiet = false;
  bool verbose = false;  // --json-diagnostics: also emit info records
  std::string command;

  void emit(const char* level, const std::string& kind, const std::string& msg,
            json extra = json::object()) const {
    json rec{{"level", level}, {"command", command}, {"kind", kind}, {"message", msg}};
    rec.update(extra);
    std::cerr << rec.dump() << "\n";
  }
  void error(const std::string& kind, const std::string& msg) const {
    emit("error", kind, msg);
  }
  void warning(const std::string& kind, const std::string& msg) const {
    if (!quiet) emit("warning", kind, msg);
  }
  void info(const std::string& msg, json extra = json::object()) const {
    if (verbose && !quiet) emit("info", "progress", msg, std::move(extra));
  }
};

// ---------------------------------------------------------------------------
// small parsers

std::complex<double> parse_complex(std::string s, const char* what) {
  std::erase(s, ' ');
  if (s.empty()) throw fpt::domain_error(std::string(what) + ": empty value");
  if (s.back() != 'i') return {fpt::io::parse_num(s, what), 0.0};
  s.pop_back();
  // split off the imaginary coefficient at the last sign that is neither
  // leading nor part of an exponent
  size_t cut = std::string::npos;
  for (size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      cut = k;
      break;
    }
  }
  std::string re = cut == std::string::npos ? "" : s.substr(0, cut);
  std::string im = cut == std::string::npos ? s : s.substr(cut);
  if (im.empty() || im == "+") im = "1";
  else if (im == "-") im = "-1";
  if (!im.empty() && im.front() == '+') im.erase(0, 1);  // from_chars takes no '+'
  if (!re.empty() && re.front() == '+') re.erase(0, 1);
  return {re.empty() ? 0.0 : fpt::io::parse_num(re, what),
          fpt::io::parse_num(im, what)};
}

// "--params c=-1,horizon=2" with ':'-separated lists, e.g. "x=-1:0:0.5"
class ParamMap {
 public:
  ParamMap(const std::vector<std::string>& chunks,
           const std::vector<std::string>& allowed) {
    for (const auto& chunk : chunks) {
      for (const auto kv : fpt::io::detail::split(chunk, ',')) {
        const auto t = fpt::io::detail::trim(kv);
        if (t.empty()) continue;
        const size_t eq = t.find('=');
        if (eq == std::string_view::npos)
          throw fpt::domain_error("params: expected key=value, got '" + std::string(t) +
                                  "'");
        const std::string key(t.substr(0, eq));
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
          throw fpt::domain_error("params: unknown key '" + key + "' for this family");
        vals_[key] = std::string(t.substr(eq + 1));
      }
    }
  }

  double num(const std::string& key) const {
    const auto it = vals_.find(key);
    if (it == vals_.end())
      throw fpt::domain_error("params: missing required key '" + key + "'");
    return fpt::io::parse_num(it->second, "params");
  }
  double num_or(const std::string& key, double dflt) const {
    return vals_.count(key) ? num(key) : dflt;
  }
  std::vector<double> list(const std::string& key) const {
    const auto it = vals_.find(key);
    if (it == vals_.end())
      throw fpt::domain_error("params: missing required key '" + key + "'");
    std::vector<double> out;
    for (const auto part : fpt::io::detail::split(it->second, ':'))
      out.push_back(fpt::io::parse_num(part, "params"));
    return out;
  }
  bool has(const std::string& key) const { return vals_.count(key) != 0; }

 private:
  std::map<std::string, std::string> vals_;
};

// up to 16 evenly spaced interior nodes ending at t = T; residual quadrature
// is O(N) per node, so full tables at large N would be quadratic for nothing
std::vector<int> report_nodes(int N) {
  std::vector<int> idx;
  for (int k = 1; k <= 16; ++k) {
    const int i = static_cast<int>((static_cast<long long>(N) * k) / 16);
    if (i >= 1 && (idx.empty() || i != idx.back())) idx.push_back(i);
  }
  return idx;
}

std::string default_boundary_out(const std::string& csv_path) {
  const size_t dot = csv_path.find_last_of('.');
  const size_t slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + ".boundary.json";
  return csv_path.substr(0, dot) + ".boundary.json";
}

// ---------------------------------------------------------------------------
// subcommand options

struct SolveOpts {
  std::string boundary, p = "-1", out;
  double horizon = 0.0;
  int steps = 0;
};

struct CheckOpts {
  std::string boundary, solution, equation;
  std::optional<double> y;
};

struct ClosedFormOpts {
  std::string family;
  std::vector<std::string> params;
  std::string solution;
};

struct FredholmOpts {
  std::string boundary, solution, tail = "fit";
  std::vector<std::string> alphas;
  double horizon = 0.0;
};

struct McOpts {
  std::string boundary, out;
  double horizon = 0.0;
  int steps = 0;
  long long paths = 0;
  std::uint64_t seed = 0;
};

struct SpecfunOpts {
  std::string fn;
  std::vector<double> args;
};

struct TransformOpts {
  std::string boundary, solution, out, out_boundary, transform_file;
  std::optional<double> alpha, gamma, beta;
  std::optional<double> horizon;
  std::optional<int> steps;
};

// ---------------------------------------------------------------------------
// subcommand bodies; each returns the process exit code

int run_solve(const SolveOpts& o, const Diag& diag) {
  const fpt::Boundary b = fpt::io::read_boundary(o.boundary);
  const fpt::TimeGrid grid = fpt::make_grid(o.horizon, o.steps);
  fpt::FptSolution sol;
  if (o.p == "second-kind") {
    sol = fpt::solve_second_kind(b, grid);
  } else {
    sol = fpt::solve_first_kind(fpt::io::parse_num(o.p, "--p"), b, grid);
  }
  fpt::io::write_solution_csv(o.out, sol);
  diag.info("solution written",
            {{"out", o.out}, {"rows", grid.N + 1}, {"F_T", sol.F[grid.N]}});
  if (sol.meta.accuracy_warning) {
    diag.warning("accuracy", "solver flagged clipped or suspect density values");
    return 3;
  }
  return 0;
}

int run_check(const CheckOpts& o, const Diag& diag) {
  const fpt::Boundary b = fpt::io::read_boundary(o.boundary);
  const fpt::FptSolution sol = fpt::io::read_solution_csv(o.solution);
  const std::vector<int> nodes = report_nodes(sol.grid.N);

  const std::string& eq = o.equation;
  if (eq == "case5") {
    if (o.y) throw fpt::domain_error("check: --y does not apply to case5");
    std::printf("t,residual,scale\n");
    for (int i : nodes) {
      double scale = 0.0;
      const double r = fpt::residual_case5(b, sol, sol.grid.t[i], &scale);
      std::printf("%s,%s,%s\n", fpt::io::num15(sol.grid.t[i]).c_str(),
                  fpt::io::num15(r).c_str(), fpt::io::num15(scale).c_str());
    }
    diag.info("case5 residual table", {{"rows", nodes.size()}});
    return 0;
  }

  if (eq.rfind("widder:", 0) == 0) {
    if (!o.y) throw fpt::domain_error("check: widder needs --y below the boundary");
    const auto atoms = fpt::io::read_atoms(eq.substr(7));
    std::printf("t,residual\n");
    for (int i : nodes) {
      const double r = fpt::residual_widder(atoms, b, sol, sol.grid.t[i], *o.y);
      std::printf("%s,%s\n", fpt::io::num15(sol.grid.t[i]).c_str(),
                  fpt::io::num15(r).c_str());
    }
    diag.info("widder residual table", {{"atoms", atoms.size()}});
    return 0;
  }

  fpt::KernelSpec spec;
  if (eq == "case4") {
    if (o.y) throw fpt::domain_error("check: --y does not apply to case4");
    spec = {-0.5, fpt::YMode::limit};
  } else if (eq.rfind("p:", 0) == 0) {
    spec.p = fpt::io::parse_num(eq.substr(2), "--equation p");
    spec.y_mode = o.y ? fpt::YMode::offset : fpt::YMode::limit;
  } else {
    throw fpt::domain_error("check: unknown equation '" + eq +
                            "' (use p:<val>, case4, case5 or widder:atoms.json)");
  }
  std::printf("t,residual\n");
  for (int i : nodes) {
    const double r =
        fpt::residual_family(spec, b, sol, sol.grid.t[i], o.y.value_or(0.0));
    std::printf("%s,%s\n", fpt::io::num15(sol.grid.t[i]).c_str(),
                fpt::io::num15(r).c_str());
  }
  diag.info("residual table", {{"p", spec.p}, {"rows", nodes.size()}});
  return 0;
}

int run_closed_form(const ClosedFormOpts& o, const Diag& diag) {
  std::optional<fpt::FptSolution> sol;
  if (!o.solution.empty()) sol = fpt::io::read_solution_csv(o.solution);

  // value tables without --solution, residual tables against one
  if (o.family == "reflection" || o.family == "bachelier-levy") {
    const bool refl = o.family == "reflection";
    const ParamMap pm(o.params, refl
                                    ? std::vector<std::string>{"c", "horizon", "steps"}
                                    : std::vector<std::string>{"a", "slope", "horizon",
                                                               "steps"});
    auto fd = [&](double t) {
      return refl ? fpt::reflection_density(pm.num("c"), t)
                  : fpt::bachelier_levy_density(pm.num("a"), pm.num("slope"), t);
    };
    auto Fd = [&](double t) {
      return refl ? fpt::reflection_cdf(pm.num("c"), t)
                  : fpt::bachelier_levy_cdf(pm.num("a"), pm.num("slope"), t);
    };
    if (sol) {
      std::printf("t,f_diff,F_diff\n");
      for (int i = 1; i <= sol->grid.N; ++i) {
        const double t = sol->grid.t[i];
        std::printf("%s,%s,%s\n", fpt::io::num15(t).c_str(),
                    fpt::io::num15(sol->f[i] - fd(t)).c_str(),
                    fpt::io::num15(sol->F[i] - Fd(t)).c_str());
      }
    } else {
      const fpt::TimeGrid g =
          fpt::make_grid(pm.num_or("horizon", 2.0),
                         static_cast<int>(pm.num_or("steps", 256)));
      std::printf("t,f,F\n");
      for (int i = 0; i <= g.N; ++i)
        std::printf("%s,%s,%s\n", fpt::io::num15(g.t[i]).c_str(),
                    fpt::io::num15(i ? fd(g.t[i]) : 0.0).c_str(),
                    fpt::io::num15(i ? Fd(g.t[i]) : 0.0).c_str());
    }
    diag.info("closed-form table", {{"family", o.family}});
    return 0;
  }

  if (o.family == "quadratic") {
    const ParamMap pm(o.params, {"p", "q", "horizon", "steps", "order", "t-min"});
    fpt::LaplaceInversionConfig cfg;
    cfg.order = static_cast<int>(pm.num_or("order", cfg.order));
    cfg.t_min = pm.num_or("t-min", cfg.t_min);
    const double p = pm.num("p"), q = pm.num("q");
    std::vector<std::pair<double, double>> rows;
    if (sol) {
      for (int i : report_nodes(sol->grid.N)) {
        const double t = sol->grid.t[i];
        if (t < cfg.t_min) continue;
        rows.emplace_back(t, sol->f[i] - fpt::quadratic_density(t, p, q, cfg));
      }
      std::printf("t,f_diff\n");
    } else {
      const fpt::TimeGrid g =
          fpt::make_grid(pm.num_or("horizon", 2.0),
                         static_cast<int>(pm.num_or("steps", 64)));
      for (int i = 1; i <= g.N; ++i) {
        if (g.t[i] < cfg.t_min) continue;
        rows.emplace_back(g.t[i], fpt::quadratic_density(g.t[i], p, q, cfg));
      }
      std::printf("t,f\n");
    }
    for (const auto& [t, v] : rows)
      std::printf("%s,%s\n", fpt::io::num15(t).c_str(), fpt::io::num15(v).c_str());
    diag.info("quadratic inversion table", {{"rows", rows.size()}});
    return 0;
  }

  if (o.family == "sqrt-mellin") {
    if (!sol)
      throw fpt::domain_error("closed-form: sqrt-mellin needs --solution to check");
    const ParamMap pm(o.params, {"p", "q", "x"});
    std::printf("x,residual\n");
    for (double x : pm.list("x"))
      std::printf("%s,%s\n", fpt::io::num15(x).c_str(),
                  fpt::io::num15(fpt::sqrt_mellin_check(x, pm.num("p"), pm.num("q"),
                                                        *sol))
                      .c_str());
    return 0;
  }

  throw fpt::domain_error("closed-form: unknown family '" + o.family + "'");
}

int run_fredholm(const FredholmOpts& o, const Diag& diag) {
  const fpt::Boundary b = fpt::io::read_boundary(o.boundary);
  const fpt::FptSolution sol = fpt::io::read_solution_csv(o.solution);
  fpt::FredholmProbe probe;
  probe.horizon = o.horizon;
  if (o.tail == "fit") probe.tail_policy = fpt::TailPolicy::analytic_fit;
  else if (o.tail == "bound") probe.tail_policy = fpt::TailPolicy::bound_only;
  else throw fpt::domain_error("fredholm: --tail must be fit or bound");

  std::printf("alpha_re,alpha_im,residual_re,residual_im,residual_abs,tail_bound\n");
  for (const auto& astr : o.alphas) {
    probe.alpha = parse_complex(astr, "--alpha");
    const fpt::FredholmResult r = fpt::fredholm_residual(b, sol, probe);
    std::printf("%s,%s,%s,%s,%s,%s\n", fpt::io::num15(probe.alpha.real()).c_str(),
                fpt::io::num15(probe.alpha.imag()).c_str(),
                fpt::io::num15(r.residual.real()).c_str(),
                fpt::io::num15(r.residual.imag()).c_str(),
                fpt::io::num15(std::abs(r.residual)).c_str(),
                fpt::io::num15(r.tail_bound).c_str());
  }
  diag.info("fredholm residuals", {{"alphas", o.alphas.size()}});
  return 0;
}

int run_mc(const McOpts& o, const Diag& diag) {
  const fpt::Boundary b = fpt::io::read_boundary(o.boundary);
  const fpt::TimeGrid grid = fpt::make_grid(o.horizon, o.steps);
  const fpt::McEstimate est = fpt::mc_fpt(b, grid, o.paths, o.seed);
  fpt::io::write_mc_csv(o.out, est);
  diag.info("mc estimate written",
            {{"out", o.out},
             {"paths", o.paths},
             {"seed", o.seed},
             {"F_hat_T", est.cdf_hat[grid.N]}});
  return 0;
}

int run_specfun(const SpecfunOpts& o, const Diag& diag) {
  size_t arity = 0;
  std::function<double(const double*)> eval;
  if (o.fn == "pcf") {
    arity = 2;
    eval = [](const double* a) { return fpt::sf::pcf_d(a[0], a[1]); };
  } else if (o.fn == "airy") {
    arity = 1;
    eval = [](const double* a) { return fpt::sf::airy_ai(a[0]); };
  } else if (o.fn == "hermite") {
    arity = 2;
    eval = [](const double* a) {
      const int n = static_cast<int>(std::lround(a[0]));
      if (std::fabs(a[0] - n) > 1e-9 || n < 0)
        throw fpt::domain_error("specfun: hermite degree must be a nonnegative integer");
      return fpt::sf::hermite(n, a[1]);
    };
  } else if (o.fn == "kq") {
    arity = 1;
    eval = [](const double* a) { return fpt::sf::bessel_k_quarter(a[0]); };
  } else {
    throw fpt::domain_error("specfun: unknown fn '" + o.fn +
                            "' (use pcf, airy, hermite or kq)");
  }
  if (o.args.empty() || o.args.size() % arity != 0)
    throw fpt::domain_error("specfun: " + o.fn + " takes arguments in groups of " +
                            std::to_string(arity));
  for (size_t k = 0; k < o.args.size(); k += arity)
    std::printf("%s\n", fpt::io::num15(eval(o.args.data() + k)).c_str());
  diag.info("specfun eval", {{"fn", o.fn}, {"values", o.args.size() / arity}});
  return 0;
}

int run_transform(const TransformOpts& o, const Diag& diag) {
  const json bj = fpt::io::load_json(o.boundary, "boundary spec");
  const fpt::Boundary b = fpt::io::boundary_from_json(bj);
  const fpt::FptSolution sol = fpt::io::read_solution_csv(o.solution);

  fpt::TransformParams tp;
  if (!o.transform_file.empty())
    tp = fpt::io::transform_from_json(
        fpt::io::load_json(o.transform_file, "transform spec"));
  if (o.alpha) tp.alpha = *o.alpha;
  if (o.gamma) tp.gamma = *o.gamma;
  if (o.beta) tp.beta = *o.beta;

  fpt::FptSolution out;
  if (o.horizon || o.steps) {
    const double T = o.horizon.value_or(sol.grid.T);
    const int N = o.steps.value_or(sol.grid.N);
    out = fpt::transform_density(sol, b, tp, fpt::make_grid(T, N));
  } else {
    out = fpt::transform_density(sol, b, tp);
  }
  fpt::io::write_solution_csv(o.out, out);
  const std::string bout =
      o.out_boundary.empty() ? default_boundary_out(o.out) : o.out_boundary;
  {
    auto os = fpt::io::detail::open_out(bout, "boundary spec");
    os << fpt::io::wrap_transformed(bj, tp).dump(2) << "\n";
  }
  diag.info("transform written", {{"out", o.out},
                                  {"out_boundary", bout},
                                  {"alpha", tp.alpha},
                                  {"gamma", tp.gamma},
                                  {"beta", tp.beta}});
  if (out.meta.accuracy_warning) {
    diag.warning("accuracy", "input solution carried an accuracy flag");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-passage densities of Brownian motion to curved boundaries"};
  app.require_subcommand(1);

  Diag diag;
  app.add_flag("--quiet", diag.quiet, "suppress info and warning records");
  app.add_flag("--json-diagnostics", diag.verbose,
               "emit info-level JSON records on stderr");

  SolveOpts so;
  CLI::App* solve = app.add_subcommand("solve", "solve a Volterra equation for f and F");
  solve->add_option("--boundary", so.boundary, "boundary spec JSON")->required();
  solve->add_option("--p", so.p, "equation member: a real p < 1, or second-kind");
  solve->add_option("--horizon", so.horizon, "time horizon T")->required();
  solve->add_option("--steps", so.steps, "grid steps N")->required();
  solve->add_option("--out", so.out, "output solution CSV")->required();

  CheckOpts co;
  CLI::App* check = app.add_subcommand("check", "residual table for a solved density");
  check->add_option("--boundary", co.boundary, "boundary spec JSON")->required();
  check->add_option("--solution", co.solution, "solution CSV")->required();
  check->add_option("--equation", co.equation,
                    "p:<val>, case4, case5 or widder:atoms.json")
      ->required();
  check->add_option("--y", co.y, "evaluation level below the boundary");

  ClosedFormOpts cf;
  CLI::App* closed = app.add_subcommand("closed-form",
                                        "closed-form values or residuals vs a solution");
  closed->add_option("--family", cf.family,
                     "reflection, bachelier-levy, quadratic or sqrt-mellin")
      ->required();
  closed->add_option("--params", cf.params,
                     "comma-separated key=value (lists use ':'), e.g. c=-1,horizon=2");
  closed->add_option("--solution", cf.solution, "solution CSV to check against");

  FredholmOpts fr;
  CLI::App* fred = app.add_subcommand("fredholm", "moment-generating identity residual");
  fred->add_option("--boundary", fr.boundary, "boundary spec JSON")->required();
  fred->add_option("--solution", fr.solution, "solution CSV")->required();
  fred->add_option("--alpha", fr.alphas, "complex alpha, e.g. 1.0+0.5i (repeatable)")
      ->required();
  fred->add_option("--horizon", fr.horizon, "truncate the integral at this grid node");
  fred->add_option("--tail", fr.tail, "tail handling: fit (default) or bound");

  McOpts mc;
  CLI::App* mccmd = app.add_subcommand("mc", "Monte Carlo estimate of F");
  mccmd->add_option("--boundary", mc.boundary, "boundary spec JSON")->required();
  mccmd->add_option("--horizon", mc.horizon, "time horizon T")->required();
  mccmd->add_option("--steps", mc.steps, "grid steps N")->required();
  mccmd->add_option("--paths", mc.paths, "number of simulated paths")->required();
  mccmd->add_option("--seed", mc.seed, "RNG seed")->required();
  mccmd->add_option("--out", mc.out, "output CSV (t,F_hat,stderr)")->required();

  SpecfunOpts sf;
  CLI::App* sfcmd = app.add_subcommand("specfun", "special-function evaluation");
  sfcmd->require_subcommand(1);
  CLI::App* sfeval = sfcmd->add_subcommand("eval", "print values, one per line");
  sfeval->add_option("--fn", sf.fn, "pcf, airy, hermite or kq")->required();
  sfeval->add_option("--args", sf.args, "arguments, grouped by the function's arity")
      ->required();

  TransformOpts tr;
  CLI::App* trans = app.add_subcommand("transform",
                                       "map a solved density through a boundary transform");
  trans->add_option("--boundary", tr.boundary, "input boundary spec JSON")->required();
  trans->add_option("--solution", tr.solution, "input solution CSV")->required();
  trans->add_option("--transform", tr.transform_file, "transform spec JSON");
  trans->add_option("--alpha", tr.alpha, "drift");
  trans->add_option("--gamma", tr.gamma, "Brownian scaling");
  trans->add_option("--beta", tr.beta, "time change");
  trans->add_option("--horizon", tr.horizon, "output horizon (default: auto-trimmed)");
  trans->add_option("--steps", tr.steps, "output steps (default: input steps)");
  trans->add_option("--out", tr.out, "output solution CSV")->required();
  trans->add_option("--out-boundary", tr.out_boundary,
                    "output boundary spec JSON (default: alongside --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion")
      return app.exit(e);
    diag.command = "parse";
    diag.error("usage", e.what());
    return 2;
  }

  try {
    if (*solve) { diag.command = "solve"; return run_solve(so, diag); }
    if (*check) { diag.command = "check"; return run_check(co, diag); }
    if (*closed) { diag.command = "closed-form"; return run_closed_form(cf, diag); }
    if (*fred) { diag.command = "fredholm"; return run_fredholm(fr, diag); }
    if (*mccmd) { diag.command = "mc"; return run_mc(mc, diag); }
    if (*sfcmd) { diag.command = "specfun"; return run_specfun(sf, diag); }
    if (*trans) { diag.command = "transform"; return run_transform(tr, diag); }
  } catch (const fpt::accuracy_error& e) {
    diag.error("accuracy", e.what());
    return 3;
  } catch (const fpt::domain_error& e) {
    diag.error("domain", e.what());
    return 2;
  } catch (const std::exception& e) {
    diag.error("internal", e.what());
    return 2;
  }
  return 0;
}
