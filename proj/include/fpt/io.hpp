#ifndef FPT_IO_HPP
#define FPT_IO_HPP

// Interchange formats: solution CSV (t,f,F,flags), Monte Carlo CSV
// (t,F_hat,stderr), boundary / transform / atom specs as JSON.  Numbers are
// printed with 15 significant digits via to_chars, so files are
// locale-independent and a read/write cycle is byte-stable: parsing a
// 15-digit decimal and reprinting it reproduces the same string.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fpt/boundary.hpp"
#include "fpt/error.hpp"
#include "fpt/grid.hpp"
#include "fpt/montecarlo.hpp"
#include "fpt/volterra.hpp"

namespace fpt::io {

inline std::string num15(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  if (ec != std::errc()) throw domain_error("num15: conversion failed");
  return std::string(buf, p);
}

inline double parse_num(std::string_view s, const char* what) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw domain_error(std::string(what) + ": bad number '" + std::string(s) + "'");
  return v;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    const size_t nxt = line.find(sep, pos);
    if (nxt == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, nxt - pos));
    pos = nxt + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

inline std::ifstream open_in(const std::string& path, const char* what) {
  std::ifstream is(path);
  if (!is) throw domain_error(std::string(what) + ": cannot open '" + path + "'");
  return is;
}

inline std::ofstream open_out(const std::string& path, const char* what) {
  std::ofstream os(path);
  if (!os) throw domain_error(std::string(what) + ": cannot open '" + path + "' for write");
  return os;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Solution CSV.  One comment line carries the solver metadata, then a header
// and N+1 rows.  The flags column is a per-row bitmask; bit 0 mirrors the
// solve-level accuracy warning.

inline void write_solution_csv(std::ostream& os, const FptSolution& sol) {
  os << "# p=" << num15(sol.meta.p) << " method=" << sol.meta.method
     << " boundary=" << (sol.meta.boundary.empty() ? "?" : sol.meta.boundary)
     << " accuracy_warning=" << (sol.meta.accuracy_warning ? 1 : 0) << "\n";
  os << "t,f,F,flags\n";
  const int flags = sol.meta.accuracy_warning ? 1 : 0;
  for (int i = 0; i <= sol.grid.N; ++i)
    os << num15(sol.grid.t[i]) << ',' << num15(sol.f[i]) << ',' << num15(sol.F[i])
       << ',' << flags << "\n";
}

inline void write_solution_csv(const std::string& path, const FptSolution& sol) {
  auto os = detail::open_out(path, "solution csv");
  write_solution_csv(os, sol);
  if (!os) throw domain_error("solution csv: write to '" + path + "' failed");
}

inline FptSolution read_solution_csv(std::istream& is) {
  FptSolution sol;
  sol.meta.p = -1.0;
  sol.meta.method = "unknown";
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    const std::string_view lv = detail::trim(line);
    if (lv.empty()) continue;
    if (lv.front() == '#') {
      std::istringstream meta(std::string(lv.substr(1)));
      std::string tok;
      while (meta >> tok) {
        const size_t eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "p") sol.meta.p = parse_num(val, "solution csv meta p");
        else if (key == "method") sol.meta.method = val;
        else if (key == "boundary") sol.meta.boundary = val;
        else if (key == "accuracy_warning") sol.meta.accuracy_warning = val != "0";
      }
      continue;
    }
    if (!header_seen) {
      if (lv != "t,f,F,flags")
        throw domain_error("solution csv: expected header 't,f,F,flags', got '" +
                           std::string(lv) + "'");
      header_seen = true;
      continue;
    }
    const auto cols = detail::split(lv, ',');
    if (cols.size() != 4) throw domain_error("solution csv: row needs 4 columns");
    sol.grid.t.push_back(parse_num(detail::trim(cols[0]), "solution csv t"));
    sol.f.push_back(parse_num(detail::trim(cols[1]), "solution csv f"));
    sol.F.push_back(parse_num(detail::trim(cols[2]), "solution csv F"));
    parse_num(detail::trim(cols[3]), "solution csv flags");
  }
  if (!header_seen) throw domain_error("solution csv: missing header");
  const size_t n = sol.grid.t.size();
  if (n < 9) throw domain_error("solution csv: need at least 9 rows (8 steps)");

  // keep the parsed node times so rewriting reproduces the file, but insist
  // they form the uniform grid the solvers produce
  sol.grid.N = static_cast<int>(n) - 1;
  sol.grid.T = sol.grid.t.back();
  if (!(sol.grid.T > 0.0)) throw domain_error("solution csv: horizon must be positive");
  sol.grid.h = sol.grid.T / sol.grid.N;
  const double tol = 1e-9 * (1.0 + sol.grid.T);
  if (sol.grid.t.front() != 0.0) throw domain_error("solution csv: grid must start at 0");
  for (int i = 0; i <= sol.grid.N; ++i)
    if (std::fabs(sol.grid.t[i] - i * sol.grid.h) > tol)
      throw domain_error("solution csv: grid is not uniform");

  if (sol.F.front() != 0.0) throw domain_error("solution csv: F(0) must be 0");
  for (int i = 1; i <= sol.grid.N; ++i) {
    if (sol.F[i] < sol.F[i - 1]) throw domain_error("solution csv: F must be nondecreasing");
    if (sol.F[i] > 1.0 + 1e-12) throw domain_error("solution csv: F must stay at or below 1");
    if (sol.f[i] < 0.0) throw domain_error("solution csv: density must be nonnegative");
  }
  return sol;
}

inline FptSolution read_solution_csv(const std::string& path) {
  auto is = detail::open_in(path, "solution csv");
  return read_solution_csv(is);
}

// ---------------------------------------------------------------------------
// Monte Carlo CSV: estimate and standard error per node, no metadata row
// (seed and path count travel in the run diagnostics).

inline void write_mc_csv(std::ostream& os, const McEstimate& est) {
  os << "t,F_hat,stderr\n";
  for (int i = 0; i <= est.grid.N; ++i)
    os << num15(est.grid.t[i]) << ',' << num15(est.cdf_hat[i]) << ','
       << num15(est.std_error[i]) << "\n";
}

inline void write_mc_csv(const std::string& path, const McEstimate& est) {
  auto os = detail::open_out(path, "mc csv");
  write_mc_csv(os, est);
  if (!os) throw domain_error("mc csv: write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Boundary specs.  {"kind": ..., "params": {...}} for the builtins,
// {"kind": "table", "points": [[t, b], ...], "smoothness": ..., ...} for
// sampled boundaries, and {"kind": "transformed", "params": {alpha, gamma,
// beta}, "base": <spec>} so transformed boundaries round-trip exactly.

namespace detail {

inline double jnum(const nlohmann::json& j, const char* key) {
  if (!j.contains(key))
    throw domain_error(std::string("boundary spec: missing '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw domain_error(std::string("boundary spec: '") + key +
                                         "' must be a number");
  return v.get<double>();
}

inline Smoothness smoothness_from_string(const std::string& s) {
  if (s == "continuous") return Smoothness::continuous;
  if (s == "differentiable") return Smoothness::differentiable;
  if (s == "c1") return Smoothness::c1;
  throw domain_error("boundary spec: unknown smoothness '" + s + "'");
}

}  // namespace detail

inline TransformParams transform_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw domain_error("transform spec: expected a JSON object");
  TransformParams tp;
  if (j.contains("alpha")) tp.alpha = detail::jnum(j, "alpha");
  if (j.contains("gamma")) tp.gamma = detail::jnum(j, "gamma");
  if (j.contains("beta")) tp.beta = detail::jnum(j, "beta");
  validate(tp);
  return tp;
}

inline Boundary boundary_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw domain_error("boundary spec: expected an object with a 'kind' string");
  const std::string kind = j.at("kind").get<std::string>();
  const nlohmann::json params = j.value("params", nlohmann::json::object());

  if (kind == "constant") return make_constant(detail::jnum(params, "c"));
  if (kind == "linear")
    return make_linear(detail::jnum(params, "a"), detail::jnum(params, "slope"));
  if (kind == "sqrt")
    return make_sqrt(detail::jnum(params, "p"), detail::jnum(params, "q"));
  if (kind == "quadratic")
    return make_quadratic(detail::jnum(params, "p"), detail::jnum(params, "q"));

  if (kind == "table") {
    if (!j.contains("points") || !j.at("points").is_array())
      throw domain_error("boundary spec: table needs a 'points' array");
    std::vector<std::pair<double, double>> pts;
    for (const auto& e : j.at("points")) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw domain_error("boundary spec: table points must be [t, b] pairs");
      pts.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    Smoothness sm = Smoothness::c1;
    if (j.contains("smoothness")) {
      if (!j.at("smoothness").is_string())
        throw domain_error("boundary spec: smoothness must be a string");
      sm = detail::smoothness_from_string(j.at("smoothness").get<std::string>());
    }
    std::optional<double> lb;
    if (j.contains("lower_bound")) lb = detail::jnum(j, "lower_bound");
    const bool icb = j.value("in_class_B", false);
    return make_table(pts, sm, lb, icb);
  }

  if (kind == "transformed") {
    if (!j.contains("base"))
      throw domain_error("boundary spec: transformed needs a 'base' spec");
    return apply_transform(boundary_from_json(j.at("base")),
                           transform_from_json(params));
  }

  throw domain_error("boundary spec: unknown kind '" + kind + "'");
}

inline nlohmann::json wrap_transformed(const nlohmann::json& base,
                                       const TransformParams& tp) {
  return nlohmann::json{
      {"kind", "transformed"},
      {"params", {{"alpha", tp.alpha}, {"gamma", tp.gamma}, {"beta", tp.beta}}},
      {"base", base}};
}

inline nlohmann::json load_json(const std::string& path, const char* what) {
  auto is = detail::open_in(path, what);
  nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded())
    throw domain_error(std::string(what) + ": '" + path + "' is not valid JSON");
  return j;
}

inline Boundary read_boundary(const std::string& path) {
  return boundary_from_json(load_json(path, "boundary spec"));
}

// Widder atom lists: {"atoms": [[theta, weight], ...]}.
inline std::vector<WidderAtom> atoms_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.at("atoms").is_array())
    throw domain_error("atom spec: expected {\"atoms\": [[theta, weight], ...]}");
  std::vector<WidderAtom> atoms;
  for (const auto& e : j.at("atoms")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw domain_error("atom spec: atoms must be [theta, weight] pairs");
    atoms.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  if (atoms.empty()) throw domain_error("atom spec: empty atom list");
  return atoms;
}

inline std::vector<WidderAtom> read_atoms(const std::string& path) {
  return atoms_from_json(load_json(path, "atom spec"));
}

}  // namespace fpt::io

#endif
