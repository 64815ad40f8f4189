#pragma once

// Convergence studies over uniformly refined meshes, with CSV / JSON / .dat output.

#include "hdg/verify/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace hdg {

struct LevelResult {
  int level = 0;
  int elements = 0;
  double h = 0.0;
  int unknowns = 0;
  double residual = 0.0;
  double seconds = 0.0;
  ErrorRecord errors;
  ThetaReport theta;
};

inline const std::vector<std::string>& report_variables() {
  static const std::vector<std::string> v{"sigma", "u", "gamma", "q", "v", "uhat", "vhat", "theta"};
  return v;
}

inline double variable_value(const LevelResult& r, const std::string& name) {
  const ErrorRecord& e = r.errors;
  if (name == "sigma") return e.sigma;
  if (name == "u") return e.u;
  if (name == "gamma") return e.gamma;
  if (name == "q") return e.q;
  if (name == "v") return e.v;
  if (name == "uhat") return e.uhat;
  if (name == "vhat") return e.vhat;
  if (name == "qhat") return e.qhat;
  if (name == "theta") return r.theta.theta;
  throw Error("unknown report variable '" + name + "'");
}

struct ConvergenceReport {
  std::string case_name;
  int k = 0;
  CaseParams settings;
  std::vector<std::string> assumptions;
  std::vector<LevelResult> levels;

  /// e.o.c. between level i-1 and i (by h).
  double rate(const std::string& var, std::size_t i) const {
    if (i == 0 || i >= levels.size()) return not_applicable;
    return eoc(variable_value(levels[i - 1], var), variable_value(levels[i], var), levels[i - 1].h, levels[i].h);
  }
  /// Same rate measured with the element count, h ~ N^(-1/2).
  double rate_by_count(const std::string& var, std::size_t i) const {
    if (i == 0 || i >= levels.size()) return not_applicable;
    return eoc(variable_value(levels[i - 1], var), variable_value(levels[i], var),
               std::pow(levels[i - 1].elements, -0.5), std::pow(levels[i].elements, -0.5));
  }
  double final_rate(const std::string& var) const { return rate(var, levels.size() - 1); }
};

struct StudyOptions {
  int levels = 4;
  bool theta = true;
  std::ostream* log = nullptr;
};

inline ConvergenceReport run_study(const ManufacturedCase& mc, int k, const StudyOptions& opts = {}) {
  if (opts.levels < 1) throw Error("a study needs at least one level");
  check_hypothesis(mc.params);
  const ReferenceBasis rb = build_reference_basis(k);
  const ProblemData data = mc.data();
  ConvergenceReport rep;
  rep.case_name = mc.name;
  rep.k = k;
  rep.settings = mc.settings;
  rep.assumptions = mc.assumptions;
  Mesh mesh = mc.geometry.mesh(0);
  for (int level = 0; level < opts.levels; ++level) {
    if (level > 0) mesh = refine(mesh);
    const auto t0 = std::chrono::steady_clock::now();
    LevelResult lr;
    lr.level = level;
    lr.elements = mesh.num_elements();
    lr.h = mesh.h();
    try {
      const HdgSolution sol = solve_problem(mesh, rb, mc.params, data);
      lr.unknowns = sol.system.dofs.size;
      lr.residual = sol.solve.relative_residual;
      lr.errors = compute_errors(mesh, rb, mc.params, sol.fields, mc.exact);
      if (opts.theta) lr.theta = compute_theta(mc.exact, mesh, rb, mc.params);
      else lr.theta.theta = not_applicable;
    } catch (const HypothesisError&) {
      throw;
    } catch (const SingularSystemError& e) {
      throw SingularSystemError(mc.name + " k=" + std::to_string(k) + " level " + std::to_string(level) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(mc.name + " k=" + std::to_string(k) + " level " + std::to_string(level) + ": " + e.what());
    }
    lr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts.log) {
      char line[256];
      std::snprintf(line, sizeof line, "%s k=%d level=%d N=%d h=%.4e unknowns=%d residual=%.2e (%.2fs)\n",
                    mc.name.c_str(), k, level, lr.elements, lr.h, lr.unknowns, lr.residual, lr.seconds);
      *opts.log << line;
    }
    rep.levels.push_back(lr);
  }
  return rep;
}

/// Largest base grid whose finest study level keeps the skeleton system within `max_unknowns`; 0 if none does.
inline int largest_base_within(const ManufacturedCase& mc, int k, int levels, int max_unknowns) {
  const ReferenceBasis rb = build_reference_basis(k);
  const ProblemData data = mc.data();
  int best = 0;
  for (int n = 1;; ++n) {
    CaseGeometry g = mc.geometry;
    g.base_n = n << (levels - 1);
    if (number_traces(g.mesh(0), rb, data).size > max_unknowns) return best;
    best = n;
  }
}

namespace detail {

inline std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

} // namespace detail

inline std::string format_complex(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g", z.real(), z.imag());
  return buf;
}

inline void write_csv_header(std::ostream& os, bool with_qhat = false) {
  os << "case,k,level,N,h";
  for (const auto& v : report_variables()) os << "," << (v == "theta" ? "theta" : "err_" + v);
  if (with_qhat) os << ",err_qhat";
  for (const auto& v : report_variables()) os << ",eoc_" << v;
  if (with_qhat) os << ",eoc_qhat";
  os << "\n";
}

inline void write_csv_rows(std::ostream& os, const ConvergenceReport& rep, bool with_qhat = false) {
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const LevelResult& l = rep.levels[i];
    os << rep.case_name << "," << rep.k << "," << l.level << "," << l.elements << "," << detail::fmt(l.h);
    for (const auto& v : report_variables()) os << "," << detail::fmt(variable_value(l, v));
    if (with_qhat) os << "," << detail::fmt(l.errors.qhat);
    for (const auto& v : report_variables()) os << "," << detail::fmt(rep.rate(v, i));
    if (with_qhat) os << "," << detail::fmt(rep.rate("qhat", i));
    os << "\n";
  }
}

inline nlohmann::json report_json(const ConvergenceReport& rep, bool with_qhat = false) {
  using nlohmann::json;
  const auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json j;
  j["case"] = rep.case_name;
  j["k"] = rep.k;
  const CaseParams& p = rep.settings;
  j["params"] = {{"s", format_complex(p.s)}, {"c", p.c},     {"rhoE", p.rhoE}, {"rhoF", p.rhoF},
                 {"E", p.E},                 {"nu", p.nu},   {"tauE", p.tauE}, {"tauA", p.tauA}};
  j["assumptions"] = rep.assumptions;
  json levels = json::array();
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    const LevelResult& l = rep.levels[i];
    json row = {{"level", l.level}, {"N", l.elements}, {"h", l.h}, {"unknowns", l.unknowns},
                {"relative_residual", l.residual}};
    for (const auto& v : report_variables()) {
      row[v == "theta" ? "theta" : "err_" + v] = num(variable_value(l, v));
      row["eoc_" + v] = num(rep.rate(v, i));
      row["eoc_N_" + v] = num(rep.rate_by_count(v, i));
    }
    if (with_qhat) {
      row["err_qhat"] = num(l.errors.qhat);
      row["eoc_qhat"] = num(rep.rate("qhat", i));
    }
    levels.push_back(row);
  }
  j["levels"] = levels;
  return j;
}

/// Whitespace-separated columns for gnuplot; empty values become NaN.
inline void write_dat(std::ostream& os, const ConvergenceReport& rep) {
  os << "# case " << rep.case_name << " k " << rep.k << "\n# level N h";
  for (const auto& v : report_variables()) os << " " << v;
  os << "\n";
  for (const LevelResult& l : rep.levels) {
    os << l.level << " " << l.elements << " " << detail::fmt(l.h);
    for (const auto& v : report_variables()) {
      const std::string s = detail::fmt(variable_value(l, v));
      os << " " << (s.empty() ? "nan" : s);
    }
    os << "\n";
  }
}

} // namespace hdg
