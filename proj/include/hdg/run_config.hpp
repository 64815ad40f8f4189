#pragma once

// Command-line front end shared by tools/hdg and the CLI tests.

#include "hdg/mesh_io.hpp"
#include "hdg/verify/checks.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace hdg {

enum class Mode { solve, study, selftest };

struct RunConfig {
  Mode mode = Mode::solve;
  std::string case_name;  // empty: inferred from the mesh in solve mode
  std::string mesh_path;
  int grid = 0;  // 0: the case's own coarsest grid
  std::vector<int> k{1};
  int levels = 4;
  CaseParams params;
  std::string out_dir = ".";
  std::string dump_system;
  std::string save_mesh;
  bool verbose = false;
};

/// Rejected configuration; `code` is the process exit status.
struct ConfigError : Error {
  int code;
  ConfigError(const std::string& what, int code_ = 2) : Error(what), code(code_) {}
};

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::study: return "study";
    case Mode::selftest: return "selftest";
  }
  return "?";
}

/// Parses argv (and an optional key=value file given by --config). Flags take
/// precedence over the file, which takes precedence over defaults.
inline RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"HDG solver for coupled acoustic / elastic problems in the Laplace domain", "hdg"};
  std::string mode = "solve", s_text = "2,-1";
  app.add_option("mode", mode, "solve | study | selftest")->check(CLI::IsMember({"solve", "study", "selftest"}));
  std::string positional_case;
  app.add_option("case_name", positional_case, "manufactured case (positional form of --case)");
  app.add_option("--case", cfg.case_name, "acoustic61 | elastic62 | coupled63 | polyacoustic | polyelastic | polycoupled");
  app.add_option("--mesh", cfg.mesh_path, "hdgmesh v1 file to solve on");
  app.add_option("--grid", cfg.grid, "structured grid cells per unit length")->check(CLI::PositiveNumber);
  app.add_option("--k", cfg.k, "polynomial degree(s), comma separated")->delimiter(',')->check(CLI::Range(1, 6));
  app.add_option("--levels", cfg.levels, "refinement levels in a study")->check(CLI::PositiveNumber);
  app.add_option("--s", s_text, "Laplace parameter as re,im");
  app.add_option("--c", cfg.params.c, "sound speed");
  app.add_option("--rhoE", cfg.params.rhoE, "solid density");
  app.add_option("--rhoF", cfg.params.rhoF, "fluid density");
  app.add_option("--E", cfg.params.E, "Young's modulus");
  app.add_option("--nu", cfg.params.nu, "Poisson ratio");
  app.add_option("--tauE", cfg.params.tauE, "elastic stabilisation");
  app.add_option("--tauA", cfg.params.tauA, "acoustic stabilisation");
  app.add_option("--out", cfg.out_dir, "output directory")->envname("HDG_OUT_DIR");
  app.add_option("--dump-system", cfg.dump_system, "write the trace system as Matrix Market");
  app.add_option("--save-mesh", cfg.save_mesh, "write the mesh used by a solve");
  app.add_flag("--verbose,-v", cfg.verbose, "extra diagnostics");
  app.set_config("--config", "", "key=value parameter file");
  // keep "s=1,1" in a file as one value, as on the command line
  app.get_config_formatter_base()->arrayDelimiter(';');
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw ConfigError(app.help(), 0);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  if (!positional_case.empty()) {
    if (!cfg.case_name.empty() && cfg.case_name != positional_case)
      throw ConfigError("conflicting cases '" + positional_case + "' and '" + cfg.case_name + "'");
    cfg.case_name = positional_case;
  }
  cfg.mode = mode == "study" ? Mode::study : mode == "selftest" ? Mode::selftest : Mode::solve;
  try {
    cfg.params.s = parse_complex(s_text);
    (void)lame_from_young(cfg.params.E, cfg.params.nu);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!cfg.case_name.empty()) {
    const auto& names = case_names();
    if (std::find(names.begin(), names.end(), cfg.case_name) == names.end())
      throw ConfigError("unknown case '" + cfg.case_name + "'");
  }
  if (cfg.mode == Mode::study && cfg.case_name.empty()) throw ConfigError("study needs a case");
  if (cfg.mode == Mode::study && !cfg.mesh_path.empty()) throw ConfigError("study refines generated grids; --mesh is not allowed");
  if (cfg.mode == Mode::solve && cfg.case_name.empty() && cfg.mesh_path.empty())
    throw ConfigError("solve needs --case or --mesh");

  const CaseParams& p = cfg.params;
  if (!(p.s.real() > 0.0))
    throw ConfigError("rejected: Re(s) > 0 is required (s = " + format_complex(p.s) + ")");
  try {
    check_hypothesis(p.model());
  } catch (const Error& e) {
    throw ConfigError(std::string("rejected: ") + e.what());
  }
  return cfg;
}

namespace detail {

inline std::string infer_case(const Mesh& mesh) {
  const bool e = mesh.count(Subdomain::elastic) > 0, a = mesh.count(Subdomain::acoustic) > 0;
  return e && a ? "coupled63" : e ? "elastic62" : "acoustic61";
}

inline void print_errors(std::ostream& os, const ErrorRecord& e, bool verbose) {
  const auto item = [&](const char* name, double x) {
    if (std::isfinite(x)) os << "  err_" << name << " = " << fmt(x) << "\n";
  };
  item("sigma", e.sigma);
  item("u", e.u);
  item("gamma", e.gamma);
  item("q", e.q);
  item("v", e.v);
  item("uhat", e.uhat);
  item("vhat", e.vhat);
  if (verbose) item("qhat", e.qhat);
}

inline int run_solve(const RunConfig& cfg, std::ostream& out) {
  Mesh mesh;
  std::string name = cfg.case_name;
  if (!cfg.mesh_path.empty()) {
    mesh = read_mesh(cfg.mesh_path);
    if (name.empty()) name = infer_case(mesh);
  }
  const ManufacturedCase mc = make_case(name, cfg.params, cfg.k.front());
  if (cfg.mesh_path.empty()) {
    CaseGeometry g = mc.geometry;
    if (cfg.grid > 0) g.base_n = cfg.grid;
    mesh = g.mesh(0);
  } else {
    const bool e = mesh.count(Subdomain::elastic) > 0, a = mesh.count(Subdomain::acoustic) > 0;
    if (e != mc.elastic || a != mc.acoustic) throw Error("mesh subdomains do not match case '" + name + "'");
  }
  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.save_mesh.empty()) write_mesh(cfg.save_mesh, mesh);

  const int k = cfg.k.front();
  const ReferenceBasis rb = build_reference_basis(k);
  const ProblemData data = mc.data();
  const HdgSolution sol = solve_problem(mesh, rb, mc.params, data);
  if (!cfg.dump_system.empty()) dump_matrix_market(sol.system, cfg.dump_system);
  const ErrorRecord err = compute_errors(mesh, rb, mc.params, sol.fields, mc.exact);

  out << "case " << name << " k=" << k << " N=" << mesh.num_elements() << " h=" << fmt(mesh.h())
      << " unknowns=" << sol.system.dofs.size << " relative_residual=" << fmt(sol.solve.relative_residual) << "\n";
  print_errors(out, err, cfg.verbose);
  if (cfg.verbose) {
    const ConservationReport c = check_conservation(mesh, rb, mc.params, data, sol.fields);
    out << "  flux jumps E/A = " << fmt(c.elastic_jump) << " / " << fmt(c.acoustic_jump)
        << ", transmission = " << fmt(c.velocity_condition) << " / " << fmt(c.force_condition)
        << ", weak symmetry = " << fmt(c.weak_symmetry) << "\n";
  }

  nlohmann::json j;
  j["case"] = name;
  j["k"] = k;
  j["N"] = mesh.num_elements();
  j["h"] = mesh.h();
  j["unknowns"] = sol.system.dofs.size;
  j["relative_residual"] = sol.solve.relative_residual;
  const auto put = [&](const char* key, double x) { j[key] = std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  put("err_sigma", err.sigma);
  put("err_u", err.u);
  put("err_gamma", err.gamma);
  put("err_q", err.q);
  put("err_v", err.v);
  put("err_uhat", err.uhat);
  put("err_vhat", err.vhat);
  if (cfg.verbose) put("err_qhat", err.qhat);
  j["assumptions"] = mc.assumptions;
  std::ofstream(std::filesystem::path(cfg.out_dir) / "solve.json") << j.dump(2) << "\n";
  if (sol.solve.relative_residual > 1e-10) {
    out << "relative residual above 1e-10\n";
    return 1;
  }
  return 0;
}

inline int run_study_mode(const RunConfig& cfg, std::ostream& out) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path dir(cfg.out_dir);
  std::ofstream csv(dir / "report.csv");
  write_csv_header(csv, cfg.verbose);
  nlohmann::json all = nlohmann::json::array();
  for (const int k : cfg.k) {
    ManufacturedCase mc = make_case(cfg.case_name, cfg.params, k);
    if (cfg.grid > 0) mc.geometry.base_n = cfg.grid;
    StudyOptions opts;
    opts.levels = cfg.levels;
    opts.log = cfg.verbose ? &out : nullptr;
    const ConvergenceReport rep = run_study(mc, k, opts);
    write_csv_rows(csv, rep, cfg.verbose);
    all.push_back(report_json(rep, cfg.verbose));
    std::ofstream dat(dir / ("plot_" + rep.case_name + "_k" + std::to_string(k) + ".dat"));
    write_dat(dat, rep);
    out << rep.case_name << " k=" << k << " final e.o.c.:";
    for (const auto& v : report_variables()) {
      const double r = rep.final_rate(v);
      if (std::isfinite(r)) out << " " << v << "=" << fmt(r);
    }
    out << "\n";
  }
  std::ofstream(dir / "report.json") << all.dump(2) << "\n";
  out << "wrote " << (dir / "report.csv").string() << "\n";
  return 0;
}

} // namespace detail

/// Executes a parsed configuration. Returns the process exit status.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const ModelParams mp = cfg.params.model();
    out << "mode " << mode_name(cfg.mode) << ": s=" << format_complex(cfg.params.s) << " lambda=" << mp.lambda
        << " mu=" << mp.mu << "\n";
    switch (cfg.mode) {
      case Mode::solve: return detail::run_solve(cfg, out);
      case Mode::study: return detail::run_study_mode(cfg, out);
      case Mode::selftest: return run_selftest(out) ? 0 : 1;
    }
  } catch (const HypothesisError& e) {
    err << "rejected: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

/// Whole program: parse, then run.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  RunConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const ConfigError& e) {
    (e.code == 0 ? out : err) << e.what() << (e.code == 0 ? "" : "\n");
    return e.code;
  }
  return run(cfg, out, err);
}

} // namespace hdg
