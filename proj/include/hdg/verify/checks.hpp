#pragma once

// Acceptance checks. Each returns one line's worth of outcome; the rate checks
// run full studies and are slow, the rest take seconds.

#include "hdg/verify/oracle.hpp"
#include "hdg/verify/study.hpp"

#include <chrono>
#include <sstream>

namespace hdg {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string num(double x, int digits = 3) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

/// Random triangle in [0,1]^2 with all angles above 15 degrees.
inline std::array<Vec2, 3> random_triangle(std::mt19937& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    std::array<Vec2, 3> t{Vec2(u(gen), u(gen)), Vec2(u(gen), u(gen)), Vec2(u(gen), u(gen))};
    double min_angle = 180.0;
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = t[(i + 1) % 3] - t[i], b = t[(i + 2) % 3] - t[i];
      const double ang = std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
      min_angle = std::min(min_angle, ang * 180.0 / std::numbers::pi);
    }
    const double cross = (t[1] - t[0])[0] * (t[2] - t[0])[1] - (t[1] - t[0])[1] * (t[2] - t[0])[0];
    if (min_angle > 15.0 && std::abs(cross) > 0.02) {
      if (cross < 0) std::swap(t[1], t[2]);
      return t;
    }
  }
}

/// Single-triangle mesh (all faces Dirichlet) for element-level tests.
inline Mesh single_triangle_mesh(const std::array<Vec2, 3>& t, Subdomain domain) {
  return assemble_mesh({t[0], t[1], t[2]}, {Triangle{{0, 1, 2}, domain}}, {});
}

/// Random smooth complex scalar field: sum of three plane waves.
inline ScalarField random_scalar_field(std::mt19937& gen) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::array<Complex, 3> amp;
  std::array<Vec2, 3> wave;
  for (int i = 0; i < 3; ++i) {
    amp[i] = Complex(u(gen), u(gen));
    wave[i] = Vec2(u(gen), u(gen));
  }
  return [amp, wave](const Vec2& x) {
    Complex s = 0.0;
    for (int i = 0; i < 3; ++i) s += amp[i] * std::exp(Complex(0.3 * wave[i][0] * x[0], wave[i].dot(x)));
    return s;
  };
}

inline VectorField random_vector_field(std::mt19937& gen) {
  const ScalarField a = random_scalar_field(gen), b = random_scalar_field(gen);
  return [a, b](const Vec2& x) { return CVec2(a(x), b(x)); };
}

inline TensorField random_tensor_field(std::mt19937& gen) {
  std::array<ScalarField, 4> c;
  for (auto& f : c) f = random_scalar_field(gen);
  return [c](const Vec2& x) {
    CMat2 m;
    m << c[0](x), c[1](x), c[2](x), c[3](x);
    return m;
  };
}

inline bool in_window(double rate, int k) { return rate >= k + 0.7 && rate <= k + 1.4; }

/// Checks the final-pair rates of a report; appends a summary to `out`.
inline bool rates_ok(const ConvergenceReport& rep, const std::vector<std::string>& volume,
                     const std::vector<std::string>& traces, std::ostringstream& out) {
  bool ok = true;
  const int k = rep.k;
  out << " k=" << k << "[";
  for (const auto& v : volume) {
    const double r = rep.final_rate(v);
    const bool good = in_window(r, k);
    ok = ok && good;
    out << v << "=" << num(r) << (good ? "" : "!") << " ";
  }
  for (const auto& v : traces) {
    const double r = rep.final_rate(v);
    const bool good = r >= k + 1.6;
    ok = ok && good;
    out << v << "=" << num(r) << (good ? "" : "!") << " ";
  }
  out << "]";
  return ok;
}

inline CheckResult study_check(int id, const std::string& name, const std::vector<ManufacturedCase>& cases,
                               const std::vector<std::string>& volume, const std::vector<std::string>& traces,
                               double budget_per_k, int max_unknowns = 0) {
  CheckResult r{id, name, true, ""};
  std::ostringstream out;
  for (int k = 1; k <= 3; ++k) {
    const Timer timer;
    for (ManufacturedCase mc : cases) {
      StudyOptions opts;
      opts.theta = false;
      if (max_unknowns > 0) {
        // three dyadic levels ending on the finest grid the unknown budget allows
        opts.levels = 3;
        mc.geometry.base_n = std::max(1, largest_base_within(mc, k, opts.levels, max_unknowns));
      }
      const ConvergenceReport rep = run_study(mc, k, opts);
      if (cases.size() > 1) out << " " << mc.name << "(nu=" << mc.settings.nu << ")";
      if (max_unknowns > 0) out << " base=" << mc.geometry.base_n << " N=" << rep.levels.back().elements;
      r.passed = rates_ok(rep, volume, traces, out) && r.passed;
      if (max_unknowns > 0 && rep.levels.back().unknowns > max_unknowns) {
        r.passed = false;
        out << " unknowns=" << rep.levels.back().unknowns << "!";
      }
    }
    const double t = timer.seconds();
    out << " t=" << num(t) << "s";
    if (t > budget_per_k) {
      r.passed = false;
      out << "(over " << budget_per_k << "s)";
    }
  }
  r.detail = out.str();
  return r;
}

} // namespace detail

inline CheckResult check_acoustic_rates() {
  return detail::study_check(1, "acoustic study rates", {make_case("acoustic61")}, {"v", "q"}, {"vhat"}, 120.0);
}

inline CheckResult check_elastic_rates() {
  CaseParams incompressible;
  incompressible.nu = 0.49999;
  return detail::study_check(2, "elastic study rates (nu=0.3, 0.49999)",
                             {make_case("elastic62"), make_case("elastic62", incompressible)},
                             {"sigma", "u", "gamma"}, {"uhat"}, 180.0);
}

inline CheckResult check_coupled_rates() {
  return detail::study_check(3, "coupled study rates", {make_case("coupled63")},
                             {"sigma", "u", "gamma", "q", "v"}, {"uhat", "vhat"}, 300.0, 100000);
}

inline CheckResult check_theta_decay() {
  CheckResult r{4, "projection error Theta decay", true, ""};
  std::ostringstream out;
  for (const std::string name : {"acoustic61", "elastic62"}) {
    const ManufacturedCase mc = make_case(name);
    out << " " << name;
    for (int k = 1; k <= 3; ++k) {
      const ReferenceBasis rb = build_reference_basis(k);
      Mesh mesh = mc.geometry.mesh(0);
      double prev = 0.0, prev_h = 0.0, rate = 0.0;
      double residual = 0.0;
      for (int level = 0; level < 4; ++level) {
        if (level > 0) mesh = refine(mesh);
        const ThetaReport t = compute_theta(mc.exact, mesh, rb, mc.params);
        residual = std::max(residual, t.max_residual);
        if (level > 0) rate = eoc(prev, t.theta, prev_h, mesh.h());
        prev = t.theta;
        prev_h = mesh.h();
      }
      const bool ok = detail::in_window(rate, k) && residual <= 1e-12;
      r.passed = r.passed && ok;
      out << " k=" << k << ":" << detail::num(rate) << (ok ? "" : "!");
    }
  }
  r.detail = out.str();
  return r;
}

inline CheckResult check_oracle_equivalence() {
  CheckResult r{5, "condensed vs monolithic solve", true, ""};
  std::ostringstream out;
  double worst = 0.0;
  for (const std::string name : {"acoustic61", "coupled63"}) {
    const ManufacturedCase mc = make_case(name);
    const Mesh mesh = mc.geometry.mesh(0);
    for (int k = 1; k <= 2; ++k) {
      const ReferenceBasis rb = build_reference_basis(k);
      const ProblemData data = mc.data();
      const HdgSolution hdg = solve_problem(mesh, rb, mc.params, data);
      const FieldSolution mono = solve_monolithic(mesh, rb, mc.params, data);
      const double diff = solution_difference(mono, hdg.fields);
      worst = std::max(worst, diff);
      out << " " << name << "(N=" << mesh.num_elements() << ",k=" << k << ")=" << detail::num(diff);
    }
  }
  r.passed = worst <= 1e-9;
  r.detail = out.str();
  return r;
}

inline CheckResult check_bubble_space() {
  CheckResult r{6, "bubble space properties and dim V(K)", true, ""};
  std::mt19937 gen(2024);
  double max_div = 0.0, max_trace = 0.0;
  std::ostringstream out;
  for (int k = 1; k <= 4; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const int expected = 2 * (k + 1) * (k + 2) + (k + 1);
    int bad_rank = 0;
    for (int t = 0; t < 20; ++t) {
      const auto tri = detail::random_triangle(gen);
      const StressBasis sb = build_stress_basis(rb, tri);
      for (int n = 0; n < sb.bubble_dim(); ++n) {
        for (int i = 0; i < 2; ++i)
          max_div = std::max(max_div, sb.divergence[i].col(sb.tensor_dim + n).cwiseAbs().maxCoeff());
        for (int j = 0; j < 3; ++j) {
          const Vec2 a = tri[j], b = tri[(j + 1) % 3];
          const Vec2 normal = Vec2(b[1] - a[1], a[0] - b[0]).normalized();
          for (std::size_t q = 0; q < rb.edge.size(); ++q) {
            const Vec2 x = a + rb.edge.points[q] * (b - a);
            max_trace = std::max(max_trace, (sb.bubble(n, x) * normal).cwiseAbs().maxCoeff());
          }
        }
      }
      if (stress_gram_rank(rb, sb, tri) != expected) ++bad_rank;
    }
    out << " k=" << k << ":dim=" << expected << (bad_rank ? " rank failures " + std::to_string(bad_rank) : "");
    r.passed = r.passed && bad_rank == 0;
  }
  r.passed = r.passed && max_div <= 1e-12 && max_trace <= 1e-12;
  out << " max|div|=" << detail::num(max_div) << " max|Bn|=" << detail::num(max_trace);
  r.detail = out.str();
  return r;
}

inline CheckResult check_projection_residuals() {
  CheckResult r{7, "projection defining equations", true, ""};
  std::mt19937 gen(99);
  double worst_a = 0, worst_e = 0, worst_s = 0, worst_f = 0;
  for (int k = 1; k <= 4; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    ModelParams params;
    params.tauA = 1.0 + gen() % 3;
    params.tauE = 0.5 + gen() % 2;
    for (int t = 0; t < 10; ++t) {
      const auto tri = detail::random_triangle(gen);
      const Mesh ma = detail::single_triangle_mesh(tri, Subdomain::acoustic);
      const Mesh me = detail::single_triangle_mesh(tri, Subdomain::elastic);
      const ElementSpaces ea = build_element_spaces(ma, 0, rb);
      const ElementSpaces ee = build_element_spaces(me, 0, rb);
      worst_a = std::max(worst_a, project_acoustic(ea, detail::random_vector_field(gen),
                                                   detail::random_scalar_field(gen), params).residual);
      worst_e = std::max(worst_e, project_elastic(ee, detail::random_tensor_field(gen),
                                                  detail::random_vector_field(gen), params).residual);
      worst_s = std::max(worst_s, project_spin(ee, detail::random_tensor_field(gen)).residual);
      for (int f = 0; f < 3; ++f)
        worst_f = std::max(worst_f, project_face(ma, f, rb, detail::random_scalar_field(gen)).residual);
    }
  }
  const double worst = std::max({worst_a, worst_e, worst_s, worst_f});
  r.passed = worst <= 1e-12;
  r.detail = " Pi_A=" + detail::num(worst_a) + " Pi_E=" + detail::num(worst_e) + " Pi=" +
             detail::num(worst_s) + " P_M=" + detail::num(worst_f);
  return r;
}

inline CheckResult check_uniqueness() {
  CheckResult r{8, "homogeneous problem and solvability hypothesis", true, ""};
  std::ostringstream out;
  const ManufacturedCase mc = make_case("coupled63");
  const Mesh mesh = mc.geometry.mesh(1);
  for (int k = 1; k <= 2; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const HdgSolution sol = solve_problem(mesh, rb, mc.params, ProblemData{});
    const double norm = sol.solve.traces.norm();
    const DiscreteEnergy en = discrete_energy(mesh, rb, mc.params, sol.fields);
    const bool ok = norm <= 1e-12 && en.elastic <= 1e-20 && en.acoustic <= 1e-20;
    r.passed = r.passed && ok;
    out << " k=" << k << ":|x|=" << detail::num(norm) << " E_E^2=" << detail::num(en.elastic)
        << " E_A^2=" << detail::num(en.acoustic);
  }
  // Re(s tau) <= 0 must be refused before anything is assembled
  int rejected = 0;
  const std::array<std::pair<Complex, double>, 3> bad{{{Complex(-1.0, 0.0), 1.0}, {Complex(2.0, -1.0), -1.0},
                                                        {Complex(0.0, 3.0), 1.0}}};
  const ReferenceBasis rb = build_reference_basis(1);
  for (const auto& [s, tau] : bad) {
    ModelParams p = mc.params;
    p.s = s;
    p.tauA = tau;
    try {
      solve_problem(mesh, rb, p, mc.data());
    } catch (const HypothesisError&) {
      ++rejected;
    }
  }
  r.passed = r.passed && rejected == static_cast<int>(bad.size());
  out << " rejected " << rejected << "/" << bad.size();
  r.detail = out.str();
  return r;
}

inline CheckResult check_consistency() {
  CheckResult r{9, "polynomial solutions reproduced", true, ""};
  std::ostringstream out;
  double worst = 0.0;
  for (const std::string name : {"polyacoustic", "polyelastic", "polycoupled"}) {
    for (int k = 1; k <= 3; ++k) {
      const ManufacturedCase mc = make_case(name, {}, k);
      const Mesh mesh = mc.geometry.mesh(0);
      const ReferenceBasis rb = build_reference_basis(k);
      const HdgSolution sol = solve_problem(mesh, rb, mc.params, mc.data());
      const ErrorRecord err = compute_errors(mesh, rb, mc.params, sol.fields, mc.exact);
      const ErrorRecord ref = exact_norms(mesh, rb, mc.exact);
      const auto rel = [](double e, double n) { return std::isfinite(e) ? e / std::max(n, 1e-300) : 0.0; };
      const double m = std::max({rel(err.sigma, ref.sigma), rel(err.u, ref.u), rel(err.gamma, std::max(ref.gamma, ref.u)),
                                 rel(err.q, ref.q), rel(err.v, ref.v), rel(err.uhat, ref.uhat), rel(err.vhat, ref.vhat)});
      worst = std::max(worst, m);
    }
    out << " " << name;
  }
  r.passed = worst <= 1e-10;
  out << " k=1..3 max relative error " << detail::num(worst);
  r.detail = out.str();
  return r;
}

inline CheckResult check_conservation_transmission() {
  CheckResult r{10, "flux single-valuedness and transmission", true, ""};
  ConservationReport worst;
  for (const std::string name : {"acoustic61", "elastic62", "coupled63"}) {
    const ManufacturedCase mc = make_case(name);
    const Mesh mesh = mc.geometry.mesh(1);
    for (int k = 1; k <= 3; ++k) {
      const ReferenceBasis rb = build_reference_basis(k);
      const ProblemData data = mc.data();
      const HdgSolution sol = solve_problem(mesh, rb, mc.params, data);
      const ConservationReport c = check_conservation(mesh, rb, mc.params, data, sol.fields);
      worst.elastic_jump = std::max(worst.elastic_jump, c.elastic_jump);
      worst.acoustic_jump = std::max(worst.acoustic_jump, c.acoustic_jump);
      worst.velocity_condition = std::max(worst.velocity_condition, c.velocity_condition);
      worst.force_condition = std::max(worst.force_condition, c.force_condition);
      worst.weak_symmetry = std::max(worst.weak_symmetry, c.weak_symmetry);
    }
  }
  r.passed = std::max({worst.elastic_jump, worst.acoustic_jump, worst.velocity_condition, worst.force_condition,
                       worst.weak_symmetry}) <= 1e-10;
  r.detail = " jumpE=" + detail::num(worst.elastic_jump) + " jumpA=" + detail::num(worst.acoustic_jump) +
             " velocity=" + detail::num(worst.velocity_condition) + " force=" + detail::num(worst.force_condition) +
             " symmetry=" + detail::num(worst.weak_symmetry);
  return r;
}

inline const std::vector<std::function<CheckResult()>>& acceptance_checks() {
  static const std::vector<std::function<CheckResult()>> checks{
      check_acoustic_rates,      check_elastic_rates,  check_coupled_rates, check_theta_decay,
      check_oracle_equivalence,  check_bubble_space,   check_projection_residuals,
      check_uniqueness,          check_consistency,    check_conservation_transmission};
  return checks;
}

/// Runs one check, turning exceptions into a failure line.
inline CheckResult run_check(int id) {
  const auto& checks = acceptance_checks();
  if (id < 1 || id > static_cast<int>(checks.size())) throw Error("no check " + std::to_string(id));
  try {
    return checks[id - 1]();
  } catch (const std::exception& e) {
    return CheckResult{id, "check " + std::to_string(id), false, std::string(" exception: ") + e.what()};
  }
}

inline std::string format_check(const CheckResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "%s [%2d] ", r.passed ? "PASS" : "FAIL", r.id);
  return head + r.name + ":" + r.detail;
}

/// Property suites behind `hdg selftest`: strong-form self-checks of every
/// case plus the fast acceptance checks.
inline bool run_selftest(std::ostream& os) {
  bool ok = true;
  for (const auto& name : case_names()) {
    const ManufacturedCase mc = make_case(name, {}, 2);
    const StrongResidual sr = strong_residual(mc);
    const bool pass = sr.max() <= 1e-10;
    ok = ok && pass;
    os << (pass ? "PASS" : "FAIL") << " strong form " << name << ": " << detail::num(sr.max()) << "\n";
  }
  for (int id = 5; id <= 10; ++id) {
    const CheckResult r = run_check(id);
    ok = ok && r.passed;
    os << format_check(r) << "\n";
  }
  return ok;
}

} // namespace hdg
