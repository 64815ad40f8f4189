#include "hdg/verify/checks.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace hdg;

namespace {

constexpr double pi = std::numbers::pi;

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Cases, Names) {
  for (const auto& name : case_names()) EXPECT_NO_THROW(make_case(name));
  EXPECT_THROW(make_case("nope"), Error);
}

TEST(Cases, AcousticSource) {
  const ManufacturedCase mc = make_case("acoustic61");
  const Complex f = mc.acoustic_source(Vec2(pi / 2, pi / 2));
  EXPECT_NEAR(f.real(), 5.0, 1e-14);
  EXPECT_NEAR(f.imag(), -4.0, 1e-14);
  EXPECT_FALSE(mc.elastic);
  EXPECT_TRUE(mc.acoustic);
}

TEST(Cases, ElasticSpinVanishes) {
  const ManufacturedCase mc = make_case("elastic62");
  std::mt19937 gen(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(mc.exact.gamma(Vec2(u(gen), u(gen))).norm(), 0.0);
  // f = (2 pi^2 (2 mu + lambda) + rhoE s^2) u
  const ModelParams& p = mc.params;
  const Vec2 x(0.3, 0.7);
  const CVec2 expected = (2 * pi * pi * (2 * p.mu + p.lambda) + p.rhoE * p.s * p.s) * mc.exact.u(x);
  EXPECT_LE((mc.elastic_source(x) - expected).norm(), 1e-13);
}

TEST(Cases, CoupledInterfaceTerms) {
  const ManufacturedCase mc = make_case("coupled63");
  const ProblemData d = mc.data();
  const Vec2 x(1.0, 0.3), nE(1.0, 0.0), nA = -nE;
  // v_inc = -v, so -grad v_inc . n_A = q . n_A and the velocity condition needs -s u.n_E
  const CVec2 gi = d.incident_gradient(x), q = mc.exact.q(x);
  EXPECT_LE(std::abs(-(gi[0] * nA[0] + gi[1] * nA[1]) - (q[0] * nA[0] + q[1] * nA[1])), 1e-15);
  EXPECT_LE(std::abs(d.interface_scalar(x, nE) + mc.params.s * mc.exact.u(x)[0]), 1e-15);
  EXPECT_LE(std::abs(d.incident(x) + mc.exact.v(x)), 1e-15);
  EXPECT_LE((d.interface_vector(x, nE) + mc.exact.sigma(x) * nE.cast<Complex>()).norm(), 1e-15);
  EXPECT_EQ(mc.assumptions.size(), 3u);
}

TEST(Cases, StrongFormResiduals) {
  for (const auto& name : case_names())
    for (int k = 1; k <= 3; ++k) {
      const StrongResidual r = strong_residual(make_case(name, {}, k));
      EXPECT_LE(r.max(), 1e-10) << name << " k=" << k;
    }
}

TEST(Cases, ParametersAndOverrides) {
  EXPECT_EQ(parse_complex("2,-1"), Complex(2.0, -1.0));
  EXPECT_EQ(parse_complex("0.5"), Complex(0.5, 0.0));
  EXPECT_THROW(parse_complex("2;-1"), Error);
  EXPECT_THROW(parse_complex("a,b"), Error);
  CaseParams p;
  apply_override(p, "nu", "0.49999");
  apply_override(p, "s", "1,2");
  EXPECT_EQ(p.nu, 0.49999);
  EXPECT_EQ(p.s, Complex(1.0, 2.0));
  EXPECT_THROW(apply_override(p, "omega", "1"), Error);
  EXPECT_THROW(apply_override(p, "c", "fast"), Error);
  const ModelParams m = p.model();
  EXPECT_NEAR(m.lambda, 16666.4, 0.05);
}

TEST(Errors, TraceNormFormula) {
  EXPECT_NEAR(trace_norm({{0.5, 0.08}}), 0.2, 1e-15);
  EXPECT_NEAR(trace_norm({{0.5, 0.08}, {0.25, 0.04}}), std::sqrt(0.05), 1e-15);
}

TEST(Errors, EocFormula) {
  EXPECT_NEAR(eoc(0.1, 0.025, 0.2, 0.1), 2.0, 1e-14);
  for (double c : {1e-6, 3.0, 1e8})
    EXPECT_NEAR(eoc(c * 0.1, c * 0.025, 0.2, 0.1), eoc(0.1, 0.025, 0.2, 0.1), 1e-13);
  EXPECT_TRUE(std::isnan(eoc(0.0, 0.1, 0.2, 0.1)));
  EXPECT_TRUE(std::isnan(eoc(not_applicable, 0.1, 0.2, 0.1)));
}

TEST(Errors, ExactPolynomialSolutionsHaveNoError) {
  for (const std::string name : {"polyacoustic", "polyelastic", "polycoupled"})
    for (int k = 1; k <= 2; ++k) {
      const ManufacturedCase mc = make_case(name, {}, k);
      const Mesh m = mc.geometry.mesh(0);
      const ReferenceBasis rb = build_reference_basis(k);
      const HdgSolution sol = solve_problem(m, rb, mc.params, mc.data());
      const ErrorRecord e = compute_errors(m, rb, mc.params, sol.fields, mc.exact);
      for (double x : {e.sigma, e.u, e.gamma, e.q, e.v, e.uhat, e.vhat})
        if (std::isfinite(x)) {
          EXPECT_LE(x, 1e-10) << name << " k=" << k;
        }
    }
}

TEST(Errors, RecordMarksAbsentVariables) {
  const ManufacturedCase mc = make_case("acoustic61");
  const Mesh m = mc.geometry.mesh(0);
  const ReferenceBasis rb = build_reference_basis(1);
  const HdgSolution sol = solve_problem(m, rb, mc.params, mc.data());
  const ErrorRecord e = compute_errors(m, rb, mc.params, sol.fields, mc.exact);
  EXPECT_TRUE(std::isnan(e.sigma));
  EXPECT_TRUE(std::isnan(e.uhat));
  for (double x : {e.q, e.v, e.vhat, e.qhat}) {
    EXPECT_TRUE(std::isfinite(x));
    EXPECT_GT(x, 0.0);
  }
}

TEST(Study, AcousticRates) {
  const ConvergenceReport rep = run_study(make_case("acoustic61"), 1);
  ASSERT_EQ(rep.levels.size(), 4u);
  const double rv = rep.final_rate("v"), rt = rep.final_rate("vhat");
  EXPECT_GE(rv, 1.8);
  EXPECT_LE(rv, 2.3);
  EXPECT_GE(rt, 2.7);
  EXPECT_LE(rt, 3.3);
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    EXPECT_LT(rep.levels[i].errors.v, rep.levels[i - 1].errors.v);
    EXPECT_LT(rep.levels[i].errors.q, rep.levels[i - 1].errors.q);
    EXPECT_NEAR(rep.rate_by_count("v", i), rep.rate("v", i), 1e-10);
    EXPECT_LE(rep.levels[i].residual, 1e-10);
  }
  for (const auto& l : rep.levels) EXPECT_GE(l.theta.theta, 0.0);
}

TEST(Study, NearlyIncompressibleElasticity) {
  CaseParams p;
  p.nu = 0.49999;
  StudyOptions opts;
  opts.theta = false;
  const ConvergenceReport rep = run_study(make_case("elastic62", p), 2, opts);
  for (const std::string v : {"sigma", "u", "gamma"}) {
    EXPECT_GE(rep.final_rate(v), 2.7) << v;
    EXPECT_LE(rep.final_rate(v), 3.4) << v;
  }
}

TEST(Study, LargestBaseWithinBudget) {
  const ManufacturedCase mc = make_case("coupled63");
  const int n = largest_base_within(mc, 1, 3, 100000);
  EXPECT_EQ(n, 7);
  const ReferenceBasis rb = build_reference_basis(1);
  for (const auto& [base, fits] : {std::pair{n, true}, std::pair{n + 1, false}}) {
    CaseGeometry g = mc.geometry;
    g.base_n = 4 * base;
    EXPECT_EQ(number_traces(g.mesh(0), rb, mc.data()).size <= 100000, fits);
  }
  EXPECT_EQ(largest_base_within(mc, 1, 3, 10), 0);
}

TEST(Study, CoupledRates) {
  // the annulus needs fine grids before the spin leaves its pre-asymptotic range
  ManufacturedCase mc = make_case("coupled63");
  StudyOptions opts;
  opts.theta = false;
  opts.levels = 3;
  mc.geometry.base_n = largest_base_within(mc, 1, opts.levels, 100000);
  const ConvergenceReport rep = run_study(mc, 1, opts);
  for (const std::string v : {"sigma", "u", "gamma", "q", "v"}) {
    EXPECT_GE(rep.final_rate(v), 1.7) << v;
    EXPECT_LE(rep.final_rate(v), 2.4) << v;
  }
  for (const std::string v : {"uhat", "vhat"}) EXPECT_GE(rep.final_rate(v), 2.6) << v;
}

TEST(Study, CsvAndJsonOutput) {
  StudyOptions opts;
  opts.levels = 3;
  const ConvergenceReport rep = run_study(make_case("acoustic61"), 1, opts);
  std::ostringstream a, b;
  write_csv_header(a);
  write_csv_rows(a, rep);
  write_csv_header(b);
  write_csv_rows(b, run_study(make_case("acoustic61"), 1, opts));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(count_lines(a.str()), 4);
  std::istringstream in(a.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header.rfind("case,k,level,N,h,err_sigma", 0), 0u);
  EXPECT_EQ(first.rfind("acoustic61,1,0,8,", 0), 0u);
  EXPECT_NE(first.find(",,"), std::string::npos);  // absent sigma
  const nlohmann::json j = report_json(rep);
  EXPECT_EQ(j["levels"].size(), 3u);
  EXPECT_TRUE(j["levels"][0]["err_sigma"].is_null());
  EXPECT_TRUE(j["levels"][1]["eoc_v"].is_number());
  EXPECT_EQ(j["params"]["s"], "2,-1");
  std::ostringstream dat;
  write_dat(dat, rep);
  EXPECT_EQ(count_lines(dat.str()), 5);
}

TEST(Study, RejectsHypothesisViolation) {
  CaseParams p;
  p.tauA = -1;
  EXPECT_THROW(run_study(make_case("acoustic61", p), 1), HypothesisError);
}

TEST(Checks, FormatLine) {
  EXPECT_EQ(format_check({3, "x", true, " ok"}), "PASS [ 3] x: ok");
  EXPECT_EQ(format_check({10, "y", false, ""}), "FAIL [10] y:");
  EXPECT_EQ(acceptance_checks().size(), 10u);
  EXPECT_THROW(run_check(11), Error);
}
